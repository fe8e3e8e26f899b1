import numpy as np
import pytest

from isscert.exceptions import InfeasibleException, SolverException
from isscert.sdp import (FEASIBLE, INFEASIBLE, NUMERICAL_FAILURE, OPTIMAL, SdpProblem,
                         SdpSolution, SolverConfig, check_solution, solve, solve_maxdet)


@pytest.fixture
def config():
    return SolverConfig(eq_tol=1e-5, psd_tol=1e-6)


@pytest.fixture
def bounded():
    problem = SdpProblem('bounded')
    s = problem.add_scalar('s', lower=1.0)
    problem.add_objective({s: 1.0})
    return problem


@pytest.fixture
def correlation():
    """2x2 PSD block with unit diagonal"""
    problem = SdpProblem('correlation')
    X = problem.add_block(2, name='X')
    problem.add_equality({problem.entry(X, 0, 0): 1.0}, 1.0)
    problem.add_equality({problem.entry(X, 1, 1): 1.0}, 1.0)
    return problem


def test_duplicate_names():
    problem = SdpProblem()
    problem.add_scalar('a')
    with pytest.raises(ValueError):
        problem.add_block(2, name='a')
    with pytest.raises(ValueError):
        problem.add_block(0)


def test_unknown_key_rejected(bounded):
    with pytest.raises(KeyError):
        bounded.add_equality({'missing': 1.0})
    with pytest.raises(KeyError):
        bounded.add_equality({None: 1.0})


def test_entry_is_upper_triangular():
    assert SdpProblem.entry('G', 2, 0) == ('G', 0, 2)


def test_stats(correlation):
    correlation.add_scalar('t')
    stats = correlation.stats()
    assert stats['variables'] == 4
    assert stats['equalities'] == 2
    assert stats['block_sizes'] == [2]


def test_dump(correlation):
    lines = correlation.dump().splitlines()
    assert lines[0] == '# correlation'
    assert '1 1 1 1 1' in lines
    assert '2 1 2 2 1' in lines


def test_bounded_scalar(bounded, config):
    solution = solve(bounded, config)
    assert solution.ok
    assert solution.value('s') == pytest.approx(1.0, abs=1e-5)


def test_infeasible(bounded, config):
    bounded.add_equality({'s': 1.0}, 0.0)
    solution = solve(bounded, config)
    assert solution.status == INFEASIBLE
    with pytest.raises(InfeasibleException):
        solution.raise_for_status('bounded')


def test_block_objective(correlation, config):
    correlation.add_objective({correlation.entry('X', 0, 1): 1.0})
    solution = solve(correlation, config)
    assert solution.status in (OPTIMAL, FEASIBLE)
    assert solution.value(('X', 0, 1)) == pytest.approx(-1.0, abs=1e-4)


def test_affine_inequality(bounded, config):
    # s - 3 >= 0
    bounded.add_affine_inequality({'s': 1.0, None: -3.0})
    solution = solve(bounded, config)
    assert solution.value('s') == pytest.approx(3.0, abs=1e-4)


def test_maxdet(config):
    problem = SdpProblem('trace')
    X = problem.add_block(2, name='X')
    problem.add_equality({problem.entry(X, 0, 0): 1.0, problem.entry(X, 1, 1): 1.0}, 2.0)
    problem.add_equality({problem.entry(X, 0, 0): 1.0}, 1.5, label='skew')
    problem.set_maxdet(X)
    solution = solve_maxdet(problem, config)
    assert solution.ok
    np.testing.assert_allclose(solution.block_values['X'], np.diag([1.5, 0.5]), atol=1e-4)
    history = solution.stats['logdet_history']
    assert all(b >= a - 1e-9 for a, b in zip(history, history[1:]))


def test_maxdet_needs_block(bounded):
    with pytest.raises(ValueError):
        solve_maxdet(bounded)


def test_check_solution(correlation, config):
    good, residuals = check_solution(correlation, {}, {'X': np.eye(2)}, config)
    assert good
    assert residuals['equality'] == 0.0
    bad, residuals = check_solution(correlation, {}, {'X': np.diag([1.0, -1.0])}, config)
    assert not bad
    assert residuals['psd_min_eig'] < 0


def test_numerical_failure_raises():
    with pytest.raises(SolverException):
        SdpSolution(NUMERICAL_FAILURE, message='stalled').raise_for_status()


def test_repeated_solves_agree(correlation, config):
    correlation.add_objective({correlation.entry('X', 0, 1): 1.0})
    first = solve(correlation, config)
    second = solve(correlation, config)
    assert first.status == second.status
    assert abs(first.objective_value - second.objective_value) <= 1e-8
    np.testing.assert_allclose(first.block_values['X'], second.block_values['X'], atol=1e-8)
