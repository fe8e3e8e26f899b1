import numpy as np
import pytest

from isscert.consistency import (build_sample_quadrics, membership_ellipsoid, membership_exact,
                                 membership_margin, overapproximation_problem, rank_check,
                                 solve_overapproximation)
from isscert.data import run_experiment
from isscert.models import EllipsoidModel, SampleQuadric


def test_true_pair_satisfies_every_quadric(dataset, base_library, system):
    zeta = system.AB.T
    for quad in build_sample_quadrics(dataset, base_library):
        assert np.linalg.eigvalsh(quad.value(zeta))[-1] <= 1e-9


def test_quadric_from_sample():
    quad = SampleQuadric.from_sample([1.0, 2.0], [3.0], 0.5)
    np.testing.assert_allclose(quad.C, [[8.5]])
    np.testing.assert_allclose(quad.B, [[-3.0], [-6.0]])
    np.testing.assert_allclose(quad.A, [[1.0, 2.0], [2.0, 4.0]])


def test_membership_exact(dataset, base_library, system):
    assert membership_exact(system.AB, dataset, base_library)
    assert not membership_exact(system.AB + 10.0, dataset, base_library)


def test_rank_check(dataset, base_library, system, experiment):
    report = rank_check(dataset, base_library)
    assert report['full_row_rank']
    assert report['rows'] == 5
    short = run_experiment(system, experiment.experiments, experiment.delta, 2, seed=0)
    assert not rank_check(short, base_library)['full_row_rank']


def test_problem_shape(dataset, base_library):
    quadrics = build_sample_quadrics(dataset, base_library)
    problem, bbar, taus = overapproximation_problem(quadrics)
    assert len(taus) == dataset.T
    assert len(bbar) == 5 and len(bbar[0]) == 2
    assert problem.maxdet_block == 'Abar'
    assert problem.blocks['Abar'] == 5


def test_empty_quadrics():
    with pytest.raises(ValueError):
        solve_overapproximation([])


def test_ellipsoid_algebra():
    rng = np.random.default_rng(4)
    root = rng.normal(size=(3, 3))
    model = EllipsoidModel(root @ root.T + np.eye(3), rng.normal(size=(3, 2)))
    zeta = rng.normal(size=(3, 2))
    np.testing.assert_allclose(model.lhs(zeta), model.centered_lhs(zeta), atol=1e-9)
    upsilon = np.zeros((3, 2))
    upsilon[0, 0] = 1.0
    member = model.member(upsilon)
    assert np.linalg.eigvalsh(model.centered_lhs(member))[-1] == pytest.approx(0.0, abs=1e-9)
    assert membership_ellipsoid(model.center_pair(), model)
    worst, _ = membership_margin(model.center_pair(), model)
    assert worst == pytest.approx(-1.0)


@pytest.mark.parametrize('seed', range(4))
def test_parametrized_members(seed):
    rng = np.random.default_rng(seed)
    root = rng.normal(size=(5, 5))
    model = EllipsoidModel(root @ root.T + np.eye(5), rng.normal(size=(5, 2)))
    for _ in range(25):
        g = rng.normal(size=(5, 2))
        direction = g / np.linalg.norm(g, 2)
        inside = model.member(direction * rng.uniform(0.0, 1.0)).T
        assert membership_ellipsoid(inside, model)
        outside = model.member(direction * rng.uniform(1.01, 2.0)).T
        worst, tol = membership_margin(outside, model)
        assert worst > tol
        assert not membership_ellipsoid(outside, model)


@pytest.mark.slow
def test_overapproximation_contains_truth(dataset, base_library, system, solver_config):
    quadrics = build_sample_quadrics(dataset, base_library)
    model = solve_overapproximation(quadrics, solver_config, dataset.content_hash())
    assert np.linalg.eigvalsh(model.Abar)[0] > 0
    assert np.all(model.taus >= -1e-6)
    assert model.dataset_hash == dataset.content_hash()
    assert membership_ellipsoid(system.AB, model)
    rng = np.random.default_rng(2)
    candidates = [system.AB] + [system.AB + 10.0 ** -rng.uniform(1.0, 4.0) *
                                rng.normal(size=system.AB.shape) for _ in range(99)]
    consistent = [ab for ab in candidates if membership_exact(ab, dataset, base_library)]
    assert len(consistent) >= 1
    assert all(membership_ellipsoid(ab, model) for ab in consistent)
    copy = EllipsoidModel.from_dict(model.to_dict())
    assert copy.content_hash() == model.content_hash()
