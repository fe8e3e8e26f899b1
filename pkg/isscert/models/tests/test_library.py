import numpy as np
import pytest

from ...exceptions import ConfigException, DimensionError
from ..library import FunctionLibrary
from ..polynomial import Polynomial, PolyMatrix
from ..system import TrueSystem


@pytest.fixture
def x1():
    return Polynomial.variable(0, 2)


@pytest.fixture
def x2():
    return Polynomial.variable(1, 2)


@pytest.fixture
def cubics(x1, x2):
    return [x1 ** 3, x1 ** 2 * x2, x1 * x2 ** 2, x2 ** 3]


@pytest.fixture
def factor(x1, x2):
    return PolyMatrix([[x1 ** 2, 0.0], [x1 * x2, 0.0], [x2 ** 2, 0.0], [0.0, x2 ** 2]])


@pytest.fixture
def library(cubics, x1, x2, factor):
    return FunctionLibrary(cubics, PolyMatrix([[1.0]], 2), [x1, x2], factor)


def test_sizes(library):
    assert (library.n, library.N, library.M, library.m, library.Nhat) == (2, 4, 1, 1, 2)
    assert library.has_factorization()


def test_regressor(library):
    np.testing.assert_allclose(library.regressor([1.0, 2.0], [3.0]), [1.0, 2.0, 4.0, 8.0, 3.0])


def test_constant_regressor_rejected(x1):
    with pytest.raises(ConfigException):
        FunctionLibrary([x1 + 1.0], PolyMatrix([[1.0]], 2))


def test_wrong_factor_rejected(cubics, x1, x2, factor):
    with pytest.raises(ConfigException):
        FunctionLibrary(cubics, PolyMatrix([[1.0]], 2), [x2, x1], factor)


def test_factor_needs_both(cubics, x1, x2):
    with pytest.raises(ConfigException):
        FunctionLibrary(cubics, PolyMatrix([[1.0]], 2), [x1, x2])


def test_factor_shape(cubics, x1, x2):
    with pytest.raises(DimensionError):
        FunctionLibrary(cubics, PolyMatrix([[1.0]], 2), [x1, x2], PolyMatrix.identity(2, 2))


def test_embedded(library):
    wide = library.embedded(3)
    assert wide.n == 3
    assert wide.evaluate_z([1.0, 2.0, 7.0]) == pytest.approx(library.evaluate_z([1.0, 2.0]))


def test_dict(library):
    copy = FunctionLibrary.from_dict(library.to_dict())
    assert copy.Nhat == 2
    point = [0.3, -0.4]
    np.testing.assert_allclose(copy.evaluate_z(point), library.evaluate_z(point))


def test_true_system(library):
    system = TrueSystem([[-1.0, 0.0, 1.0, 0.0], [0.0, -1.0, 1.0, 0.0]], [[0.0], [1.0]],
                        library)
    x = np.array([1.0, 2.0])
    np.testing.assert_allclose(system.rhs(x, [0.5]), [-1.0 + 4.0, -2.0 + 4.0 + 0.5])
    np.testing.assert_allclose(system.rhs(x, [0.5], d=np.ones(2)), [4.0, 3.5])
    drift = system.drift()
    assert drift[0].evaluate(x) == pytest.approx(3.0)
    assert system.AB.shape == (2, 5)
    with pytest.raises(DimensionError):
        TrueSystem(np.zeros((2, 3)), [[0.0], [1.0]], library)
