import numpy as np

from ..exceptions import DimensionError
from ..models.polynomial import PolyMatrix


def sontag_redesign(AB, library, k, V):
    """Controller k~ = k - rho / (2m) (dV/dx B W)^T with rho = -dV/dx (A Z + B W k)

    Applied to a pair [A B] for which (k, V) makes the closed loop GAS, the
    redesigned controller makes it ISS with respect to actuator disturbances.

    Args:
        AB (ndarray): known pair, n x (N + M)
        library (FunctionLibrary): regressors Z, W
        k (list[Polynomial]): controller, one entry per input
        V (Polynomial): Lyapunov function

    Returns:
        list[Polynomial]
    """
    AB = np.atleast_2d(np.asarray(AB, dtype=float))
    n, N, m = library.n, library.N, library.m
    if AB.shape != (n, N + library.M):
        raise DimensionError('[A B] has shape {}, expected {}'.format(
            AB.shape, (n, N + library.M)))
    if len(k) != m:
        raise DimensionError('k has {} entries for {} inputs'.format(len(k), m))
    A, B = AB[:, :N], AB[:, N:]
    grad = PolyMatrix([[V.diff(j) for j in range(n)]], n)
    BW = B @ library.W
    closed = A @ PolyMatrix.column(library.Z) + BW @ PolyMatrix.column(k)
    rho = -(grad @ closed)[0, 0]
    gain = grad @ BW
    return [k[i] - rho * gain[0, i] * (1.0 / (2 * m)) for i in range(m)]
