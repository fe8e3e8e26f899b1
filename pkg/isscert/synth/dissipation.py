"""Dissipation matrices of the synthesis programs

Every builder returns a symmetric LinearPolyMatrix M over the state and
exogenous indeterminates; the programs require -M to be an SOS matrix.
Inputs may carry unknowns (LinearPoly) or be numeric (Polynomial, ndarray),
as long as no entry multiplies two unknowns.
"""
import numpy as np

from ..exceptions import DimensionError
from ..models.certificate import ACTUATOR, PROCESS
from ..models.expression import LinearPoly, LinearPolyMatrix
from ..models.polynomial import Polynomial, PolyMatrix
from ..poly import jacobian


def as_linear(value, nvars):
    if isinstance(value, (LinearPolyMatrix, PolyMatrix, np.ndarray)):
        return LinearPolyMatrix.coerce(value, nvars)
    return LinearPoly.coerce(value, nvars)


def column(entries, nvars):
    return LinearPolyMatrix.column([LinearPoly.coerce(e, nvars) for e in entries], nvars)


def exogenous_column(n, dim, nvars):
    """Column of the indeterminates x_n .. x_{n + dim - 1}"""
    return column([Polynomial.variable(n + j, nvars) for j in range(dim)], nvars)


def gradient_row(V, n):
    """1 x n row dV/dx of a polynomial in the first n indeterminates"""
    return LinearPolyMatrix([[V.diff(j) for j in range(n)]], V.nvars)


def regressor_column(library, u):
    """[Z(x); W(x) u] for an m x 1 column u"""
    nvars = u.nvars
    z = LinearPolyMatrix.coerce(PolyMatrix.column(library.Z), nvars)
    wu = LinearPolyMatrix.coerce(library.W, nvars) @ u
    return LinearPolyMatrix.block([[z], [wu]], nvars)


def _scaled_identity(size, factor, nvars):
    return LinearPolyMatrix.from_array(np.eye(size), nvars) * factor


def lyapunov_dissipation(model, library, n, V, k, lam, alpha3, alpha4=None, channel=None):
    """Block matrix of the GAS and biconvex ISS programs

        [[alpha3 - alpha4 + dV (zeta_bar^T phi + d),  *,              *           ],
         [Qbar^1/2 dV^T,                               -2 lam I_n,     *           ],
         [lam Abar^-1/2 phi,                           0,              -2 lam I_NM ]]

    with phi = [Z; W u], u = k + w on the actuator channel and u = k otherwise;
    the d term is present on the process channel only.

    Args:
        model (EllipsoidModel): data-consistent ellipsoid
        library (FunctionLibrary): library embedded in the program indeterminates
        n (int): state dimension; exogenous indeterminates follow the state
        V, lam: LinearPoly or Polynomial
        k (list): controller entries, LinearPoly or Polynomial
        alpha3, alpha4: alpha(|x|) and alpha4(|exo|) as LinearPoly or Polynomial
        channel (str): None, ``actuator`` or ``process``
    """
    nvars = V.nvars
    V = as_linear(V, nvars)
    lam = as_linear(lam, nvars)
    u = column(k, nvars)
    if channel == ACTUATOR:
        u = u + exogenous_column(n, u.rows, nvars)
    phi = regressor_column(library, u)
    if phi.rows != model.size:
        raise DimensionError('Regressor of length {} for an ellipsoid of size {}'.format(
            phi.rows, model.size))
    dV = gradient_row(V, n)
    rate = (dV @ model.zeta_bar.T) @ phi
    m11 = rate[0, 0] + as_linear(alpha3, nvars)
    if alpha4 is not None:
        m11 = m11 - as_linear(alpha4, nvars)
    if channel == PROCESS:
        m11 = m11 + (dV @ exogenous_column(n, n, nvars))[0, 0]
    m21 = model.qbar_sqrt @ dV.T
    m31 = (model.abar_inv_sqrt @ phi) * lam
    return LinearPolyMatrix.block([
        [LinearPolyMatrix([[m11]], nvars), m21.T, m31.T],
        [m21, _scaled_identity(n, lam.scale(-2.0), nvars), None],
        [m31, None, _scaled_identity(model.size, lam.scale(-2.0), nvars)],
    ], nvars)


def _factor_blocks(library, n, P, Y):
    """[H P; W Y], the Jacobian of zhat and the zero-padded [0; W]"""
    nvars = P.nvars
    H = LinearPolyMatrix.coerce(library.H, nvars)
    W = LinearPolyMatrix.coerce(library.W, nvars)
    top = LinearPolyMatrix.block([[H @ P], [W @ Y]], nvars)
    dzhat = LinearPolyMatrix.coerce(jacobian(library.zhat, nvars, range(n)), nvars)
    padded = LinearPolyMatrix.block(
        [[LinearPolyMatrix.zeros(library.N, library.m, nvars)], [W]], nvars)
    return top, dzhat, padded


def convex_dissipation(model, library, n, P, Y, Theta, Gamma, lam, channel):
    """Block matrix of the convex ISS programs

    Actuator channel:
        [[He([HP; WY]^T zeta_bar dZ^T) + Theta + lam dZ Qbar dZ^T,  *,       *       ],
         [[0; W]^T zeta_bar dZ^T,                                  -Gamma,   *       ],
         [[HP; WY],                                                 [0; W],  -lam Abar]]
    Process channel: the (2, 1) block is dZ^T and the (3, 2) block vanishes.
    Here dZ is the Jacobian of zhat (Nhat x n).
    """
    nvars = P.nvars
    lam = as_linear(lam, nvars)
    top, dzhat, padded = _factor_blocks(library, n, P, Y)
    mixed = (top.T @ model.zeta_bar) @ dzhat.T
    m11 = mixed.sym_part() + as_linear(Theta, nvars) + (dzhat @ model.Qbar @ dzhat.T) * lam
    gamma = as_linear(Gamma, nvars)
    m33 = LinearPolyMatrix.from_array(model.Abar, nvars) * lam.scale(-1.0)
    if channel == ACTUATOR:
        m21 = (padded.T @ model.zeta_bar) @ dzhat.T
        m32 = padded
    elif channel == PROCESS:
        m21 = dzhat.T
        m32 = None
    else:
        raise ValueError('Unknown disturbance channel {}'.format(channel))
    if gamma.shape != (m21.rows, m21.rows):
        raise DimensionError('Gamma has shape {}, expected {}'.format(
            gamma.shape, (m21.rows, m21.rows)))
    return LinearPolyMatrix.block([
        [m11, m21.T, top.T],
        [m21, -gamma, m32.T if m32 is not None else None],
        [top, m32, m33],
    ], nvars)


def modelbased_dissipation(AB, library, n, P, Y, Theta, Gamma):
    """Block matrix of the convex program with known coefficients [A B]

        [[He(dZ [A B] [HP; WY]) + Theta,  *     ],
         [[0; W]^T [A B]^T dZ^T,          -Gamma]]
    """
    nvars = P.nvars
    AB = np.atleast_2d(np.asarray(AB, dtype=float))
    top, dzhat, padded = _factor_blocks(library, n, P, Y)
    m11 = ((dzhat @ AB) @ top).sym_part() + as_linear(Theta, nvars)
    m21 = (padded.T @ AB.T) @ dzhat.T
    return LinearPolyMatrix.block([
        [m11, m21.T],
        [m21, -as_linear(Gamma, nvars)],
    ], nvars)
