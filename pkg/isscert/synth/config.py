import copy

from .. import settings
from ..exceptions import ConfigException
from ..models.polynomial import Polynomial, PolyMatrix
from ..sdp import SolverConfig

THETA_MODES = ('xi', 'gamma_hat')
GAMMA_STRUCTURES = ('matrix', 'scalar')
FEASIBILITY_MODES = ('regularized', 'pure')


def _degree_range(value, name):
    low, high = (int(v) for v in value)
    if low < 0 or high < low:
        raise ConfigException('{} degree range {} is empty'.format(name, list(value)))
    return (low, high)


class SynthConfig(object):
    """Degrees, margins and design parameters of the synthesis programs"""

    def __repr__(self):
        return '<SynthConfig - V{} k{} lambda{}>'.format(
            list(self.v_degree), list(self.k_degree), list(self.lambda_degree))

    def __init__(self, v_degree=(2, 4), k_degree=(1, 3), lambda_degree=(0, 4), y_degree=2,
                 theta_degree=None, mu=settings.MU, eps=settings.MU,
                 eta_min=settings.STRICT_MARGIN, p_margin=settings.P_MARGIN,
                 alpha_terms=None, xi=None, initial_k=None, max_rounds=3,
                 feasibility_mode='regularized', theta_mode='xi', theta_terms=1,
                 gamma_structure='matrix', gamma_terms=1, lambda_x_only=None,
                 gram_trace_weight=settings.GRAM_TRACE_WEIGHT, solver=None):
        """Instantiate a new SynthConfig

        Args:
            v_degree (tuple): (min, max) total degree of V; min at least 2
            k_degree (tuple): (min, max) degree of k; min at least 1 so k(0) = 0
            lambda_degree (tuple): (min, max) degree of the multiplier lambda
            y_degree (int): max degree of Y on the convex path
            theta_degree (int): max degree of Theta, deg Xi + 2 when omitted
            mu (float): lower bound of lambda and of the alpha coefficient sums
            eps (float): lower bound of lambda and of sum C_k on the convex path
            eta_min (float): lower bound of eta
            p_margin (float): P - p_margin I is PSD
            alpha_terms (dict): number of terms N_i of alpha1..alpha4
            xi (PolyMatrix): design matrix Xi(x) of the convex path, Zhat Zhat^T if omitted
            initial_k (list[Polynomial]): starting controller of the alternation
            max_rounds (int): alternation rounds, each solving two programs
            feasibility_mode (str): ``regularized`` adds a small Gram trace objective
            theta_mode (str): ``xi`` or ``gamma_hat`` (Theta = sum C^_k |x|^2k)
            theta_terms (int): number of terms beyond C^_0 in the gamma_hat form
            gamma_structure (str): ``matrix`` or ``scalar`` (C_k = c_k I)
            gamma_terms (int): N in Gamma(r) = sum_{k=0}^N C_k r^2k
            lambda_x_only (bool): lambda depends on the state only; defaults to
                True on the convex path and False on the biconvex path
            solver (SolverConfig): backend settings
        """
        self.v_degree = _degree_range(v_degree, 'V')
        self.k_degree = _degree_range(k_degree, 'k')
        self.lambda_degree = _degree_range(lambda_degree, 'lambda')
        self.y_degree = int(y_degree)
        self.theta_degree = theta_degree
        self.mu = float(mu)
        self.eps = float(eps)
        self.eta_min = float(eta_min)
        self.p_margin = float(p_margin)
        self.alpha_terms = {'alpha1': 2, 'alpha2': 2, 'alpha3': 2, 'alpha4': 2}
        self.alpha_terms.update(alpha_terms or {})
        self.xi = xi
        self.initial_k = list(initial_k) if initial_k is not None else None
        self.max_rounds = int(max_rounds)
        self.feasibility_mode = feasibility_mode
        self.theta_mode = theta_mode
        self.theta_terms = int(theta_terms)
        self.gamma_structure = gamma_structure
        self.gamma_terms = int(gamma_terms)
        self.lambda_x_only = lambda_x_only
        self.gram_trace_weight = float(gram_trace_weight)
        self.solver = solver or SolverConfig()
        self.validate()

    def validate(self):
        if self.v_degree[0] < 2:
            raise ConfigException('V must have minimum degree 2 so that V(0) = 0 and V is '
                                  'bounded below by a class K-infinity function')
        if self.v_degree[1] % 2:
            raise ConfigException('V max degree {} must be even'.format(self.v_degree[1]))
        if self.k_degree[0] < 1:
            raise ConfigException('k must have minimum degree 1 so that k(0) = 0')
        if self.lambda_degree[1] % 2:
            raise ConfigException('lambda max degree {} must be even'.format(
                self.lambda_degree[1]))
        if self.mu <= 0 or self.eps <= 0 or self.eta_min <= 0 or self.p_margin <= 0:
            raise ConfigException('mu, eps, eta_min and p_margin must be positive')
        if any(int(v) < 1 for v in self.alpha_terms.values()):
            raise ConfigException('Each alpha needs at least one term')
        if self.max_rounds < 1:
            raise ConfigException('max_rounds must be at least 1')
        if self.feasibility_mode not in FEASIBILITY_MODES:
            raise ConfigException('feasibility_mode must be one of {}'.format(
                FEASIBILITY_MODES))
        if self.theta_mode not in THETA_MODES:
            raise ConfigException('theta_mode must be one of {}'.format(THETA_MODES))
        if self.gamma_structure not in GAMMA_STRUCTURES:
            raise ConfigException('gamma_structure must be one of {}'.format(GAMMA_STRUCTURES))
        if self.gamma_terms < 0 or self.theta_terms < 0:
            raise ConfigException('gamma_terms and theta_terms must be nonnegative')
        if self.initial_k is not None:
            for i, p in enumerate(self.initial_k):
                if p.coefficient((0,) * p.nvars) != 0.0:
                    raise ConfigException('initial_k[{}] has a constant term'.format(i))

    def lambda_state_only(self, convex):
        if self.lambda_x_only is None:
            return convex
        return bool(self.lambda_x_only)

    def copy(self, **overrides):
        result = copy.copy(self)
        result.alpha_terms = dict(self.alpha_terms)
        for key, value in overrides.items():
            if not hasattr(result, key):
                raise ConfigException('Unknown synthesis option {}'.format(key))
            setattr(result, key, value)
        result.validate()
        return result

    def to_dict(self):
        return {
            'v_degree': list(self.v_degree),
            'k_degree': list(self.k_degree),
            'lambda_degree': list(self.lambda_degree),
            'y_degree': self.y_degree,
            'theta_degree': self.theta_degree,
            'mu': self.mu,
            'eps': self.eps,
            'eta_min': self.eta_min,
            'p_margin': self.p_margin,
            'alpha_terms': dict(self.alpha_terms),
            'xi': self.xi.to_json() if self.xi is not None else None,
            'xi_nvars': self.xi.nvars if self.xi is not None else None,
            'initial_k': [p.to_json() for p in self.initial_k]
            if self.initial_k is not None else None,
            'initial_k_nvars': self.initial_k[0].nvars if self.initial_k else None,
            'max_rounds': self.max_rounds,
            'feasibility_mode': self.feasibility_mode,
            'theta_mode': self.theta_mode,
            'theta_terms': self.theta_terms,
            'gamma_structure': self.gamma_structure,
            'gamma_terms': self.gamma_terms,
            'lambda_x_only': self.lambda_x_only,
            'gram_trace_weight': self.gram_trace_weight,
            'solver': self.solver.to_dict(),
        }

    @classmethod
    def from_dict(cls, data, nvars=None):
        """Build from a plain dict; polynomial entries need nvars or *_nvars keys"""
        data = dict(data)
        known = set(cls().to_dict())
        unknown = set(data) - known
        if unknown:
            raise ConfigException('Unknown synthesis options: {}'.format(
                ', '.join(sorted(unknown))))
        xi = data.pop('xi', None)
        xi_nvars = data.pop('xi_nvars', None) or nvars
        initial_k = data.pop('initial_k', None)
        k_nvars = data.pop('initial_k_nvars', None) or nvars
        solver = data.pop('solver', None)
        if xi is not None:
            if xi_nvars is None:
                raise ConfigException('xi needs the number of variables')
            data['xi'] = PolyMatrix.from_json(xi, xi_nvars)
        if initial_k is not None:
            if k_nvars is None:
                raise ConfigException('initial_k needs the number of variables')
            data['initial_k'] = [Polynomial.from_json(p, k_nvars) for p in initial_k]
        if solver is not None:
            data['solver'] = SolverConfig.from_dict(solver)
        return cls(**data)
