import numpy as np

from .. import settings
from .comparison import ClassKInfty, MatrixClassKInfty
from .polynomial import Polynomial, PolyMatrix, add_exponents


class SosCertificate(object):
    """Gram matrix over a row-tagged monomial basis

    A basis element ``(row, monomial)`` stands for ``y_row * x^monomial``; a
    scalar certificate has every row equal to 0.
    """

    def __repr__(self):
        return '<SosCertificate - {} ({}x{} gram)>'.format(
            self.label, len(self.basis), len(self.basis))

    def __init__(self, gram, basis, nvars, rows=1, label=None):
        self.gram = np.asarray(gram, dtype=float)
        self.basis = [(int(r), tuple(m)) for r, m in basis]
        self.nvars = nvars
        self.rows = rows
        self.label = label

    def expand(self):
        """Matrix E with E_ij = sum over r_p = i, r_q = j of G[p, q] x^(m_p + m_q)"""
        terms = [[{} for _ in range(self.rows)] for _ in range(self.rows)]
        for p, (rp, mp) in enumerate(self.basis):
            for q, (rq, mq) in enumerate(self.basis):
                value = self.gram[p, q]
                if value == 0.0:
                    continue
                m = add_exponents(mp, mq)
                entry = terms[rp][rq]
                entry[m] = entry.get(m, 0.0) + value
        return PolyMatrix([[Polynomial(t, self.nvars) for t in row] for row in terms],
                          self.nvars)

    def min_eigenvalue(self):
        """Smallest eigenvalue of the symmetrized Gram relative to max(1, largest entry)"""
        if not self.basis:
            return 0.0
        sym = 0.5 * (self.gram + self.gram.T)
        return float(np.linalg.eigvalsh(sym)[0] / max(1.0, np.abs(sym).max()))

    def restricted(self, keep):
        """Certificate over the basis elements whose indices are in keep"""
        keep = list(keep)
        return SosCertificate(self.gram[np.ix_(keep, keep)], [self.basis[k] for k in keep],
                              self.nvars, self.rows, self.label)

    def to_dict(self):
        return {
            'label': self.label,
            'rows': self.rows,
            'nvars': self.nvars,
            'basis': [[r, list(m)] for r, m in self.basis],
            'gram': self.gram.tolist(),
        }

    @classmethod
    def from_dict(cls, data):
        return cls(data['gram'], [(r, tuple(m)) for r, m in data['basis']], data['nvars'],
                   data.get('rows', 1), data.get('label'))


class SosReport(object):
    """Outcome of re-expanding a Gram certificate against its target"""

    def __repr__(self):
        return '<SosReport - {} {}>'.format(self.label, 'PASS' if self.passed else 'FAIL')

    def __init__(self, label, residual, tolerance, min_eig, psd_tol=settings.SOS_PSD_TOL):
        self.label = label
        self.residual = float(residual)
        self.tolerance = float(tolerance)
        self.min_eig = float(min_eig)
        self.psd_tol = psd_tol

    @property
    def passed(self):
        return self.residual <= self.tolerance and self.min_eig >= -self.psd_tol

    def to_dict(self):
        return {
            'label': self.label,
            'residual': self.residual,
            'tolerance': self.tolerance,
            'min_eig': self.min_eig,
            'passed': self.passed,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(data['label'], data['residual'], data['tolerance'], data['min_eig'])


GAS = 'gas'
ISS_ACTUATOR_BICONVEX = 'iss_actuator_biconvex'
ISS_PROCESS_BICONVEX = 'iss_process_biconvex'
ISS_ACTUATOR_CONVEX = 'iss_actuator_convex'
ISS_PROCESS_CONVEX = 'iss_process_convex'
MODEL_BASED = 'model_based'

KINDS = (GAS, ISS_ACTUATOR_BICONVEX, ISS_PROCESS_BICONVEX, ISS_ACTUATOR_CONVEX,
         ISS_PROCESS_CONVEX, MODEL_BASED)

ACTUATOR = 'actuator'
PROCESS = 'process'

CHANNELS = {
    GAS: None,
    ISS_ACTUATOR_BICONVEX: ACTUATOR,
    ISS_PROCESS_BICONVEX: PROCESS,
    ISS_ACTUATOR_CONVEX: ACTUATOR,
    ISS_PROCESS_CONVEX: PROCESS,
    MODEL_BASED: ACTUATOR,
}

CONVEX_KINDS = (ISS_ACTUATOR_CONVEX, ISS_PROCESS_CONVEX, MODEL_BASED)


def _poly_to_json(value):
    return value.to_json() if value is not None else None


def _multiplier_to_dict(value):
    if isinstance(value, Polynomial):
        return {'type': 'polynomial', 'nvars': value.nvars, 'value': value.to_json()}
    if isinstance(value, PolyMatrix):
        return {'type': 'polymatrix', 'nvars': value.nvars, 'value': value.to_json()}
    if isinstance(value, MatrixClassKInfty):
        return {'type': 'gamma', 'value': value.to_dict()}
    if isinstance(value, np.ndarray):
        return {'type': 'matrix', 'value': value.tolist()}
    return {'type': 'scalar', 'value': float(value)}


def _multiplier_from_dict(data):
    kind = data['type']
    if kind == 'polynomial':
        return Polynomial.from_json(data['value'], data['nvars'])
    if kind == 'polymatrix':
        return PolyMatrix.from_json(data['value'], data['nvars'])
    if kind == 'gamma':
        return MatrixClassKInfty.from_dict(data['value'])
    if kind == 'matrix':
        return np.asarray(data['value'], dtype=float)
    return float(data['value'])


class Certificate(object):
    """Controller, Lyapunov function and the evidence that they work

    Polynomials k and V live in the n state indeterminates; multipliers and
    Gram certificates live in the state plus exogenous indeterminates.
    """

    def __repr__(self):
        return '<Certificate - {} ({})>'.format(self.kind, 'PASS' if self.passed else 'FAIL')

    def __init__(self, kind, n, k, V, alphas, exo_dim=0, multipliers=None, sos_reports=None,
                 grams=None, a=None, b=None, stats=None, config=None, dataset_hash=None,
                 model_hash=None, config_hash=None):
        """Instantiate a new Certificate

        Args:
            kind (str): one of KINDS
            n (int): state dimension
            k (list[Polynomial]): controller, one polynomial per input
            V (Polynomial): Lyapunov function
            alphas (dict): alpha1..alpha4 as ClassKInfty, alpha4 absent for gas
            exo_dim (int): dimension of the exogenous input w or d
            multipliers (dict): lambda, and P, Y, Theta, Gamma, eta on the convex path
            sos_reports (list[SosReport]): one per compiled SOS constraint
            grams (dict): label to SosCertificate
            a (Polynomial): dissipation rate polynomial of the convex path
            b (Polynomial): positivity witness of the convex path
        """
        if kind not in KINDS:
            raise ValueError('Unknown certificate kind {}'.format(kind))
        self.kind = kind
        self.n = n
        self.k = list(k)
        self.V = V
        self.alphas = dict(alphas)
        self.exo_dim = exo_dim
        self.multipliers = dict(multipliers or {})
        self.sos_reports = list(sos_reports or [])
        self.grams = dict(grams or {})
        self.a = a
        self.b = b
        self.stats = dict(stats or {})
        self.config = config
        self.dataset_hash = dataset_hash
        self.model_hash = model_hash
        self.config_hash = config_hash

    @property
    def channel(self):
        return CHANNELS[self.kind]

    @property
    def is_convex(self):
        return self.kind in CONVEX_KINDS

    @property
    def nvars(self):
        return self.n + self.exo_dim

    @property
    def passed(self):
        return all(r.passed for r in self.sos_reports)

    def failed_reports(self):
        return [r for r in self.sos_reports if not r.passed]

    def controller(self, x):
        x = np.asarray(x, dtype=float)
        return np.array([p.evaluate(x) for p in self.k])

    def alpha(self, index):
        return self.alphas.get('alpha{}'.format(index))

    def summary(self):
        """Rows (name, value) laid out like a table of program solutions"""
        rows = []
        for i, p in enumerate(self.k):
            rows.append(('k{}'.format(i + 1) if len(self.k) > 1 else 'k', str(p)))
        rows.append(('V', str(self.V)))
        for index in range(1, 5):
            alpha = self.alpha(index)
            if alpha is not None:
                rows.append(('alpha{}'.format(index), str(alpha)))
        for name in ('lambda', 'eta', 'Gamma', 'P'):
            value = self.multipliers.get(name)
            if value is None:
                continue
            if isinstance(value, np.ndarray):
                value = np.array2string(value, precision=4)
            rows.append((name, str(value)))
        if self.a is not None:
            rows.append(('a', str(self.a)))
        if self.b is not None:
            rows.append(('b', str(self.b)))
        rows.append(('sos', '{}/{} PASS'.format(
            len(self.sos_reports) - len(self.failed_reports()), len(self.sos_reports))))
        return rows

    def summary_text(self):
        rows = self.summary()
        width = max(len(name) for name, _ in rows)
        lines = ['{} certificate'.format(self.kind)]
        if self.config_hash is not None:
            lines.append('config_hash {}'.format(self.config_hash))
        lines.extend('{}  {}'.format(name.ljust(width), value) for name, value in rows)
        return '\n'.join(lines) + '\n'

    def to_dict(self):
        return {
            'kind': self.kind,
            'n': self.n,
            'exo_dim': self.exo_dim,
            'k': [p.to_json() for p in self.k],
            'V': self.V.to_json(),
            'alphas': {name: alpha.to_dict() for name, alpha in self.alphas.items()},
            'multipliers': {name: _multiplier_to_dict(value)
                            for name, value in self.multipliers.items()},
            'sos_reports': [r.to_dict() for r in self.sos_reports],
            'grams': {label: cert.to_dict() for label, cert in self.grams.items()},
            'a': _poly_to_json(self.a),
            'b': _poly_to_json(self.b),
            'stats': self.stats,
            'config': self.config,
            'dataset_hash': self.dataset_hash,
            'model_hash': self.model_hash,
            'config_hash': self.config_hash,
        }

    @classmethod
    def from_dict(cls, data):
        n = data['n']
        return cls(
            data['kind'], n,
            [Polynomial.from_json(p, n) for p in data['k']],
            Polynomial.from_json(data['V'], n),
            {name: ClassKInfty.from_dict(alpha) for name, alpha in data['alphas'].items()},
            data.get('exo_dim', 0),
            {name: _multiplier_from_dict(value)
             for name, value in data.get('multipliers', {}).items()},
            [SosReport.from_dict(r) for r in data.get('sos_reports', [])],
            {label: SosCertificate.from_dict(cert)
             for label, cert in data.get('grams', {}).items()},
            Polynomial.from_json(data['a'], n) if data.get('a') is not None else None,
            Polynomial.from_json(data['b'], n) if data.get('b') is not None else None,
            data.get('stats'), data.get('config'), data.get('dataset_hash'),
            data.get('model_hash'), data.get('config_hash'))
