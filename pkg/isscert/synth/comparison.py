"""Class K-infinity bounds of V and a for convex certificates"""
import logging

from .. import settings
from ..exceptions import InfeasibleException, SolverException
from ..models.comparison import ClassKInfty
from .program import ProgramBuilder

logger = logging.getLogger(__name__)

LOWER = 'lower'
UPPER = 'upper'


def fit_class_k(poly, n, terms, side, config, label):
    """Tightest alpha(|x|) = sum c_k |x|^2k below (or above) a polynomial

    Solves poly - alpha SOS maximizing sum c_k (side ``lower``) or
    alpha - poly SOS minimizing sum c_k (side ``upper``).

    Returns:
        (ClassKInfty, SosReport, SosCertificate)
    """
    state_vars = list(range(n))
    builder = ProgramBuilder('fit-{}'.format(label), n, config)
    keys, alpha = builder.class_k(label, terms, state_vars, settings.ALPHA_FIT_MIN)
    if side == LOWER:
        builder.add_sos(poly - alpha, label)
        sign = -1.0
    else:
        builder.add_sos(alpha - poly, label)
        sign = 1.0
    builder.problem.add_objective({key: 1.0 for key in keys}, weight=sign)
    solution = builder.solve_or_raise(diagnose=False)
    reports, grams = builder.verify_or_raise(solution)
    fitted = ClassKInfty([solution.value(key) for key in keys], label=label)
    return fitted, reports[0], grams[label]


def _fit_with_retry(poly, n, terms, side, config, label):
    try:
        return fit_class_k(poly, n, terms, side, config, label)
    except (InfeasibleException, SolverException) as e:
        logger.warning('%s with %d terms failed (%s); retrying with %d', label, terms, e,
                       terms + 1)
        return fit_class_k(poly, n, terms + 1, side, config, label)


def extract_comparison_functions(cert, config):
    """alpha1 <= V <= alpha2, alpha3 <= a and alpha4 from the Gamma coefficients

    Certificates of the biconvex path already carry their alphas, which are
    returned unchanged.

    Returns:
        (dict name -> ClassKInfty, list[SosReport], dict label -> SosCertificate)
    """
    if not cert.is_convex:
        return dict(cert.alphas), [], {}
    n = cert.n
    terms = config.alpha_terms
    upper_terms = max(terms['alpha2'], cert.V.degree() // 2)
    fits = [
        ('alpha1', cert.V, terms['alpha1'], LOWER),
        ('alpha2', cert.V, upper_terms, UPPER),
        ('alpha3', cert.a, terms['alpha3'], LOWER),
    ]
    alphas = {}
    reports = []
    grams = {}
    for name, poly, count, side in fits:
        alpha, report, gram = _fit_with_retry(poly, n, count, side, config, name)
        alphas[name] = alpha
        reports.append(report)
        grams[name] = gram
        logger.info('%s(r) = %s', name, alpha)
    alphas['alpha4'] = cert.multipliers['Gamma'].alpha4()
    return alphas, reports, grams
