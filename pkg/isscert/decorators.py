import functools
import logging
import time

logger = logging.getLogger(__name__)


def timed(f):
    """Log wall-clock time of a stage and record it on results with a stats dict"""
    @functools.wraps(f)
    def wrapper(*args, **kwargs):
        start = time.time()
        result = f(*args, **kwargs)
        elapsed = time.time() - start
        logger.info('%s finished in %.2fs', f.__name__, elapsed)
        stats = getattr(result, 'stats', None)
        if isinstance(stats, dict):
            stats.setdefault('time', elapsed)
        return result

    return wrapper
