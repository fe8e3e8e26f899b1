import errno
import hashlib
import json
import os

import numpy as np


def mkdir_p(path):
    if not path:
        return
    try:
        os.makedirs(path)
    except OSError as exc:
        if exc.errno == errno.EEXIST and os.path.isdir(path):
            pass
        else:
            raise


def to_jsonable(obj):
    """Convert numpy containers and scalars into plain JSON types"""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def canonical_json(obj):
    return json.dumps(to_jsonable(obj), sort_keys=True, separators=(',', ':'))


def sha256_text(text):
    return hashlib.sha256(text.encode('utf-8')).hexdigest()


def config_hash(config, exclude=('output_dir',)):
    """Hash of a config dict, ignoring keys that do not change results

    Args:
        config (dict): experiment configuration
        exclude (tuple): top-level keys left out of the hash

    Returns:
        str
    """
    trimmed = {k: v for k, v in config.items() if k not in exclude}
    return sha256_text(canonical_json(trimmed))


def format_float(value):
    return '{:.17g}'.format(float(value))


def as_matrix(data, rows=None, cols=None):
    arr = np.atleast_2d(np.asarray(data, dtype=float))
    if rows is not None and arr.shape[0] != rows:
        raise ValueError('Expected {} rows, got {}'.format(rows, arr.shape[0]))
    if cols is not None and arr.shape[1] != cols:
        raise ValueError('Expected {} columns, got {}'.format(cols, arr.shape[1]))
    return arr


def sym_sqrt(matrix, inverse=False, floor=1e-12):
    """Symmetric square root (or inverse square root) via eigendecomposition"""
    sym = 0.5 * (matrix + matrix.T)
    vals, vecs = np.linalg.eigh(sym)
    vals = np.maximum(vals, floor)
    powers = vals ** (-0.5 if inverse else 0.5)
    return (vecs * powers) @ vecs.T
