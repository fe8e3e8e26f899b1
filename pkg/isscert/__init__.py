"""Data-driven synthesis of ISS controllers for polynomial input-affine systems"""
import logging
import os
import warnings

try:
    import boto3  # NOQA
    S3_SUPPORT = True
except ImportError:
    S3_SUPPORT = False

logger = logging.getLogger(__name__)
logger.addHandler(logging.StreamHandler())
logger.setLevel(os.getenv('ISSCERT_LOG_LEVEL', 'INFO'))

# cvxpy and scipy emit noisy warnings during repeated small solves
SHOW_WARNINGS = os.getenv('SHOW_WARNINGS_ISSCERT', False)

if not SHOW_WARNINGS:
    warnings.simplefilter('ignore')
