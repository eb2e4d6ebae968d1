"""
Calderon-Zygmund laboratory package
Operator-valued dyadic harmonic analysis on finite grids, with a
verification harness for the square-function estimates
"""

import logging

LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'


def configure_logging(level='INFO'):
    """Configure the root logger once; later calls only change the level"""
    root = logging.getLogger()
    if not root.handlers:
        logging.basicConfig(format=LOG_FORMAT)
    if isinstance(level, str):
        level = logging.getLevelName(level.upper())
        if not isinstance(level, int):
            level = logging.INFO
    root.setLevel(level)
    return root


__version__ = '1.0.0'
__all__ = ['configure_logging', 'LOG_FORMAT', '__version__']
