"""
Services package
Numerical services (algebra, grid, operators, norms, czd), the corpus and
oracle used by the checks, and the runner and storage around them
"""

from .runner import CheckRunner, RunResult
from .oracle import ScalarOracle, scalar_oracle

__all__ = ['CheckRunner', 'RunResult', 'ScalarOracle', 'scalar_oracle']
