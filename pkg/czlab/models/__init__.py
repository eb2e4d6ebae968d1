"""
Domain models package
Exports the immutable value types shared by every service
"""

from .geometry import DyadicCube, DyadicDomain
from .field import OperatorField, ProjectionField
from .spectral import RcDecomposition, SpectralData, SpectralDistribution
from .sequences import LevelRange, SignPattern, sign_matrix, sign_patterns
from .bundle import CuculescuSequence, CZBundle
from .report import CheckReport, DecaySweep

__all__ = [
    'DyadicCube', 'DyadicDomain', 'OperatorField', 'ProjectionField',
    'RcDecomposition', 'SpectralData', 'SpectralDistribution',
    'LevelRange', 'SignPattern', 'sign_matrix', 'sign_patterns',
    'CuculescuSequence', 'CZBundle', 'CheckReport', 'DecaySweep'
]
