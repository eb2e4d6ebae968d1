"""
Configuration manager for numerical defaults and harness settings
"""

import os
from copy import deepcopy
from typing import Dict, Optional


class ConfigurationManager:
    """Manages tolerances, guards and harness-wide settings"""

    def __init__(self):
        self._defaults = self._initialize_app_config()
        self._app_config = deepcopy(self._defaults)

    def _initialize_app_config(self) -> Dict:
        """Initialize application-wide configuration"""
        return {
            'TOLERANCES': {
                'eps_herm': 1e-10,
                'eps_proj': 1e-9,
                'eps_eig': 1e-10,
                'eps_zero': 1e-12,
                'eps_rank': 1e-9,
                'identity': 1e-10,
                'exact_check': 1e-8,
                'commutation': 1e-9,
            },

            # Geometry
            'RESOLUTION_GUARD': 2,
            'BALL_SUBSAMPLING': 8,
            'MAX_CELL_EXPONENT': 16,
            'MAX_MATRIX_DIM': 8,

            # Rademacher averaging
            'EXHAUSTIVE_OMEGA_LIMIT': 10,
            'OMEGA_SAMPLES': 256,

            # Decay windows (upper bounds on fitted log2-slopes)
            'DECAY_WINDOWS': {
                'boundary_operator_decay': -0.9,
                'single_difference_decay': -0.4,
                'pseudo_localization': -0.4,
            },

            # Caps for implicit constants; the measured value is what gets reported
            'EMPIRICAL_CAPS': {
                'weak11': 64.0,
                'bmo': 16.0,
                'strong_pp': 16.0,
                'square_function_l2': 8.0,
                'ball_differences': 64.0,
                'maximal_projection': 64.0,
                'off_diagonal_reorganization': 16.0,
                'boundary_scaling': 16.0,
            },
            'MAXIMAL_SUP_FACTOR': 3.0,
            'WEAK11_FAMILY_FACTOR': 2.0,
            'L2_STABILITY': 0.10,

            'REPORT_SCHEMA_VERSION': '1.0',
            'LOG_LEVEL': os.getenv('LOG_LEVEL', 'INFO'),
        }

    def get_app_config(self, key: str, default=None):
        """Get application configuration value"""
        return self._app_config.get(key, default)

    def tolerance(self, name: str) -> float:
        """Get a named numerical tolerance"""
        return float(self._app_config['TOLERANCES'][name])

    def decay_window(self, check_id: str) -> float:
        return float(self._app_config['DECAY_WINDOWS'][check_id])

    def empirical_cap(self, check_id: str) -> float:
        return float(self._app_config['EMPIRICAL_CAPS'][check_id])

    def apply_overrides(self, tolerances: Optional[Dict[str, float]] = None):
        """Apply per-run tolerance overrides on top of the defaults"""
        self._app_config = deepcopy(self._defaults)
        for name, value in (tolerances or {}).items():
            self._app_config['TOLERANCES'][name] = float(value)

    def reset(self):
        """Restore the shipped defaults"""
        self._app_config = deepcopy(self._defaults)
