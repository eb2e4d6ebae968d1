"""
Configuration package
"""

from .settings import ConfigurationManager
from .run_config import CorpusSpec, RunConfig, load_run_config, parse_run_config

# Global configuration instance
config_manager = ConfigurationManager()


def load_config(path, known_checks=None) -> RunConfig:
    """Load a run configuration and apply its tolerance overrides"""
    run_config = load_run_config(
        path,
        known_checks=known_checks,
        resolution_guard=config_manager.get_app_config('RESOLUTION_GUARD'),
        max_cell_exponent=config_manager.get_app_config('MAX_CELL_EXPONENT'),
        max_matrix_dim=config_manager.get_app_config('MAX_MATRIX_DIM'),
    )
    config_manager.apply_overrides(run_config.tolerances)
    return run_config


__all__ = ['config_manager', 'ConfigurationManager', 'CorpusSpec', 'RunConfig',
           'load_config', 'load_run_config', 'parse_run_config']
