"""
Run configuration: the single text file that drives an experiment run
"""

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from dotenv import load_dotenv

from czlab.exceptions import ConfigError

CORPUS_FAMILIES = ('random_psd', 'spike', 'diagonal', 'adversarial')
BOUNDARY_MODES = ('periodic', 'interior')
OUTPUT_DIR_ENV = 'CZLAB_OUTPUT_DIR'


@dataclass(frozen=True)
class CorpusSpec:
    """One generator family with its instance count and parameters"""
    family: str
    count: int = 1
    params: Dict = field(default_factory=dict)

    def validate(self):
        if self.family not in CORPUS_FAMILIES:
            raise ConfigError(f"Unknown corpus family: {self.family}", 'corpus.family')
        if self.count < 1:
            raise ConfigError("Corpus count must be positive", 'corpus.count')


@dataclass(frozen=True)
class RunConfig:
    """Immutable experiment configuration"""
    d: int
    K: int
    n: int
    seed: int = 0
    lambda_grid: Tuple[float, ...] = (1.0, 2.0, 4.0, 8.0)
    lambda_mode: str = 'relative'
    level_range: Optional[Tuple[int, int]] = None
    corpus: Tuple[CorpusSpec, ...] = ()
    checks: Tuple[str, ...] = ('all',)
    output_dir: str = 'results'
    boundary_mode: str = 'periodic'
    omega_mode: Union[str, Dict] = 'exhaustive'
    tolerances: Dict[str, float] = field(default_factory=dict)
    jobs: int = 1
    p_list: Tuple[float, ...] = (1.5, 2.0, 4.0)
    stability_depths: Tuple[int, ...] = ()

    @property
    def omega_samples(self) -> Optional[int]:
        """Monte-Carlo sample count, or None for exhaustive enumeration"""
        if isinstance(self.omega_mode, dict):
            return int(self.omega_mode.get('sample', 0)) or None
        return None

    def resolved_range(self, resolution_guard: int) -> Tuple[int, int]:
        if self.level_range is not None:
            return tuple(self.level_range)
        return 0, self.K - resolution_guard

    def validate(self, known_checks=None, resolution_guard: int = 2,
                 max_cell_exponent: int = 16, max_matrix_dim: int = 8):
        """Apply the size guards and field checks"""
        if self.d not in (1, 2):
            raise ConfigError(f"Dimension must be 1 or 2, got {self.d}", 'd')
        if self.K < 1:
            raise ConfigError("Depth K must be positive", 'K')
        if self.K * self.d > max_cell_exponent:
            raise ConfigError(
                f"K*d = {self.K * self.d} exceeds the cell-count guard "
                f"(K*d <= {max_cell_exponent}, at most {2 ** max_cell_exponent} cells)", 'K')
        for depth in self.stability_depths:
            if depth * self.d > max_cell_exponent or depth < resolution_guard + 1:
                raise ConfigError(f"Stability depth {depth} outside the guards", 'stability_depths')
        if not 1 <= self.n <= max_matrix_dim:
            raise ConfigError(f"Matrix dimension n must be in [1, {max_matrix_dim}]", 'n')
        if self.boundary_mode not in BOUNDARY_MODES:
            raise ConfigError(f"Unknown boundary mode: {self.boundary_mode}", 'boundary_mode')
        if self.lambda_mode not in ('relative', 'absolute'):
            raise ConfigError(f"Unknown lambda mode: {self.lambda_mode}", 'lambda_mode')
        if not self.lambda_grid or min(self.lambda_grid) <= 0:
            raise ConfigError("lambda_grid must hold positive values", 'lambda_grid')
        if self.jobs < 1:
            raise ConfigError("jobs must be positive", 'jobs')
        if any(p <= 1 for p in self.p_list):
            raise ConfigError("p_list entries must exceed 1", 'p_list')
        if not isinstance(self.omega_mode, (str, dict)) or (
                isinstance(self.omega_mode, str) and self.omega_mode != 'exhaustive'):
            raise ConfigError("omega_mode is 'exhaustive' or {'sample': count}", 'omega_mode')
        if isinstance(self.omega_mode, dict) and not self.omega_samples:
            raise ConfigError("omega_mode sample count must be positive", 'omega_mode')

        k_lo, k_hi = self.resolved_range(resolution_guard)
        if not 0 <= k_lo <= k_hi <= self.K - resolution_guard:
            raise ConfigError(
                f"level_range [{k_lo}, {k_hi}] must satisfy 0 <= k_lo <= k_hi <= K - {resolution_guard}",
                'level_range')

        for spec in self.corpus:
            spec.validate()
        if not self.corpus:
            raise ConfigError("corpus must list at least one generator family", 'corpus')

        if known_checks is not None:
            unknown = [c for c in self.checks if c != 'all' and c not in known_checks]
            if unknown:
                raise ConfigError(f"Unknown check ids: {', '.join(unknown)}", 'checks')
        return self


def parse_run_config(raw: Dict) -> RunConfig:
    """Build a RunConfig from a decoded JSON object"""
    if not isinstance(raw, dict):
        raise ConfigError("Run configuration must be a JSON object")

    required = ('d', 'K', 'n')
    missing = [key for key in required if key not in raw]
    if missing:
        raise ConfigError(f"Missing required keys: {', '.join(missing)}", missing[0])

    try:
        corpus = tuple(
            CorpusSpec(family=item['family'], count=int(item.get('count', 1)),
                       params=dict(item.get('params', {})))
            for item in raw.get('corpus', [])
        )
        checks = raw.get('checks', ['all'])
        if isinstance(checks, str):
            checks = [checks]
        level_range = raw.get('level_range')
        return RunConfig(
            d=int(raw['d']),
            K=int(raw['K']),
            n=int(raw['n']),
            seed=int(raw.get('seed', 0)),
            lambda_grid=tuple(float(x) for x in raw.get('lambda_grid', (1.0, 2.0, 4.0, 8.0))),
            lambda_mode=str(raw.get('lambda_mode', 'relative')),
            level_range=tuple(int(x) for x in level_range) if level_range is not None else None,
            corpus=corpus,
            checks=tuple(str(c) for c in checks),
            output_dir=str(raw.get('output_dir', 'results')),
            boundary_mode=str(raw.get('boundary_mode', 'periodic')),
            omega_mode=raw.get('omega_mode', 'exhaustive'),
            tolerances={str(k): float(v) for k, v in raw.get('tolerances', {}).items()},
            jobs=int(raw.get('jobs', 1)),
            p_list=tuple(float(p) for p in raw.get('p_list', (1.5, 2.0, 4.0))),
            stability_depths=tuple(int(k) for k in raw.get('stability_depths', ())),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"Malformed run configuration: {e}")


def load_run_config(path: Union[str, Path], known_checks=None, **guards) -> RunConfig:
    """Load, validate and return the run configuration stored at path"""
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"Configuration file not found: {path}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"Configuration file is not valid JSON: {e}")

    # Only the output directory may come from the environment
    load_dotenv()
    env_output = os.getenv(OUTPUT_DIR_ENV)
    if env_output:
        raw = dict(raw, output_dir=env_output)

    return parse_run_config(raw).validate(known_checks=known_checks, **guards)
