"""
Main application class - orchestrates configuration, corpus, checks and storage
"""

import json
import logging
from dataclasses import replace
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from czlab import configure_logging
from czlab.config import RunConfig, config_manager, load_config
from czlab.exceptions import ConfigError, InvalidInput
from czlab.models.base import _plain
from czlab.models.field import OperatorField
from czlab.services import checks, corpus, storage
from czlab.services.oracle import ScalarOracle
from czlab.services.runner import CheckRunner, RunResult
from czlab.utils.validators import validate_choice, validate_jobs, validate_seed

logger = logging.getLogger(__name__)


class LabApp:
    """Application object behind the command-line entry point"""

    def __init__(self, log_level: str = None):
        configure_logging(log_level or config_manager.get_app_config('LOG_LEVEL'))

    def load(self, config_path, seed=None, output_dir=None, jobs=None) -> RunConfig:
        """Run configuration with the command-line overrides applied"""
        config = load_config(config_path, known_checks=checks.known_checks())
        overrides = {}
        if seed is not None:
            overrides['seed'] = validate_seed(seed)
        if output_dir is not None:
            overrides['output_dir'] = str(output_dir)
        if jobs is not None:
            overrides['jobs'] = validate_jobs(jobs)
        return replace(config, **overrides) if overrides else config

    def run(self, config: RunConfig) -> RunResult:
        """Execute the selected checks and write every artifact to output_dir"""
        logger.info("Run: d=%d K=%d n=%d seed=%d boundary=%s", config.d, config.K, config.n,
                    config.seed, config.boundary_mode)
        result = CheckRunner(config).run()
        storage.write_run_outputs(result.reports, config.output_dir, config, result.exit_status)
        return result

    def gen(self, config: RunConfig, out_dir, bundles: bool = False) -> List[Path]:
        """Write every corpus instance as a field file, optionally with its decompositions"""
        out_dir = Path(out_dir)
        context = checks.CheckContext(config)
        written, index = [], []
        for instance in context.corpus:
            stem = f"{instance.family}_{instance.index}"
            written.append(storage.save_field(instance.field, out_dir / f"{stem}{storage.FIELD_SUFFIX}"))
            entry = {'file': written[-1].name, **context.describe(instance)}
            if bundles:
                entry['bundles'] = []
                for j, (name, _, lam, bundle) in enumerate(context.decompositions(instance.field)):
                    path = out_dir / f"{stem}_{name}_lam{j}{storage.BUNDLE_SUFFIX}"
                    written.append(storage.save_bundle(bundle, path))
                    entry['bundles'].append({'file': path.name, 'part': name, 'lambda': lam})
            index.append(entry)
        (out_dir / 'index.json').write_text(json.dumps(_plain(index), indent=2, sort_keys=True))
        logger.info("Generated %d instances into %s", len(context.corpus), out_dir)
        return written

    def check(self, source, check_id: str, lambda_grid=None, seed: int = 0,
              jobs: int = None) -> RunResult:
        """One check on a stored bundle (its own lambda) or field (the default lambda grid)"""
        check_id = validate_choice(check_id, checks.known_checks(), 'check_id')
        spec = checks.REGISTRY[check_id]
        if spec.scope == checks.AGGREGATE_SCOPE:
            raise ConfigError(f"{check_id} aggregates a full run and cannot run on one file",
                              'check_id')
        source = Path(source)
        bundle = storage.load_bundle(source) if source.suffix == storage.BUNDLE_SUFFIX else None
        field = bundle.f if bundle is not None else storage.load_field(source)
        config = self._stored_config(field, check_id, bundle.lam if bundle else None,
                                     lambda_grid, seed, jobs)
        # a stored field stands in for the family a restricted check expects
        family = spec.families[0] if spec.families else 'stored'
        instance = corpus.CorpusInstance(family, 0, field, {'source': source.name})
        context = checks.CheckContext(config, [instance])
        if bundle is not None:
            context.remember(bundle)
        return CheckRunner(config, context).run()

    def _stored_config(self, field: OperatorField, check_id: str, lam: Optional[float],
                       lambda_grid, seed: int, jobs: Optional[int]) -> RunConfig:
        guard = config_manager.get_app_config('RESOLUTION_GUARD')
        if field.domain.K < guard:
            raise InvalidInput(f"Depth {field.domain.K} is below the resolution guard", 'field')
        values = {'d': field.domain.d, 'K': field.domain.K, 'n': field.n,
                  'boundary_mode': field.domain.boundary_mode, 'checks': (check_id,),
                  'seed': validate_seed(seed), 'jobs': validate_jobs(jobs) or 1}
        if lam is not None:
            values.update(lambda_grid=(float(lam),), lambda_mode='absolute')
        elif lambda_grid:
            values['lambda_grid'] = tuple(float(x) for x in lambda_grid)
        return RunConfig(**values)

    def oracle(self, source, op_id: str, params: Dict = None) -> Dict:
        """Scalar reference value of an operation on a stored n = 1 field"""
        op_id = validate_choice(op_id, ScalarOracle.OPERATIONS, 'op_id')
        field = storage.load_field(source)
        value = ScalarOracle.for_field(field, config_manager.get_app_config('BALL_SUBSAMPLING')
                                       ).evaluate(op_id, field, params)
        if isinstance(value, dict):
            value = {str(k): np.asarray(v) for k, v in value.items()}
        return {'op_id': op_id, 'params': dict(params or {}), 'value': _plain(value)}
