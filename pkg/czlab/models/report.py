"""
Verification results: one CheckReport per executed check, DecaySweep for
the slope-based checks
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
from scipy import stats

from czlab.exceptions import InvalidInput
from czlab.models.base import BaseModel, _plain

EXACT = 'exact'
EMPIRICAL = 'empirical'
DECAY = 'decay'
AGGREGATE = 'aggregate'
ERROR = 'error'

MIN_SWEEP_SAMPLES = 4


@dataclass(frozen=True)
class DecaySweep(BaseModel):
    """log2(ratio) against a parameter, with its least-squares slope"""
    parameter: str
    samples: Tuple[Tuple[float, float], ...]
    fitted_log2_slope: float
    intercept: float = 0.0
    residual: float = 0.0
    label: str = ''
    zero_samples: int = 0
    nonfinite_samples: int = 0

    @classmethod
    def fit(cls, parameter: str, samples, label: str = '') -> 'DecaySweep':
        """Fit log2(ratio) = slope * param + intercept over the positive ratios

        Zero ratios are left out of the fit and counted. A sweep with a
        non-finite ratio, or with fewer than two positive ratios, has no
        slope: it is fitted as NaN and fails every decay window.
        """
        samples = tuple((float(x), float(y)) for x, y in samples)
        if len(samples) < MIN_SWEEP_SAMPLES:
            raise InvalidInput(
                f"A decay sweep needs at least {MIN_SWEEP_SAMPLES} samples, got {len(samples)}",
                'samples')
        nonfinite = sum(1 for _, y in samples if not math.isfinite(y))
        zeros = sum(1 for _, y in samples if y == 0)
        usable = [(x, y) for x, y in samples if y > 0 and math.isfinite(y)]
        xs = np.array([x for x, _ in usable])
        if nonfinite or len(usable) < 2 or np.ptp(xs) == 0:
            return cls(parameter, samples, math.nan, math.nan, math.nan, label, zeros, nonfinite)
        ys = np.log2([y for _, y in usable])
        result = stats.linregress(xs, ys)
        predicted = result.intercept + result.slope * xs
        residual = float(np.sqrt(np.mean((ys - predicted) ** 2)))
        return cls(parameter, samples, float(result.slope), float(result.intercept), residual, label,
                   zeros, nonfinite)

    @property
    def fitted(self) -> bool:
        return not math.isnan(self.fitted_log2_slope)

    def rows(self) -> List[Tuple[float, float]]:
        return list(self.samples)


@dataclass(frozen=True)
class CheckReport(BaseModel):
    """The outcome of one check on one instance"""
    check_id: str
    instance: Dict
    measured: float
    bound: Union[float, str]
    passed: bool
    tolerance: float = 0.0
    kind: str = EXACT
    acceptance: bool = True
    ratio: Optional[float] = None
    details: Dict = field(default_factory=dict)
    sweeps: Tuple[DecaySweep, ...] = ()
    schema_version: str = '1.0'

    @classmethod
    def exact(cls, check_id: str, instance: Dict, measured: float, bound: float,
              tolerance: float, **extra) -> 'CheckReport':
        """Pass iff measured <= bound (1 + tolerance)"""
        measured = float(measured)
        bound = float(bound)
        ratio = measured / bound if bound > 0 else None
        return cls(check_id, instance, measured, bound, measured <= bound * (1.0 + tolerance),
                   tolerance, EXACT, ratio=ratio, **extra)

    @classmethod
    def residual(cls, check_id: str, instance: Dict, residual: float, threshold: float,
                 **extra) -> 'CheckReport':
        """Pass iff an identity residual is at most threshold"""
        residual = float(residual)
        return cls(check_id, instance, residual, float(threshold), residual <= threshold,
                   float(threshold), EXACT, **extra)

    @classmethod
    def empirical(cls, check_id: str, instance: Dict, measured: float, cap: float,
                  **extra) -> 'CheckReport':
        """An implicit constant: reported, and bounded by a generous cap"""
        measured = float(measured)
        details = dict(extra.pop('details', {}))
        details['cap'] = float(cap)
        return cls(check_id, instance, measured, EMPIRICAL,
                   math.isfinite(measured) and measured <= cap, 0.0, EMPIRICAL,
                   details=details, **extra)

    @classmethod
    def decay(cls, check_id: str, instance: Dict, sweeps: List[DecaySweep], window: float,
              **extra) -> 'CheckReport':
        """Pass iff every sweep has a slope and each is at most the window

        measured is the worst slope, NaN when some sweep could not be fitted.
        """
        details = dict(extra.pop('details', {}))
        details['zero_samples'] = {sweep.label: sweep.zero_samples for sweep in sweeps}
        unfitted = [sweep.label for sweep in sweeps if not sweep.fitted]
        if unfitted:
            details['unfitted_sweeps'] = unfitted
            worst = math.nan
        else:
            worst = max(sweep.fitted_log2_slope for sweep in sweeps)
        return cls(check_id, instance, worst, float(window), not unfitted and worst <= window,
                   0.0, DECAY, details=details, sweeps=tuple(sweeps), **extra)

    @classmethod
    def failure(cls, check_id: str, instance: Dict, error: Dict, acceptance: bool = True) -> 'CheckReport':
        return cls(check_id, instance, math.nan, 'error', False, 0.0, ERROR,
                   acceptance=acceptance, details={'error': error})

    def with_acceptance(self, acceptance: bool) -> 'CheckReport':
        return CheckReport(**{**self.__dict__, 'acceptance': acceptance})

    def require(self, condition: bool) -> 'CheckReport':
        """The same report, failing when a side condition does not hold"""
        return self if condition else CheckReport(**{**self.__dict__, 'passed': False})

    def with_details(self, **extra) -> 'CheckReport':
        return CheckReport(**{**self.__dict__, 'details': {**self.details, **extra}})

    def to_dict(self) -> Dict:
        data = super().to_dict()
        data['pass'] = data.pop('passed')
        data['sweeps'] = [sweep.to_dict() for sweep in self.sweeps]
        data['measured'] = _plain(self.measured) if math.isfinite(self.measured) else str(self.measured)
        return data

    def summary_row(self) -> Dict:
        """Flat record for the CSV and workbook summaries"""
        row = {
            'check_id': self.check_id,
            'kind': self.kind,
            'measured': self.measured,
            'bound': self.bound,
            'ratio': self.ratio,
            'pass': self.passed,
            'acceptance': self.acceptance,
            'tolerance': self.tolerance,
        }
        for key, value in self.instance.items():
            row[f'instance.{key}'] = _plain(value) if not isinstance(value, (list, tuple)) else str(value)
        return row
