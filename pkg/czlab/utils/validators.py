"""
Input validation helpers for command-line arguments
"""

import json
from typing import Dict, Optional, Sequence, Tuple

from czlab.exceptions import ConfigError


def validate_seed(seed) -> int:
    """A nonnegative integer seed"""
    try:
        value = int(seed)
    except (TypeError, ValueError):
        raise ConfigError(f"Seed must be an integer, got {seed!r}", 'seed')
    if value < 0:
        raise ConfigError("Seed must be nonnegative", 'seed')
    return value


def validate_jobs(jobs) -> Optional[int]:
    if jobs is None:
        return None
    if int(jobs) < 1:
        raise ConfigError("--jobs must be positive", 'jobs')
    return int(jobs)


def parse_params(text: Optional[str]) -> Dict:
    """Operation parameters given as a JSON object or as k=v pairs

    'k=2,n=4' and '{"k": 2, "n": 4}' both give {'k': 2, 'n': 4}; values
    that look like JSON (numbers, lists, booleans) are decoded as such.
    """
    if not text:
        return {}
    text = text.strip()
    if text.startswith('{'):
        try:
            params = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"Parameters are not valid JSON: {e}", 'params')
        if not isinstance(params, dict):
            raise ConfigError("Parameters must be an object", 'params')
        return params
    params = {}
    for item in text.split(','):
        key, sep, raw = item.partition('=')
        if not sep or not key.strip():
            raise ConfigError(f"Malformed parameter {item!r}; expected key=value", 'params')
        try:
            params[key.strip()] = json.loads(raw)
        except json.JSONDecodeError:
            params[key.strip()] = raw.strip()
    return params


def validate_choice(value: str, choices: Sequence[str], key: str) -> str:
    if value not in choices:
        raise ConfigError(f"Unknown {key} {value!r}; expected one of {', '.join(choices)}", key)
    return value


def validate_level_pair(params: Dict, K: int) -> Tuple[int, int]:
    """(k, n) from parameters, each within [0, K]"""
    k = int(params.get('k', 0))
    n = int(params.get('n', k))
    for name, value in (('k', k), ('n', n)):
        if not 0 <= value <= K:
            raise ConfigError(f"{name} = {value} outside [0, {K}]", name)
    return k, n
