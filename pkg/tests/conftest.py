"""
Shared fixtures: small domains, seeded generators and ready-made fields
"""

import numpy as np
import pytest

from czlab.config import config_manager
from czlab.config.run_config import CorpusSpec, RunConfig
from czlab.models.field import OperatorField
from czlab.models.geometry import DyadicDomain
from czlab.services import corpus


@pytest.fixture(autouse=True)
def reset_config():
    """Every test starts from the shipped tolerances"""
    config_manager.reset()
    yield
    config_manager.reset()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def line():
    return DyadicDomain(1, 6)


@pytest.fixture
def plane():
    return DyadicDomain(2, 4)


@pytest.fixture
def psd_field(line, rng):
    return corpus.random_psd(line, 2, rng)


@pytest.fixture
def spike_field(line, rng):
    field, _ = corpus.spike(line, 2, rng, support_fraction=1.0 / 16)
    return field


@pytest.fixture
def scalar_field(line, rng):
    return corpus.diagonal(line, 1, rng, profile='random')


@pytest.fixture
def hermitian_field(line, rng):
    """A Hermitian field that is not positive"""
    return OperatorField(line, line.K, corpus.random_hermitian(rng, line.shape(), 2))


def small_config(**overrides) -> RunConfig:
    values = dict(d=1, K=6, n=2, seed=3, corpus=(CorpusSpec('random_psd', 1),),
                  lambda_grid=(1.0, 4.0), checks=('all',))
    values.update(overrides)
    return RunConfig(**values)


@pytest.fixture
def config_factory():
    return small_config
