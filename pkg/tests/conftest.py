"""
Shared fixtures for the majority lab test suite.
"""

import pytest

from majority import metrics
from majority.models import ExperimentConfig


@pytest.fixture
def tiny_config():
    """n = 2 (four agents), λ = 1, three rounds, seed 2024."""
    return ExperimentConfig(n=2, lam=1.0, xi=0.5, rounds=3, master_seed=2024)


@pytest.fixture
def small_config():
    """A configuration small enough for fast multi-trial tests."""
    return ExperimentConfig(n=50, lam=1.0, rounds=3, master_seed=11)


@pytest.fixture
def metric_value():
    """Read a sample from the isolated metrics registry (0.0 when unset)."""
    def read(name, labels=None):
        value = metrics.registry.get_sample_value(name, labels or {})
        return 0.0 if value is None else value
    return read
