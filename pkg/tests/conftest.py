"""
Shared fixtures: repository root on sys.path, the 'testing' environment and a
fresh configuration for every test.
"""

import os
import sys

import pytest

ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), '..'))
if ROOT not in sys.path:
    sys.path.insert(0, ROOT)

os.environ['LEVY_ENVIRONMENT'] = 'testing'

from src.catalog.processes import make_named, make_stable  # noqa: E402
from src.config import reset_config, run_configurations  # noqa: E402
from src.mc.records import PathConfig  # noqa: E402


@pytest.fixture(autouse=True)
def fresh_config():
    reset_config()
    run_configurations.set_active_config('quick')
    yield
    reset_config()


@pytest.fixture
def cauchy():
    return make_stable(1.0, 3)


@pytest.fixture
def brownian():
    return make_stable(2.0, 3)


@pytest.fixture
def relativistic():
    return make_named('relativistic', {'alpha': 1.0, 'm': 1.0}, 3)


@pytest.fixture
def small_run():
    """Few replicas with a coarse step, for fast Monte Carlo tests"""
    return PathConfig.from_config(seed=11, n_replicas=2000, dt=1e-3, block_size=500)
