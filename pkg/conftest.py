"""Shared fixtures for the delay-margin test scripts."""

import math
import os

import numpy as np
import pytest

from rekasius_sweep import SweepConfig, analyze
from system_model import RetardedSystem

DATA_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'data')

LITERATURE_A0 = [[-1.0, 13.5, -1.0], [-3.0, -1.0, -2.0], [-2.0, -1.0, -4.0]]
LITERATURE_A1 = [[-5.9, 7.1, -70.3], [2.0, -1.0, 5.0], [2.0, 0.0, 6.0]]

# (T, w, label, tau_0, tau_1) for the literature system. The last row uses the
# unrounded crossing: w = 0.8407 and T = -0.1332 rounded to four digits give
# tau_0 = 7.2085, while the exact crossing and both methods give 7.2105.
LITERATURE_CROSSINGS = [
    (0.0829, 3.0347, 'Unstable', 0.1624, 2.233),
    (0.0953, 2.9123, 'Stable', 0.1859, 2.343),
    (-0.4269, 15.5032, 'Unstable', 0.2219, 0.6272),
    (0.6233, 2.1109, 'Unstable', 0.8725, 3.849),
    (-0.1332, 0.8407, 'Stable', 7.2105, 14.6842),
]

SCALAR_MARGIN = 2.0 * math.pi / (3.0 * math.sqrt(3.0))


def small_grid(**overrides) -> SweepConfig:
    settings = dict(t_min=-2.0, t_max=2.0, t_step=1e-3, auto_widen=False, workers=1)
    settings.update(overrides)
    return SweepConfig(**settings)


@pytest.fixture
def data_dir():
    return DATA_DIR


@pytest.fixture
def scalar_system():
    return RetardedSystem.from_arrays([[-1.0]], [[-2.0]])


@pytest.fixture
def literature_system():
    return RetardedSystem.from_arrays(np.array(LITERATURE_A0), np.array(LITERATURE_A1))


@pytest.fixture(scope='session')
def literature_report():
    system = RetardedSystem.from_arrays(np.array(LITERATURE_A0), np.array(LITERATURE_A1))
    return analyze(system, small_grid())


@pytest.fixture(scope='session')
def scalar_report():
    system = RetardedSystem.from_arrays([[-1.0]], [[-2.0]])
    return analyze(system, small_grid())


def pytest_configure(config):
    config.addinivalue_line('markers', 'slow: long-running comparison over many random systems')
