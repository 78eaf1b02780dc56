import numpy as np
import pytest

from svfractal.partition import Partition
from svfractal.rb import FractalSystem, fixed_point
from svfractal.setfunc import SetFunction, base_function

BAND = ("t^2+1", "t^2+2")
BAND_BASE = ("t^2+1-t*(1-t)", "t^2+2+t*(1-t)")
BUMP = ("1-t*(1-t)", "1+t*(1-t)")
BUMP_H = "1+t*(1-t)"


def band_system(alpha=0.5, N=24, grid_size=4097):
    p = Partition.dyadic(N=N)
    phi = SetFunction.from_envelopes(*BAND, p, grid_size)
    base = SetFunction.from_envelopes(*BAND_BASE, p, grid_size)
    return FractalSystem(phi, base, alpha, p)


def bump_system(alpha=0.5, N=24, grid_size=4097):
    """Single-valued, equal endpoint values: the interpolating regime."""
    p = Partition.dyadic(N=N)
    phi = SetFunction.from_envelopes(*BUMP, p, grid_size)
    return FractalSystem(phi, base_function(phi, BUMP_H, p), alpha, p, interpolating=True)


@pytest.fixture(scope="session")
def band():
    sys = band_system()
    return sys, fixed_point(sys, 1e-10)


@pytest.fixture(scope="session")
def bump():
    sys = bump_system()
    return sys, fixed_point(sys, 1e-10)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not mod.VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(mod.VERDICTS):
        terminalreporter.write_line(mod.VERDICTS[k])
