import numpy as np
import pytest

from phaseless_sis.generators import Chirp, ChirpRealPart, CubicBSpline


@pytest.fixture
def chirp4():
    return Chirp(4.0, 0.8, 1.0)


@pytest.fixture
def chirp50():
    return Chirp(50.0, 0.8, 1.0)


@pytest.fixture
def real10():
    return ChirpRealPart(10.0, -0.238, 1.0)


@pytest.fixture
def spline():
    return CubicBSpline()


def unit_disk(rng, n):
    return np.sqrt(rng.random(n)) * np.exp(2j * np.pi * rng.random(n))


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
