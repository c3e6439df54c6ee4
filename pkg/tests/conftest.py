import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ep_annulus.background import InletData  # noqa: E402
from ep_annulus.grid import Grid2D  # noqa: E402
from ep_annulus.section import AxisymBackground  # noqa: E402

SUBSONIC = InletData(gamma=2.0, rho0=1.0, u10=0.5, u20=0.5, a0=1.0, e0=0.1, b0=0.5)
TRANSONIC = InletData(gamma=5 / 3, rho0=1.0, u10=0.8, u20=1.5, a0=1.0, e0=0.1, b0=0.5)


@pytest.fixture(scope="session")
def subsonic_inlet():
    return SUBSONIC


@pytest.fixture(scope="session")
def transonic_inlet():
    return TRANSONIC


_BG_CACHE = {}


def background(inlet, n):
    key = (inlet, n)
    if key not in _BG_CACHE:
        _BG_CACHE[key] = AxisymBackground.from_inlet(inlet, Grid2D(n, n, inlet.r0, inlet.r1))
    return _BG_CACHE[key]


@pytest.fixture(scope="session")
def bg33():
    return background(SUBSONIC, 33)


@pytest.fixture(scope="session")
def bg65():
    return background(SUBSONIC, 65)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
