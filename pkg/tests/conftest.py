from __future__ import annotations

import os
import sys

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

MILNOR_CUBIC = dict(n=2, d=3, a=0.9 + 0.6j, q_coeffs=(1.0,), lam=-1e-7)
MILNOR_WINDOW = (0.3 + 0.2j, 2.6)


@pytest.fixture(scope="session")
def milnor_plane():
    from fatoucon.mapcore import MapParams
    from fatoucon.orbits import radii_model
    from fatoucon.plane import PlaneSettings, analyze_plane
    from fatoucon.raster import Window
    from fatoucon.roots import critical_set

    p = MapParams(**MILNOR_CUBIC)
    r = radii_model(p)
    c = critical_set(p)
    win = Window(MILNOR_WINDOW[0], MILNOR_WINDOW[1], MILNOR_WINDOW[1])
    return analyze_plane(p, r, c, PlaneSettings(resolution=1024, global_window=win))


# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE: dict = {}


def record_acceptance(key: str, passed: bool, detail: str) -> None:
    ACCEPTANCE[key] = (bool(passed), detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {detail}")
