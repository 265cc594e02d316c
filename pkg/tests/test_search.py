from __future__ import annotations

import math

import pytest

from fatoucon.mapcore import MapParams
from fatoucon.orbits import RegimeViolation
from fatoucon.search import (
    NotFoundInRange,
    UnrealizableRequest,
    _scan_settings,
    default_ray_angle,
    find_lambda_for_m,
    required_m,
    ring_index,
)

MILNOR_HALF = MapParams(2, 3, 0.5)
ARCHETYPE = MapParams(2, 3, 0.9 + 0.6j)


@pytest.mark.parametrize("j,l,m", [(0, 0, 1), (1, 0, 1), (1, 1, 2), (1, 3, 4), (2, 3, 3), (3, 3, 2)])
def test_required_m(j, l, m):
    assert required_m(j, l) == m


def test_unrealizable_requests():
    with pytest.raises(UnrealizableRequest):
        required_m(0, 2)
    with pytest.raises(UnrealizableRequest):
        required_m(-1, 0)


def test_default_ray():
    assert default_ray_angle(ARCHETYPE) == pytest.approx(math.pi)
    assert default_ray_angle(MapParams(3, 2, 0.5, (1.0, -0.5))) == 0.0


def test_argument_validation():
    with pytest.raises(ValueError):
        find_lambda_for_m(MILNOR_HALF, 0)
    with pytest.raises(ValueError):
        find_lambda_for_m(MILNOR_HALF, 1, t_hi=1e-10, t_lo=1e-9)


def test_ring_index_on_archetype():
    pt, _ = ring_index(ARCHETYPE, -1e-7, _scan_settings(512))
    assert pt.status == "captured" and pt.r == 2


def test_ring_index_outside_regime():
    with pytest.raises(RegimeViolation):
        ring_index(ARCHETYPE, -0.3, _scan_settings(256))


@pytest.fixture(scope="module")
def short_search():
    return find_lambda_for_m(MILNOR_HALF, 1, t_hi=1e-9, t_lo=1e-10, scan_resolution=512, resolution=1024)


def test_search_certificate(short_search):
    res = short_search
    lam = res.lambda_found
    assert lam.imag == 0 and lam.real < 0
    lo, hi = res.band
    assert lo <= abs(lam) <= hi
    assert res.verification.k == 1 and res.verification.u_nu_surrounds
    assert res.analysis.u_nu_surrounds


def test_scan_is_geometric_and_ordered(short_search):
    ts = [s.t for s in short_search.scan]
    assert ts[0] == pytest.approx(1e-9)
    assert ts[1] == pytest.approx(0.8e-9)
    # every probe that resolved a ring index found r = 1 inside the band
    assert {s.r for s in short_search.scan if s.r is not None} == {1}


def test_not_found_reports_seen_indices():
    with pytest.raises(NotFoundInRange, match=r"\[2\]"):
        find_lambda_for_m(ARCHETYPE, 1, t_hi=1e-7, t_lo=5e-8, scan_resolution=512)
