"""Parameter hunting: find lambda on a ray whose free critical point lies in
the m-th nested preimage of the annulus, so that k = m.

The scan walks t = |lambda| down geometrically.  At each candidate the ring
index r(lambda) is the capture depth k, counted only when the component of
the free critical point surrounds the origin.  Bands of constant r are
multiplicatively spaced; the band edges are refined by bisection in log t and
the returned parameter is the geometric middle of the band.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

from .connectivity import (
    GUARANTEED,
    ConnectivityWitness,
    DegenerateItinerary,
    ItineraryRecord,
    NotCaptured,
    UnresolvedIterate,
    critical_itinerary,
    kappa_of,
    status_of,
)
from .mapcore import MapParams
from .orbits import RegimeViolation, radii_model
from .plane import PlaneAnalysis, PlaneSettings, analyze_plane
from .roots import AmbiguousPartition, critical_set

__all__ = [
    "SearchError",
    "NotFoundInRange",
    "NonSurroundingCapture",
    "CertificateFailed",
    "UnrealizableRequest",
    "ScanPoint",
    "SearchResult",
    "Realization",
    "default_ray_angle",
    "ring_index",
    "find_lambda_for_m",
    "required_m",
    "realize_connectivity",
]


class SearchError(RuntimeError):
    pass


class NotFoundInRange(SearchError):
    pass


class NonSurroundingCapture(SearchError):
    pass


class CertificateFailed(SearchError):
    pass


class UnrealizableRequest(ValueError):
    pass


@dataclass
class ScanPoint:
    t: float
    lam: complex
    status: str          # captured | non_surrounding | escaping | degenerate | unresolved | ambiguous
    k: Optional[int] = None

    @property
    def r(self) -> Optional[int]:
        return self.k if self.status == "captured" else None


@dataclass
class SearchResult:
    lambda_found: complex
    m: int
    verification: ItineraryRecord
    requested: Optional[ConnectivityWitness]
    band: tuple = (0.0, 0.0)
    scan: list = field(default_factory=list)
    analysis: Optional[PlaneAnalysis] = field(default=None, repr=False)


def default_ray_angle(p0: MapParams) -> float:
    """Negative real ray for Q constant (the Milnor-type maps are usually
    drawn with negative lambda), positive real ray otherwise."""
    return math.pi if p0.deg_q == 0 else 0.0


def _scan_settings(res: int) -> PlaneSettings:
    return PlaneSettings(resolution=res, stability=False, zooms=False, min_pixels=1)


def ring_index(p0: MapParams, lam: complex, settings: PlaneSettings, keep: bool = False):
    """(ScanPoint, analysis or None).  RegimeViolation propagates."""
    p = p0.with_lambda(lam)
    t = abs(lam)
    radii = radii_model(p)
    try:
        crit = critical_set(p)
    except AmbiguousPartition:
        return ScanPoint(t, lam, "ambiguous"), None
    pa = analyze_plane(p, radii, crit, settings)
    try:
        it = critical_itinerary(p, radii, crit, pa)
    except NotCaptured:
        return ScanPoint(t, lam, "escaping"), (pa if keep else None)
    except DegenerateItinerary:
        return ScanPoint(t, lam, "degenerate"), (pa if keep else None)
    except UnresolvedIterate:
        return ScanPoint(t, lam, "unresolved"), (pa if keep else None)
    status = "captured" if it.u_nu_surrounds else "non_surrounding"
    pt = ScanPoint(t, lam, status, it.k)
    return pt, ((pa, it) if keep else None)


def _bisect(f, t_out: float, t_in: float, rel: float, steps: int) -> float:
    """Shrink [t_out, t_in] (either order) around the edge of f; returns the
    inner end."""
    for _ in range(steps):
        if max(t_out, t_in) / min(t_out, t_in) <= 1 + rel:
            break
        mid = math.sqrt(t_out * t_in)
        if f(mid):
            t_in = mid
        else:
            t_out = mid
    return t_in


def find_lambda_for_m(
    p0: MapParams,
    m: int,
    ray_angle: Optional[float] = None,
    t_hi: float = 1e-6,
    t_lo: float = 1e-12,
    scan_resolution: int = 512,
    resolution: int = 1024,
    factor: float = 0.8,
    max_bisect: int = 60,
    rel: float = 0.02,
    log: Optional[Callable[[str], None]] = None,
) -> SearchResult:
    if m < 1:
        raise ValueError("m must be >= 1")
    if not t_hi > t_lo > 0:
        raise ValueError("need t_hi > t_lo > 0")
    say = log or (lambda msg: None)
    theta = default_ray_angle(p0) if ray_angle is None else float(ray_angle)
    u = cmath.exp(1j * theta)
    # keep lambda exactly real or imaginary on the axes
    u = complex(0.0 if abs(u.real) < 1e-15 else u.real, 0.0 if abs(u.imag) < 1e-15 else u.imag)
    ss = _scan_settings(scan_resolution)
    scan: list[ScanPoint] = []

    def probe(t: float) -> ScanPoint:
        pt, _ = ring_index(p0, t * u, ss)
        scan.append(pt)
        say(f"scan t={t:.6e} status={pt.status} k={pt.k}")
        return pt

    def in_band(t: float) -> bool:
        return probe(t).r == m

    # coarse geometric walk down to the first t with r = m
    t = t_hi
    prev = None
    hit = None
    while t >= t_lo:
        pt = probe(t)
        if pt.r == m:
            hit = t
            break
        prev = t
        t *= factor
    if hit is None:
        if any(s.status == "non_surrounding" and s.k == m for s in scan):
            raise NonSurroundingCapture(
                f"free critical point reaches Bdd(A) in {m} steps only from non-surrounding components "
                f"on the ray arg(lambda)={theta:.6g}; try another ray_angle")
        seen = sorted({s.r for s in scan if s.r is not None})
        raise NotFoundInRange(f"no t in [{t_lo:.3e}, {t_hi:.3e}] with r = {m}; ring indices seen: {seen}")
    upper = hit if prev is None else _bisect(in_band, prev, hit, rel, max_bisect)

    # gallop downward to the far edge of the band, then bisect it
    step = factor
    last_in, out = hit, None
    while True:
        t = last_in * step
        if t < t_lo:
            break
        if in_band(t):
            last_in = t
            step *= step
        else:
            out = t
            break
    lower = last_in if out is None else _bisect(in_band, out, last_in, rel, max_bisect)

    centre = math.sqrt(upper * lower)
    say(f"band t in [{lower:.6e}, {upper:.6e}], centre {centre:.6e}")
    candidates = [centre] + sorted({s.t for s in scan if s.r == m},
                                   key=lambda x: abs(math.log(x / centre)))
    full = PlaneSettings(resolution=resolution)
    for tc in candidates:
        pt, got = ring_index(p0, tc * u, full, keep=True)
        say(f"verify t={tc:.6e} at {resolution}: status={pt.status} k={pt.k}")
        if pt.r == m and got is not None:
            pa, it = got
            return SearchResult(tc * u, m, it, None, (lower, upper), scan, pa)
    raise CertificateFailed(f"no in-band parameter re-verified at resolution {resolution}")


def required_m(j: int, l: int) -> int:
    if j < 0 or l < 0:
        raise UnrealizableRequest("exponents must be non-negative")
    if j == 0:
        if l > 0:
            raise UnrealizableRequest("j = 0 forces l = 0 (l <= j (k - 1))")
        return 1
    return -(-l // j) + 1


@dataclass
class Realization:
    result: SearchResult
    witness: ConnectivityWitness
    matches: list = field(default_factory=list)   # ComponentRecords with kappa == target
    resolution_insufficient: bool = False


def realize_connectivity(
    p0: MapParams,
    i: int,
    j: int,
    l: int,
    ray_angle: Optional[float] = None,
    t_hi: float = 1e-6,
    t_lo: float = 1e-12,
    scan_resolution: int = 512,
    resolution: int = 1024,
    log: Optional[Callable[[str], None]] = None,
    settings: Optional[PlaneSettings] = None,
) -> Realization:
    if i < 0:
        raise UnrealizableRequest("exponents must be non-negative")
    m = required_m(j, l)
    res = find_lambda_for_m(p0, m, ray_angle, t_hi, t_lo, scan_resolution, resolution, log=log)
    kappa = kappa_of(p0.n, p0.d, i, j, l)
    w = ConnectivityWitness(i, j, l, kappa, status_of(j, l, m))
    assert w.status == GUARANTEED
    res.requested = w
    pa = res.analysis
    if settings is not None:
        # final measurement at the caller's resolution
        p = p0.with_lambda(res.lambda_found)
        radii = radii_model(p)
        crit = critical_set(p)
        pa = analyze_plane(p, radii, crit, settings, log)
        res.analysis = pa
    matches = [r for r in pa.records if r.connectivity == kappa and r.resolved]
    return Realization(res, w, matches, resolution_insufficient=not matches)
