"""Integer side of the connectivity results: which kappa are reachable for a
given capture depth k, Riemann-Hurwitz propagation along preimages, and the
consistency checks run on a measured component digraph."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .mapcore import MapParams, rat_eval

__all__ = [
    "GUARANTEED",
    "POSSIBLE",
    "EXCLUDED",
    "ItineraryError",
    "NotCaptured",
    "DegenerateItinerary",
    "UnresolvedIterate",
    "ItineraryRecord",
    "ConnectivityWitness",
    "CheckResult",
    "critical_itinerary",
    "kappa_of",
    "status_of",
    "enumerate_attainable",
    "factorizations",
    "propagate_rh",
    "verify_measured",
    "digraph_checks",
    "KAPPA_CAP",
]

GUARANTEED = "GUARANTEED"
POSSIBLE = "POSSIBLE"
EXCLUDED = "EXCLUDED"
KAPPA_CAP = 2 ** 63 - 1

STEP_DEGREE = {"U_NP1": lambda n, d: n + 1, "U_N": lambda n, d: n,
               "U_D": lambda n, d: d, "U_1": lambda n, d: 1}


class ItineraryError(RuntimeError):
    pass


class NotCaptured(ItineraryError):
    pass


class DegenerateItinerary(ItineraryError):
    pass


class UnresolvedIterate(ItineraryError):
    pass


@dataclass
class ItineraryRecord:
    k: int
    steps: list
    u_nu_surrounds: bool
    terminal: str
    orbit: list = field(default_factory=list)


@dataclass(frozen=True)
class ConnectivityWitness:
    i: int
    j: int
    l: int
    kappa: int
    status: str


@dataclass
class CheckResult:
    name: str
    passed: bool
    checked: int = 0
    details: list = field(default_factory=list)


# ---------------------------------------------------------------------------
# itinerary

_STEP_TAG = {"U_N": "U_N", "U_NP1": "U_NP1"}
_TERMINAL = {"A": "LANDS_IN_A", "U_D": "LANDS_IN_UD", "T": "LANDS_IN_T"}


def critical_itinerary(p: MapParams, radii, crit, plane, max_steps: int = 64) -> ItineraryRecord:
    """Iterate the free critical point until it enters Bdd(A_lambda).

    Membership is read off the ring-window grid (the annulus together with
    everything it encloses); the other tags come from the hole structure of
    the free critical point's component in the global grid.
    """
    nu = complex(crit.nu_lambda)
    z0 = plane.zone_of(nu)
    if z0 in ("A", "T", "U_D"):
        raise DegenerateItinerary(f"free critical point already lies in zone {z0}")
    if plane.role("U_NU") is None:
        raise UnresolvedIterate("component of the free critical point is not resolved")
    num, den = p.pair
    z = nu
    steps: list[str] = []
    orbit = [nu]
    for j in range(1, max_steps + 1):
        z = complex(rat_eval(num, den, z))
        orbit.append(z)
        zone = plane.zone_of(z) if np.isfinite(z) else "A_INF"
        if zone in _TERMINAL:
            steps.append("BDD_A")
            return ItineraryRecord(j, steps, plane.u_nu_surrounds, _TERMINAL[zone], orbit)
        if zone in ("A_INF", "OFF_GRID"):
            raise NotCaptured(f"iterate {j} of the free critical point is in the basin of infinity")
        steps.append(_STEP_TAG.get(zone, "OTHER"))
    raise UnresolvedIterate(f"no entry into Bdd(A) within {max_steps} iterates")


# ---------------------------------------------------------------------------
# integer calculus

def kappa_of(n: int, d: int, i: int, j: int, l: int) -> int:
    return (n + 1) ** i * d ** j * n ** l + 2


def status_of(j: int, l: int, k: int) -> str:
    if l <= j * (k - 1):
        return GUARANTEED
    if l <= j * k:
        return POSSIBLE
    return EXCLUDED


def enumerate_attainable(p_or_nd, k: int, i_max: int, j_max: int, l_max: int) -> list[ConnectivityWitness]:
    n, d = _nd(p_or_nd)
    if k < 1:
        raise ValueError("k must be >= 1")
    out = []
    for i in range(i_max + 1):
        for j in range(j_max + 1):
            for l in range(l_max + 1):
                out.append(ConnectivityWitness(i, j, l, kappa_of(n, d, i, j, l), status_of(j, l, k)))
    return out


def _nd(p_or_nd) -> tuple[int, int]:
    if isinstance(p_or_nd, MapParams):
        return p_or_nd.n, p_or_nd.d
    n, d = p_or_nd
    return int(n), int(d)


def factorizations(kappa: int, n: int, d: int) -> list[tuple[int, int, int]]:
    """All (i, j, l) with (n+1)^i d^j n^l = kappa - 2."""
    kappa = int(kappa)
    if kappa > KAPPA_CAP:
        raise OverflowError(f"kappa {kappa} exceeds the 2^63 - 1 search cap")
    t = kappa - 2
    if t < 1:
        return []
    out = []
    i, a = 0, 1
    while a <= t:
        if t % a == 0:
            r1 = t // a
            j, b = 0, 1
            while b <= r1:
                if r1 % b == 0:
                    r2 = r1 // b
                    l, c = 0, 1
                    while c <= r2:
                        if c == r2:
                            out.append((i, j, l))
                        c *= n
                        l += 1
                b *= d
                j += 1
        a *= n + 1
        i += 1
    return out


def propagate_rh(kappa_image: int, step: str, n: int, d: int) -> int:
    """Connectivity of a critical-point-free preimage: deg (kappa - 2) + 2."""
    if kappa_image < 3:
        raise ValueError("kappa_image must be >= 3")
    return STEP_DEGREE[step](n, d) * (int(kappa_image) - 2) + 2


@dataclass
class VerifyReport:
    matched: list = field(default_factory=list)     # (uid, kappa, [(i,j,l,status)])
    violations: list = field(default_factory=list)  # (uid, kappa, evidence)
    expected_found: list = field(default_factory=list)
    expected_missing: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations


def verify_measured(records, n: int, d: int, k: Optional[int], expected_depth: int = 1) -> VerifyReport:
    """Match every resolved kappa >= 3 against the admissible forms.

    With k unknown (no capture) only kappa = 3 is admissible.  ``expected``
    lists the guaranteed values of depth i + j + l <= expected_depth, which
    any adequately zoomed run should contain.
    """
    rep = VerifyReport()
    for r in records:
        if not getattr(r, "resolved", True) or r.connectivity < 3:
            continue
        fs = factorizations(r.connectivity, n, d)
        ok = []
        for (i, j, l) in fs:
            st = status_of(j, l, k) if k else (GUARANTEED if (j, l) == (0, 0) and i == 0 else EXCLUDED)
            if st != EXCLUDED:
                ok.append((i, j, l, st))
        if ok:
            rep.matched.append((r.id, r.connectivity, ok))
        else:
            rep.violations.append((r.id, r.connectivity,
                                   f"grid={r.grid} pixels={r.pixel_count} rep={r.representative:.6g} "
                                   f"factorizations={fs}"))
    if k:
        seen = {r.connectivity for r in records if getattr(r, "resolved", True)}
        for w in enumerate_attainable((n, d), k, expected_depth, expected_depth, expected_depth):
            if w.status == GUARANTEED and w.i + w.j + w.l <= expected_depth:
                (rep.expected_found if w.kappa in seen else rep.expected_missing).append(w)
    return rep


# ---------------------------------------------------------------------------
# digraph checks on a PlaneAnalysis

def _surrounding(r) -> bool:
    return bool(r.surrounds_origin or r.contains_origin or r.role == "A_INF")


def _stable(r, min_pixels: Optional[int]) -> bool:
    if min_pixels is None:
        return bool(r.resolved)
    if r.role == "A_INF":
        return bool(r.resolved)
    return bool(r.pixel_count >= min_pixels and not r.touches_frame
                and r.twin_connectivity == r.connectivity)


def digraph_checks(plane, k: Optional[int] = None, min_pixels: Optional[int] = None) -> list[CheckResult]:
    """RH admissibility, rigidity, no-promotion, itinerary bound and the
    preimage census on the measured component digraph.

    A record takes part when it is resolved; with ``min_pixels`` the size bar
    is lowered to that value, keeping the half-resolution stability test.
    """
    p = plane.p
    n, d = p.n, p.d
    recs = plane.records
    crit_ids = plane.critical_keys()
    degrees = sorted({1, n, d, n + 1, n + d})

    rh = CheckResult("riemann_hurwitz", True)
    rig = CheckResult("non_surrounding_rigidity", True)
    nop = CheckResult("no_promotion", True)
    for u in recs:
        v = plane.by_uid(u.forward_target)
        if v is None:
            continue
        both = _stable(u, min_pixels) and _stable(v, min_pixels)
        if both and u.id not in crit_ids:
            rh.checked += 1
            lhs = u.connectivity - 2
            rhs = v.connectivity - 2
            if not any(lhs == s * rhs for s in degrees):
                rh.passed = False
                rh.details.append(f"{u.id}({u.connectivity}) -> {v.id}({v.connectivity})")
        if both and not _surrounding(u) and not _surrounding(v):
            rig.checked += 1
            if u.connectivity != v.connectivity:
                rig.passed = False
                rig.details.append(f"{u.id}({u.connectivity}) -> {v.id}({v.connectivity})")
        if not _surrounding(v) and _stable(u, min_pixels):
            nop.checked += 1
            if u.surrounds_origin:
                nop.passed = False
                nop.details.append(f"{u.id} surrounds 0 but its image {v.id} does not")

    bound = CheckResult("itinerary_bound", True)
    if k and plane.u_nu_surrounds:
        num, den = p.pair
        target = plane.role("U_NU")
        for u in recs:
            if not (_stable(u, min_pixels) and u.surrounds_origin and u.zone == "U_N"):
                continue
            z = u.representative
            run, reached, hit_unu = 0, False, False
            for _ in range(64):
                zone = plane.zone_of(z)
                if zone == "U_N":
                    run += 1
                elif zone == "U_D" and run:
                    reached = True
                    break
                else:
                    break
                z = complex(rat_eval(num, den, z))
            # only iterated preimages of the free critical component count
            w = u.representative
            for _ in range(64):
                r = plane.record_at(w)
                if r is not None and target is not None and r.id == target.id:
                    hit_unu = True
                    break
                w = complex(rat_eval(num, den, w))
                if not np.isfinite(w):
                    break
            if reached and hit_unu:
                bound.checked += 1
                if run > k:
                    bound.passed = False
                    bound.details.append(f"{u.id}: {run} steps in U_n before U_d, k={k}")

    census = CheckResult("preimage_census", True)
    pre: dict[int, dict[str, int]] = {}
    for u in recs:
        v = plane.by_uid(u.forward_target)
        if v is None or not u.surrounds_origin or v.role in ("TRAP_DOOR", "A_INF"):
            continue
        if not _surrounding(v):
            continue
        side = "in" if u.zone == "U_D" else "out"
        pre.setdefault(v.id, {"in": 0, "out": 0})[side] += 1
    for vid, c in pre.items():
        census.checked += 1
        if c["in"] > 1 or c["out"] > 1:
            census.passed = False
            census.details.append(f"{vid}: {c['in']} inner / {c['out']} outer surrounding preimages")
    return [rh, rig, nop, bound, census]
