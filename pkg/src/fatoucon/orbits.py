"""Orbits, escape times and the radii that describe the small-lambda regime."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from ._jit import njit, prange
from .mapcore import INF, Infinity, MapParams, eval_perturbed, rat_eval, rat_eval_deriv
from .roots import ring_constants

__all__ = [
    "NOT_ESCAPED",
    "NoEscapeRadius",
    "RegimeViolation",
    "EscapeRecord",
    "RadiiModel",
    "estimate_K",
    "radii_model",
    "classify_point",
    "escape_times",
    "step_many",
    "raster_kernel",
    "orbit",
]

NOT_ESCAPED = -1


class NoEscapeRadius(RuntimeError):
    pass


class RegimeViolation(RuntimeError):
    pass


@dataclass
class EscapeRecord:
    escape_time: int  # NOT_ESCAPED when the cap was hit
    orbit_prefix: list = field(default_factory=list)
    final_modulus: float = 0.0

    @property
    def escaped(self) -> bool:
        return self.escape_time != NOT_ESCAPED


@dataclass(frozen=True)
class RadiiModel:
    K_esc: float
    r_trap: float
    r_inner: float
    r_outer: float
    K1: float = 1.0

    @property
    def r_mid(self) -> float:
        return math.sqrt(self.r_inner * self.r_outer)

    def ordered(self) -> bool:
        return self.r_trap < self.r_inner < self.r_outer < self.K_esc


def _growth_factor(p: MapParams) -> float:
    # near a geometrically attracting infinity |S(z)| ~ |z| / |b_n|, so a factor 2
    # is out of reach once |b_n| >= 1/2
    bn = abs(p.b_n)
    if bn == 0:
        return 2.0
    return min(2.0, 0.5 * (1.0 + 1.0 / bn))


def estimate_K(p: MapParams, samples: int = 64, levels: int = 3, r0: float = 1.0) -> float:
    """Smallest doubling radius R such that |S(z)| >= 2|z| on |z| = R, 2R, 4R."""
    if abs(p.b_n) >= 1:
        raise NoEscapeRadius("|b_n| >= 1: infinity is not attracting")
    num, den = p.pair
    ang = np.exp(2j * np.pi * (np.arange(samples) + 0.5) / samples)
    g = _growth_factor(p)
    R = r0
    run = 0
    first = None
    for _ in range(200):
        ok = True
        for u in ang:
            z = R * u
            if not abs(rat_eval(num, den, z)) >= g * R:
                ok = False
                break
        if ok:
            if run == 0:
                first = R
            run += 1
            if run == levels:
                return float(first)
        else:
            run = 0
        R *= 2.0
    raise NoEscapeRadius("doubling search did not find an escape radius")


def radii_model(p: MapParams, K1: float = 1.0, samples: int = 64, K_esc: float | None = None) -> RadiiModel:
    """Scalar radii of the small-lambda picture, with a regime check.

    The check maps ``samples`` points of the circle |z| = sqrt(r_inner r_outer)
    forward: the first image must fall inside the inner disk |w| < r_inner and
    the second must already be beyond K_esc.
    """
    if p.lam == 0:
        raise RegimeViolation("radii_model needs lam != 0")
    m = p.n + p.d
    c1, c2 = ring_constants(p)
    t = abs(p.lam) ** (1.0 / m)
    K = estimate_K(p) if K_esc is None else float(K_esc)
    rm = RadiiModel(
        K_esc=K,
        r_trap=K1 * abs(p.lam) ** (p.n / m),
        r_inner=c1 * t,
        r_outer=c2 * t,
        K1=K1,
    )
    if not rm.ordered():
        raise RegimeViolation(
            f"radii not ordered: r_trap={rm.r_trap:.3e} r_inner={rm.r_inner:.3e} "
            f"r_outer={rm.r_outer:.3e} K={rm.K_esc:.3e}"
        )
    num, den = p.pair
    num0, den0 = p.with_lambda(0).pair
    for k in range(samples):
        z = rm.r_mid * cmath.exp(2j * math.pi * (k + 0.5) / samples)
        w = rat_eval(num, den, z)
        w2 = rat_eval(num, den, w) if cmath.isfinite(w) else w
        inside = abs(w) < rm.r_inner
        # second image must lie in the basin of infinity; beyond K_esc is
        # enough, otherwise ask the unperturbed map (its basin is a disk
        # complement under condition (c))
        outside = abs(w2) > rm.K_esc or _escape_one(num0, den0, w2, rm.K_esc, 200) >= 0
        if not (inside and outside):
            raise RegimeViolation(
                f"annulus check failed at |z|={rm.r_mid:.3e}: |S|={abs(w):.3e}, |S^2|={abs(w2):.3e}"
            )
    return rm


def classify_point(
    p: MapParams, z, radii: RadiiModel | float, max_iter: int = 10_000, cap: int = 64
) -> EscapeRecord:
    K = radii.K_esc if isinstance(radii, RadiiModel) else float(radii)
    pref: list = []
    cur = z
    for t in range(max_iter + 1):
        if len(pref) < cap:
            pref.append(cur)
        if abs(cur) > K:
            return EscapeRecord(t, pref, float(abs(cur)))
        cur = _step(p, cur)
    return EscapeRecord(NOT_ESCAPED, pref, float(abs(cur)))


def _step(p: MapParams, z):
    if isinstance(z, Infinity):
        return INF
    w = complex(rat_eval(*p.pair, complex(z)))
    return w if cmath.isfinite(w) else INF


def orbit(p: MapParams, z, steps: int) -> list:
    out = [z]
    for _ in range(steps):
        z = _step(p, z)
        out.append(z)
    return out


# ---------------------------------------------------------------------------
# numba kernels

@njit(cache=True)
def _escape_one(num, den, z, K, max_iter):
    for t in range(max_iter + 1):
        if not (abs(z) <= K):
            return t
        z = rat_eval(num, den, z)
    return -1


@njit(cache=True, parallel=True)
def _escape_batch(num, den, zs, K, max_iter):
    out = np.empty(zs.shape[0], dtype=np.int64)
    for i in prange(zs.shape[0]):
        out[i] = _escape_one(num, den, zs[i], K, max_iter)
    return out


@njit(cache=True, parallel=True)
def _step_batch(num, den, zs):
    out = np.empty_like(zs)
    for i in prange(zs.shape[0]):
        out[i] = rat_eval(num, den, zs[i])
    return out


def escape_times(p: MapParams, zs, K_esc: float, max_iter: int = 10_000) -> np.ndarray:
    zs = np.ascontiguousarray(np.asarray(zs, dtype=np.complex128).ravel())
    num, den = p.pair
    return _escape_batch(num, den, zs, float(K_esc), int(max_iter))


def step_many(p: MapParams, zs) -> np.ndarray:
    zs = np.ascontiguousarray(np.asarray(zs, dtype=np.complex128).ravel())
    return _step_batch(*p.pair, zs)


@njit(cache=True)
def _pixel(num, den, z, K, Rbig, max_iter, m, logbn):
    """(escape_time, log potential, log distance estimate) for one point."""
    inf = np.inf
    logder = 0.0
    t = -1
    for s in range(max_iter + 1):
        if not (abs(z) <= K):
            t = s
            break
        w, dw = rat_eval_deriv(num, den, z)
        a = abs(dw)
        if a == 0.0:
            logder = -inf
        elif a == inf:
            logder = inf
        else:
            logder += math.log(a)
        z = w
    if t < 0:
        return -1, -inf, -inf
    k = t
    for _ in range(400):
        if abs(z) > Rbig or not (abs(z) < inf):
            break
        w, dw = rat_eval_deriv(num, den, z)
        a = abs(dw)
        if a == 0.0:
            logder = -inf
        elif a == inf:
            logder = inf
        else:
            logder += math.log(a)
        z = w
        k += 1
    r = abs(z)
    if not (r < inf) or logder == inf:
        return t, inf, inf
    lr = math.log(r)
    if m >= 2:
        logpot = math.log(lr) - k * math.log(m)
        logdist = lr + math.log(lr) - logder
    else:
        # Koenigs-type potential; only its ordering is used downstream
        logpot = lr + k * logbn
        logdist = lr - logder
    return t, logpot, logdist


@njit(cache=True, parallel=True)
def raster_kernel(num, den, x0, y1, dx, dy, nx, ny, K, Rbig, max_iter, m, logbn):
    esc = np.empty((ny, nx), dtype=np.int32)
    pot = np.empty((ny, nx), dtype=np.float64)
    dist = np.empty((ny, nx), dtype=np.float64)
    for i in prange(ny):
        y = y1 - (i + 0.5) * dy
        for j in range(nx):
            x = x0 + (j + 0.5) * dx
            t, lp, ld = _pixel(num, den, complex(x, y), K, Rbig, max_iter, m, logbn)
            esc[i, j] = t
            pot[i, j] = lp
            dist[i, j] = ld
    return esc, pot, dist
