"""Polynomial roots, first-order asymptotics of the ring points, and the
partition of critical points into ring / free / far classes."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as P

from .mapcore import MapParams, critical_numerator_poly, eval_perturbed, zeros_poly, _trim

__all__ = [
    "NoConvergence",
    "AmbiguousPartition",
    "CriticalSet",
    "poly_roots",
    "asymptotic_critical",
    "asymptotic_zeros",
    "unperturbed_free_critical",
    "identify_distinguished",
    "critical_set",
    "ring_constants",
]


class NoConvergence(RuntimeError):
    pass


class AmbiguousPartition(RuntimeError):
    pass


def _cauchy_bound(c: np.ndarray) -> float:
    lead = abs(c[-1])
    return 1.0 + float(np.max(np.abs(c[:-1]))) / lead


def poly_roots(coeffs, tol: float = 1e-12, max_iter: int = 1000) -> np.ndarray:
    """All roots (with multiplicity) of the ascending coefficient list.

    Aberth-Ehrlich iteration from a fixed circle of radius given by the
    Cauchy bound; the starting angles carry a small offset so that real
    polynomials do not start on a symmetry axis.  Exact zero roots are split
    off first (they are common here: the critical polynomial at lam = 0).
    """
    c = _trim(np.asarray(coeffs, dtype=complex))
    if len(c) < 2:
        raise ValueError("degree must be >= 1")
    if c[-1] == 0:
        raise ValueError("leading coefficient is zero")
    nz = 0
    while c[nz] == 0:
        nz += 1
    zeros = np.zeros(nz, dtype=complex)
    c = c[nz:]
    deg = len(c) - 1
    if deg == 0:
        return zeros
    if deg == 1:
        return np.concatenate([zeros, [-c[0] / c[1]]])

    R = _cauchy_bound(c)
    k = np.arange(deg)
    z = R * np.exp(1j * (2 * np.pi * k / deg + 0.4))
    dc = P.polyder(c)
    eps = np.finfo(float).eps
    done = False
    for _ in range(max_iter):
        pv = P.polyval(z, c)
        dv = P.polyval(z, dc)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = pv / dv
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, 1.0)
            s = (1.0 / diff).sum(axis=1) - 1.0
            step = ratio / (1.0 - ratio * s)
        step = np.where(pv == 0, 0.0, step)
        if not np.all(np.isfinite(step)):
            step = np.where(np.isfinite(step), step, 0.0)
            z = z + (eps * R) * np.exp(1j * k)
        z = z - step
        if np.all(np.abs(step) <= 4 * eps * np.abs(z)):
            done = True
            break
    # backward error: |P(z)| against sum |c_i| |z|^i
    scale = P.polyval(np.abs(z), np.abs(c))
    resid = np.abs(P.polyval(z, c)) / np.where(scale > 0, scale, 1.0)
    if not done and np.any(resid >= tol):
        raise NoConvergence(f"Aberth iteration did not converge in {max_iter} steps")
    if np.any(resid >= tol):
        raise NoConvergence(f"backward error {resid.max():.3e} above {tol:.1e}")
    out = np.concatenate([zeros, z])
    return out[np.lexsort((out.imag, out.real))]


def _unity(m: int) -> np.ndarray:
    return np.exp(2j * np.pi * np.arange(m) / m)


def _asymptotic(p: MapParams, coef: complex) -> np.ndarray:
    if p.lam == 0:
        return np.zeros(0, dtype=complex)
    m = p.n + p.d
    base = np.power(complex(coef), 1.0 / m) * np.power(complex(p.lam), 1.0 / m)
    return base * _unity(m)


def asymptotic_critical(p: MapParams) -> np.ndarray:
    """xi * (d Q(0) / (-n a))^{1/(n+d)} * lam^{1/(n+d)}, principal branches."""
    b0 = p.q_coeffs[0]
    return _asymptotic(p, p.d * b0 / (-p.n * p.a))


def asymptotic_zeros(p: MapParams) -> np.ndarray:
    """xi * (Q(0) / a)^{1/(n+d)} * lam^{1/(n+d)}, principal branches."""
    return _asymptotic(p, p.q_coeffs[0] / p.a)


def ring_constants(p: MapParams) -> tuple[float, float]:
    """(c1, c2): half the smaller and twice the larger asymptotic modulus factor."""
    m = p.n + p.d
    b0 = p.q_coeffs[0]
    u = abs(p.d * b0 / (p.n * p.a)) ** (1.0 / m)
    v = abs(b0 / p.a) ** (1.0 / m)
    return 0.5 * min(u, v), 2.0 * max(u, v)


@dataclass
class CriticalSet:
    free_ring: np.ndarray
    nu_lambda: complex
    nu_zero: complex
    w_lambda: complex
    ring_zeros: np.ndarray
    infinity_side: np.ndarray
    crit_asymptotic: np.ndarray = field(default_factory=lambda: np.zeros(0, complex))
    zero_asymptotic: np.ndarray = field(default_factory=lambda: np.zeros(0, complex))

    def pairing_residual(self, lam: complex, which: str = "critical") -> float:
        """max_xi |root - prediction| / |lam|^{1/(n+d)}."""
        if which == "critical":
            got, pred = self.free_ring, self.crit_asymptotic
        else:
            got, pred = self.ring_zeros, self.zero_asymptotic
        m = len(pred)
        if m == 0:
            return 0.0
        return float(np.max(np.abs(got - pred))) / abs(lam) ** (1.0 / m)


def _escapes_to_zero(p0: MapParams, z: complex, steps: int = 2000) -> bool:
    for _ in range(steps):
        z = eval_perturbed(p0, z)
        if not isinstance(z, complex) or abs(z) > 1e12:
            return False
        if abs(z) < 1e-12:
            return True
    return False


def unperturbed_free_critical(p: MapParams) -> tuple[complex, np.ndarray]:
    """(nu_0, other free critical points) of the unperturbed map.

    nu_0 is the nonzero critical point whose unperturbed orbit tends to 0.
    """
    p0 = p.with_lambda(0)
    r = poly_roots(critical_numerator_poly(p0))
    scale = max(1.0, float(np.max(np.abs(r))))
    nonzero = r[np.abs(r) > 1e-9 * scale]
    hits = [z for z in nonzero if _escapes_to_zero(p0, complex(z))]
    if not hits:
        raise AmbiguousPartition("no unperturbed free critical point is attracted to 0")
    # with several candidates (not expected under condition (c)) take the one
    # nearest the Milnor value a n / (n + 1)
    target = p.a * p.n / (p.n + 1)
    nu0 = min(hits, key=lambda z: abs(z - target))
    rest = np.array([z for z in nonzero if z != nu0], dtype=complex)
    return complex(nu0), rest


def _match(pred: np.ndarray, roots: np.ndarray, what: str) -> np.ndarray:
    """Nearest root for every prediction; raises when two share a root."""
    dist = np.abs(pred[:, None] - roots[None, :])
    idx = np.argmin(dist, axis=1)
    if len(set(idx.tolist())) != len(idx):
        raise AmbiguousPartition(f"nearest-neighbour matching of {what} is not injective")
    return idx


def identify_distinguished(p: MapParams, all_critical, all_zeros) -> CriticalSet:
    crit = np.asarray(all_critical, dtype=complex)
    zer = np.asarray(all_zeros, dtype=complex)
    nu0, _ = unperturbed_free_critical(p)
    if p.lam == 0:
        scale = max(1.0, float(np.max(np.abs(crit)))) if crit.size else 1.0
        far = crit[np.abs(crit) > 1e-9 * scale]
        far = far[np.argsort(np.abs(far - nu0))][1:] if far.size else far
        return CriticalSet(
            free_ring=np.zeros(0, complex),
            nu_lambda=nu0,
            nu_zero=nu0,
            w_lambda=complex(p.a),
            ring_zeros=np.zeros(0, complex),
            infinity_side=far,
        )
    cpred = asymptotic_critical(p)
    zpred = asymptotic_zeros(p)
    ci = _match(cpred, crit, "critical points")
    zi = _match(zpred, zer, "zeros")
    rest = np.delete(crit, ci)
    j = int(np.argmin(np.abs(rest - nu0)))
    nu = complex(rest[j])
    gap = abs(nu - nu0)
    bound = abs(p.lam) ** (1.0 / (2 * (p.n + p.d)))
    if gap > bound:
        raise AmbiguousPartition(
            f"|nu_lambda - nu_0| = {gap:.3e} exceeds |lam|^(1/(2(n+d))) = {bound:.3e}"
        )
    zrest = np.delete(zer, zi)
    w = complex(zrest[int(np.argmin(np.abs(zrest - p.a)))])
    return CriticalSet(
        free_ring=crit[ci],
        nu_lambda=nu,
        nu_zero=nu0,
        w_lambda=w,
        ring_zeros=zer[zi],
        infinity_side=np.delete(rest, j),
        crit_asymptotic=cpred,
        zero_asymptotic=zpred,
    )


def critical_set(p: MapParams, tol: float = 1e-12) -> CriticalSet:
    """Roots of both polynomials followed by identify_distinguished."""
    crit = poly_roots(critical_numerator_poly(p), tol)
    if p.lam == 0:
        return identify_distinguished(p, crit, np.zeros(0, complex))
    zer = poly_roots(zeros_poly(p), tol)
    return identify_distinguished(p, crit, zer)
