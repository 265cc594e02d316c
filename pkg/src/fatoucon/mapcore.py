"""Evaluation of the perturbed family z^n (z - a) / Q(z) + lam / z^d.

Maps are stored as a numerator/denominator coefficient pair and every
evaluation divides last.  For |z| > 1 both polynomials are evaluated in the
reversed variable 1/z, so nothing overflows before the final quotient does.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from numpy.polynomial import polynomial as P

from ._jit import njit

__all__ = [
    "INF",
    "Infinity",
    "SpherePoint",
    "InvalidParams",
    "Indeterminate",
    "MapParams",
    "eval_perturbed",
    "eval_unperturbed",
    "derivative",
    "critical_numerator_poly",
    "zeros_poly",
]


class InvalidParams(ValueError):
    pass


class Indeterminate(ArithmeticError):
    pass


class Infinity:
    """The point at infinity of the Riemann sphere (singleton)."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self) -> str:
        return "INF"

    def __abs__(self) -> float:
        return math.inf

    def __reduce__(self):
        return (Infinity, ())


INF = Infinity()
SpherePoint = Union[complex, Infinity]


def _trim(c: np.ndarray) -> np.ndarray:
    c = np.asarray(c, dtype=complex)
    k = len(c)
    while k > 1 and c[k - 1] == 0:
        k -= 1
    return c[:k].copy()


@dataclass(frozen=True)
class MapParams:
    """One member of the family.

    ``q_coeffs`` are ascending (b0, b1, ..., b_n) and are zero-padded to
    length n + 1.  ``lam = 0`` gives the unperturbed map.
    """

    n: int
    d: int
    a: complex
    q_coeffs: tuple = (1.0,)
    lam: complex = 0j
    _num: np.ndarray = field(init=False, repr=False, compare=False)
    _den: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        n, d = self.n, self.d
        if int(n) != n or int(d) != d:
            raise InvalidParams("n and d must be integers")
        if n < 2 or d < 2:
            raise InvalidParams(f"need n >= 2 and d >= 2, got n={n}, d={d}")
        if 1.0 / n + 1.0 / d >= 1.0:
            raise InvalidParams("condition (d) fails: 1/n + 1/d must be < 1")
        a = complex(self.a)
        if a == 0:
            raise InvalidParams("a must be nonzero")
        q = np.asarray(self.q_coeffs, dtype=complex).ravel()
        if q.size == 0:
            raise InvalidParams("Q needs at least one coefficient")
        if q.size > n + 1:
            if np.any(q[n + 1:] != 0):
                raise InvalidParams(f"deg Q must be <= n = {n}")
            q = q[: n + 1]
        q = np.concatenate([q, np.zeros(n + 1 - q.size, dtype=complex)])
        if q[0] == 0:
            raise InvalidParams("condition (a) fails: Q(0) = 0")
        if abs(q[n]) >= 1:
            raise InvalidParams(f"condition (b) fails: |b_n| = {abs(q[n]):.6g} >= 1")
        lam = complex(self.lam)
        if not (np.isfinite(lam.real) and np.isfinite(lam.imag)):
            raise InvalidParams("lambda must be finite")
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "d", int(d))
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "q_coeffs", tuple(complex(c) for c in q))
        object.__setattr__(self, "lam", lam)
        num, den = _rational_pair(int(n), int(d), a, q, lam)
        num.flags.writeable = False
        den.flags.writeable = False
        object.__setattr__(self, "_num", num)
        object.__setattr__(self, "_den", den)

    # -- convenience -------------------------------------------------------
    @property
    def q(self) -> np.ndarray:
        return np.array(self.q_coeffs, dtype=complex)

    @property
    def deg_q(self) -> int:
        return len(_trim(self.q)) - 1

    @property
    def b_n(self) -> complex:
        return self.q_coeffs[self.n]

    @property
    def perturbed(self) -> bool:
        return self.lam != 0

    @property
    def degree(self) -> int:
        return self.n + self.d + 1 if self.perturbed else self.n + 1

    @property
    def local_degree_inf(self) -> int:
        """Local degree of the map at infinity (1 when b_n != 0)."""
        return self.n + 1 - self.deg_q

    def with_lambda(self, lam: complex) -> "MapParams":
        return MapParams(self.n, self.d, self.a, self.q_coeffs, lam)

    def conditions(self) -> dict:
        # (c) is dynamical; it is checked by rendering, not here
        return {
            "a": self.q_coeffs[0] != 0,
            "b": abs(self.b_n) < 1,
            "c": None,
            "d": 1.0 / self.n + 1.0 / self.d < 1.0,
        }

    @property
    def pair(self) -> tuple[np.ndarray, np.ndarray]:
        """Ascending (numerator, denominator) coefficients, deg num = deg den + 1."""
        return self._num, self._den


def _rational_pair(n, d, a, q, lam):
    # unperturbed: z^n (z - a) / Q ; perturbed: (z^{n+d}(z-a) + lam Q) / (z^d Q)
    if lam == 0:
        num = np.zeros(n + 2, dtype=complex)
        num[n] = -a
        num[n + 1] = 1.0
        den = q.copy()
    else:
        num = np.zeros(n + d + 2, dtype=complex)
        num[n + d] = -a
        num[n + d + 1] = 1.0
        num[: n + 1] += lam * q
        den = np.zeros(n + d + 1, dtype=complex)
        den[d:] = q
    return num, den


@njit(cache=True)
def _horner(c, z):
    acc = 0j
    for k in range(len(c) - 1, -1, -1):
        acc = acc * z + c[k]
    return acc


@njit(cache=True)
def _horner_rev(c, w):
    # sum c[k] w^(N-k), i.e. the reversed polynomial
    acc = 0j
    for k in range(len(c)):
        acc = acc * w + c[k]
    return acc


@njit(cache=True)
def rat_eval(num, den, z):
    """num(z)/den(z) with deg num = deg den + 1; returns inf at poles."""
    if abs(z) <= 1.0:
        top = _horner(num, z)
        bot = _horner(den, z)
        if bot == 0:
            return complex(np.inf, 0.0)
        return top / bot
    w = 1.0 / z
    top = _horner_rev(num, w)
    bot = _horner_rev(den, w)
    if bot == 0:
        return complex(np.inf, 0.0)
    r = top / bot
    return z * r


@njit(cache=True)
def rat_eval_deriv(num, den, z):
    """(S(z), S'(z)); both inf at poles."""
    big = complex(np.inf, 0.0)
    N = len(num) - 1
    M = len(den) - 1
    if abs(z) <= 1.0:
        t = 0j
        dt = 0j
        for k in range(N, -1, -1):
            dt = dt * z + t
            t = t * z + num[k]
        b = 0j
        db = 0j
        for k in range(M, -1, -1):
            db = db * z + b
            b = b * z + den[k]
        if b == 0:
            return big, big
        s = t / b
        return s, (dt - s * db) / b
    # reversed: num = z^N T(w), den = z^M B(w), w = 1/z
    w = 1.0 / z
    t = 0j
    dt = 0j
    for k in range(N + 1):
        dt = dt * w + t
        t = t * w + num[k]
    b = 0j
    db = 0j
    for k in range(M + 1):
        db = db * w + b
        b = b * w + den[k]
    if b == 0:
        return big, big
    r = t / b
    s = z * r
    # d/dz [z T(1/z)/B(1/z)] = r - w (T'/B - r B'/B)
    dr_dw = (dt - r * db) / b
    return s, r - w * dr_dw


def _finite(z) -> bool:
    return not isinstance(z, Infinity) and cmath.isfinite(z)


def eval_perturbed(p: MapParams, z: SpherePoint) -> SpherePoint:
    """S_{n,d,lam}(z) on the sphere; lam = 0 evaluates the unperturbed map."""
    if isinstance(z, Infinity):
        return INF
    z = complex(z)
    if not cmath.isfinite(z):
        return INF
    num, den = p.pair
    if abs(z) <= 1:
        u, cn, cd = z, num, den
    else:
        u, cn, cd = 1.0 / z, num[::-1], den[::-1]
    top, bot = P.polyval(u, cn), P.polyval(u, cd)
    eps8 = 8 * np.finfo(float).eps
    if abs(bot) <= eps8 * _scale(cd, u):
        if abs(top) <= eps8 * _scale(cn, u):
            raise Indeterminate(f"numerator and denominator both vanish at {z!r}")
        return INF
    w = complex(rat_eval(num, den, z))
    if not cmath.isfinite(w):
        return INF
    return w


def _scale(c: np.ndarray, z: complex) -> float:
    return float(np.sum(np.abs(c) * np.abs(z) ** np.arange(len(c))))


def eval_unperturbed(p: MapParams, z: SpherePoint) -> SpherePoint:
    return eval_perturbed(p.with_lambda(0), z)


def derivative(p: MapParams, z: complex) -> SpherePoint:
    if isinstance(z, Infinity):
        return INF
    _, ds = rat_eval_deriv(*p.pair, complex(z))
    ds = complex(ds)
    return ds if cmath.isfinite(ds) else INF


def critical_numerator_poly(p: MapParams) -> np.ndarray:
    """Ascending coefficients of
    z^{d+1} [(n+1) z^n Q - z^{n+1} Q' - a n z^{n-1} Q + a z^n Q'] - lam d Q^2.
    """
    n, d, a = p.n, p.d, p.a
    q = _trim(p.q)
    dq = P.polyder(q) if len(q) > 1 else np.zeros(1, dtype=complex)

    def zpow(k):
        c = np.zeros(k + 1, dtype=complex)
        c[k] = 1.0
        return c

    br = P.polymul((n + 1) * zpow(n), q)
    br = P.polysub(br, P.polymul(zpow(n + 1), dq))
    br = P.polysub(br, P.polymul(a * n * zpow(n - 1), q))
    br = P.polyadd(br, P.polymul(a * zpow(n), dq))
    out = P.polymul(zpow(d + 1), br)
    if p.lam != 0:
        out = P.polysub(out, p.lam * d * P.polymul(q, q))
    return _trim(out)


def zeros_poly(p: MapParams) -> np.ndarray:
    """Ascending coefficients of z^{n+d}(z - a) + lam Q(z)."""
    if p.lam == 0:
        raise InvalidParams("zeros_poly needs lam != 0")
    num, _ = p.pair
    return _trim(num)
