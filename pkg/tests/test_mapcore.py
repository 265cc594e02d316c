from __future__ import annotations

import cmath

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from oracles import ds_mp, roots_np, s_mp

from fatoucon.mapcore import (
    INF,
    Indeterminate,
    InvalidParams,
    MapParams,
    critical_numerator_poly,
    derivative,
    eval_perturbed,
    eval_unperturbed,
    rat_eval,
    zeros_poly,
)

MILNOR = MapParams(2, 3, 1.0, (1.0,), 0j)


def test_unperturbed_value_at_two():
    assert eval_perturbed(MILNOR, 2.0) == pytest.approx(4.0)


def test_pole_at_origin_maps_to_infinity():
    assert eval_perturbed(MILNOR.with_lambda(1e-6), 0j) is INF
    assert eval_perturbed(MILNOR.with_lambda(1e-6), INF) is INF


def test_small_argument_against_direct_formula():
    p = MILNOR.with_lambda(1e-10)
    got = eval_perturbed(p, 0.01)
    assert got == pytest.approx(0.01 ** 2 * (0.01 - 1) + 1e-10 / 0.01 ** 3, rel=1e-13)


def test_zero_of_q_is_a_pole():
    # Q(z) = 1 - z/2 vanishes at z = 2
    p = MapParams(2, 3, 0.5, (1.0, -0.5), 1e-8)
    assert eval_perturbed(p, 2.0) is INF


def test_indeterminate_when_numerator_and_denominator_vanish():
    # a = 2 and Q(2) = 0: the factor (z - a) cancels the pole
    p = MapParams(2, 3, 2.0, (1.0, -0.5), 0j)
    with pytest.raises(Indeterminate):
        eval_perturbed(p, 2.0)


@pytest.mark.parametrize(
    "kw",
    [
        dict(n=2, d=2, a=1.0),              # 1/n + 1/d = 1
        dict(n=2, d=3, a=1.0, q_coeffs=(0.0, 1.0)),  # Q(0) = 0
        dict(n=2, d=3, a=1.0, q_coeffs=(1.0, 0.0, 1.5)),  # |b_n| >= 1
        dict(n=2, d=3, a=0.0),
        dict(n=1, d=5, a=1.0),
        dict(n=2, d=3, a=1.0, q_coeffs=(1.0, 0, 0, 0.5)),  # deg Q > n
    ],
)
def test_invalid_parameters_rejected(kw):
    with pytest.raises(InvalidParams):
        MapParams(**kw)


def test_coefficients_padded_and_degree():
    p = MapParams(3, 2, 0.5, (1.0, -0.5), 1e-8)
    assert len(p.q_coeffs) == 4
    assert p.b_n == 0
    assert p.degree == 6
    assert p.local_degree_inf == 3
    num, den = p.pair
    assert len(num) == len(den) + 1
    assert not num.flags.writeable


def test_local_degree_with_full_degree_q():
    p = MapParams(2, 3, 1.0, (1.0, 0.0, 0.3), 1e-8)
    assert p.local_degree_inf == 1


def test_critical_polynomial_small_lambda():
    got = critical_numerator_poly(MILNOR.with_lambda(1e-6))
    np.testing.assert_allclose(got, [-3e-6, 0, 0, 0, 0, -2, 3], atol=1e-15)


def test_zeros_poly_requires_lambda():
    with pytest.raises(InvalidParams):
        zeros_poly(MILNOR)


def test_unperturbed_ignores_lambda():
    p = MILNOR.with_lambda(1e-3)
    assert eval_unperturbed(p, 0.5 + 0.5j) == pytest.approx(complex(s_mp(MILNOR, 0.5 + 0.5j)))


zs = st.complex_numbers(min_magnitude=1e-3, max_magnitude=1e3, allow_nan=False, allow_infinity=False)
lams = st.sampled_from([0.0, 1e-12, -1e-7, 1e-4j, 2e-3 + 1e-3j])
qs = st.sampled_from([(1.0,), (1.0, -0.5), (0.7, 0.2, 0.3j), (1.0, 0.0, -0.4)])


@given(z=zs, lam=lams, q=qs)
def test_evaluation_matches_extended_precision(z, lam, q):
    p = MapParams(2, 3, 0.9 + 0.6j, q, lam)
    try:
        ref = s_mp(p, z)
    except ZeroDivisionError:
        return
    got = eval_perturbed(p, z)
    if got is INF or ref is INF:
        return
    assert abs(got - ref) <= 1e-11 * max(1.0, abs(ref))


@given(z=st.complex_numbers(min_magnitude=0.05, max_magnitude=50, allow_nan=False, allow_infinity=False),
       lam=lams)
def test_derivative_matches_numerical_differentiation(z, lam):
    p = MapParams(3, 2, 0.5, (1.0, -0.5), lam)
    if abs(1 - 0.5 * z) < 1e-2:
        return
    got = derivative(p, z)
    ref = ds_mp(p, z)
    assert abs(got - ref) <= 1e-8 * max(1.0, abs(ref))


@given(lam=st.sampled_from([1e-6, -1e-8, 1e-5j]), q=qs)
def test_critical_points_are_zeros_of_derivative(lam, q):
    p = MapParams(2, 3, 0.9 + 0.6j, q, lam)
    for c in roots_np(critical_numerator_poly(p)):
        if abs(c) < 1e-6:
            continue
        scale = max(1.0, abs(ds_mp(p, c * 1.001)))
        assert abs(ds_mp(p, c, dps=60)) <= 1e-6 * scale


def test_rat_eval_reversed_branch_continuity():
    p = MapParams(2, 3, 0.9 + 0.6j, (1.0, 0.2), -1e-7)
    num, den = p.pair
    for ang in np.linspace(0, 2 * np.pi, 13):
        u = cmath.exp(1j * ang)
        inside = complex(rat_eval(num, den, u * (1 - 1e-12)))
        outside = complex(rat_eval(num, den, u * (1 + 1e-12)))
        assert abs(inside - outside) <= 1e-9 * max(1.0, abs(inside))
