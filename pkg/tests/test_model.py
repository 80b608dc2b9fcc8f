import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from singular_ode.errors import DomainError, InvalidParameterError
from singular_ode.model import (
    Params,
    Regime,
    alpha_star,
    asymptotic_constants,
    classify_theoretical,
    comparison_bound,
    critical_c0,
    energy,
    fast_energy_exponent,
    slow_energy_exponent,
)

exps = st.floats(0.05, 4.0)
coefs = st.floats(0.1, 10.0)


@st.composite
def params(draw):
    return Params(draw(st.floats(0.0, 3.0)), draw(exps), draw(exps), draw(coefs), draw(coefs))


@pytest.mark.parametrize(
    "field, value",
    [("l", -0.1), ("alpha", 0.0), ("beta", -1.0), ("c", 0.0), ("d", -2.0), ("c", math.nan), ("d", math.inf)],
)
def test_params_rejects_invalid(field, value):
    kw = dict(l=0.0, alpha=1.0, beta=1.0, c=1.0, d=1.0)
    kw[field] = value
    with pytest.raises(InvalidParameterError):
        Params(**kw)


def test_params_rejects_non_numeric():
    with pytest.raises(InvalidParameterError):
        Params("0", 1, 1, 1, 1)


def test_predicates():
    assert Params(1, 1, 1, 1, 1).well_posed
    assert not Params(1, 1, 1, 1, 1).strict_gap
    assert not Params(2, 3, 1, 1, 1).well_posed
    assert Params(0, 0.5, 1, 1, 1).strict_gap


@pytest.mark.parametrize("l, beta, expected", [(0, 1, 1 / 3), (1, 1, 1.0), (2.5, 2.5, 2.5), (0, 2, 0.5)])
def test_alpha_star(l, beta, expected):
    assert alpha_star(Params(l, 1, beta, 1, 1)) == pytest.approx(expected, rel=1e-15)


@given(params())
def test_alpha_star_bounds(p):
    a = alpha_star(p)
    assert a < p.l + 1
    assert (a >= p.l - 1e-12) == (p.beta >= p.l) or math.isclose(p.beta, p.l)


def test_critical_c0_hand_values():
    assert critical_c0(Params(0, 1, 1, 1, 1)) == pytest.approx(3 * 0.75 ** (2 / 3), rel=1e-14)
    assert critical_c0(Params(0, 1, 1, 1, 1)) == pytest.approx(2.4764, abs=1e-4)
    # (beta+2)(l+1)/((beta+1)(l+2)) = 4/6 for l=0, beta=2
    assert critical_c0(Params(0, 1, 2, 1, 1)) == pytest.approx(4 * (2 / 3) ** 0.75, rel=1e-14)


def rescaled(p, a, b):
    """Coefficients of v(s) = u(s/b)/a when u solves the equation with p."""
    return p.replace(
        c=p.c * a ** (p.alpha - p.l) * b ** (p.alpha - p.l - 1),
        d=p.d * a ** (p.beta - p.l) * b ** (-(p.l + 2)),
    )


@given(params(), st.floats(0.1, 10.0))
def test_critical_c0_d_power(p, lam):
    q = p.replace(d=p.d * lam)
    assert critical_c0(q) / critical_c0(p) == pytest.approx(lam ** (1 / (p.beta + 2)), rel=1e-12)


@pytest.mark.parametrize(
    "p, expected",
    [
        (Params(0, 1, 1, 1, 1), Regime.OSCILLATORY),
        (Params(1, 1.2, 3, 1, 1), Regime.NON_OSCILLATORY),
        (Params(0, 1 / 3, 1, 3, 1), Regime.CRITICAL),
        (Params(0, 1 / 3, 1, 1, 1), Regime.OSCILLATORY),
        (Params(0, 1 / 3, 1, critical_c0(Params(0, 1, 1, 1, 1)), 1), Regime.CRITICAL),
        (Params(1, 1, 1, 1, 1), Regime.OUTSIDE),
        (Params(2, 3, 1, 1, 1), Regime.OUTSIDE),
        (Params(0, 0.3, 2, 1, 1), Regime.NON_OSCILLATORY),
    ],
)
def test_classify_theoretical(p, expected):
    assert classify_theoretical(p) is expected


@given(params())
def test_classify_total(p):
    assert isinstance(classify_theoretical(p), Regime)


def test_classify_outside_when_hypotheses_fail():
    for p in (Params(1, 0.5, 2, 1, 1), Params(2, 3, 1, 1, 1), Params(1, 1, 2, 1, 1)):
        assert classify_theoretical(p) is Regime.OUTSIDE


@settings(max_examples=60)
@given(params(), st.floats(0.2, 5.0), st.floats(0.2, 5.0))
def test_classify_invariant_under_scaling(p, a, b):
    assert classify_theoretical(rescaled(p, a, b)) is classify_theoretical(p)


@pytest.mark.parametrize("c", [1.0, 2.0, 2.4764454366709701, 3.0])
@pytest.mark.parametrize("a, b", [(0.5, 1.0), (1.0, 2.0), (3.0, 0.2), (7.0, 7.0)])
def test_critical_ratio_scale_free(c, a, b):
    p = Params(0, 1 / 3, 1, c, 1.0)
    q = rescaled(p, a, b)
    assert q.c / critical_c0(q) == pytest.approx(p.c / critical_c0(p), rel=1e-12)
    if not math.isclose(c, critical_c0(p), rel_tol=1e-9):
        assert classify_theoretical(q) is classify_theoretical(p)


def test_energy_examples():
    assert energy(Params(0, 1, 2, 1, 1), 0.0, 0.0) == 0.0
    assert energy(Params(0, 1, 2, 1, 1), 1.0, 1.0) == pytest.approx(0.75, rel=1e-15)
    assert energy(Params(1, 1, 1, 1, 1), 0.0, 1.0) == pytest.approx(2 / 3, rel=1e-15)


@given(params(), st.floats(-10, 10), st.floats(-10, 10))
def test_energy_even_and_nonnegative(p, u, du):
    e = energy(p, u, du)
    assert e >= 0
    assert energy(p, -u, -du) == e
    assert (e == 0) == (u == 0 and du == 0) or e < 1e-300


def test_energy_vectorized():
    p = Params(0, 1, 1, 1, 1)
    u = np.array([0.0, 1.0, -2.0])
    du = np.array([0.0, -1.0, 0.5])
    np.testing.assert_allclose(energy(p, u, du), [energy(p, a, b) for a, b in zip(u, du)])


def test_l_zero_reduces_to_scalar_threshold():
    for beta in (0.5, 1.0, 2.0, 5.0):
        assert alpha_star(Params(0, 1, beta, 1, 1)) == pytest.approx(beta / (beta + 2), rel=1e-15)


def test_asymptotic_constants_examples():
    k_u, k_du = asymptotic_constants(Params(0, 0.5, 3, 1, 1))
    assert k_du == pytest.approx(4.0, rel=1e-15)
    assert k_u == pytest.approx(4.0, rel=1e-15)


@pytest.mark.parametrize("k", [-3, -1, 1, 2, 5])
def test_asymptotic_constants_c_scaling(k):
    p = Params(0, 0.5, 3, 1, 1)
    base = asymptotic_constants(p)[1]
    scaled = asymptotic_constants(p.replace(c=2.0**k))[1]
    assert scaled == pytest.approx(2.0 ** (-k / 0.5) * base, rel=1e-14)


@pytest.mark.parametrize("p", [Params(0, 0.6, 2, 1, 1), Params(1, 1, 1, 1, 1), Params(0, 1, 1, 1, 1)])
def test_asymptotic_constants_domain(p):
    with pytest.raises(DomainError):
        asymptotic_constants(p)


def test_comparison_bound():
    p = Params(0, 0.5, 3, 1, 1)
    assert comparison_bound(p, 1.0) == pytest.approx(16.0, rel=1e-15)
    assert comparison_bound(p, 4.0) == pytest.approx(1.0, rel=1e-15)
    t = np.geomspace(1, 1e4, 50)
    assert np.all(np.diff(comparison_bound(p, t)) < 0)
    with pytest.raises(DomainError):
        comparison_bound(Params(1, 1, 1, 1, 1), 2.0)
    with pytest.raises(DomainError):
        comparison_bound(p, 0.5)


def test_rate_exponents():
    p = Params(1, 1.2, 3, 1, 1)
    assert fast_energy_exponent(p) == pytest.approx(-15.0)
    assert slow_energy_exponent(p) == pytest.approx(-2.2 * 5 / 1.8)
    assert slow_energy_exponent(Params(0, 0.3, 2, 1, 1)) == pytest.approx(-1.3 * 4 / 1.7)
    with pytest.raises(DomainError):
        fast_energy_exponent(Params(1, 1, 1, 1, 1))
    with pytest.raises(DomainError):
        slow_energy_exponent(Params(0, 2, 1, 1, 1))
