import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from stokes_evans.algebra import (DomainError, NonIntegrableError, PowerSeries, SeriesFunction as S,
                                  Term, canonicalize, integrate_x, integrate_y_halfline,
                                  solve_decaying_ode)
from stokes_evans.state import WaveState, inner_product
from stokes_evans.operator import adjoint_eigenfunction, eigenfunction
from stokes_evans.stokes import WaveParameters
from stokes_evans.textio import ParseError, format_series, parse_series

coef = st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False)
terms = st.builds(Term, coef, st.integers(0, 2), st.sampled_from([0.0, 1.0, -1.0, 2.0, 0.5]),
                  st.integers(0, 2), st.sampled_from([0.5, 1.0, 2.0, 3.0]))
series = st.lists(terms, max_size=4).map(S)


def test_dy_exponent():
    assert S.exp_y(2.0).dy() == S.exp_y(2.0, 2.0)


def test_dx_of_first_order_potential():
    f = S.sin_x(1.5) * S.exp_y(1.5)
    assert f.dx() == S.cos_x(1.5, 1.5) * S.exp_y(1.5)


def test_product_to_sum():
    assert S.cos_x(1.0) * S.cos_x(1.0) == 0.5 + S.cos_x(2.0, 0.5)


def test_growing_term_rejected():
    with pytest.raises(DomainError):
        Term(1.0, yrate=-1.0)
    with pytest.raises(DomainError):
        Term(1.0, ypow=1, yrate=0.0)


@pytest.mark.parametrize("f, value", [
    (S.exp_y(1.0), 1.0),
    (S.term(1.0, ypow=1, yrate=2.0), -0.25),
    (S.exp_y(3.0) * S.exp_y(3.0), 1 / 6),
])
def test_halfline_integrals(f, value):
    assert integrate_y_halfline(f).constant_value() == pytest.approx(value, abs=1e-15)


def test_halfline_rejects_constant():
    with pytest.raises(NonIntegrableError):
        integrate_y_halfline(S.const(1.0))


def test_integrate_x_examples():
    k = 1.3
    T = 2 * math.pi / k
    assert abs(integrate_x(S.term(1.0, xfreq=k), T)) < 1e-14
    assert integrate_x(S.const(1.0), T) == pytest.approx(T)
    F = integrate_x(S.term(1.0, xfreq=k))
    x = 0.37
    assert F(x) == pytest.approx((np.exp(1j * k * x) - 1) / (1j * k))


@settings(max_examples=60, deadline=None)
@given(series)
def test_canonical_idempotent(f):
    assert canonicalize(canonicalize(f)).terms == canonicalize(f).terms


@settings(max_examples=60, deadline=None)
@given(series)
def test_dx_inverts_integrate_x(f):
    assert f.integrate_x().dx().isclose(f, 1e-9 * max(1.0, f.max_abs_coeff()))


@settings(max_examples=40, deadline=None)
@given(series, series)
def test_ring_matches_pointwise(f, g):
    x, y = 0.3, -0.8
    assert (f * g)(x, y) == pytest.approx(f(x, y) * g(x, y), rel=1e-10, abs=1e-10)
    assert (f + g)(x, y) == pytest.approx(f(x, y) + g(x, y), rel=1e-10, abs=1e-10)
    h = 1e-6
    assert f.dy()(x, y) == pytest.approx((f(x, y + h) - f(x, y - h)) / (2 * h), rel=1e-5, abs=1e-5)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.builds(Term, coef, st.just(0), st.just(0.0), st.integers(0, 2),
                          st.floats(0.1, 4.0)), min_size=1, max_size=4).map(S))
def test_halfline_matches_quadrature(f):
    if not f:
        return
    exact = integrate_y_halfline(f).constant_value()
    re = quad(lambda y: f(0.0, y).real, -np.inf, 0, epsabs=1e-13, epsrel=1e-12, limit=400)[0]
    im = quad(lambda y: f(0.0, y).imag, -np.inf, 0, epsabs=1e-13, epsrel=1e-12, limit=400)[0]
    assert abs(exact - (re + 1j * im)) <= 1e-9 * max(1.0, abs(exact))


@settings(max_examples=40, deadline=None)
@given(series, st.sampled_from([0.5, 1.0, 2.0, 3.0]))
def test_decaying_ode_solution(rhs, mu):
    rhs = S([t for t in rhs if t.yrate > 0 and t.xpow == 0 and t.xfreq == 0])
    sol = solve_decaying_ode(rhs, mu)
    assert (sol.dy().dy() - sol * mu ** 2).isclose(rhs, 1e-9 * max(1.0, rhs.max_abs_coeff()))


def test_constant_forcing_at_zero_mode():
    with pytest.raises(DomainError):
        solve_decaying_ode(S.const(1.0), 0.0)


@settings(max_examples=40, deadline=None)
@given(series)
def test_text_roundtrip(f):
    assert parse_series(format_series(f)) == f


def test_parse_examples():
    f = parse_series("2*exp(i*3*x)*y^1*exp(2*y) - (1,2)")
    assert f(0.0, 0.0) == pytest.approx(-1 - 2j)
    assert parse_series("0") == S()
    with pytest.raises(ParseError):
        parse_series("exp(3*z)")


def test_power_series_reciprocal():
    s = PowerSeries({(0,): S.const(2.0), (1,): S.cos_x(1.0)}, (4,))
    r = (s * s.reciprocal())
    assert r[(0,)] == 1.0
    for k in range(1, 5):
        assert not r[(k,)]


@pytest.mark.parametrize("kappa", [0.5, 1.0, 2.0])
def test_inner_product_examples(kappa):
    p = WaveParameters.from_speed(kappa, 1.0)
    phi1, phi2, phi3 = (eigenfunction(p, 0.0, j) for j in (1, 2, 3))
    psi1, psi2, psi3 = (adjoint_eigenfunction(p, 0.0, j) for j in (1, 2, 3))
    assert inner_product(phi1, psi1) == pytest.approx(1.0, abs=1e-13)
    assert inner_product(phi1, psi2) == pytest.approx(0.0, abs=1e-13)
    assert inner_product(phi3, psi3) == pytest.approx(1.0, abs=1e-13)


@settings(max_examples=30, deadline=None)
@given(series, series)
def test_inner_product_hermitian_and_positive(a, b):
    keep = lambda f: S([t for t in f if t.xpow == 0 and t.xfreq == 0])
    u = WaveState(keep(a), keep(b), 0.5)
    v = WaveState(keep(b), keep(a), -1.0)
    assert inner_product(u, v) == pytest.approx(np.conj(inner_product(v, u)), rel=1e-10, abs=1e-10)
    assert inner_product(u, u).real > 0
