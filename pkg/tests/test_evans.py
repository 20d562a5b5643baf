import math

import numpy as np
import pytest

from stokes_evans import reduction
from stokes_evans.evans import (EvansError, bf_branch, cubic_in_alpha, evans_eval, evans_expand_origin,
                                evans_expand_resonance, finite_difference_coefficients, ind2,
                                monodromy_expand, monodromy_numeric, resonance_find,
                                same_branch_resonances, trace_spectrum)
from stokes_evans.operator import dispersion_roots, sigma_c
from stokes_evans.reduction import reduce_system
from stokes_evans.stokes import WaveParameters, stokes_expand

PI = math.pi


@pytest.fixture(scope="module")
def mono0(reduced0):
    return monodromy_expand(reduced0)


@pytest.fixture(scope="module")
def origin(mono0):
    return evans_expand_origin(mono0)


@pytest.fixture(scope="module")
def res2(unit, reduced_n2):
    r = resonance_find(2, unit)
    return r, evans_expand_resonance(monodromy_expand(reduced_n2), r)


# monodromy and Delta

def test_monodromy_identity_at_origin(reduced0):
    np.testing.assert_allclose(monodromy_numeric(reduced0, 0.0, 0.0), np.diag(np.exp(2j * PI * np.array([-1, 1, 0]))),
                               atol=1e-12)


def test_monodromy_rejects_large_parameters(reduced0):
    with pytest.raises(ValueError):
        monodromy_numeric(reduced0, 0.2, 0.0)


@pytest.mark.parametrize("fixture", ["reduced0", "reduced_n2"])
def test_series_matches_finite_differences(request, fixture):
    red = request.getfixturevalue(fixture)
    mono = monodromy_expand(red)
    fd = finite_difference_coefficients(red, 1e-4)
    for o, v in fd.items():
        assert np.abs(v - mono[o]).max() <= 1e-4 * max(1.0, np.abs(mono[o]).max())


def test_series_truncation_error_is_cubic(reduced0, mono0):
    errs = []
    for h in (4e-3, 2e-3):
        X = monodromy_numeric(reduced0, h, h)
        errs.append(np.abs(X - mono0.evaluate(h, h)).max())
    assert 6.0 < errs[0] / errs[1] < 10.0


@pytest.mark.parametrize("k", [-1.0, 1.0, 0.0])
def test_evans_zero_on_dispersion_origin(reduced0, k):
    X = monodromy_numeric(reduced0, 0.0, 0.0)
    assert abs(evans_eval(X, k, reduced0.T)) <= 1e-12


def test_evans_zero_at_resonance_sigma(reduced_n2):
    X = monodromy_numeric(reduced_n2, 0.0, 0.0)
    assert abs(evans_eval(X, 9 / 4, reduced_n2.T)) <= 1e-12


def test_evans_nonzero_off_curve(reduced0):
    X = monodromy_numeric(reduced0, 0.0, 0.0)
    assert abs(evans_eval(X, 0.5, reduced0.T)) > 0.1


# origin expansion and Benjamin-Feir branch

def test_origin_cubic_coefficients(origin):
    assert abs(origin.d[(3, 0, 0)] - (-32 * PI ** 3)) <= 1e-8 * 32 * PI ** 3
    assert abs(origin.d[(0, 3, 0)] - (-8j * PI ** 3)) <= 1e-8 * 8 * PI ** 3


def test_origin_low_orders_vanish(origin):
    for key in [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1), (2, 0, 0), (1, 1, 0), (0, 2, 0)]:
        assert abs(origin.d[key]) <= 1e-9


def test_cubic_has_rejected_and_double_root(origin):
    roots = sorted(np.polynomial.polynomial.polyroots(cubic_in_alpha(origin)), key=lambda z: z.imag)
    np.testing.assert_allclose(roots, [0.5j, 0.5j, 1j], atol=1e-6)


@pytest.mark.parametrize("kappa,expected", [(1.0, 1 / (2 * math.sqrt(2))), (4.0, math.sqrt(2))])
def test_bf_branch(kappa, expected):
    p = WaveParameters(kappa, kappa)                   # c0 = 1
    red = reduce_system(stokes_expand(p, 3), 0.0)
    br = bf_branch(evans_expand_origin(monodromy_expand(red)), p)
    assert abs(br.alpha10 - 0.5j) <= 1e-8
    np.testing.assert_allclose(sorted(a.real for a in br.alpha11), [-expected, expected], atol=1e-8)
    assert max(abs(a.imag) for a in br.alpha11) <= 1e-8
    np.testing.assert_allclose(br.diagnostics["rejected_alpha10"], [1j], atol=1e-8)


def test_bf_branch_unavailable_coefficients_reported(origin, unit):
    br = bf_branch(origin, unit)
    assert any(v is None for v in br.d.values())


# resonances

@pytest.mark.parametrize("N,sigma,k2,k4", [(2, 0.75, 2.25, 0.25), (3, 2.0, 4.0, 1.0)])
def test_resonance_find(unit, N, sigma, k2, k4):
    r = resonance_find(N, unit)
    assert abs(r.sigma - sigma) <= 1e-14 and abs(r.k2 - k2) <= 1e-12 and abs(r.k4 - k4) <= 1e-12
    roots = dispersion_roots(unit, r.sigma)
    assert abs(roots.k(2) - r.k2) <= 1e-12 and abs(roots.k(4) - r.k4) <= 1e-12


@pytest.mark.parametrize("N", [1, 0, -2])
def test_resonance_invalid_order(unit, N):
    with pytest.raises(ValueError):
        resonance_find(N, unit)


def test_no_same_branch_resonance(unit):
    grid = np.linspace(sigma_c(unit) + 0.01, 3.0, 200)
    assert same_branch_resonances(unit, grid) == []


def test_resonance_display_coefficients(res2):
    disp = res2[1].diagnostics["display"]
    assert abs(disp["delta^2"] - (-3 * PI ** 2)) <= 1e-8
    assert abs(disp["gamma^2"] - 4 * PI ** 2) <= 1e-8
    assert abs(disp["eps^4"] - (-27 * PI ** 2 / 128)) <= 1e-8


def test_resonance_display_matches_determinant(res2):
    ev = res2[1]
    for name, key in ev.diagnostics["display_keys"].items():
        d = ev.d[key]
        if d is not None:
            assert abs(d - ev.diagnostics["display"][name]) <= 1e-8 * max(1.0, abs(d)), name


def test_ind2_n2(res2):
    out = ind2(res2[1])
    assert abs(out.ind2 - (-3249 / 2304)) <= 1e-8
    assert out.diagnostics["verdict"] == "no eps^2-order instability"
    np.testing.assert_allclose(sorted(a.imag for a in out.alpha02), [-9 / 8, 1 / 16], atol=1e-8)
    assert max(abs(a.real) for a in out.alpha02) <= 1e-8


@pytest.mark.parametrize("N,value", [(3, -2.25), (4, -4.0), (5, -6.25), (6, -9.0)])
def test_ind2_higher_resonances(unit, stokes3, N, value):
    r = resonance_find(N, unit)
    out = ind2(evans_expand_resonance(monodromy_expand(reduce_system(stokes3, r.sigma)), r))
    assert abs(out.ind2 - value) <= 1e-8 * max(1.0, abs(value))
    assert not out.diagnostics["unstable"]


def test_ind2_degenerate_leading_order(res2):
    ev = res2[1]
    mono = ev.mono
    bad = type(mono)(mono.sigma, mono.T, mono.ks, dict(mono.coeffs))
    bad.coeffs[(1, 0)] = np.zeros_like(mono[(1, 0)])
    with pytest.raises(EvansError):
        ind2(type(ev)(ev.sigma, ev.k0, ev.d, mono=bad))


def test_resonance_phase_classes(unit, stokes3):
    r = resonance_find(3, unit)
    mono = monodromy_expand(reduce_system(stokes3, r.sigma))
    ph = np.exp(1j * PI * 16 / 2)
    for j in range(2):
        z10 = mono[(1, 0)][j, j] / ph
        z02 = mono[(0, 2)][j, j] / (1j * ph)
        assert abs(z10.imag) <= 1e-8 * abs(z10)
        assert abs(z02.imag) <= 1e-8 * abs(z02)


def test_ind2_gauge_invariant(unit, stokes3, monkeypatch, res2):
    s = 0.4
    real_basis = reduction.spectral_basis

    def scaled(params, sig):
        b = real_basis(params, sig)
        b.phis = [ph * s for ph in b.phis]
        b.psis = [ps / s for ps in b.psis]
        return b

    monkeypatch.setattr(reduction, "spectral_basis", scaled)
    r = res2[0]
    alt = ind2(evans_expand_resonance(monodromy_expand(reduce_system(stokes3, r.sigma)), r))
    assert abs(alt.ind2 - ind2(res2[1]).ind2) <= 1e-10


# spectrum trace

def test_trace_eps_zero_on_dispersion(unit, reduced0):
    gammas = [0.001, 0.002]
    for gm, l1, l2 in trace_spectrum(unit, 0.0, gammas, reduced=reduced0):
        assert abs(l1.real) <= 1e-8 and abs(l2.real) <= 1e-8
        # omega(k) = c0 k - sqrt(g k) on the branch through k = kappa
        expected = unit.c0 * (1 + gm) - math.sqrt(unit.g * (1 + gm))
        assert abs(l1.imag - expected) <= 1e-8


def test_trace_growth_rate(unit, reduced0):
    (gm, l1, l2), = trace_spectrum(unit, 0.01, [0.005], reduced=reduced0)
    ref = 0.005 * 0.01 / (2 * math.sqrt(2))
    assert abs(max(l1.real, l2.real) - ref) <= 0.05 * ref
    assert abs(l1 + np.conj(l2)) <= 1e-9


def test_trace_thread_determinism(unit, reduced0, monkeypatch):
    gammas = [0.004, 0.006]
    monkeypatch.setenv("EVANS_THREADS", "1")
    a = trace_spectrum(unit, 0.01, gammas, reduced=reduced0)
    monkeypatch.setenv("EVANS_THREADS", "2")
    b = trace_spectrum(unit, 0.01, gammas, reduced=reduced0)
    assert a == b


def test_trace_rejects_large_parameters(unit, reduced0):
    with pytest.raises(ValueError):
        trace_spectrum(unit, 0.2, [0.01], reduced=reduced0)
