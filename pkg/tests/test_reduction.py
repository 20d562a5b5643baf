import numpy as np
import pytest

from stokes_evans import reduction
from stokes_evans.algebra import SeriesFunction
from stokes_evans.operator import (apply_L, build_B, eigenfunction, generalized_eigenfunction_zero,
                                   projection, spectral_basis)
from stokes_evans.reduction import (NonRepresentableError, SolvabilityError, direction_correction,
                                    ode_residual, reduce_system, resolvent_solve)
from stokes_evans.state import WaveState, inner_product

XS = np.linspace(0.0, 2 * np.pi, 7)


def _rotated_average(red, m, n):
    """Period average of exp(-A00 x) A^(m,n)(x) exp(A00 x)."""
    ks = red.ks
    out = np.zeros((red.dim, red.dim), complex)
    for i, row in enumerate(red.A(m, n)):
        for j, e in enumerate(row):
            for t in e:
                if t.xpow == 0 and abs(t.xfreq + ks[j] - ks[i]) < 1e-9:
                    out[i, j] += t.coeff
    return out


def _backsub(params, sigma, mu, w, f):
    lhs = w * (1j * mu) - apply_L(params, 1j * sigma, w, check=False)
    return (lhs - f).max_abs_coeff()


def test_resolvent_zero_forcing(unit):
    assert resolvent_solve(unit, 0.0, 2.0, WaveState()).max_abs_coeff() == 0


def test_resolvent_nonresonant_backsubstitution(unit):
    e2 = SeriesFunction.exp_y(2.0)
    f = WaveState(e2 * (1 - 0.5j), e2 * 0.3, SeriesFunction.const(0.2))
    w = resolvent_solve(unit, 0.0, 2.0, f)
    assert _backsub(unit, 0.0, 2.0, w, f) <= 1e-12


@pytest.mark.parametrize("mu", [-2.0, 0.5, 3.0])
def test_resolvent_backsubstitution_resonance_sigma(unit, mu):
    e = SeriesFunction.exp_y(abs(mu) + 1.0)
    f = WaveState(e, e * 1j, SeriesFunction())
    w = resolvent_solve(unit, 0.75, mu, f)
    assert _backsub(unit, 0.75, mu, w, f) <= 1e-12


def test_resolvent_eigenvalue_not_in_range(unit):
    # i kappa is an eigenvalue of L(0) with eigenfunction phi_2
    phi2 = eigenfunction(unit, 0.0, 2)
    with pytest.raises(SolvabilityError):
        resolvent_solve(unit, 0.0, 1.0, phi2)


def test_w00_absent_and_A00(reduced0):
    assert (0, 0) not in reduced0.w_terms
    np.testing.assert_allclose(reduced0.A00(), np.diag([-1j, 1j, 0]), atol=1e-15)
    A = reduced0.A(0, 0)
    for i in range(3):
        for j in range(3):
            v = A[i][j](0.3, 0.0) if A[i][j] else 0
            assert abs(v - reduced0.A00()[i, j]) < 1e-15


@pytest.mark.parametrize("sigma", [0.0, 0.75, 2.0])
def test_w01_frequencies(stokes3, sigma):
    red = reduce_system(stokes3, sigma, [(0, 2), (1, 1)])
    kappa = stokes3.params.kappa
    assert (0, 1) in red.w_terms
    for k, w in zip(red.ks, red.w_terms[(0, 1)]):
        for freq in w.x_modes():
            assert min(abs(k + freq - (k + s * kappa)) for s in (-1, 1)) < 1e-9


def test_w01_nonzero_away_from_origin(stokes3):
    red = reduce_system(stokes3, 2.0, [(0, 2)])
    assert any(w.max_abs_coeff() > 0.1 for w in red.w_terms[(0, 1)])


def test_generalized_direction_needs_y_squared(stokes3, unit):
    with pytest.raises(NonRepresentableError, match="y"):
        direction_correction(stokes3, 0.0, generalized_eigenfunction_zero(unit), 0.0)


def test_rotated_average_A10_origin(reduced0):
    np.testing.assert_allclose(_rotated_average(reduced0, 1, 0), np.diag([2, 2, 1]), atol=1e-12)


def test_A01_zero_average_origin(reduced0):
    np.testing.assert_allclose(_rotated_average(reduced0, 0, 1), 0, atol=1e-12)


@pytest.mark.parametrize("fixture", ["reduced0", "reduced_n2"])
def test_ode_residual(request, stokes3, fixture):
    red = request.getfixturevalue(fixture)
    B = build_B(stokes3, red.sigma, 2, 2)
    for order, ws in red.w_terms.items():
        for j in range(len(ws)):
            assert ode_residual(red, order, j, B) <= 1e-10


@pytest.mark.parametrize("fixture", ["reduced0", "reduced_n2"])
def test_complement_condition(request, fixture):
    red = request.getfixturevalue(fixture)
    for ws in red.w_terms.values():
        for w in ws:
            for part in w.x_modes().values():
                for psi in red.basis.psis:
                    c = inner_product(part, psi)
                    c = c.max_abs_coeff() if isinstance(c, SeriesFunction) else abs(c)
                    assert c <= 1e-10


@pytest.mark.parametrize("sigma", [0.0, 0.75])
def test_gauge_consistency(stokes3, monkeypatch, sigma):
    ref = reduce_system(stokes3, sigma)
    s = 2.5
    real_basis = reduction.spectral_basis

    def scaled(params, sig):
        b = real_basis(params, sig)
        b.phis = [ph / s for ph in b.phis]
        b.psis = [ps * s for ps in b.psis]
        return b

    monkeypatch.setattr(reduction, "spectral_basis", scaled)
    alt = reduce_system(stokes3, sigma)
    for o in ref.orders:
        for x in XS:
            a = np.array([[e(x, 0.0) if e else 0j for e in row] for row in ref.A(*o)])
            b = np.array([[e(x, 0.0) if e else 0j for e in row] for row in alt.A(*o)])
            np.testing.assert_allclose(b, a, atol=1e-9 * max(1.0, np.abs(a).max()))


def test_A_numeric_matches_series(reduced_n2):
    d, e, x = 0.01 + 0.002j, 0.02, 0.7
    M = reduced_n2.A00().astype(complex)
    for (m, n) in reduced_n2.orders:
        M += d ** m * e ** n * np.array([[v(x, 0.0) if v else 0j for v in row]
                                         for row in reduced_n2.A(m, n)])
    np.testing.assert_allclose(reduced_n2.A_numeric(x, d, e), M, atol=1e-14)


def test_projection_of_basis_flow(reduced0):
    # projecting a basis direction returns it unchanged
    for phi in reduced0.basis.phis:
        _, pr = projection(reduced0.basis, phi)
        assert (pr - phi).max_abs_coeff() <= 1e-12
