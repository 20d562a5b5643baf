import math

import numpy as np
import pytest

from stokes_evans.algebra import SeriesFunction as S
from stokes_evans.stokes import WaveParameters, stokes_expand, stokes_residual, surface_profile


def test_parameters():
    p = WaveParameters.from_speed(4.0, 1.0)
    assert p.g == 4.0 and p.c0 == pytest.approx(1.0)
    assert p.T * p.kappa == pytest.approx(2 * math.pi)
    with pytest.raises(ValueError):
        WaveParameters(-1.0, 1.0)


def test_first_and_second_order(unit):
    exp = stokes_expand(unit, 2)
    assert exp.phi[1] == S.sin_x(1.0) * S.exp_y(1.0)
    assert exp.eta[1] == S.cos_x(1.0)
    assert exp.phi[2] == S.sin_x(2.0, 0.5) * S.exp_y(1.0)
    assert exp.eta[2] == S.cos_x(2.0, 0.5)
    assert exp.c[1] == 0.0
    assert exp.c[2] == pytest.approx(0.5)


@pytest.mark.parametrize("kappa", [0.5, 2.0, 4.0])
def test_speed_correction(kappa):
    p = WaveParameters.from_speed(kappa, 1.0)
    exp = stokes_expand(p, 2)
    assert exp.c[2] == pytest.approx(kappa ** 2 / (2 * p.c0))


def test_kappa_four():
    exp = stokes_expand(WaveParameters(4.0, 4.0), 1)
    assert exp.eta[1] == S.cos_x(4.0)
    assert exp.phi[1] == S.sin_x(4.0) * S.exp_y(4.0)


def test_parity_and_modes(stokes3):
    x = np.linspace(0.1, 2.0, 7)
    for n in range(1, 4):
        phi, eta = stokes3.phi[n], stokes3.eta[n]
        assert np.allclose(phi(-x, -0.4), -phi(x, -0.4))
        assert np.allclose(eta(-x, 0.0), eta(x, 0.0))
        assert all(t.yrate > 0 for t in phi)
        assert eta.is_y_free()
        assert max(abs(w) for w in phi.x_modes()) <= n + 1e-12
        assert max(abs(w) for w in eta.x_modes()) <= n + 1e-12
    assert all(abs(h) < 1e-14 for h in stokes3.diagnostics["eta_means"].values())


def test_zero_amplitude_residual(stokes3):
    assert max(stokes_residual(stokes3, 0.0).values()) == 0.0


@pytest.mark.parametrize("order, expected", [(1, 2.0), (2, 3.0), (3, 4.0)])
def test_residual_order_scaling(unit, order, expected):
    exp = stokes_expand(unit, order)
    r1 = max(stokes_residual(exp, 1e-3).values())
    r2 = max(stokes_residual(exp, 2e-3).values())
    assert math.log2(r2 / r1) >= expected - 0.1


def test_dynamic_condition_exact_through_second_order(unit):
    exp = stokes_expand(unit, 2)
    r = stokes_residual(exp, 1e-2)
    # only O(eps^3) remains; the lower orders cancel identically
    assert r["dynamic"] < 1e-2 ** 3 * 10
    assert r["far_field"] == 0.0


def test_scaling_invariance():
    s = 2.5
    a = stokes_expand(WaveParameters(1.0, 1.0), 3)
    b = stokes_expand(WaveParameters(s, s), 3)
    eps = 0.04
    x, y = np.linspace(0, 2 * math.pi, 9), -0.6
    # lengths scale by 1/s and the amplitude parameter by eps/s
    lhs = b.phi_sum(eps / s)(x / s, y / s)
    assert np.allclose(lhs, a.phi_sum(eps)(x, y) / s, atol=1e-12)
    assert np.allclose(b.eta_sum(eps / s)(x / s, 0.0), a.eta_sum(eps)(x, 0.0) / s, atol=1e-12)
    assert b.speed(eps / s) == pytest.approx(a.speed(eps), abs=1e-12)


def test_order_limits(unit):
    with pytest.raises(ValueError):
        stokes_expand(unit, 5)
    with pytest.raises(ValueError):
        stokes_residual(stokes_expand(unit, 1), 0.2)


def test_surface_profile(unit):
    xs, eta = surface_profile(stokes_expand(unit, 2), 0.1, n=16)
    assert eta[0] == pytest.approx(0.1 + 0.5 * 0.01)
