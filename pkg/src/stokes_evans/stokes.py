"""Small-amplitude Stokes waves in infinite depth, in flattened coordinates.

The free surface is mapped to y = 0 by y -> y - eta(x), u = phi_x, so a
stationary wave solves

    phi_x - eta_x phi_y - u = 0,   u_x - eta_x u_y + phi_yy = 0   (y < 0)
    (u - c) eta_x - phi_y = 0                                     (y = 0)
    -c u + (u - c) eta_x phi_y + u**2/2 - phi_y**2/2 + g eta = 0   (y = 0)

with phi_y -> 0 as y -> -inf.  The expansion in the amplitude eps is solved
order by order, mode by mode, in exact series arithmetic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np

from .algebra import ZERO, PowerSeries, SeriesFunction, solve_decaying_ode

MAX_ORDER = 4


class HierarchyError(RuntimeError):
    """An order of the eps-hierarchy has no solution in the admissible class."""


@dataclass(frozen=True)
class WaveParameters:
    kappa: float = 1.0
    g: float = 1.0

    def __post_init__(self):
        if self.kappa <= 0 or self.g <= 0:
            raise ValueError("kappa and g must be positive")

    @property
    def c0(self) -> float:
        return math.sqrt(self.g / self.kappa)

    @property
    def T(self) -> float:
        return 2 * math.pi / self.kappa

    @classmethod
    def from_speed(cls, kappa: float, c0: float) -> "WaveParameters":
        return cls(kappa=kappa, g=kappa * c0 * c0)


@dataclass
class StokesExpansion:
    params: WaveParameters
    order: int
    phi: List[SeriesFunction]          # phi[0] = 0, phi[n] for n = 1..order
    eta: List[SeriesFunction]
    c: List[float]                     # c[0] .. c[order]
    diagnostics: Dict[str, object] = field(default_factory=dict)

    def phi_sum(self, eps: float, order: int | None = None) -> SeriesFunction:
        m = self.order if order is None else order
        return sum((self.phi[n] * eps ** n for n in range(1, m + 1)), ZERO)

    def eta_sum(self, eps: float, order: int | None = None) -> SeriesFunction:
        m = self.order if order is None else order
        return sum((self.eta[n] * eps ** n for n in range(1, m + 1)), ZERO)

    def speed(self, eps: float, order: int | None = None) -> float:
        m = self.order if order is None else order
        return sum(self.c[n] * eps ** n for n in range(m + 1)).real

    def series(self, max_order: int | None = None):
        """(phi, eta, c) as truncated power series in eps."""
        m = self.order if max_order is None else max_order
        orders = (m,)
        phi = PowerSeries({(n,): self.phi[n] for n in range(1, min(m, self.order) + 1)}, orders)
        eta = PowerSeries({(n,): self.eta[n] for n in range(1, min(m, self.order) + 1)}, orders)
        c = PowerSeries({(n,): SeriesFunction.const(self.c[n])
                         for n in range(min(m, self.order) + 1) if self.c[n] != 0}, orders)
        return phi, eta, c


def _equations(phi: PowerSeries, eta: PowerSeries, c: PowerSeries, g: float):
    """Interior residual and the two boundary residuals as series in eps."""
    phi_y = phi.dy()
    eta_x = eta.dx()
    u = phi.dx() - eta_x * phi_y
    interior = u.dx() - eta_x * u.dy() + phi_y.dy()
    u0 = u.at_y0()
    phi_y0 = phi_y.at_y0()
    kinematic = (u0 - c) * eta_x - phi_y0
    dynamic = (-1.0 * c) * u0 + (u0 - c) * eta_x * phi_y0 + 0.5 * (u0 * u0) - 0.5 * (phi_y0 * phi_y0) \
        + eta * g
    return interior, kinematic, dynamic


def _mode(f: SeriesFunction, w: float) -> SeriesFunction:
    for k, v in f.x_modes().items():
        if abs(k - w) <= 1e-9 * max(1.0, abs(w)):
            return v
    return ZERO


def _scalar(f: SeriesFunction) -> complex:
    return f.constant_value() if f else 0j


def stokes_expand(params: WaveParameters, order: int = 2, max_order: int = MAX_ORDER) -> StokesExpansion:
    """Stokes expansion through ``order`` (profiles phi_n, eta_n and c_0..c_order).

    eps is normalised by phi_1 = sin(kappa x) exp(kappa y); for n >= 2 the
    homogeneous sin(kappa x) exp(kappa y) component of phi_n is set to zero,
    and the solvability condition at the fundamental mode fixes c_{n-1}.
    """
    if order < 1 or order > max_order:
        raise ValueError(f"order must be in 1..{max_order}")
    kappa, g, c0 = params.kappa, params.g, params.c0
    phis = [ZERO, SeriesFunction.sin_x(kappa) * SeriesFunction.exp_y(kappa)]
    etas = [ZERO, SeriesFunction.cos_x(kappa, 1.0 / c0)]
    cs = [c0, 0.0]
    diagnostics = {"eta_means": {}}
    eta1_x = etas[1].dx()
    u1_0 = phis[1].dx().at_y0()

    # the speed c_order needs the solvability condition of order + 1
    for n in range(2, order + 2):
        orders = (n,)
        phi = PowerSeries({(k,): phis[k] for k in range(1, n)}, orders)
        eta = PowerSeries({(k,): etas[k] for k in range(1, n)}, orders)
        c = PowerSeries({(k,): SeriesFunction.const(cs[k]) for k in range(n - 1) if cs[k]}, orders)
        interior, kinematic, dynamic = (s[(n,)] for s in _equations(phi, eta, c, g))
        freqs = sorted({round(w, 9) for f in (interior, kinematic, dynamic) for w in f.x_modes()})
        new_phi, new_eta = [], []
        c_found = []
        for w in freqs:
            r2, r4, r5 = _mode(interior, w), _mode(kinematic, w), _mode(dynamic, w)
            if any(t.xpow for f in (r2, r4, r5) for t in f):
                raise HierarchyError(f"secular forcing at order {n}, mode {w}")
            part = solve_decaying_ode(-r2, w) if r2 else ZERO
            p0 = _scalar(part.at_y0())
            p1 = _scalar(part.dy().at_y0())
            R4, R5 = _scalar(r4), _scalar(r5)
            aw = abs(w)
            if aw <= 1e-12:
                if abs(R4 - p1) > 1e-9 * max(1.0, abs(R4)):
                    raise HierarchyError(f"order {n}: mean kinematic residual does not vanish")
                h = -R5 / g
                C = 0.0
                diagnostics["eta_means"][n] = h
            elif abs(aw - kappa) <= 1e-9 * kappa:
                # unknowns (h, c_{n-1}); homogeneous amplitude fixed to zero
                e1 = _scalar(_mode(eta1_x, w))
                v1 = _scalar(_mode(u1_0, w))
                M = np.array([[-c0 * 1j * w, -e1], [g, -v1]], dtype=complex)
                rhs = np.array([-R4 + p1, -R5 + 1j * c0 * w * p0])
                h, cn = np.linalg.solve(M, rhs)
                C = 0.0
                c_found.append(cn)
            else:
                M = np.array([[-aw, -c0 * 1j * w], [-1j * c0 * w, g]], dtype=complex)
                rhs = np.array([-R4 + p1, -R5 + 1j * c0 * w * p0])
                det = np.linalg.det(M)
                if abs(det) <= 1e-12 * max(1.0, aw * g):
                    raise HierarchyError(f"order {n}: singular mode {w}")
                C, h = np.linalg.solve(M, rhs)
            prof = part + SeriesFunction.exp_y(aw, C) if aw > 1e-12 and C != 0 else part
            new_phi.append(prof.shift_x(w))
            if h != 0:
                new_eta.append(SeriesFunction.term(h, 0, w))
        if c_found:
            if max(abs(a - c_found[0]) for a in c_found) > 1e-9 * max(1.0, abs(c_found[0])):
                raise HierarchyError(f"order {n}: inconsistent speed corrections {c_found}")
            cn = c_found[0]
        else:
            cn = 0.0
        if abs(cn.imag) > 1e-9:
            raise HierarchyError(f"order {n}: complex speed correction {cn}")
        cs[n - 1] = float(cn.real)
        cs.append(0.0)
        phis.append(sum(new_phi, ZERO))
        etas.append(sum(new_eta, ZERO))

    return StokesExpansion(params=params, order=order, phi=phis[:order + 1],
                           eta=etas[:order + 1], c=cs[:order + 1], diagnostics=diagnostics)


def stokes_residual(exp: StokesExpansion, eps: float, n: int = 64, depth: float = 10.0,
                    order: int | None = None) -> Dict[str, float]:
    """Sup-norms of the five flattened equations at the truncated wave.

    The grid is n x n uniform over [0, T] x [-depth, 0].  Residuals are
    assembled as exact series in eps and summed numerically, so no
    coefficient is lost to pruning after scaling by eps**k.  The far-field
    condition is evaluated exactly as the y-constant part of phi_y.
    """
    if abs(eps) > 0.1:
        raise ValueError("|eps| must be <= 0.1")
    m = exp.order if order is None else order
    phi, eta, c = exp.series(m)
    top = (3 * m + 1,)
    phi, eta, c = (PowerSeries(s.coeffs, top) for s in (phi, eta, c))
    interior, kinematic, dynamic = _equations(phi, eta, c, exp.params.g)
    xs = np.linspace(0.0, exp.params.T, n)
    ys = np.linspace(-depth, 0.0, n)
    X, Y = np.meshgrid(xs, ys)

    def sup(series, x, y):
        total = np.zeros(np.broadcast(x, y).shape, dtype=complex)
        for (k,), f in series.coeffs.items():
            if f:
                total = total + eps ** k * f(x, y)
        return float(np.max(np.abs(total)))

    far = max((f.dy().split_constant()[1].max_abs_coeff() * abs(eps) ** k
               for (k,), f in phi.coeffs.items()), default=0.0)
    return {
        "phi_x": 0.0,                  # u is defined by the first equation

        "u_x": sup(interior, X, Y),
        "far_field": far,
        "kinematic": sup(kinematic, xs, 0.0),
        "dynamic": sup(dynamic, xs, 0.0),
    }


def surface_profile(exp: StokesExpansion, eps: float, n: int = 128) -> Tuple[np.ndarray, np.ndarray]:
    """Sampled free surface eta(x; eps) over one period."""
    xs = np.linspace(0.0, exp.params.T, n, endpoint=False)
    eta = exp.eta_sum(eps)
    return xs, np.real(eta(xs, 0.0)) if eta else np.zeros_like(xs)
