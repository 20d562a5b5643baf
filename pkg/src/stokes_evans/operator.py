"""The linearized spectral problem about a Stokes wave.

In the unknowns (phi, u~, eta) the spectral problem reads
u_x = (L(lambda) + B(x; lambda, eps)) u with the constant-coefficient part

    L(lambda) u = ((lambda phi + g u)/c0,
                   -(c0**2 phi_yy + lambda**2 phi + g lambda u)/(g c0),
                   (lambda eta - phi_y(0))/c0),        eta = u(0),

and B collecting everything of order eps.  This module provides the
dispersion relation, L and its adjoint, eigenfunctions and dual functions,
the spectral projection and the expansion of B in (delta, eps) with
lambda = i sigma + delta.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .algebra import (TAU_ALG, ZERO, DomainError, PowerSeries, SeriesFunction,
                      solve_decaying_ode)
from .state import WaveState, gram_matrix, inner_product
from .stokes import StokesExpansion, WaveParameters

PHI_P_MAX_YPOW = 4


class UnsupportedRegimeError(ValueError):
    """Requested object is not available for this frequency sigma."""


class TruncationError(ValueError):
    pass


def _cst(v) -> SeriesFunction:
    return SeriesFunction.const(complex(v))


# ----------------------------------------------------------------------------
# dispersion relation

def dispersion(params: WaveParameters, k) -> Tuple[np.ndarray, np.ndarray]:
    """Branches sigma_pm(k) = c0 k +- sqrt(g |k|)."""
    k = np.asarray(k, dtype=float)
    root = np.sqrt(params.g * np.abs(k))
    sp, sm = params.c0 * k + root, params.c0 * k - root
    if sp.ndim == 0:
        return float(sp), float(sm)
    return sp, sm


def sigma_c(params: WaveParameters) -> float:
    return params.c0 * params.kappa / 4


def k_c(params: WaveParameters) -> float:
    return -params.kappa / 4


@dataclass(frozen=True)
class DispersionRoots:
    sigma: float
    roots: Tuple[Tuple[int, float, int], ...]     # (label, k, multiplicity), sorted by k

    def k(self, j: int) -> float:
        for lab, kj, _ in self.roots:
            if lab == j:
                return kj
        raise KeyError(f"no root labelled {j} at sigma={self.sigma}")

    @property
    def labels(self) -> Tuple[int, ...]:
        return tuple(lab for lab, _, _ in self.roots)


def dispersion_roots(params: WaveParameters, sigma: float) -> DispersionRoots:
    """Real roots k_j(sigma) of (sigma - c0 k)**2 = g|k|, labelled 1..4.

    k_2 > 0 lies on sigma_-, k_4 >= 0 on sigma_+; k_1 <= k_3 <= 0 exist
    (on sigma_+) only for sigma <= sigma_c.
    """
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    kap, c0 = params.kappa, params.c0
    rk = math.sqrt(kap)
    disc_hi = math.sqrt(kap + 4 * sigma / c0)
    ks = {2: ((rk + disc_hi) / 2) ** 2, 4: ((disc_hi - rk) / 2) ** 2}
    sc = sigma_c(params)
    if sigma <= sc * (1 + 1e-12):
        disc_lo = math.sqrt(max(kap - 4 * sigma / c0, 0.0))
        ks[1] = -((rk + disc_lo) / 2) ** 2
        ks[3] = -((rk - disc_lo) / 2) ** 2
    tol = 1e-12 * max(1.0, kap)
    out = []
    for j, kj in ks.items():
        mult = sum(1 for v in ks.values() if abs(v - kj) <= tol)
        out.append((j, kj, mult))
    out.sort(key=lambda r: (r[1], r[0]))
    return DispersionRoots(sigma=float(sigma), roots=tuple(out))


def basis_labels(params: WaveParameters, sigma: float) -> Tuple[int, ...]:
    """Labels spanning Y(sigma) in the regimes where dual functions are known."""
    if abs(sigma) <= TAU_ALG:
        return (1, 2, 3)
    if sigma > sigma_c(params) * (1 + 1e-12):
        return (2, 4)
    raise UnsupportedRegimeError(f"0 < sigma = {sigma} <= sigma_c: projections not available")


# ----------------------------------------------------------------------------
# L(lambda) and its adjoint

def _check_dom(u: WaveState, tol: float = TAU_ALG) -> None:
    gap = (u.eta - u.u.at_y0()).max_abs_coeff()
    if gap > tol * max(1.0, u.max_abs_coeff()):
        raise DomainError(f"state violates eta - u(0) = 0 (gap {gap:.3e})")


def apply_L(params: WaveParameters, lam: complex, u: WaveState, check: bool = True) -> WaveState:
    if check:
        _check_dom(u)
    g, c0 = params.g, params.c0
    phi, v, eta = u.components()
    return WaveState((phi * lam + v * g) / c0,
                     -(phi.dy().dy() * c0 ** 2 + phi * lam ** 2 + v * (g * lam)) / (g * c0),
                     (eta * lam - phi.dy().at_y0()) / c0)


def solve_phi_p(params: WaveParameters, u2: SeriesFunction, lam: complex) -> SeriesFunction:
    """Bounded solution of phi'' - phi = (c0**2 + conj(lam)**2) u2/(g c0), phi'(0) = 0."""
    if not u2:
        return ZERO
    dec, cst = u2.split_constant()
    if cst:
        raise DomainError("u2 must decay as y -> -inf")
    lc = complex(lam).conjugate()
    rhs = u2 * ((params.c0 ** 2 + lc ** 2) / (params.g * params.c0))
    part = solve_decaying_ode(rhs, 1.0)
    if any(t.ypow > PHI_P_MAX_YPOW for t in part):
        raise DomainError("phi_p requires a y-power above the cap")
    slope = part.dy().at_y0()
    return part - slope * SeriesFunction.exp_y(1.0)


def _check_dom_adjoint(params: WaveParameters, u: WaveState, tol: float = TAU_ALG) -> None:
    dec, _ = u.u.split_constant()
    gap = (dec.at_y0() + u.eta * params.kappa).max_abs_coeff()
    if gap > tol * max(1.0, u.max_abs_coeff()):
        raise DomainError(f"state violates u(0) + kappa eta = 0 (gap {gap:.3e})")


def apply_L_adjoint(params: WaveParameters, lam: complex, u: WaveState, check: bool = True) -> WaveState:
    """L(lam)^dagger with respect to the pairing of :func:`state.inner_product`.

    Decaying parts (phi2, u2) and constant parts (a2, b2) transform as

        phi: conj(lam) phi2/c0 + c0 u2/g + phi_p + conj(lam) a2/c0 - conj(lam)**2 b2/(g c0)
        u:   g (phi2 - phi2'')/c0 - conj(lam) u2/c0 + g a2/c0 - conj(lam) b2/c0 - g phi2'(0)/c0
        eta: g phi2'(0)/c0 + conj(lam) eta2/c0
    """
    if check:
        _check_dom_adjoint(params, u)
    g, c0 = params.g, params.c0
    lc = complex(lam).conjugate()
    p2, a2 = u.phi.split_constant()
    v2, b2 = u.u.split_constant()
    slope0 = p2.dy().at_y0()
    first = p2 * (lc / c0) + v2 * (c0 / g) + solve_phi_p(params, v2, lam) \
        + a2 * (lc / c0) - b2 * (lc ** 2 / (g * c0))
    second = (p2 - p2.dy().dy()) * (g / c0) - v2 * (lc / c0) \
        + a2 * (g / c0) - b2 * (lc / c0) - slope0 * (g / c0)
    third = slope0 * (g / c0) + u.eta * (lc / c0)
    return WaveState(first, second, third)


# ----------------------------------------------------------------------------
# eigenfunctions and dual functions

def eigenfunction(params: WaveParameters, sigma: float, j: int) -> WaveState:
    """phi_j(sigma) with L(i sigma) phi_j = i k_j phi_j."""
    g, c0 = params.g, params.c0
    if abs(sigma) <= TAU_ALG:
        if j == 4:
            raise UnsupportedRegimeError("phi_4(0) is a generalized eigenvector; "
                                         "use generalized_eigenfunction_zero")
        if j == 3:
            return WaveState(_cst(g / c0), ZERO, ZERO)
    roots = dispersion_roots(params, sigma)
    kj = roots.k(j)
    a = abs(kj)
    amp = 1j * (kj * c0 - sigma) / g
    return WaveState(SeriesFunction.exp_y(a), SeriesFunction.exp_y(a, amp), _cst(amp))


def generalized_eigenfunction_zero(params: WaveParameters) -> WaveState:
    """phi_4(0) = (0, 1, 1) with L(0) phi_4 = phi_3(0)."""
    return WaveState(ZERO, _cst(1.0), _cst(1.0))


def _ratio_limit(kappa: float) -> SeriesFunction:
    """(e^y - kappa e^{kappa y})/(1 - kappa**2), continuous at kappa = 1."""
    if abs(kappa - 1.0) <= 1e-6:
        # value at kappa = 1 is (1 + y) e^y / 2
        return SeriesFunction([*SeriesFunction.exp_y(1.0, 0.5),
                               *SeriesFunction.term(0.5, ypow=1, yrate=1.0)])
    return (SeriesFunction.exp_y(1.0) - SeriesFunction.exp_y(kappa, kappa)) / (1 - kappa ** 2)


def _psi_high_decaying(params: WaveParameters, sigma: float, k: float) -> SeriesFunction:
    c0, kap = params.c0, params.kappa
    e1, ek = SeriesFunction.exp_y(1.0), SeriesFunction.exp_y(k)
    if abs(k * k - 1.0) <= 1e-6:
        # removable singularity at k = 1: derivative of the numerator over 2k
        num = e1 * (kap * (c0 ** 2 + sigma ** 2)) \
            + SeriesFunction.term(kap * (c0 ** 2 - sigma ** 2), ypow=1, yrate=1.0)
        return num / 2.0
    return (e1 * (-k * kap * (c0 ** 2 - sigma ** 2)) - ek * (kap * (sigma ** 2 - c0 ** 2 * k ** 2))) \
        / (k ** 2 - 1)


def adjoint_eigenfunction(params: WaveParameters, sigma: float, j: int, normalize: bool = True,
                          printed_constants: bool = False) -> WaveState:
    """psi_j(sigma), dual to phi_j(sigma) in the sense <phi_j, psi_j'> = delta_jj'.

    Available at sigma = 0 (j = 1, 2, 3) and for sigma > sigma_c (j = 2, 4).
    For sigma > sigma_c the y-constant parts default to the values that make
    psi_j an eigenfunction of L(i sigma)^dagger; ``printed_constants`` selects
    the alternative c0/(2 sigma - c0 k) form instead (singular where
    2 sigma = c0 k).  Constants never affect <phi_j, psi_j'>.
    """
    labels = basis_labels(params, sigma)
    if j not in labels:
        raise UnsupportedRegimeError(f"no dual function psi_{j} at sigma={sigma}")
    c0, g, kap = params.c0, params.g, params.kappa
    if abs(sigma) <= TAU_ALG:
        if j == 3:
            psi = WaveState(_cst(c0 / g), ZERO, ZERO)
        else:
            s = 1.0 if j == 1 else -1.0
            u = (SeriesFunction.exp_y(kap, kap) + 1.0) * (1j * c0 * s)
            psi = WaveState(_ratio_limit(kap), u, _cst(-1j * c0 * s))
    else:
        k = dispersion_roots(params, sigma).k(j)
        pref = 1.0 / (c0 ** 2 * k ** 2 - 2 * c0 * k * sigma + kap * c0 * sigma + sigma ** 2)
        w = sigma - c0 * k
        if printed_constants:
            a_inf = c0 * kap * sigma ** 2 / (2 * sigma - c0 * k)
            b_inf = -1j * c0 ** 3 * kap ** 2 * w / (2 * sigma - c0 * k)
        else:
            # constant parts fixed by L(i sigma)^dagger psi = -i k psi
            a_inf = kap * sigma ** 2 / k
            b_inf = 1j * c0 ** 2 * kap ** 2 * w / k
        u = SeriesFunction.exp_y(k, 1j * c0 ** 2 * kap ** 2 * w) + b_inf
        phi = _psi_high_decaying(params, sigma, k) + a_inf
        psi = WaveState(phi, u, _cst(-1j * c0 ** 2 * kap * w)) * pref
    if normalize:
        nrm = inner_product(eigenfunction(params, sigma, j), psi)
        psi = psi * (1.0 / np.conj(nrm))
    return psi


@dataclass
class SpectralBasis:
    params: WaveParameters
    sigma: float
    labels: Tuple[int, ...]
    ks: Tuple[float, ...]
    phis: List[WaveState]
    psis: List[WaveState]

    @property
    def dim(self) -> int:
        return len(self.labels)

    def gram(self) -> np.ndarray:
        return gram_matrix(self.phis, self.psis)


def spectral_basis(params: WaveParameters, sigma: float) -> SpectralBasis:
    labels = basis_labels(params, sigma)
    roots = dispersion_roots(params, sigma)
    ks = tuple(roots.k(j) for j in labels)
    phis = [eigenfunction(params, sigma, j) for j in labels]
    psis = [adjoint_eigenfunction(params, sigma, j) for j in labels]
    return SpectralBasis(params, float(sigma), labels, ks, phis, psis)


def projection(basis: SpectralBasis, u: WaveState):
    """Coordinates <u, psi_i> and the projected state sum_i <u, psi_i> phi_i."""
    coords = [inner_product(u, psi) for psi in basis.psis]
    out = WaveState()
    for c, phi in zip(coords, basis.phis):
        out = out + phi * c
    if all(not isinstance(c, SeriesFunction) for c in coords):
        coords = np.array(coords, dtype=complex)
    return coords, out


# ----------------------------------------------------------------------------
# the perturbation B(x; i sigma + delta, eps)

@dataclass
class OperatorExpansion:
    """B = sum_{m,n} B^(m,n) delta**m eps**n, applied through :meth:`apply`.

    The expansion is exact within the truncation: every coefficient is built
    from the Stokes profiles by series arithmetic, the x-dependent
    reciprocals by geometric series in eps.
    """
    params: WaveParameters
    sigma: float
    m_max: int
    n_max: int
    coeffs: Dict[str, PowerSeries] = field(repr=False)

    @property
    def orders(self) -> Tuple[int, int]:
        return (self.m_max, self.n_max)

    def full(self, u: WaveState) -> Tuple[PowerSeries, PowerSeries, PowerSeries]:
        """(phi_x, u~_x, eta_x) of the full linearized system for a fixed state."""
        c = self.coeffs
        o = self.orders
        lift = lambda f: PowerSeries.constant(f, o)
        phi, ut, eta = lift(u.phi), lift(u.u), lift(u.eta)
        phi_y, phi_yy = phi.dy(), phi.dy().dy()
        lam, H1 = c["lam"], c["eta_x"]
        f1, f2, f3 = c["f1"], c["f2"], c["f3"]
        vel = f1 * ut + lam * f2 * phi + f3 * phi_y
        eta_x = -(f2 * (phi_y.at_y0() - lam * eta - H1 * vel.at_y0()))
        phi_x = vel + H1 * phi_y + c["Phi_y"] * eta_x
        u_y = f1 * ut.dy() + lam * f2 * phi_y + f3 * phi_yy
        u_x = H1 * u_y + c["U_y"] * eta_x - phi_yy
        phi_xy = u_y + H1 * phi_yy + c["Phi_yy"] * eta_x
        ut_x = (u_x - c["f1_x"] * ut - lam * c["f2_x"] * phi - lam * f2 * phi_x
                - c["f3_x"] * phi_y - f3 * phi_xy) * c["inv_f1"]
        return phi_x, ut_x, eta_x

    def apply(self, u: WaveState) -> Dict[Tuple[int, int], WaveState]:
        """All nonzero B^(m,n) u, keyed by (m, n)."""
        parts = self.full(u)
        base = apply_L(self.params, 1j * self.sigma, u, check=False)
        out = {}
        keys = set().union(*(p.keys() for p in parts))
        for key in sorted(keys):
            st = WaveState(*(p[key] for p in parts))
            if key == (0, 0):
                st = st - base
            if st.max_abs_coeff() > 0:
                out[key] = st
        return out

    def apply_order(self, u: WaveState, m: int, n: int) -> WaveState:
        return self.apply(u).get((m, n), WaveState())


def build_B(stokes: StokesExpansion, sigma: float, m_max: int = 2, n_max: int = 2) -> OperatorExpansion:
    if n_max > stokes.order:
        raise TruncationError(f"n_max={n_max} exceeds the Stokes order {stokes.order}")
    params = stokes.params
    o = (m_max, n_max)
    g = params.g

    def eps_series(fs, start=1):
        return PowerSeries({(0, n): fs[n] for n in range(start, n_max + 1) if fs[n]}, o)

    Phi = eps_series(stokes.phi)
    H = eps_series(stokes.eta)
    H1 = H.dx()
    U = Phi.dx() - H1 * Phi.dy()
    cser = PowerSeries({(0, n): _cst(stokes.c[n]) for n in range(n_max + 1) if stokes.c[n]}, o)
    lam = PowerSeries({(0, 0): _cst(1j * sigma), (1, 0): _cst(1.0)}, o)
    P = Phi.dy().at_y0()
    Q = U.at_y0()
    f2 = (cser - Q).reciprocal()
    f1 = (g - lam * P) * f2
    f3 = P * f2
    inv_f1 = (cser - Q) * (g - lam * P).reciprocal()
    coeffs = dict(lam=lam, eta_x=H1, Phi_y=Phi.dy(), Phi_yy=Phi.dy().dy(), U_y=U.dy(),
                  f1=f1, f2=f2, f3=f3, f1_x=f1.dx(), f2_x=f2.dx(), f3_x=f3.dx(), inv_f1=inv_f1)
    return OperatorExpansion(params, float(sigma), m_max, n_max, coeffs)
