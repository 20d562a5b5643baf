"""Formal order-by-order reduction of the spectral problem to Y(sigma).

Coordinates a_j are coefficients of the eigenfunctions phi_j; the reduction
function is linear in them, w = sum_j a_j w_j(x), and each w_j solves

    w_j' - (L(i sigma) - i k_j) w_j = (1 - Pi) B (phi_j + w_j) - sum_i At_ij w_i

with Pi w_j = 0.  Expanding in (delta, eps) every order is a constant
coefficient problem in x, solved Fourier mode by Fourier mode with the
resolvent of L(i sigma).  The reduced system is a' = A(x) a with

    A_ij = i k_j delta_ij + At_ij,   At_ij = <B (phi_j + w_j), psi_i>.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from .algebra import TAU_ALG, ZERO, DomainError, SeriesFunction, solve_decaying_ode
from .operator import (OperatorExpansion, SpectralBasis, apply_L, build_B, projection,
                       spectral_basis)
from .state import WaveState, inner_product
from .stokes import StokesExpansion, WaveParameters

Order = Tuple[int, int]

# (m, n) orders of A needed for the tables at sigma = 0 and at resonances.
# At sigma = 0, w^(1,1) does not exist in the bounded class (the forcing at
# the x-mode with mu = 0 meets the Jordan block of L(0)), so A^(1,2) is not
# available there.
DEFAULT_ORDERS: Tuple[Order, ...] = ((1, 0), (2, 0), (0, 1), (0, 2), (1, 1))
RESOLVENT_MAX_YPOW = 1


class ReductionError(ValueError):
    """Base class for failures of the formal reduction."""


class NonRepresentableError(ReductionError):
    """The correction leaves the admissible class (needs y**2 without decay)."""


class SolvabilityError(ReductionError):
    """Forcing at an eigenvalue has a component along the dual direction."""


class ComplementError(ReductionError):
    """A correction acquired a component along Y(sigma)."""


def _annotate(err: Exception, **info) -> ReductionError:
    cls = type(err) if isinstance(err, ReductionError) else NonRepresentableError
    desc = ", ".join(f"{k}={v}" for k, v in info.items())
    return cls(f"{err} [{desc}]")


def _state_ypow(u: WaveState) -> int:
    return max((t.ypow for comp in u.components() for t in comp), default=0)


def resolvent_solve(params: WaveParameters, sigma: float, mu: float, f: WaveState,
                    basis: Optional[SpectralBasis] = None, tol: float = 1e-9) -> WaveState:
    """Solve (i mu - L(i sigma)) w = f for an x-free forcing f.

    u is eliminated with the first row of L, phi solves
    phi'' - mu**2 phi = (g f_u + (i sigma + i c0 mu) f_phi)/c0 with a decaying
    (or, at mu = 0, constant) homogeneous part, and eta = u(0).  When i mu is
    an eigenvalue of L(i sigma) the forcing must satisfy the boundary
    solvability condition and the free amplitude is fixed by
    <w, psi_i> = 0 for the matching dual function.
    """
    if not f.is_x_free():
        raise ValueError("forcing must be a single x-mode with the exponential removed")
    g, c0 = params.g, params.c0
    lam = 1j * sigma
    if f.max_abs_coeff() == 0:
        return WaveState()
    R = (f.u * g + f.phi * (lam + 1j * c0 * mu)) / c0
    try:
        part = solve_decaying_ode(R, mu) if R else ZERO
    except DomainError as err:
        raise NonRepresentableError(str(err)) from None
    if _state_ypow(WaveState(part, ZERO, ZERO)) > max(RESOLVENT_MAX_YPOW, _state_ypow(f)):
        raise NonRepresentableError("correction requires y**2 growth in the first entry")
    h = SeriesFunction.exp_y(abs(mu)) if abs(mu) > TAU_ALG else SeriesFunction.const(1.0)

    def assemble(phi, forcing_phi):
        u = (phi * (1j * c0 * mu - lam) - forcing_phi * c0) / g
        return WaveState(phi, u, u.at_y0())

    def boundary(st):
        val = st.eta * (1j * mu - lam / c0) + st.phi.dy().at_y0() / c0
        return val.constant_value() if val else 0j

    wp = assemble(part, f.phi)
    hom = assemble(h, ZERO)
    res = boundary(wp) - (f.eta.constant_value() if f.eta else 0j)
    D = boundary(hom)
    # D g c0 = g|mu| - (c0 mu - sigma)**2 vanishes exactly on the dispersion curve
    scale = max(1.0, g * abs(mu), (c0 * mu - sigma) ** 2)
    if abs(D) * g * c0 > tol * scale:
        C = -res / D
    else:
        if abs(res) > tol * max(1.0, f.max_abs_coeff()):
            raise SolvabilityError(f"i*{mu} is an eigenvalue and the forcing is not in the range "
                                   f"(boundary residual {abs(res):.3e})")
        C = 0j
        if basis is not None:
            for kj, psi in zip(basis.ks, basis.psis):
                if abs(kj - mu) <= 1e-9 * max(1.0, abs(mu)):
                    C = -inner_product(wp, psi) / inner_product(hom, psi)
                    break
    return wp + hom * C


def solve_periodic(params: WaveParameters, sigma: float, k: float, f: WaveState,
                   basis: Optional[SpectralBasis] = None) -> WaveState:
    """Periodic solution of w' - (L(i sigma) - i k) w = f(x), mode by mode."""
    out = WaveState()
    for w, part in f.x_modes().items():
        if any(t.xpow for comp in part.components() for t in comp):
            raise ReductionError("secular forcing in x")
        try:
            sol = resolvent_solve(params, sigma, w + k, part, basis)
        except ReductionError as err:
            raise _annotate(err, frequency=w, mu=w + k) from None
        out = out + sol.shift_x(w)
    return out


def _mat_zero(d):
    return [[ZERO for _ in range(d)] for _ in range(d)]


@dataclass
class ReducedSystem:
    params: WaveParameters
    sigma: float
    basis: SpectralBasis
    orders: Tuple[Order, ...]
    A_terms: Dict[Order, List[List[SeriesFunction]]]         # At^(m,n)(x), (0,0) excluded
    w_terms: Dict[Order, List[WaveState]] = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.basis.dim

    @property
    def ks(self) -> Tuple[float, ...]:
        return self.basis.ks

    @property
    def T(self) -> float:
        return self.params.T

    def A00(self) -> np.ndarray:
        return np.diag([1j * k for k in self.ks])

    def A(self, m: int, n: int) -> List[List[SeriesFunction]]:
        """A^(m,n)(x); A^(0,0) is the constant diag(i k_j)."""
        if (m, n) == (0, 0):
            d = self.dim
            return [[SeriesFunction.const(1j * self.ks[i]) if i == j else ZERO for j in range(d)]
                    for i in range(d)]
        return self.A_terms[(m, n)]

    def A_numeric(self, x: float, delta: complex, eps: float) -> np.ndarray:
        M = self.A00().astype(complex)
        for (m, n), mat in self.A_terms.items():
            s = delta ** m * eps ** n
            if s == 0:
                continue
            M = M + s * np.array([[e(x, 0.0) if e else 0j for e in row] for row in mat])
        return M

    def average(self, m: int, n: int) -> np.ndarray:
        """Period average of A^(m,n)(x) (constant Fourier modes)."""
        mat = self.A(m, n)
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for i, row in enumerate(mat):
            for j, e in enumerate(row):
                for t in e:
                    if abs(t.xfreq) <= TAU_ALG and t.xpow == 0:
                        out[i, j] += t.coeff
        return out


def _closure(orders: Iterable[Order]) -> Tuple[List[Order], List[Order]]:
    """Orders of A requested, and the w-orders they require (strictly below)."""
    want = sorted(set(orders), key=lambda o: (o[0] + o[1], o))
    need_w = set()
    for (m, n) in want:
        for a in range(m + 1):
            for b in range(n + 1):
                if (a, b) != (m, n) and (a, b) != (0, 0):
                    need_w.add((a, b))
    full = sorted(set(want) | need_w, key=lambda o: (o[0] + o[1], o))
    return full, sorted(need_w, key=lambda o: (o[0] + o[1], o))


def reduce_system(stokes: StokesExpansion, sigma: float, orders: Iterable[Order] = DEFAULT_ORDERS,
                  B: Optional[OperatorExpansion] = None, check: bool = True) -> ReducedSystem:
    """Reduction functions w^(m,n) and matrices At^(m,n)(x) for the given orders."""
    params = stokes.params
    full, need_w = _closure(orders)
    m_max = max(o[0] for o in full)
    n_max = max(o[1] for o in full)
    if B is None:
        B = build_B(stokes, sigma, m_max, n_max)
    basis = spectral_basis(params, sigma)
    d = basis.dim
    Bphi = [B.apply(ph) for ph in basis.phis]
    w: Dict[Order, List[WaveState]] = {}
    Bw: Dict[Order, List[Dict[Order, WaveState]]] = {}
    At: Dict[Order, List[List[SeriesFunction]]] = {}
    for (m, n) in full:
        # forcing F_j = [B (phi_j + w_j)]^(m,n)
        forcing = []
        for j in range(d):
            Fj = Bphi[j].get((m, n), WaveState())
            for o, wl in w.items():
                rest = (m - o[0], n - o[1])
                if rest[0] < 0 or rest[1] < 0 or rest == (0, 0):
                    continue
                Fj = Fj + Bw[o][j].get(rest, WaveState())
            forcing.append(Fj)
        mat = [[inner_product(forcing[j], basis.psis[i]) for j in range(d)] for i in range(d)]
        mat = [[e if isinstance(e, SeriesFunction) else SeriesFunction.const(e) for e in row]
               for row in mat]
        At[(m, n)] = mat
        if (m, n) not in need_w:
            continue
        sols = []
        for j in range(d):
            rhs = forcing[j]
            for i in range(d):
                if mat[i][j]:
                    rhs = rhs - basis.phis[i] * mat[i][j]
            for o, wl in w.items():
                rest = (m - o[0], n - o[1])
                if rest[0] < 0 or rest[1] < 0 or rest == (0, 0) or rest not in At:
                    continue
                for i in range(d):
                    a = At[rest][i][j]
                    if a:
                        rhs = rhs - wl[i] * a
            try:
                sol = solve_periodic(params, sigma, basis.ks[j], rhs, basis)
            except ReductionError as err:
                raise _annotate(err, m=m, n=n, j=basis.labels[j]) from None
            if check:
                _check_complement(basis, sol, (m, n), basis.labels[j])
            sols.append(sol)
        w[(m, n)] = sols
        Bw[(m, n)] = [B.apply(s) for s in sols]
    A_terms = {o: At[o] for o in full}
    return ReducedSystem(params, float(sigma), basis, tuple(full), A_terms, w)


def _check_complement(basis: SpectralBasis, sol: WaveState, order: Order, label: int,
                      tol: float = 1e-9) -> None:
    for w, part in sol.x_modes().items():
        for lab, psi in zip(basis.labels, basis.psis):
            c = inner_product(part, psi)
            c = c.max_abs_coeff() if isinstance(c, SeriesFunction) else abs(c)
            if c > tol * max(1.0, part.max_abs_coeff()):
                raise ComplementError(f"w^{order}_{label} has <w, psi_{lab}> = {c:.3e} "
                                      f"at x-frequency {w}")


def ode_residual(reduced: ReducedSystem, order: Order, j: int, B: OperatorExpansion) -> float:
    """Back-substitution residual of the defining equation of w^(m,n)_j."""
    basis = reduced.basis
    params = reduced.params
    m, n = order
    sol = reduced.w_terms[order][j]
    lhs = sol.dx() - apply_L(params, 1j * reduced.sigma, sol, check=False) + sol * (1j * basis.ks[j])
    forcing = B.apply(basis.phis[j]).get(order, WaveState())
    for o, wl in reduced.w_terms.items():
        rest = (m - o[0], n - o[1])
        if rest[0] < 0 or rest[1] < 0 or rest == (0, 0):
            continue
        forcing = forcing + B.apply(wl[j]).get(rest, WaveState())
    rhs = forcing
    for i in range(basis.dim):
        rhs = rhs - basis.phis[i] * reduced.A_terms[order][i][j]
    for o, wl in reduced.w_terms.items():
        rest = (m - o[0], n - o[1])
        if rest[0] < 0 or rest[1] < 0 or rest == (0, 0):
            continue
        for i in range(basis.dim):
            rhs = rhs - wl[i] * reduced.A_terms[rest][i][j]
    return (lhs - rhs).max_abs_coeff()


def direction_correction(stokes: StokesExpansion, sigma: float, phi: WaveState, k: float,
                         order: Order = (1, 0)) -> WaveState:
    """Leading correction w^(m,n) for a flow phi exp(i k x) not necessarily in Y(sigma).

    Solves w' - (L(i sigma) - i k) w = (1 - Pi) B^(m,n) phi; used to probe
    directions such as the generalized eigenvector at sigma = 0.
    """
    m, n = order
    B = build_B(stokes, sigma, max(m, 1), max(n, 1))
    basis = spectral_basis(stokes.params, sigma)
    F = B.apply_order(phi, m, n)
    _, proj = projection(basis, F)
    try:
        return solve_periodic(stokes.params, sigma, k, F - proj, basis)
    except ReductionError as err:
        raise _annotate(err, m=m, n=n) from None
