"""Monodromy expansion, periodic Evans function and the spectral branches.

X(x; sigma, delta, eps) is the fundamental matrix of the reduced system
a' = A(x) a with X(0) = I.  Its coefficients a^(m,n)(x) follow from
variation of parameters,

    a^(m,n)(x) = E(x) int_0^x E(-s) sum A^(m',n')(s) a^(m-m',n-n')(s) ds,

E(x) = exp(diag(i k_j) x), all integrals in closed form.  The Evans
function is Delta(lambda, k; eps) = det(exp(i k T) I - X(T)).
"""
from __future__ import annotations

import cmath
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.integrate import solve_ivp

from .algebra import ZERO, SeriesFunction
from .operator import dispersion, dispersion_roots, sigma_c
from .reduction import DEFAULT_ORDERS, Order, ReducedSystem, reduce_system
from .stokes import StokesExpansion, WaveParameters, stokes_expand

ODE_RTOL = 1e-12
ODE_ATOL = 1e-14
NEWTON_TOL = 1e-12
NEWTON_MAXIT = 50


class EvansError(RuntimeError):
    pass


class ConsistencyError(EvansError):
    pass


class TraceError(EvansError):
    pass


# ----------------------------------------------------------------------------
# monodromy

@dataclass
class MonodromyExpansion:
    sigma: float
    T: float
    ks: Tuple[float, ...]
    coeffs: Dict[Order, np.ndarray]                   # a^(m,n)(T)
    functions: Dict[Order, List[List[SeriesFunction]]] = field(default_factory=dict, repr=False)

    def __getitem__(self, order: Order) -> np.ndarray:
        return self.coeffs[tuple(order)]

    @property
    def orders(self) -> Tuple[Order, ...]:
        return tuple(sorted(self.coeffs, key=lambda o: (o[0] + o[1], o)))

    def evaluate(self, delta: complex, eps: float) -> np.ndarray:
        """Truncated sum of a^(m,n)(T) delta**m eps**n."""
        return sum(c * delta ** m * eps ** n for (m, n), c in self.coeffs.items())


def monodromy_expand(reduced: ReducedSystem, orders: Optional[Sequence[Order]] = None) -> MonodromyExpansion:
    """Closed-form a^(m,n)(T) for all orders whose A-terms are available."""
    d = reduced.dim
    ks = reduced.ks
    if orders is None:
        orders = [o for o in reduced.A_terms]
    avail = set(reduced.A_terms) | {(0, 0)}
    todo = sorted({(0, 0), *orders}, key=lambda o: (o[0] + o[1], o))
    a: Dict[Order, List[List[SeriesFunction]]] = {
        (0, 0): [[SeriesFunction.term(1.0, 0, ks[i]) if i == j else ZERO for j in range(d)]
                 for i in range(d)]}
    for (m, n) in todo:
        if (m, n) == (0, 0):
            continue
        deps = [(p, q) for p in range(m + 1) for q in range(n + 1) if (p, q) != (0, 0)]
        if any(o not in avail for o in deps):
            missing = [o for o in deps if o not in avail]
            raise EvansError(f"a^({m},{n}) needs A at orders {missing}")
        S = [[ZERO for _ in range(d)] for _ in range(d)]
        for (p, q) in deps:
            Am = reduced.A(p, q)
            prev = a[(m - p, n - q)]
            for i in range(d):
                for j in range(d):
                    acc = S[i][j]
                    for l in range(d):
                        if Am[i][l] and prev[l][j]:
                            acc = acc + Am[i][l] * prev[l][j]
                    S[i][j] = acc
        a[(m, n)] = [[S[i][j].shift_x(-ks[i]).integrate_x().shift_x(ks[i]) if S[i][j] else ZERO
                      for j in range(d)] for i in range(d)]
    T = reduced.T
    coeffs = {o: np.array([[e(T, 0.0) if e else 0j for e in row] for row in mat], dtype=complex)
              for o, mat in a.items()}
    return MonodromyExpansion(reduced.sigma, T, tuple(ks), coeffs, a)


def monodromy_numeric(reduced: ReducedSystem, delta: complex, eps: float,
                      rtol: float = ODE_RTOL, atol: float = ODE_ATOL) -> np.ndarray:
    """X(T) by adaptive integration (DOP853) of a' = A(x; delta, eps) a."""
    if abs(delta) > 0.1 or abs(eps) > 0.1:
        raise ValueError("|delta| and |eps| must not exceed 0.1")
    d = reduced.dim
    D = reduced.A00()
    terms = []
    for (m, n), mat in reduced.A_terms.items():
        s = delta ** m * eps ** n
        if s != 0:
            terms.append((s, mat))
    # A(x) = D + sum_f C_f exp(i f x): collect numeric Fourier matrices
    fourier: Dict[float, np.ndarray] = {}
    for s, mat in terms:
        for i in range(d):
            for j in range(d):
                for t in mat[i][j]:
                    if t.xpow:
                        raise EvansError("secular coefficient in A(x)")
                    key = round(t.xfreq, 9)
                    fourier.setdefault(key, np.zeros((d, d), dtype=complex))[i, j] += s * t.coeff
    freqs = np.array(list(fourier))
    mats = np.array([fourier[f] for f in freqs]) if len(freqs) else np.zeros((0, d, d))

    def rhs(x, y):
        Y = y.reshape(d, d)
        A = D + np.tensordot(np.exp(1j * freqs * x), mats, axes=1) if len(freqs) else D
        return (A @ Y).ravel()

    sol = solve_ivp(rhs, (0.0, reduced.T), np.eye(d, dtype=complex).ravel(), method="DOP853",
                    rtol=rtol, atol=atol)
    if not sol.success:
        raise EvansError(f"integration failed: {sol.message}")
    return sol.y[:, -1].reshape(d, d)


def evans_eval(monodromy: np.ndarray, k: float, T: float) -> complex:
    """Delta = det(exp(i k T) I - X(T))."""
    M = np.asarray(monodromy, dtype=complex)
    return complex(np.linalg.det(np.exp(1j * k * T) * np.eye(M.shape[0]) - M))


# ----------------------------------------------------------------------------
# determinant expansion

class TruncPoly:
    """Truncated polynomial in a few variables, dense coefficient array."""

    __slots__ = ("c",)

    def __init__(self, c: np.ndarray):
        self.c = c

    @classmethod
    def zeros(cls, shape):
        return cls(np.zeros(shape, dtype=complex))

    def __add__(self, other):
        return TruncPoly(self.c + other.c)

    def __sub__(self, other):
        return TruncPoly(self.c - other.c)

    def __mul__(self, other):
        if not isinstance(other, TruncPoly):
            return TruncPoly(self.c * other)
        shape = self.c.shape
        out = np.zeros(shape, dtype=complex)
        for idx in zip(*np.nonzero(self.c)):
            v = self.c[idx]
            sl_dst = tuple(slice(i, None) for i in idx)
            sl_src = tuple(slice(0, s - i) for s, i in zip(shape, idx))
            out[sl_dst] += v * other.c[sl_src]
        return TruncPoly(out)


def _det(M):
    n = len(M)
    if n == 1:
        return M[0][0]
    if n == 2:
        return M[0][0] * M[1][1] - M[0][1] * M[1][0]
    if n == 3:
        return (M[0][0] * (M[1][1] * M[2][2] - M[1][2] * M[2][1])
                - M[0][1] * (M[1][0] * M[2][2] - M[1][2] * M[2][0])
                + M[0][2] * (M[1][0] * M[2][1] - M[1][1] * M[2][0]))
    raise ValueError("only dimensions up to 3 are supported")


def _evans_array(coeffs: Dict[Order, np.ndarray], phase: complex, T: float, shape) -> np.ndarray:
    """Coefficients of det(phase*exp(i gamma T) I - X) in (delta, gamma, eps)."""
    d = next(iter(coeffs.values())).shape[0]
    Dm, Dg, De = shape
    M = []
    for i in range(d):
        row = []
        for j in range(d):
            p = TruncPoly.zeros(shape)
            if i == j:
                for l in range(Dg):
                    p.c[0, l, 0] += phase * (1j * T) ** l / math.factorial(l)
            for (m, n), a in coeffs.items():
                if m < Dm and n < De:
                    p.c[m, 0, n] -= a[i, j]
            row.append(p)
        M.append(row)
    return _det(M).c


def evans_coefficients(mono: MonodromyExpansion, k0: float, max_dg: int = 3, max_eps: int = 2,
                       seed: int = 0) -> Dict[Tuple[int, int, int], Optional[complex]]:
    """d^(l,m,n): coefficient of delta^l gamma^m eps^n in Delta(i sigma + delta, k0 + gamma; eps).

    Only l + m <= max_dg and n <= max_eps are returned.  A coefficient is
    None when it depends on monodromy orders that are not available; this is
    detected by repeating the expansion with those orders replaced by random
    matrices.
    """
    shape = (max_dg + 1, max_dg + 1, max_eps + 1)
    phase = cmath.exp(1j * k0 * mono.T)
    base = _evans_array(mono.coeffs, phase, mono.T, shape)
    d = len(mono.ks)
    missing = [(m, n) for m in range(max_dg + 1) for n in range(max_eps + 1)
               if (m, n) not in mono.coeffs]
    dep = np.zeros(shape, dtype=bool)
    if missing:
        rng = np.random.default_rng(seed)
        for _ in range(2):
            trial = dict(mono.coeffs)
            for o in missing:
                trial[o] = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
            alt = _evans_array(trial, phase, mono.T, shape)
            dep |= np.abs(alt - base) > 1e-9 * max(1.0, np.abs(base).max())
    out = {}
    for l in range(max_dg + 1):
        for m in range(max_dg + 1 - l):
            for n in range(max_eps + 1):
                out[(l, m, n)] = None if dep[l, m, n] else complex(base[l, m, n])
    return out


def branch_coefficient(mono: MonodromyExpansion, k0: float, alpha10: complex, alpha11: complex,
                       max_dg: int = 3, max_eps: int = 2) -> np.ndarray:
    """Coefficients of gamma^m eps^n after substituting delta = gamma (alpha10 + alpha11 eps).

    Returns an array c[m, n]; entries depending on unavailable orders are nan.
    """
    shape = (max_dg + 1, max_dg + 1, max_eps + 1)
    d = len(mono.ks)
    phase = cmath.exp(1j * mono.T * k0)
    missing = [(m, n) for m in range(max_dg + 1) for n in range(max_eps + 1)
               if (m, n) not in mono.coeffs]

    def substitute(arr):
        out = np.zeros((max_dg + 1, max_eps + 1), dtype=complex)
        for l in range(shape[0]):
            for m in range(shape[1]):
                for n in range(shape[2]):
                    v = arr[l, m, n]
                    if v == 0 or l + m > max_dg:
                        continue
                    # (alpha10 + alpha11 eps)^l
                    for r in range(0, min(l, max_eps - n) + 1):
                        out[l + m, n + r] += v * math.comb(l, r) * alpha10 ** (l - r) * alpha11 ** r
        return out

    base = substitute(_evans_array(mono.coeffs, phase, mono.T, shape))
    if missing:
        rng = np.random.default_rng(1)
        trial = dict(mono.coeffs)
        for o in missing:
            trial[o] = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        alt = substitute(_evans_array(trial, phase, mono.T, shape))
        base = np.where(np.abs(alt - base) > 1e-9 * max(1.0, np.abs(base).max()), np.nan, base)
    return base


@dataclass
class EvansExpansion:
    sigma: float
    k0: float
    d: Dict[Tuple[int, int, int], Optional[complex]]
    alpha10: Optional[complex] = None
    alpha11: Tuple[complex, ...] = ()
    alpha02: Tuple[complex, ...] = ()
    ind2: Optional[complex] = None
    diagnostics: Dict[str, object] = field(default_factory=dict)
    mono: Optional[MonodromyExpansion] = field(default=None, repr=False)


def evans_expand_origin(mono: MonodromyExpansion, p: int = 1) -> EvansExpansion:
    """d^(l,m,n) of Delta(delta, p kappa + gamma; eps) through cubic order and eps^2."""
    if abs(mono.sigma) > 1e-12:
        raise ValueError("origin expansion needs sigma = 0 data")
    kappa = 2 * math.pi / mono.T
    k0 = p * kappa
    return EvansExpansion(0.0, k0, evans_coefficients(mono, k0, 3, 2), mono=mono)


def cubic_in_alpha(evans: EvansExpansion) -> np.ndarray:
    """Coefficients (ascending in alpha) of the gamma^3 term under delta = alpha gamma."""
    return np.array([evans.d[(l, 3 - l, 0)] for l in range(4)], dtype=complex)


def bf_branch(evans: EvansExpansion, params: WaveParameters, tol: float = 1e-8) -> EvansExpansion:
    """Benjamin-Feir branch: alpha^(1,0) from the cubic, alpha^(1,1) from the gamma^3 eps^2 term."""
    cub = cubic_in_alpha(evans)
    roots = P.polyroots(cub)
    # the double root is a simple root of the derivative; the third follows from the sum
    droots = P.polyroots(P.polyder(cub))
    double = min(droots, key=lambda r: abs(P.polyval(r, cub)))
    simple = -cub[2] / cub[3] - 2 * double
    c0, kap = params.c0, params.kappa
    # lambda = i sigma'(k) gamma along sigma_- through +kappa and sigma_+ through -kappa
    slope_m = c0 - math.sqrt(params.g / kap) / 2          # d/dk (c0 k - sqrt(g k)) at kappa
    slope_p = c0 - math.sqrt(params.g / kap) / 2          # d/dk (c0 k + sqrt(-g k)) at -kappa
    slope = 1j * slope_m
    if abs(slope_m - slope_p) > 1e-12:
        raise ConsistencyError("dispersion slopes through +-kappa disagree")
    cands = [double, simple]
    match = [r for r in cands if abs(r - slope) <= tol * max(1.0, abs(slope))]
    if not match:
        raise ConsistencyError(f"no root of the cubic matches the dispersion slope {slope}: {cands}")
    alpha10 = match[0]
    rejected = [r for r in cands if r is not alpha10]
    # gamma^3 eps^2 coefficient as a quadratic in alpha11: sample three points
    xs = np.array([0.0, 1.0, -1.0])
    vals = np.array([branch_coefficient(evans.mono, evans.k0, alpha10, x)[3, 2] for x in xs])
    if np.any(np.isnan(vals)):
        raise ConsistencyError("gamma^3 eps^2 coefficient depends on unavailable orders")
    quad = np.polyfit(xs, vals, 2)[::-1]          # ascending
    a11 = P.polyroots(quad)
    g2e2 = branch_coefficient(evans.mono, evans.k0, alpha10, a11[0])[2, 2]
    out = EvansExpansion(evans.sigma, evans.k0, evans.d, alpha10=complex(alpha10),
                         alpha11=tuple(sorted((complex(r) for r in a11), key=lambda z: z.real)),
                         mono=evans.mono, diagnostics=dict(evans.diagnostics))
    out.diagnostics.update(cubic=cub, cubic_roots=roots, rejected_alpha10=[complex(r) for r in rejected],
                           gamma3eps2=quad, gamma2eps2=complex(g2e2))
    if abs(g2e2) > 1e-8 * max(1.0, np.abs(quad).max()):
        raise ConsistencyError(f"gamma^2 eps^2 coefficient does not vanish: {g2e2}")
    return out


# ----------------------------------------------------------------------------
# resonances

@dataclass(frozen=True)
class ResonanceData:
    N: int
    sigma: float
    k2: float
    k4: float


def resonance_find(N: int, params: WaveParameters) -> ResonanceData:
    """sigma = (N^2-1) kappa c0/4 with k2 - k4 = N kappa, k2 on sigma_-, k4 on sigma_+."""
    if int(N) != N or N < 2:
        raise ValueError("resonance order N must be an integer >= 2")
    kap, c0 = params.kappa, params.c0
    sig = (N * N - 1) * kap * c0 / 4
    k2 = (N + 1) ** 2 * kap / 4
    k4 = (N - 1) ** 2 * kap / 4
    if not sig > sigma_c(params):
        raise ConsistencyError("resonant frequency does not exceed sigma_c")
    roots = dispersion_roots(params, sig)
    if abs(roots.k(2) - k2) > 1e-12 * k2 or abs(roots.k(4) - k4) > 1e-12 * max(1.0, k4):
        raise ConsistencyError("closed-form resonance disagrees with the dispersion roots")
    if abs((k2 - k4) - N * kap) > 1e-12 * N * kap:
        raise ConsistencyError("k2 - k4 differs from N kappa")
    return ResonanceData(int(N), sig, k2, k4)


def same_branch_resonances(params: WaveParameters, sigmas: Sequence[float], n_max: int = 10):
    """Sign changes of k_i - k_j - N kappa for pairs of roots on sigma_+ over a sigma grid."""
    found = []
    prev = None
    for s in sigmas:
        r = dispersion_roots(params, s)
        plus = [j for j in r.labels if j in (1, 3, 4)]
        gaps = {}
        for a in plus:
            for b in plus:
                if a != b:
                    for N in range(1, n_max + 1):
                        gaps[(a, b, N)] = r.k(a) - r.k(b) - N * params.kappa
        if prev is not None:
            for key, v in gaps.items():
                if key in prev[1] and (v == 0 or np.sign(v) != np.sign(prev[1][key])):
                    found.append((prev[0], s, key))
        prev = (s, gaps)
    return found


def evans_expand_resonance(mono: MonodromyExpansion, res: ResonanceData) -> EvansExpansion:
    """Coefficients of Delta(i sigma + delta, k_4 + gamma; eps) at a resonance.

    ``diagnostics['display']`` holds the seven leading coefficients evaluated
    from the diagonal formulas; ``d`` holds the full determinant expansion.
    """
    T = mono.T
    a10, a02, a11 = mono[(1, 0)], mono[(0, 2)], mono[(1, 1)]
    ph = cmath.exp(1j * res.k4 * T)
    d = evans_coefficients(mono, res.k4, max_dg=2, max_eps=4)
    display = {
        "delta^2": a10[0, 0] * a10[1, 1],
        "gamma^2": -T ** 2 * ph ** 2,
        "eps^4": np.linalg.det(a02),
        "delta gamma": -1j * T * ph * (a10[0, 0] + a10[1, 1]),
        "delta eps^2": a02[0, 0] * a10[1, 1] + a02[1, 1] * a10[0, 0],
        "gamma eps^2": -1j * T * ph * (a02[0, 0] + a02[1, 1]),
        "delta gamma eps": -1j * T * ph * (a11[0, 0] + a11[1, 1]),
    }
    keys = {"delta^2": (2, 0, 0), "gamma^2": (0, 2, 0), "eps^4": (0, 0, 4), "delta gamma": (1, 1, 0),
            "delta eps^2": (1, 0, 2), "gamma eps^2": (0, 1, 2), "delta gamma eps": (1, 1, 1)}
    return EvansExpansion(res.sigma, res.k4, d, mono=mono,
                          diagnostics={"display": {k: complex(v) for k, v in display.items()},
                                       "display_keys": keys, "N": res.N})


def ind2(evans: EvansExpansion, tol: float = 1e-8):
    """ind_2, the roots alpha^(0,2) of the quadratic and the stability verdict."""
    mono = evans.mono
    a10, a02 = mono[(1, 0)], mono[(0, 2)]
    lead = a10[0, 0] * a10[1, 1]
    if abs(lead) <= 1e-14:
        raise EvansError("a11^(1,0) a22^(1,0) vanishes: degenerate leading order")
    mid = a02[0, 0] * a10[1, 1] + a10[0, 0] * a02[1, 1]
    const = a02[0, 0] * a02[1, 1]
    roots = P.polyroots([const, mid, lead])
    diff = a02[0, 0] * a10[1, 1] - a10[0, 0] * a02[1, 1]
    value = diff ** 2 / lead ** 2
    ratio = diff / lead
    unstable = bool(np.max(np.abs(roots.real)) > tol * max(1.0, np.max(np.abs(roots))))
    verdict = "eps^2-order instability" if unstable else "no eps^2-order instability"
    out = EvansExpansion(evans.sigma, evans.k0, evans.d, alpha02=tuple(complex(r) for r in roots),
                         ind2=complex(value), mono=mono, diagnostics=dict(evans.diagnostics))
    out.diagnostics.update(ratio=complex(ratio), verdict=verdict, unstable=unstable,
                           quadratic=(complex(lead), complex(mid), complex(const)))
    return out


# ----------------------------------------------------------------------------
# numerical oracle and spectrum trace

def finite_difference_coefficients(reduced: ReducedSystem, h: float = 1e-4) -> Dict[Order, np.ndarray]:
    """a^(m,n)(T), m + n <= 2, from central differences of the integrated monodromy."""
    X = lambda dl, ep: monodromy_numeric(reduced, dl, ep)
    X00 = X(0.0, 0.0)
    Xp0, Xm0, X0p, X0m = X(h, 0.0), X(-h, 0.0), X(0.0, h), X(0.0, -h)
    Xpp, Xpm, Xmp, Xmm = X(h, h), X(h, -h), X(-h, h), X(-h, -h)
    return {
        (0, 0): X00,
        (1, 0): (Xp0 - Xm0) / (2 * h),
        (0, 1): (X0p - X0m) / (2 * h),
        (2, 0): (Xp0 - 2 * X00 + Xm0) / (2 * h * h),
        (0, 2): (X0p - 2 * X00 + X0m) / (2 * h * h),
        (1, 1): (Xpp - Xpm - Xmp + Xmm) / (4 * h * h),
    }


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("EVANS_THREADS", "1")))
    except ValueError:
        return 1


def evans_root(reduced: ReducedSystem, eps: float, k: float, seed: complex,
               maxit: int = NEWTON_MAXIT, tol: float = NEWTON_TOL, rtol: float = ODE_RTOL) -> complex:
    """Root delta of Delta(i sigma + delta, k; eps) by secant-Newton iteration.

    Delta is cubically small near the origin, so convergence is judged on the
    step: |step| <= tol * max(|delta|, 1e-3 * |seed|).
    """
    T = reduced.T
    f = lambda dl: evans_eval(monodromy_numeric(reduced, dl, eps, rtol=rtol), k, T)
    x0 = complex(seed)
    x1 = x0 * (1 + 1e-4) if x0 != 0 else 1e-8
    f0, f1 = f(x0), f(x1)
    floor = 1e-3 * abs(seed) if seed else 1e-12
    for _ in range(maxit):
        if f1 == f0:
            break
        x2 = x1 - f1 * (x1 - x0) / (f1 - f0)
        if abs(x2 - x1) <= tol * max(abs(x2), floor):
            return x2
        x0, f0 = x1, f1
        x1, f1 = x2, f(x2)
    raise TraceError(f"Newton iteration did not converge (k={k}, eps={eps}, seed={seed})")


def trace_spectrum(params: WaveParameters, eps: float, gammas: Sequence[float],
                   reduced: Optional[ReducedSystem] = None, stokes_order: int = 3,
                   newton_tol: float = NEWTON_TOL, rtol: float = ODE_RTOL):
    """Both Benjamin-Feir branches lambda_{1,2}(kappa + gamma, eps) for each gamma.

    Returns a list of (gamma, lambda_1, lambda_2) in input order, with seeds
    i c0 gamma/2 -+ kappa gamma eps/(2 sqrt 2).
    """
    if abs(eps) > 0.05 or any(abs(g) > 0.05 for g in gammas):
        raise ValueError("trace requires |eps| <= 0.05 and |gamma| <= 0.05")
    if reduced is None:
        reduced = reduce_system(stokes_expand(params, stokes_order), 0.0)
    c0, kap = params.c0, params.kappa

    def one(gm):
        base = 1j * c0 * gm / 2
        off = kap * abs(gm) * abs(eps) / (2 * math.sqrt(2))
        if off == 0:
            r = evans_root(reduced, eps, kap + gm, base if gm else 1e-9j, tol=newton_tol, rtol=rtol)
            return (gm, r, r)
        r1 = evans_root(reduced, eps, kap + gm, base - off, tol=newton_tol, rtol=rtol)
        r2 = evans_root(reduced, eps, kap + gm, base + off, tol=newton_tol, rtol=rtol)
        return (gm, r1, r2)

    n = _threads()
    if n == 1:
        return [one(g) for g in gammas]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(one, gammas))
