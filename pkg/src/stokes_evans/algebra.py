"""Closed-form arithmetic on exponential-polynomial series in (x, y).

Every object in the stability computation (Stokes profiles, eigenfunctions,
forcing terms, entries of the reduced matrices) is a finite sum of terms

    c * x**q * exp(1j*w*x) * y**p * exp(a*y),        a >= 0,

with the pair ``(p, a) == (0, 0)`` encoding the constant part of an element
of H^n_c(-inf, 0).  :class:`SeriesFunction` keeps such sums in a canonical
merged form and supports the ring operations, differentiation, exact
integration over the half line y < 0 and exact antiderivatives in x.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, Mapping, Optional, Tuple

import numpy as np

TAU_ALG = 1e-9          # relative tolerance for matching frequencies / rates
COEFF_ATOL = 1e-14      # coefficients below this are dropped
MAX_TERMS = 100_000


class AlgebraError(ValueError):
    """Base error for operations leaving the admissible function class."""


class DomainError(AlgebraError):
    pass


class NonIntegrableError(AlgebraError):
    pass


class TermOverflowError(AlgebraError):
    pass


def _snap(v: float) -> float:
    # round to the matching tolerance; -0.0 -> 0.0
    r = round(v, 9)
    return r + 0.0


@dataclass(frozen=True)
class Term:
    coeff: complex
    xpow: int = 0
    xfreq: float = 0.0
    ypow: int = 0
    yrate: float = 0.0

    def __post_init__(self):
        if self.xpow < 0 or self.ypow < 0:
            raise DomainError("negative powers are not allowed")
        if self.yrate < -TAU_ALG:
            raise DomainError(f"y-growing term exp({self.yrate}*y)")
        if abs(self.yrate) <= TAU_ALG and self.ypow > 0:
            raise DomainError("y**p without decay is unbounded on y < 0")

    @property
    def key(self) -> Tuple[int, int, float, float]:
        return (self.xpow, self.ypow, _snap(self.xfreq), _snap(self.yrate))


class SeriesFunction:
    """Immutable canonical sum of :class:`Term` objects.

    Supports ``+``, ``-``, ``*`` (by scalars or other series), :meth:`dx`,
    :meth:`dy`, :meth:`conj`, :meth:`at_y0`, :meth:`integrate_y`,
    :meth:`integrate_x` and numerical evaluation via ``f(x, y)``.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Iterable[Term] = ()):
        merged: Dict[tuple, list] = {}
        for t in terms:
            k = t.key
            if k in merged:
                merged[k][2] += complex(t.coeff)
            else:
                merged[k] = [float(t.xfreq), float(t.yrate), complex(t.coeff)]
        out = {}
        for k, (w, a, c) in merged.items():
            if abs(c) > COEFF_ATOL:
                out[k] = Term(c, k[0], w, k[1], a)
        if len(out) > MAX_TERMS:
            raise TermOverflowError(f"{len(out)} terms exceed the cap {MAX_TERMS}")
        self._terms = dict(sorted(out.items()))

    # -- construction helpers -------------------------------------------------
    @classmethod
    def const(cls, c: complex) -> "SeriesFunction":
        return cls([Term(c)])

    @classmethod
    def term(cls, coeff=1.0, xpow=0, xfreq=0.0, ypow=0, yrate=0.0) -> "SeriesFunction":
        return cls([Term(coeff, xpow, xfreq, ypow, yrate)])

    @classmethod
    def cos_x(cls, w: float, coeff=1.0) -> "SeriesFunction":
        return cls([Term(coeff / 2, 0, w), Term(coeff / 2, 0, -w)])

    @classmethod
    def sin_x(cls, w: float, coeff=1.0) -> "SeriesFunction":
        return cls([Term(coeff / 2j, 0, w), Term(-coeff / 2j, 0, -w)])

    @classmethod
    def exp_y(cls, a: float, coeff=1.0) -> "SeriesFunction":
        return cls([Term(coeff, 0, 0.0, 0, a)])

    # -- container protocol ---------------------------------------------------
    @property
    def terms(self) -> Tuple[Term, ...]:
        return tuple(self._terms.values())

    def __iter__(self) -> Iterator[Term]:
        return iter(self._terms.values())

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __repr__(self) -> str:
        from .textio import format_series
        return f"SeriesFunction({format_series(self)!r})"

    # -- ring operations ------------------------------------------------------
    def __add__(self, other) -> "SeriesFunction":
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return SeriesFunction(list(self) + list(other))

    __radd__ = __add__

    def __neg__(self) -> "SeriesFunction":
        return SeriesFunction(Term(-t.coeff, t.xpow, t.xfreq, t.ypow, t.yrate) for t in self)

    def __sub__(self, other) -> "SeriesFunction":
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other) -> "SeriesFunction":
        return (-self) + other

    def __mul__(self, other) -> "SeriesFunction":
        if isinstance(other, (int, float, complex, np.number)):
            c = complex(other)
            if c == 0:
                return ZERO
            return SeriesFunction(Term(t.coeff * c, t.xpow, t.xfreq, t.ypow, t.yrate) for t in self)
        if not isinstance(other, SeriesFunction):
            return NotImplemented
        out = []
        for s in self:
            for t in other:
                out.append(Term(s.coeff * t.coeff, s.xpow + t.xpow, s.xfreq + t.xfreq,
                                s.ypow + t.ypow, s.yrate + t.yrate))
        return SeriesFunction(out)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "SeriesFunction":
        if isinstance(other, (int, float, complex, np.number)):
            return self * (1.0 / complex(other))
        return NotImplemented

    # -- calculus ---------------------------------------------------------------
    def dx(self) -> "SeriesFunction":
        out = []
        for t in self:
            if t.xpow:
                out.append(Term(t.coeff * t.xpow, t.xpow - 1, t.xfreq, t.ypow, t.yrate))
            if t.xfreq:
                out.append(Term(t.coeff * 1j * t.xfreq, t.xpow, t.xfreq, t.ypow, t.yrate))
        return SeriesFunction(out)

    def dy(self) -> "SeriesFunction":
        out = []
        for t in self:
            if t.ypow:
                out.append(Term(t.coeff * t.ypow, t.xpow, t.xfreq, t.ypow - 1, t.yrate))
            if t.yrate:
                out.append(Term(t.coeff * t.yrate, t.xpow, t.xfreq, t.ypow, t.yrate))
        return SeriesFunction(out)

    def conj(self) -> "SeriesFunction":
        return SeriesFunction(Term(np.conj(t.coeff), t.xpow, -t.xfreq, t.ypow, t.yrate)
                              for t in self)

    def at_y0(self) -> "SeriesFunction":
        """Trace at y = 0 (a function of x only)."""
        return SeriesFunction(Term(t.coeff, t.xpow, t.xfreq) for t in self if t.ypow == 0)

    def integrate_y(self) -> "SeriesFunction":
        """Exact integral over y in (-inf, 0].

        Uses  int_{-inf}^0 y**p exp(a*y) dy = (-1)**p p! / a**(p+1).
        """
        out = []
        for t in self:
            if abs(t.yrate) <= TAU_ALG:
                raise NonIntegrableError("constant-in-y term is not integrable on the half line")
            val = (-1) ** t.ypow * math.factorial(t.ypow) / t.yrate ** (t.ypow + 1)
            out.append(Term(t.coeff * val, t.xpow, t.xfreq))
        return SeriesFunction(out)

    def integrate_x(self) -> "SeriesFunction":
        """Antiderivative F with F(0, y) = 0, i.e. ``int_0^x f(s, y) ds``."""
        out = []
        for t in self:
            q, w = t.xpow, t.xfreq
            if abs(w) <= TAU_ALG:
                out.append(Term(t.coeff / (q + 1), q + 1, 0.0, t.ypow, t.yrate))
                continue
            iw = 1j * w
            # d/dx (e^{iwx} P) = x^q e^{iwx}:  P = sum_k (-1)^k q!/(q-k)! x^{q-k} / (iw)^{k+1}
            p0 = 0j
            for k in range(q + 1):
                c = t.coeff * (-1) ** k * math.factorial(q) / math.factorial(q - k) / iw ** (k + 1)
                out.append(Term(c, q - k, w, t.ypow, t.yrate))
                if k == q:
                    p0 = c
            out.append(Term(-p0, 0, 0.0, t.ypow, t.yrate))
        return SeriesFunction(out)

    # -- structure --------------------------------------------------------------
    def is_y_free(self) -> bool:
        return all(t.ypow == 0 and abs(t.yrate) <= TAU_ALG for t in self)

    def is_x_free(self) -> bool:
        return all(t.xpow == 0 and abs(t.xfreq) <= TAU_ALG for t in self)

    def split_constant(self) -> Tuple["SeriesFunction", "SeriesFunction"]:
        """Split into (decaying part, constant-in-y part)."""
        dec, cst = [], []
        for t in self:
            (cst if abs(t.yrate) <= TAU_ALG else dec).append(t)
        return SeriesFunction(dec), SeriesFunction(cst)

    def constant_value(self) -> complex:
        """Value of an x- and y-free series (raises otherwise)."""
        if not (self.is_x_free() and self.is_y_free()):
            raise DomainError("series is not a constant")
        return sum((t.coeff for t in self), 0j)

    def x_modes(self) -> Dict[float, "SeriesFunction"]:
        """Group by x-frequency; each value has the factor exp(i w x) removed."""
        modes: Dict[float, list] = {}
        reps: Dict[float, float] = {}
        for t in self:
            k = _snap(t.xfreq)
            reps.setdefault(k, t.xfreq)
            modes.setdefault(k, []).append(Term(t.coeff, t.xpow, 0.0, t.ypow, t.yrate))
        return {reps[k]: SeriesFunction(v) for k, v in modes.items()}

    def shift_x(self, w: float) -> "SeriesFunction":
        """Multiply by exp(i w x)."""
        return SeriesFunction(Term(t.coeff, t.xpow, t.xfreq + w, t.ypow, t.yrate) for t in self)

    def max_abs_coeff(self) -> float:
        return max((abs(t.coeff) for t in self), default=0.0)

    def isclose(self, other, tol: float = 1e-10) -> bool:
        return (self - _coerce(other)).max_abs_coeff() <= tol

    # -- evaluation -------------------------------------------------------------
    def __call__(self, x=0.0, y=0.0):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        out = np.zeros(np.broadcast(x, y).shape, dtype=complex)
        for t in self:
            out = out + t.coeff * x ** t.xpow * np.exp(1j * t.xfreq * x) * y ** t.ypow * np.exp(t.yrate * y)
        return out if out.ndim else complex(out)

    def __eq__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.isclose(other, tol=TAU_ALG * max(1.0, self.max_abs_coeff()))

    __hash__ = None


def _coerce(v) -> SeriesFunction:
    if isinstance(v, SeriesFunction):
        return v
    if isinstance(v, (int, float, complex, np.number)):
        return SeriesFunction.const(complex(v))
    return NotImplemented


ZERO = SeriesFunction()


def canonicalize(f: SeriesFunction) -> SeriesFunction:
    return SeriesFunction(f.terms)


def integrate_y_halfline(f: SeriesFunction) -> SeriesFunction:
    return f.integrate_y()


def integrate_x(f: SeriesFunction, upper: Optional[float] = None):
    """``int_0^X f dx`` as a series in X, or its value when ``upper`` is given."""
    F = f.integrate_x()
    if upper is None:
        return F
    return F(upper)


# --------------------------------------------------------------------------------
# second-order ODEs in y on the half line

def solve_decaying_ode(rhs: SeriesFunction, mu: float) -> SeriesFunction:
    """Particular solution of  f'' - mu**2 f = rhs  bounded on y < 0.

    Each forcing term  y**p exp(a y)  gets the ansatz  P(y) exp(a y)  with
    P'' + 2a P' + (a**2 - mu**2) P = y**p.  When a = |mu| > 0 the degree of P
    rises by one (secular y-growth inside the decay).  A constant forcing with
    mu = 0 would need y**2 and is rejected.  The homogeneous part is left to
    the caller.
    """
    mu2 = mu * mu
    out = []
    for t in rhs:
        a, p = t.yrate, t.ypow
        b = a * a - mu2
        if abs(a) <= TAU_ALG:
            if abs(mu) <= TAU_ALG:
                raise DomainError("constant forcing at mu = 0 requires a y**2 term, outside L^2")
            out.append(Term(-t.coeff / mu2, t.xpow, t.xfreq))
            continue
        if abs(b) > TAU_ALG * max(1.0, a * a):
            # back-substitution from the top coefficient
            coef = [0j] * (p + 1)
            for k in range(p, -1, -1):
                rhs_k = 1.0 if k == p else 0.0
                s = rhs_k
                if k + 1 <= p:
                    s -= 2 * a * (k + 1) * coef[k + 1]
                if k + 2 <= p:
                    s -= (k + 2) * (k + 1) * coef[k + 2]
                coef[k] = s / b
        else:
            # P'' + 2a P' = y^p, deg P = p + 1, P(0) coefficient set to zero
            coef = [0j] * (p + 2)
            for k in range(p + 1, 0, -1):
                # coefficient of y^{k-1}: 2a k c_k + (k+1) k c_{k+1} = [k-1 == p]
                s = 1.0 if k - 1 == p else 0.0
                if k + 1 <= p + 1:
                    s -= (k + 1) * k * coef[k + 1]
                coef[k] = s / (2 * a * k)
        for k, c in enumerate(coef):
            if c != 0:
                out.append(Term(t.coeff * c, t.xpow, t.xfreq, k, a))
    return SeriesFunction(out)


# --------------------------------------------------------------------------------
# truncated multivariate power series with arbitrary coefficient objects

class PowerSeries:
    """Truncated power series in a few small parameters (e.g. delta, eps).

    Coefficients may be any objects supporting ``+`` and ``*`` (complex
    numbers, :class:`SeriesFunction`).  ``orders`` gives the largest power
    kept for each variable.
    """

    __slots__ = ("coeffs", "orders")

    def __init__(self, coeffs: Mapping[Tuple[int, ...], object], orders: Tuple[int, ...]):
        self.orders = tuple(orders)
        self.coeffs = {k: v for k, v in coeffs.items()
                       if all(ki <= oi for ki, oi in zip(k, self.orders))}

    @classmethod
    def constant(cls, value, orders):
        return cls({(0,) * len(orders): value}, orders)

    def __getitem__(self, k):
        return self.coeffs.get(tuple(k), ZERO)

    def keys(self):
        return self.coeffs.keys()

    def _wrap(self, other):
        if isinstance(other, PowerSeries):
            return other
        return PowerSeries.constant(other, self.orders)

    def __add__(self, other):
        other = self._wrap(other)
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out[k] + v if k in out else v
        return PowerSeries(out, self.orders)

    __radd__ = __add__

    def __neg__(self):
        return PowerSeries({k: -v for k, v in self.coeffs.items()}, self.orders)

    def __sub__(self, other):
        return self + (-self._wrap(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, PowerSeries):
            return PowerSeries({k: v * other for k, v in self.coeffs.items()}, self.orders)
        out: Dict[tuple, object] = {}
        for k1, v1 in self.coeffs.items():
            for k2, v2 in other.coeffs.items():
                k = tuple(a + b for a, b in zip(k1, k2))
                if any(ki > oi for ki, oi in zip(k, self.orders)):
                    continue
                p = v1 * v2
                out[k] = out[k] + p if k in out else p
        return PowerSeries(out, self.orders)

    def __rmul__(self, other):
        return PowerSeries({k: other * v for k, v in self.coeffs.items()}, self.orders)

    def map(self, fn) -> "PowerSeries":
        return PowerSeries({k: fn(v) for k, v in self.coeffs.items()}, self.orders)

    def dx(self):
        return self.map(lambda v: v.dx())

    def dy(self):
        return self.map(lambda v: v.dy())

    def at_y0(self):
        return self.map(lambda v: v.at_y0())

    def reciprocal(self):
        """1/s for a series whose zeroth coefficient is a nonzero scalar constant."""
        zero = (0,) * len(self.orders)
        s0 = self.coeffs.get(zero, ZERO)
        s0 = s0.constant_value() if isinstance(s0, SeriesFunction) else complex(s0)
        if s0 == 0:
            raise ZeroDivisionError("leading coefficient vanishes")
        rest = PowerSeries({k: v for k, v in self.coeffs.items() if k != zero}, self.orders)
        term = PowerSeries.constant(SeriesFunction.const(1.0 / s0), self.orders)
        total = term
        ratio = rest * (-1.0 / s0)
        for _ in range(sum(self.orders)):
            term = term * ratio
            if not term.coeffs:
                break
            total = total + term
        return total
