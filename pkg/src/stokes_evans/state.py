"""States (phi, u, eta) in Y = H^1_c x L^2_c x C and their inner product."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import ZERO, DomainError, SeriesFunction, _coerce


@dataclass(frozen=True)
class WaveState:
    phi: SeriesFunction = ZERO
    u: SeriesFunction = ZERO
    eta: SeriesFunction = ZERO

    def __post_init__(self):
        for name in ("phi", "u", "eta"):
            v = _coerce(getattr(self, name))
            object.__setattr__(self, name, v)
        if not self.eta.is_y_free():
            raise DomainError("eta must not depend on y")

    def components(self):
        return (self.phi, self.u, self.eta)

    def __add__(self, other: "WaveState") -> "WaveState":
        return WaveState(self.phi + other.phi, self.u + other.u, self.eta + other.eta)

    def __sub__(self, other: "WaveState") -> "WaveState":
        return WaveState(self.phi - other.phi, self.u - other.u, self.eta - other.eta)

    def __neg__(self) -> "WaveState":
        return WaveState(-self.phi, -self.u, -self.eta)

    def __mul__(self, c) -> "WaveState":
        """Scale by a number or by a y-free function of x."""
        if isinstance(c, SeriesFunction) and not c.is_y_free():
            raise DomainError("multiplier must be y-free to keep eta y-free")
        return WaveState(self.phi * c, self.u * c, self.eta * c)

    __rmul__ = __mul__

    def __truediv__(self, c) -> "WaveState":
        return self * (1.0 / complex(c))

    def dx(self) -> "WaveState":
        return WaveState(self.phi.dx(), self.u.dx(), self.eta.dx())

    def conj(self) -> "WaveState":
        return WaveState(self.phi.conj(), self.u.conj(), self.eta.conj())

    def shift_x(self, w: float) -> "WaveState":
        return WaveState(self.phi.shift_x(w), self.u.shift_x(w), self.eta.shift_x(w))

    def max_abs_coeff(self) -> float:
        return max(c.max_abs_coeff() for c in self.components())

    def isclose(self, other: "WaveState", tol: float = 1e-10) -> bool:
        return (self - other).max_abs_coeff() <= tol

    def is_x_free(self) -> bool:
        return all(c.is_x_free() for c in self.components())

    def x_modes(self):
        """Split into x-Fourier modes: {w: WaveState with exp(i w x) removed}."""
        modes = {}
        for idx, comp in enumerate(self.components()):
            for w, part in comp.x_modes().items():
                key = next((k for k in modes if abs(k - w) <= 1e-9 * max(1.0, abs(w))), w)
                slot = modes.setdefault(key, [ZERO, ZERO, ZERO])
                slot[idx] = slot[idx] + part
        return {w: WaveState(*v) for w, v in modes.items()}

    def __call__(self, x=0.0, y=0.0):
        return (self.phi(x, y), self.u(x, y), self.eta(x, 0.0))


def inner_product(u1: WaveState, u2: WaveState):
    """Pairing on Y = H^1_c x L^2_c x C, conjugate-linear in ``u2``.

    Decaying parts are paired with the H^1 (resp. L^2) integral over y < 0,
    constant parts f_inf with f_inf * conj(g_inf).  When ``u1`` carries
    x-dependence the result is a series in x; otherwise a complex number.
    """
    p1d, p1c = u1.phi.split_constant()
    p2d, p2c = u2.phi.split_constant()
    q1d, q1c = u1.u.split_constant()
    q2d, q2c = u2.u.split_constant()
    p2d_, q2d_ = p2d.conj(), q2d.conj()
    total = (p1d * p2d_ + p1d.dy() * p2d_.dy() + q1d * q2d_).integrate_y()
    total = total + p1c * p2c.conj() + q1c * q2c.conj() + u1.eta * u2.eta.conj()
    if total.is_x_free():
        return total.constant_value() if total else 0j
    return total


def gram_matrix(phis, psis) -> np.ndarray:
    """Matrix of <phi_j, psi_i> (row i, column j)."""
    return np.array([[inner_product(p, q) for p in phis] for q in psis], dtype=complex)
