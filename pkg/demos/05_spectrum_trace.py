"""
Tracing the unstable eigenvalues
================================

Solve Delta(delta, kappa + gamma; eps) = 0 numerically for the two branches
leaving the origin and compare with the leading-order growth rate
kappa gamma eps / (2 sqrt 2).
"""
import numpy as np

from stokes_evans.evans import trace_spectrum
from stokes_evans.stokes import WaveParameters

params = WaveParameters(1.0, 1.0)
eps = 0.01
gammas = np.linspace(0.002, 0.01, 5)
rows = trace_spectrum(params, eps, gammas)

print(" gamma     Re lambda2    leading     with sqrt correction")
for g, l1, l2 in rows:
    lead = g * eps / (2 * np.sqrt(2))
    full = lead * np.sqrt(max(0.0, 1 - g ** 2 / (8 * eps ** 2)))
    print(f"{g:.4f}  {l2.real:.6e}  {lead:.6e}  {full:.6e}")

# the branches come in pairs lambda1 = -conj(lambda2)
print("max |lambda1 + conj(lambda2)|:", max(abs(l1 + np.conj(l2)) for _, l1, l2 in rows))
