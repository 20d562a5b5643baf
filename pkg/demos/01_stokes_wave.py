"""
Stokes waves in flattened coordinates
=====================================

Build the small-amplitude expansion of a deep-water Stokes wave, look at the
first few terms, and check that the truncated series solves the free-surface
problem to the expected order.
"""
import numpy as np

from stokes_evans.stokes import WaveParameters, stokes_expand, stokes_residual, surface_profile
from stokes_evans.textio import format_series

# kappa = g = 1 gives a unit linear phase speed c0
params = WaveParameters(kappa=1.0, g=1.0)
stokes = stokes_expand(params, order=3)
print("c0 =", params.c0, " period T =", params.T)

for n in range(1, 4):
    print(f"phi_{n} =", format_series(stokes.phi[n]))
print("speed corrections c_n:", stokes.c)

# the residual of the order-2 truncation should drop like eps**3
eps = np.array([4e-3, 2e-3, 1e-3])
low = stokes_expand(params, order=2)
# each call reports the sup-norm residual of every equation; keep the worst
res = np.array([max(stokes_residual(low, e).values()) for e in eps])
print("residuals:", res)
print("fitted exponent:", np.polyfit(np.log(eps), np.log(res), 1)[0])

x, eta = surface_profile(stokes, 0.1, n=8)
print("surface elevation at eps = 0.1:", np.round(eta, 5))
