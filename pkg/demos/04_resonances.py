"""
Resonances above sigma_c and the index ind2
===========================================

At sigma = (N^2 - 1) kappa c0 / 4 the roots k2 and k4 differ by N kappa, and
two eigenvalues collide. The sign structure of the eps^2 coefficients decides
whether the collision opens an instability bubble at order eps^2.
"""
from stokes_evans.evans import evans_expand_resonance, ind2, monodromy_expand, resonance_find
from stokes_evans.reduction import reduce_system
from stokes_evans.stokes import WaveParameters, stokes_expand

params = WaveParameters(1.0, 1.0)
stokes = stokes_expand(params, 3)

for N in range(2, 7):
    res = resonance_find(N, params)
    mono = monodromy_expand(reduce_system(stokes, res.sigma))
    out = ind2(evans_expand_resonance(mono, res))
    print(f"N={N}: sigma={res.sigma:.4f}  k2={res.k2:.4f}  k4={res.k4:.4f}  "
          f"ind2={out.ind2.real:+.6f}  ({out.diagnostics['verdict']})")

# the seven leading coefficients at N = 2
ev = evans_expand_resonance(monodromy_expand(reduce_system(stokes, 0.75)), resonance_find(2, params))
for name, value in ev.diagnostics["display"].items():
    print(f"{name:>16s}: {value:.6f}")
