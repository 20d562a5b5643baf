"""
Monodromy at the origin and the Benjamin-Feir branch
====================================================

Reduce the linearisation at sigma = 0 to a three-dimensional periodic system,
expand its monodromy matrix in (delta, eps), and extract the instability
branch lambda = alpha10 gamma + alpha11 gamma eps + ... from the expanded
Evans function.
"""
import numpy as np

from stokes_evans.evans import (bf_branch, cubic_in_alpha, evans_expand_origin, finite_difference_coefficients,
                                monodromy_expand)
from stokes_evans.reduction import reduce_system
from stokes_evans.stokes import WaveParameters, stokes_expand

params = WaveParameters(1.0, 1.0)
reduced = reduce_system(stokes_expand(params, 3), 0.0)
mono = monodromy_expand(reduced)

np.set_printoptions(precision=6, suppress=True)
for order in mono.orders[1:]:
    print(f"a^{order}(T) / pi =\n", mono[order] / np.pi)

# the closed forms agree with finite differences of the integrated monodromy
fd = finite_difference_coefficients(reduced)
print("max FD discrepancy:", max(np.abs(fd[o] - mono[o]).max() for o in fd))

evans = evans_expand_origin(mono)
print("cubic in alpha (ascending):", cubic_in_alpha(evans))
branch = bf_branch(evans, params)
print("alpha10 =", np.round(branch.alpha10, 12))
print("alpha11 =", np.round(branch.alpha11, 12))
print("rejected root:", np.round(branch.diagnostics["rejected_alpha10"], 12))
