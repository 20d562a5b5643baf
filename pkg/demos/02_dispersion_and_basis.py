"""
Dispersion relation and the spectral basis
==========================================

For the flat state the purely imaginary spectrum is given by the dispersion
relation. Below sigma_c there are three real roots k_j(sigma), above it four.
The eigenfunctions phi_j and the dual functions psi_j are biorthogonal.
"""
import numpy as np

from stokes_evans.operator import dispersion_roots, sigma_c, spectral_basis
from stokes_evans.stokes import WaveParameters

params = WaveParameters(1.0, 1.0)
print("sigma_c =", sigma_c(params))

for sigma in (0.0, 0.75, 2.0):
    roots = dispersion_roots(params, sigma)
    print(f"sigma = {sigma}:", {j: round(roots.k(j), 6) for j in roots.labels})

basis = spectral_basis(params, 0.75)
print("labels", basis.labels, "k", basis.ks)
# Gram matrix <phi_j, psi_i>: identity up to rounding
print(np.round(basis.gram(), 12))
