"""Periodic Evans function analysis of small-amplitude Stokes waves in deep water.

Modules
-------
algebra    exact series arithmetic in x and y
stokes     the Stokes wave expansion in flattened coordinates
operator   dispersion, L(lambda), its adjoint, eigenfunctions, the perturbation B
reduction  order-by-order reduction to the finite system a' = A(x) a
evans      monodromy expansion, Evans function, branch and resonance analysis
"""
from .algebra import PowerSeries, SeriesFunction, Term
from .evans import (bf_branch, evans_eval, evans_expand_origin, evans_expand_resonance, ind2,
                    monodromy_expand, monodromy_numeric, resonance_find, trace_spectrum)
from .operator import (apply_L, apply_L_adjoint, build_B, dispersion, dispersion_roots,
                       spectral_basis)
from .reduction import reduce_system, resolvent_solve
from .state import WaveState, inner_product
from .stokes import StokesExpansion, WaveParameters, stokes_expand

__version__ = "0.1.0"
