"""Open Toda lattice: dynamics, direct/inverse spectral maps and integrals."""
from .core import (
    FlaschkaState,
    JacobiMatrix,
    PhaseState,
    SpectralPoint,
    flaschka_forward,
    flaschka_inverse,
    hamiltonian,
    jacobi_matrix,
    lax_b_matrix,
)
from .dynamics import IntegratorConfig, integrate
from .spectral import canonical_lift, eigen_decompose, moser_map, spectral_flow
from .stieltjes import exact_solution, lanczos_inverse, stieltjes_inverse

__version__ = "0.1.0"
