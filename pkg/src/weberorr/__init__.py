"""Weber-Orr transforms, exterior Stokes vorticity and polar Biot-Savart reconstruction.

The main entry points are re-exported here; see the submodules for the
full surface.
"""

from __future__ import annotations

from .biot_savart import (
    SlipSolutionParams,
    VelocityModes,
    discrete_vortex,
    field_residuals,
    homogeneous_basis,
    reconstruct_noslip,
    reconstruct_slip,
)
from .oracle import FdScheme, fd_curl, fd_divergence, fd_evolve, laplace_domain_solution
from .quadrature import (
    QuadratureError,
    RadialProfile,
    SpectralProfile,
    TransformParams,
    integrate_radial,
    integrate_spectral,
)
from .special_functions import bessel_i, bessel_j, bessel_k, bessel_y
from .stokes import (
    StokesProblem,
    VorticityField,
    check_noslip_relations,
    evolve_mode,
    evolve_mode_robin,
    invariant_moment,
    radial_laplacian,
    robin_residual,
    solve_stokes,
)
from .weber_orr import (
    KernelSpec,
    correction_term,
    forward,
    invert_with_correction,
    inverse_raw,
    kernel,
    robin_functional,
    roundtrip,
)

__version__ = "0.1.0"
