"""Pseudo-spectral solver for free-surface viscous flow in a periodic layer.

Lagrangian formulation on a fixed reference layer: Fourier-Chebyshev
discretization, explicit layer kernels, Helmholtz projection, a reduced
Stokes solver with cached per-mode factorizations, implicit-Euler semigroup
stepping, the four-way linear decomposition, exact deformation-driven
nonlinear corrections, and a Picard iteration with decay diagnostics.
"""

from ._accel import BACKEND
from .config import ConfigError, SolverConfig, parse_config
from .grid import (
    LayerGrid,
    SpectralField,
    forward_transform,
    inverse_transform,
    make_grid,
    vertical_derivative,
)
from .helmholtz import project
from .kernels import layer_harmonic_kernel, residue_kernel_pair, symbol_bound_check
from .lagrangian import (
    DeformationState,
    FlowMap,
    accumulate_deformation,
    flow_map,
    initial_deformation,
    jacobian_diagnostics,
    nonlinear_F,
    nonlinear_G,
    nonlinear_Gvec,
    nonlinear_H,
    push_forward,
)
from .linear_mr import (
    mr_estimate_report,
    solve_linear_decomposed,
    solve_linear_ibvp,
    solve_time_shifted,
)
from .norms import discrete_lq_norm, sobolev_norm, weighted_trajectory_norm
from .solver import (
    ContractionReport,
    decay_fit,
    picard_solve,
    run_global_solve,
    smallness_gate,
)
from .stokes import (
    ResolventData,
    apply_reduced_stokes,
    duhamel_convolve,
    pressure_operator_K,
    semigroup_step,
    solve_resolvent,
    stress_tensor,
)
from .trajectory import Trajectory
from .weak_dn import solve_weak_dn, solve_weak_dn_kernel_path

__version__ = "0.1.0"
