"""Spectral-Galerkin bifurcation toolkit for -u'' = lambda u + a(x) u^2 + h(x, u)
on [-pi, pi] with periodic boundary conditions.

Equilibrium indices, planar Conley-index Euler numbers, quadratic
center-manifold reductions and globally continued stationary branches, all
cross-validated against each other by exact integer identities.
"""

from .config import RunConfig
from .errors import (AlignmentError, BoundaryZeroError, ConfirmationFailure,
                     ConsistencyError, DegenerateZeroError,
                     DimensionMismatchError, EqindexError, OrderCheckFailure,
                     SplitError, ValidationError)
from .fourier import (FourierVector, TrigMode, apply_A, inner_product,
                      pointwise_product, wavenumbers)
from .problem import ProblemSpec, galerkin_jacobian, galerkin_residual
from .spectra import (ProjectionSet, SpectralSplit, crossing_check,
                      eigendecompose_symmetric, family_split,
                      family_split_linearization, projections, split_spectrum,
                      split_linearization, subspace_align)
from .manifold import (QuadraticManifold, ReducedField, bilinear_definiteness,
                       quadratic_coefficients, reduce_at, reduced_vector_field,
                       residual_order_check)
from .degree import (CoefRegion, IndexReport, PlanarRegion,
                     conjugacy_invariance_check, galerkin_equilibrium_index,
                     index_continuation_check, planar_index,
                     reduction_identity_check, winding_degree,
                     zero_count_degree)
from .planar import (BlockReport, OrbitSample, chi_consistency, classify_block,
                     detect_invariant_circle, directed_hausdorff,
                     hausdorff_distance, integrate_rk4)
from .branching import (BifurcationReport, Branch, BranchPoint,
                        bifurcating_set_index, classify_trichotomy,
                        continue_branch, local_branch_existence, m2_dichotomy,
                        sine_mask, switch_branches)

__version__ = "0.1.0"

__all__ = [
    "RunConfig",
    "EqindexError", "ValidationError", "DimensionMismatchError", "SplitError",
    "AlignmentError", "BoundaryZeroError", "DegenerateZeroError",
    "OrderCheckFailure", "ConfirmationFailure", "ConsistencyError",
    "FourierVector", "TrigMode", "inner_product", "apply_A",
    "pointwise_product", "wavenumbers",
    "ProblemSpec", "galerkin_residual", "galerkin_jacobian",
    "SpectralSplit", "ProjectionSet", "eigendecompose_symmetric",
    "split_spectrum", "split_linearization", "family_split",
    "family_split_linearization", "projections", "crossing_check",
    "subspace_align",
    "QuadraticManifold", "ReducedField", "quadratic_coefficients", "reduce_at",
    "reduced_vector_field", "bilinear_definiteness", "residual_order_check",
    "PlanarRegion", "CoefRegion", "IndexReport", "winding_degree",
    "zero_count_degree", "planar_index", "galerkin_equilibrium_index",
    "conjugacy_invariance_check", "index_continuation_check",
    "reduction_identity_check",
    "BlockReport", "OrbitSample", "integrate_rk4", "classify_block",
    "chi_consistency", "detect_invariant_circle", "hausdorff_distance",
    "directed_hausdorff",
    "Branch", "BranchPoint", "BifurcationReport", "bifurcating_set_index",
    "local_branch_existence", "continue_branch", "switch_branches",
    "classify_trichotomy", "m2_dichotomy", "sine_mask",
]
