"""framecast: optimal quantum states for transmitting a Cartesian frame.

A single atom prepared across the irreducible blocks of its n-th level can
carry one, two, or three spatial axes to a distant party. This package builds
the transmission objectives in closed form, optimizes the sender and detector
states by alternating eigenvalue rounds, verifies every coefficient against
brute-force group quadrature, and replays the covariant measurement by Monte
Carlo sampling.
"""

from .basis import block_slice, flat_index, iter_jm, total_dim
from .coefficients import (
    Objective,
    SparseCoefficientTensor,
    assemble_tensor,
    cached_tensor,
    g_element,
    h_element,
)
from .frames import (
    GramLikeMatrix,
    WeightedVectorSet,
    build_c,
    reduce_to_axes,
    rotation_entry_tensor,
    weighted_objective_expectation,
)
from .objective import (
    AliceState,
    FidelityReport,
    FiducialState,
    ObjectiveMatrix,
    build_m,
    expected_value,
    fidelity_report,
    mse_per_axis_from_lambda,
)
from .optimizer import (
    OptimizationResult,
    SweepRow,
    b_from_a,
    direct_search_optimize,
    fit_asymptote,
    fixed_point_optimize,
    optimize_z_single_m,
    sweep,
    top_eigenpair,
    z_sector_matrix,
)
from .quadrature import SO3Grid, coefficient_block, coefficient_oracle, integrate, make_grid
from .simulator import (
    MonteCarloReport,
    monte_carlo_error,
    outcome_density,
    povm_defect,
    sample_outcome,
)
from .so3 import (
    AngularIndex,
    EulerAngles,
    RotationMatrix,
    angles_from_matrix,
    axis_cosines,
    big_d,
    big_d_matrix,
    compose,
    error_angles,
    jacobi_polynomial,
    rotation_matrix,
    rotation_matrix_components,
    small_d,
    small_d_matrix,
)

__version__ = "0.1.0"
