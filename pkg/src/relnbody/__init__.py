"""Origin-invariant relative N-body systems and their constant of motion."""

from .core import (
    Body,
    DegeneratePairError,
    Formulation,
    Mode,
    NBodyState,
    RelativeState,
    Scenario,
    SingularityError,
    ValidationResult,
    center_of_mass,
    rs1_to_rs2,
    to_relative,
    validate_initial_conditions,
)
from .dynamics import (
    AccelerationSet,
    bcos3_naive_rhs,
    body_frame_residual,
    nbody_accelerations,
    reduced_bcos_rhs,
    rs1_rhs,
    rs2_rhs,
)
from .integrate import (
    IntegratorSettings,
    InvalidInitialConditions,
    Termination,
    Trajectory,
    double_integral_solution,
    integrate_ode,
    propagate,
    rk4_step,
)
from .invariants import (
    InvariantReport,
    Verdict,
    bcos3_consistency_check,
    invariant_report,
    motion_identity,
    restlessness_check,
    t_sum_check,
    translation_invariance_residual,
    two_body_bcos_contradiction,
)
from .kepler import ConicParams, conic_radius, fit_conic, fit_trajectory

__version__ = "0.1.0"
