"""Fractional-time DG solver lab.

Solves 1D time-fractional advection-diffusion-reaction problems with a
Caputo derivative of order alpha in (0,1): L1 time stepping on graded
meshes, non-symmetric interior-penalty DG in space, and a convergence-study
harness measuring errors in L2, max, DG-energy and discrete-energy norms.
"""

from .configfile import parse_key_value_text, read_key_value_file
from .dg import (
    BlockTridiagonalMatrix,
    DGFunction,
    DGSpace,
    assemble_B1,
    assemble_B2,
    assemble_B3,
    assemble_full,
    load_vector,
    project_initial,
    solve_block_tridiagonal,
    trace_ops,
)
from .errors import (
    ArgumentContractError,
    CoefficientError,
    FracDGError,
    OutputError,
    SolverError,
)
from .fractional import (
    L1Coefficients,
    ThetaMultipliers,
    caputo_power,
    history_weights,
    l1_apply,
    l1_coefficients,
    theta_multipliers,
)
from .meshes import GradedTimeMesh, SpatialMesh, graded_mesh, uniform_mesh
from .norms import (
    NormReport,
    beta_weight,
    convergence_order,
    error_norms,
    lobatto_interpolant,
)
from .problems import REGISTRY_IDS, build_custom_problem, registry_lookup
from .quadrature import (
    LagrangeBasis,
    QuadratureRule,
    basis_eval,
    basis_eval_many,
    gamma,
    gauss_rule,
    lagrange_basis,
    lobatto_rule,
)
from .selftest import CheckResult, run_selftest
from .stepper import (
    LinearProblemSpec,
    SemilinearProblemSpec,
    SolveResult,
    solve_linear,
    solve_semilinear,
)
from .study import (
    ARTIFACT_VERSION,
    ExperimentConfig,
    ResultRow,
    ResultTable,
    emit_outputs,
    run_convergence,
)

__version__ = ARTIFACT_VERSION

__all__ = [
    "ARTIFACT_VERSION",
    "ArgumentContractError",
    "BlockTridiagonalMatrix",
    "CheckResult",
    "CoefficientError",
    "DGFunction",
    "DGSpace",
    "ExperimentConfig",
    "FracDGError",
    "GradedTimeMesh",
    "L1Coefficients",
    "LagrangeBasis",
    "LinearProblemSpec",
    "NormReport",
    "OutputError",
    "QuadratureRule",
    "REGISTRY_IDS",
    "ResultRow",
    "ResultTable",
    "SemilinearProblemSpec",
    "SolveResult",
    "SolverError",
    "SpatialMesh",
    "ThetaMultipliers",
    "assemble_B1",
    "assemble_B2",
    "assemble_B3",
    "assemble_full",
    "basis_eval",
    "basis_eval_many",
    "beta_weight",
    "build_custom_problem",
    "caputo_power",
    "convergence_order",
    "emit_outputs",
    "error_norms",
    "gamma",
    "gauss_rule",
    "graded_mesh",
    "history_weights",
    "l1_apply",
    "l1_coefficients",
    "lagrange_basis",
    "load_vector",
    "lobatto_interpolant",
    "lobatto_rule",
    "project_initial",
    "registry_lookup",
    "run_convergence",
    "run_selftest",
    "solve_block_tridiagonal",
    "solve_linear",
    "solve_semilinear",
    "theta_multipliers",
    "trace_ops",
    "uniform_mesh",
]
