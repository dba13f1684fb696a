"""Numerical calculus for degenerate parabolic problems on singular
manifolds: chart tensor algebra, model geometries, weighted norms, the
degeneracy-removing rescaling, a theta-scheme solver and a CLI harness."""

from .backend import active_backend, available_backends, set_backend, warmup
from .errors import (
    ConditioningError,
    ConfigurationError,
    DesingError,
    DomainError,
    ExcludedExponentError,
    ExpressionError,
    GridMismatchError,
    MetricError,
    ModeError,
    NumericalAssertionError,
    RankError,
    ResolutionError,
    SchemaError,
    ShapeError,
    SolverError,
    StabilityError,
    SymmetryError,
    TransformInconsistencyError,
    UndefinedRatioError,
)
from .fields import (
    random_nodal,
    random_smooth_scalar,
    random_smooth_tensor,
    random_spd_coefficient,
)
from .geometry import (
    ManifoldSpec,
    SingularityDatum,
    check_singularity_datum,
    check_uniform_regularity,
    conformal_metric,
    make_cusp,
    make_euclidean_box,
    make_funnel,
    make_infinite_cusp,
    make_poincare_ball,
    make_wedge,
    trivial_datum,
)
from .grid import PHYSICAL, TRUNCATION, ChartGrid, Face
from .norms import (
    HatEquivalenceReport,
    NormReport,
    NormSpec,
    check_hat_equivalence,
    multiplication_ratio,
    weighted_sobolev_norm,
    weighted_sup_norm,
)
from .operators import (
    BoundaryOperator,
    BoundaryValues,
    CoefficientSet,
    CompatibilityReport,
    EllipticityReport,
    apply_A,
    apply_A_nondivergence,
    apply_B,
    check_coefficient_symmetry,
    check_compatibility,
    check_rho_ellipticity,
    coefficient_regularity_report,
    conjugate_by_rho_lambda,
    desingularize,
    face_normal,
    flux_via_tangential_form,
    grad_log_rho,
)
from .problem_io import ProblemConfig, load_problem_config
from .registry import EXPERIMENTS, run_experiment
from .reports import CheckResult, ExperimentResult, write_experiment
from .solver import (
    DiscreteSystem,
    ProblemData,
    ProblemSpec,
    SolveResult,
    TimeGrid,
    assemble,
    maximal_regularity_ratio,
    semigroup_check,
    solve_ibvp,
    step_theta,
)
from .tensors import (
    MetricField,
    TensorField,
    contract_full,
    contraction_C,
    covariant_derivative,
    divergence,
    divergence_form_expand,
    divergence_vector_direct,
    euclidean_metric,
    flat_lower,
    gradient,
    identity_tensor,
    laplace_beltrami,
    partial_derivatives,
    second_covariant,
    sharp,
    tensor_norm,
    tensor_norm_sq,
    vector_inner,
)

__version__ = "0.1.0"
