"""berezin-lab: weighted Bergman kernels, Toeplitz/Hankel operators, and
Berezin-transform compactness diagnostics on Reinhardt model domains."""

__version__ = "0.1.0"

from ._accel import backend_name
from .domains import (
    BoundaryClassification,
    CustomDomain,
    Domain,
    EllipsoidDomain,
    InflatedDomain,
    PointKind,
    boundary_point,
    classify_boundary,
    complex_hessian,
    domain_from_config,
    inflate,
    inflated_boundary_classification_check,
    make_domain,
    rho_eval,
)
from .quadrature import (
    MCEstimate,
    QuadratureRule,
    Scheme,
    WeightedMeasure,
    dilation_identity_check,
    inflation_constant,
    inflation_constant_mc,
    integrate,
    monomial_moment,
    monomial_moment_mc,
    monte_carlo_rule,
    polar_tensor_rule,
    radial_rule,
)
from .bergman import (
    KernelEvaluator,
    WeightedSpace,
    build_space,
    diagonal_comparability_check,
    inflation_kernel_check,
    kernel_mass_outside,
    multiindices,
    project,
    slice_inequality_check,
)
from .operators import (
    OperatorExpr,
    TruncatedOperator,
    axler_zheng_report,
    berezin,
    boundary_profile,
    decompose_product,
    expr_from_json,
    expr_to_json,
    hankel_gram,
    materialize,
    product_decomposition_residual,
    semi_commutator_residual,
    tail_norm,
    toeplitz,
)
from .symbols import Symbol, SymbolTag

__all__ = [name for name in dir() if not name.startswith("_")]
