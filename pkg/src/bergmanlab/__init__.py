"""Numerical laboratory for reproducing kernels of weighted function spaces.

Builds finite-dimensional spaces of functions over discrete and disk
measures, computes their Bergman kernels and densities of states, and checks
the quantitative structure that comes with them: the comparison principle
for densities, derivative formulas along weight homotopies, kernel quotient
bounds, a maximum principle, and the semiclassical scaling limit.
"""

from .battery import (
    BatteryInstance,
    BatteryReport,
    InstanceMetrics,
    MaxPrincipleSearchReport,
    SizeBounds,
    check_instance,
    generate_instance,
    instance_spread,
    max_principle_search,
    run_battery,
)
from .comparison import (
    ComparisonReport,
    SandwichReport,
    SublevelSet,
    comparison_integrals,
    max_principle_check,
    reduce_less_singular,
    sandwich_check,
    shifted_comparison_sweep,
    strictness_check,
    sublevel_set,
)
from .errors import (
    InvalidConfigurationError,
    InvalidMeasureError,
    InvalidScenarioError,
    UnsupportedWeightError,
)
from .homotopy import (
    DerivativeReport,
    HomotopyPath,
    build_path,
    difference_quotient_bound_check,
    g_derivative_forms,
    g_of_t,
    kernel_derivative_matrix,
    kernel_derivative_rhs,
    kernel_fd,
    l2_difference_bound_check,
    monotonicity_sweep,
    sup_bound_constant,
    weight_at,
)
from .kernels import (
    BergmanDensity,
    KernelMatrix,
    WeightedSpace,
    assemble_gram,
    bergman_density,
    bergman_density_at,
    bergman_density_from_space,
    build_space,
    density_integral,
    equilibrated_spectrum,
    equilibration_scales,
    kernel_eval_at,
    kernel_matrix,
    kernel_monotonicity_check,
    orthonormal_basis,
    orthonormal_node_values,
    reproducing_residual,
    retained_spread,
)
from .measures import (
    Point,
    QuadratureMeasure,
    build_discrete_measure,
    build_disk_measure,
)
from .quantization import (
    MongeAmpereDensity,
    ScalingReport,
    build_scaled_space,
    default_degree_rule,
    ma_density,
    scaled_bergman,
    tcz_convergence_report,
)
from .scenarios import (
    CheckResult,
    RunReport,
    ScenarioConfig,
    emit_report,
    load_scenario_file,
    parse_scenario,
    report_document,
    run_scenario,
)
from .spans import FunctionSpan, evaluate_basis, monomial_span, tabulated_span
from .weights import (
    WeightFunction,
    constant_weight,
    eval_weight,
    gauss_weight,
    harmonic_weight,
    radial_poly_weight,
    scaled_weight,
    shifted_weight,
    tabulated_weight,
    weight_family_from_dict,
)

__version__ = "0.1.0"
