"""Sparse scale-mixture multiple testing toolkit."""

from .distributions import (
    Family,
    Sides,
    TailModel,
    inverse_gamma,
    make_model,
    pareto,
    student_t,
)
from .regime import (
    AsymptoticRegime,
    TestingProblem,
    bfdr_floor,
    c0_from_c,
    c_from_c0,
    compute_regime,
    optimal_alpha,
    risk_components,
    u_from_difficulty,
)
from .procedures import (
    DecisionSummary,
    bh_decide,
    bh_sweep,
    decide_fixed,
    error_counts,
    exact_error_probs,
    exact_fixed_risk,
    pvalues,
)
from .thresholds import (
    ThresholdResult,
    ThresholdStatus,
    bfdr_of_threshold,
    bfdr_threshold,
    bfdr_threshold_asymptotic,
    gw_threshold,
    oracle_threshold,
    oracle_threshold_asymptotic,
    oracle_threshold_t_closed_form,
)
from .simlab import (
    Cell,
    CellError,
    ExperimentConfig,
    ProcedureSpec,
    ResultRecord,
    Scenario,
    concentration_diagnostic,
    default_alpha_grid,
    estimate_c0,
    generate_dataset,
    cell_rows,
    run_cell,
    scenario_cells,
    scenario_error_rates,
    scenario_risk_ratio,
)

__version__ = "0.1.0"

__all__ = [
    "AsymptoticRegime",
    "Cell",
    "CellError",
    "DecisionSummary",
    "ExperimentConfig",
    "Family",
    "ProcedureSpec",
    "ResultRecord",
    "Scenario",
    "Sides",
    "TailModel",
    "TestingProblem",
    "ThresholdResult",
    "ThresholdStatus",
    "__version__",
    "bfdr_floor",
    "bfdr_of_threshold",
    "bfdr_threshold",
    "bfdr_threshold_asymptotic",
    "bh_decide",
    "bh_sweep",
    "c0_from_c",
    "c_from_c0",
    "compute_regime",
    "concentration_diagnostic",
    "decide_fixed",
    "default_alpha_grid",
    "error_counts",
    "estimate_c0",
    "exact_error_probs",
    "exact_fixed_risk",
    "generate_dataset",
    "gw_threshold",
    "inverse_gamma",
    "make_model",
    "optimal_alpha",
    "oracle_threshold",
    "oracle_threshold_asymptotic",
    "oracle_threshold_t_closed_form",
    "pareto",
    "pvalues",
    "risk_components",
    "cell_rows",
    "run_cell",
    "scenario_cells",
    "scenario_error_rates",
    "scenario_risk_ratio",
    "student_t",
    "u_from_difficulty",
]
