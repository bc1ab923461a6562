"""Regime-switching Nelson-Siegel yield curve models.

The package covers the full workflow: loading construction, panel IO with
rolling-quantile standardization, binary regime trees over macro variables,
Kalman filtering / backward sampling for the regime-switching state space,
a Gibbs sampler with spike-and-slab transition selection, marginal-likelihood
tree search, simulation experiments, and posterior diagnostics.
"""

from .basis import (
    DEFAULT_GRID,
    DEFAULT_MATURITIES,
    REFERENCE_DECAY,
    LoadingMatrix,
    MaturityGrid,
    augmented_loading,
    loading_matrix,
    loading_row,
)
from .diagnostics import (
    girf,
    girf_table,
    residual_report,
    residual_stats,
    ttest_report,
    welch_t_test,
)
from .gibbs import (
    ChainConfig,
    PosteriorDraws,
    PriorConfig,
    default_priors,
    load_draws,
    posterior_mean_params,
    run_chain,
    save_draws,
    two_step_init,
)
from .panels import (
    MacroPanel,
    PanelFormatError,
    YieldPanel,
    align_yields,
    build_macro_panel,
    descriptive_stats,
    load_macro_table,
    load_yield_panel,
    rolling_quantile_standardize,
    write_macro_table,
    write_yield_panel,
)
from .select import (
    SearchConfig,
    SearchResult,
    SplitEvaluation,
    grow_tree,
    log_marginal_likelihood,
    stack_observations,
)
from .simulate import (
    SimulatedData,
    SimulationDesign,
    bundled_design,
    recovery_errors,
    recovery_table,
    simulate_panel,
    simulate_yields,
)
from .statespace import (
    COMPILED_KERNELS,
    FilterOutput,
    ModelParams,
    NumericalError,
    default_init,
    ffbs_sample,
    kalman_filter,
    predictive_loglik,
    smoother_loglik,
)
from .tree import (
    Leaf,
    RegimeLabels,
    RegimeTree,
    Split,
    SplitCandidate,
    apply_split,
    assign_labels,
    enumerate_candidates,
)

__version__ = "0.1.0"
