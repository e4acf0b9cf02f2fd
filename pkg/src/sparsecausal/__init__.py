"""Causality-network retrieval from short multivariate time series.

Simulate sparse VAR processes with a known causal structure, estimate the
precision matrix of the lagged frame (ridge, graphical lasso or LoGo on a
TMFG), turn it into validated conditional transfer entropies and score the
retrieved network against the truth.
"""

from ._backend import NAME as KERNELS
from .estimators import (
    CovarianceModel,
    PrecisionMatrix,
    covariance,
    estimate,
    glasso_precision,
    log_likelihood,
    logo_precision,
    ridge_precision,
    trace_product,
)
from .harness import CellResult, ExperimentConfig, run_experiment
from .infotheory import (
    IndexGroup,
    TEMatrix,
    cond_cov_given_rest,
    cond_cov_partial,
    conditional_mutual_information,
    conditional_transfer_entropy,
    gaussian_entropy,
    te_matrix,
    unconditional_transfer_entropy,
)
from .simulator import (
    CausalityNetwork,
    LaggedPanel,
    ProcessSpec,
    TimeSeriesPanel,
    build_lagged_panel,
    generate_process_spec,
    simulate,
    true_network,
)
from .tmfg import ChordalGraph, check_chordal
from .validation import (
    ConfusionCounts,
    ValidationParams,
    bonferroni_threshold,
    chi2_cdf,
    confusion,
    hypergeometric_pvalue,
    inference_network,
    te_pvalue,
    validated_network,
)

__version__ = "0.1.0"
