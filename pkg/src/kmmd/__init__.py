"""Kernel two-sample tests based on the maximum mean discrepancy."""

__version__ = "0.1.0"

from .estimators import (
    LinearMMDAccumulator,
    StatValue,
    h_kernel,
    h_matrix,
    mmd_biased,
    mmd_linear,
    mmd_u_squared,
    nonneg_corrected,
    sigma_l_squared_hat,
)
from .independence import HsicInput, hsic_permutation_test, hsic_statistic
from .kernels import (
    BlockSums,
    GramBlocks,
    KernelSpec,
    block_sums,
    center_gram,
    eval_kernel,
    gram_blocks,
    median_heuristic,
)
from .matching import Assignment, cost_matrix, delta_semimetric, hungarian
from .null_models import (
    H0Moments,
    NullModel,
    bootstrap_null,
    h0_moment2,
    h0_moment3,
    h0_moments,
    linear_test_threshold,
    pearson_quantile,
    spectral_null,
    threshold_biased_bound,
    threshold_hoeffding,
)
from .two_sample import TestConfig, TestResult, run_two_sample_test, witness
