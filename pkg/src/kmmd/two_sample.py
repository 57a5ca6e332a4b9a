"""Run a configured two-sample test end to end, and evaluate the witness function."""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import estimators as est
from . import null_models as nm
from .kernels import KernelSpec, as_sample, block_sums, center_gram, cross_gram, gram_blocks, median_heuristic

METHODS = ("biased_bound", "unbiased_hoeffding", "bootstrap", "pearson", "spectral", "linear")
PAIRED_METHODS = ("unbiased_hoeffding", "pearson", "spectral", "linear")
P_VALUE_METHODS = ("bootstrap", "spectral", "linear", "pearson")


@dataclass(frozen=True)
class TestConfig:
    """Kernel, statistic and null-model choice for one test run.

    ``kernel="median-auto"`` builds a ``kernel_family`` kernel whose sigma is the
    median heuristic on the pooled sample.
    """

    __test__ = False  # not a pytest class

    method: str = "bootstrap"
    kernel: KernelSpec | str = "median-auto"
    kernel_family: str = "gaussian"
    alpha: float = 0.05
    bootstrap_B: int = nm.DEFAULT_B
    n_sim: int = 5000
    seed: int = 0
    bootstrap_statistic: str = "mmd_u_sq"

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose from {METHODS}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.bootstrap_B < 1 or self.n_sim < 1:
            raise ValueError("bootstrap_B and n_sim must be >= 1")
        if isinstance(self.kernel, str):
            if self.kernel != "median-auto":
                raise ValueError(f"kernel must be a KernelSpec or 'median-auto', got {self.kernel!r}")
            if self.kernel_family not in ("gaussian", "laplace"):
                raise ValueError("median-auto applies to gaussian or laplace kernels")
        if self.bootstrap_statistic not in ("mmd_u_sq", "mmd_b"):
            raise ValueError(f"unknown bootstrap statistic {self.bootstrap_statistic!r}")


@dataclass
class TestResult:
    __test__ = False

    statistic: est.StatValue
    threshold: float
    p_value: float | None
    reject: bool
    method: str
    kernel: KernelSpec
    m: int
    n: int
    seed: int
    alpha: float
    runtime_ms: float = 0.0
    details: dict = field(default_factory=dict)


def resolve_kernel(cfg: TestConfig, X, Y) -> KernelSpec:
    if isinstance(cfg.kernel, KernelSpec):
        return cfg.kernel
    sigma = median_heuristic(np.vstack([as_sample(X), as_sample(Y)]))
    return KernelSpec(cfg.kernel_family, sigma=sigma)


def _paired_m(X, Y, method):
    m, n = len(X), len(Y)
    if method in PAIRED_METHODS and m != n:
        raise ValueError(f"method {method!r} needs paired samples (m == n), got m={m}, n={n}")
    return m, n


def run_two_sample_test(X, Y, cfg: TestConfig, kernel: KernelSpec | None = None) -> TestResult:
    """Test ``p == q`` from samples ``X ~ p`` and ``Y ~ q``.

    ``kernel`` overrides ``cfg.kernel`` (used when sigma was already resolved).
    For a precomputed kernel ``X``/``Y`` may be None.
    """
    spec = kernel or (cfg.kernel if isinstance(cfg.kernel, KernelSpec) else None)
    if spec is None:
        X, Y = as_sample(X), as_sample(Y)
        spec = resolve_kernel(cfg, X, Y)
    if spec.family == "precomputed":
        m, n = spec.split, spec.matrix.shape[0] - spec.split
        if cfg.method in PAIRED_METHODS and m != n:
            raise ValueError(f"method {cfg.method!r} needs paired samples (m == n), got m={m}, n={n}")
    else:
        X, Y = as_sample(X), as_sample(Y)
        m, n = _paired_m(X, Y, cfg.method)

    t0 = time.perf_counter()
    details = {}
    method, alpha = cfg.method, cfg.alpha
    if method == "linear":
        if spec.family == "precomputed":
            raise ValueError("linear method needs a pointwise kernel")
        stat, acc = est.mmd_linear(X, Y, spec, return_accumulator=True)
        sigma_l = float(np.sqrt(acc.sigma_l_squared))
        null = nm.gaussian_null(sigma_l, m, alpha)
        details["sigma_l"] = sigma_l
    elif method in ("biased_bound", "unbiased_hoeffding"):
        # only block sums are needed, so the pooled Gram is never materialised
        S = block_sums(spec, X, Y)
        if method == "biased_bound":
            stat = est.mmd_biased(S)
            # the bound is stated for m == n; the smaller size keeps it conservative
            thr = nm.threshold_biased_bound(spec.bound_K, min(m, n), alpha)
            null = nm.NullModel("biased_bound", alpha, thr)
        else:
            stat = est.mmd_u_squared(S)
            null = nm.NullModel("hoeffding_bound", alpha, nm.threshold_hoeffding(spec.bound_K, m, alpha))
    else:
        G = gram_blocks(spec, X if spec.family != "precomputed" else None,
                        Y if spec.family != "precomputed" else None)
        if method == "bootstrap":
            stat = est.mmd_biased(G) if cfg.bootstrap_statistic == "mmd_b" else est.mmd_u_squared(G)
            null = nm.bootstrap_null(G, cfg.bootstrap_B, cfg.seed, alpha, cfg.bootstrap_statistic)
        elif method == "pearson":
            stat = est.mmd_u_squared(G)
            null = nm.pearson_null(G, alpha)
            details.update({k: v for k, v in null.params.items() if k != "moments"})
            details["m2"], details["m3"] = null.params["moments"].m2, null.params["moments"].m3
        else:
            stat = est.mmd_u_squared(G)
            null = nm.spectral_null(center_gram(G.full), m, cfg.n_sim, cfg.seed, alpha)
            details["n_eigenvalues"] = null.params["n_eigenvalues"]
    runtime_ms = (time.perf_counter() - t0) * 1e3

    p_value = null.p_value(stat.value) if method in P_VALUE_METHODS else None
    return TestResult(
        statistic=stat,
        threshold=null.threshold,
        p_value=p_value,
        reject=bool(stat.value > null.threshold),
        method=method,
        kernel=spec,
        m=m,
        n=n,
        seed=cfg.seed,
        alpha=alpha,
        runtime_ms=runtime_ms,
        details=details,
    )


def witness(X, Y, spec: KernelSpec, T) -> np.ndarray:
    """Unnormalised empirical witness ``mean_i k(x_i, t) - mean_j k(y_j, t)`` at each query ``t``."""
    return cross_gram(spec, T, X).mean(axis=1) - cross_gram(spec, T, Y).mean(axis=1)
