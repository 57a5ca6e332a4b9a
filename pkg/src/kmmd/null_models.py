"""Null-distribution calibration for the MMD tests.

Distribution-free thresholds come from the large-deviation bounds on the
biased and unbiased statistics.  The asymptotic tests use one of

* a permutation ("bootstrap") null on the pooled Gram matrix,
* a Pearson Type III curve matched to the H0 moments of MMD^2_u,
* a simulation of the weighted chi-square limit from Gram eigenvalues,
* the Gaussian limit of the linear-time statistic.

Randomized nulls derive one generator per chunk of draws from
``SeedSequence(seed).spawn``, so the draws depend only on the seed and never
on how the chunks are scheduled.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import special, stats

from .estimators import _require_paired
from .kernels import GramBlocks, center_gram

DEFAULT_B = 150
PERM_CHUNK = 64
SPECTRAL_CHUNK = 1000
EIG_CUTOFF = 1e-12

NULL_KINDS = ("biased_bound", "hoeffding_bound", "bootstrap", "pearson_curve",
              "spectral", "gaussian", "point_mass")


def _check_alpha(alpha: float) -> float:
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    return float(alpha)


def _check_bound(K, m):
    if K is None:
        raise ValueError("bound test requires bounded kernel (bound_K is undefined)")
    if K <= 0:
        raise ValueError(f"bound_K must be positive, got {K}")
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")


def permutation_threshold(samples, alpha: float) -> float:
    """Empirical upper quantile matched to the add-one p-value.

    Returns the ``c``-th largest sample with ``c = floor(alpha (B + 1))``, so
    ``observed > threshold`` holds exactly when ``p_value <= alpha``.  When no
    observation can reach level ``alpha`` the threshold is ``+inf``.
    """
    s = np.sort(np.asarray(samples, dtype=float))[::-1]
    c = int(np.floor(alpha * (s.size + 1) + 1e-9))
    if c < 1:
        return float("inf")
    return float(s[c - 1])


def add_one_p_value(samples, observed: float) -> float:
    s = np.asarray(samples, dtype=float)
    return float((1 + np.count_nonzero(s >= observed)) / (1 + s.size))


@dataclass
class NullModel:
    kind: str
    alpha: float
    threshold: float
    samples: np.ndarray | None = field(default=None, repr=False)
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in NULL_KINDS:
            raise ValueError(f"unknown null model {self.kind!r}")
        _check_alpha(self.alpha)
        if self.kind in ("bootstrap", "spectral") and (self.samples is None or len(self.samples) == 0):
            raise ValueError(f"{self.kind} null needs a nonempty sample")

    def p_value(self, observed: float) -> float | None:
        if self.kind in ("bootstrap", "spectral"):
            return add_one_p_value(self.samples, observed)
        if self.kind == "pearson_curve":
            return pearson_sf(self.params["moments"], observed)
        if self.kind == "gaussian":
            scale = self.params["sigma_l"] / np.sqrt(self.params["m"])
            if scale == 0:
                return 0.0 if observed > 0 else 1.0
            return float(special.ndtr(-observed / scale))
        if self.kind == "point_mass":
            return 0.0 if observed > 0 else 1.0
        return None


# distribution-free bounds

def threshold_biased_bound(K: float, m: int, alpha: float) -> float:
    """Acceptance radius for MMD_b from McDiarmid's inequality plus the bias bound."""
    _check_bound(K, m)
    alpha = _check_alpha(alpha)
    return float(np.sqrt(2.0 * K / m) * (1.0 + np.sqrt(2.0 * np.log(1.0 / alpha))))


def threshold_hoeffding(K: float, m: int, alpha: float) -> float:
    """Acceptance radius for MMD^2_u from Hoeffding's U-statistic bound."""
    _check_bound(K, m)
    alpha = _check_alpha(alpha)
    return float(4.0 * K / np.sqrt(m) * np.sqrt(np.log(1.0 / alpha)))


# permutation null

def permutation_statistics(G: GramBlocks, perms: np.ndarray, statistic: str = "mmd_u_sq") -> np.ndarray:
    """Recompute the statistic for each row of ``perms`` (index permutations of the pool).

    The first ``m`` permuted indices act as the pseudo-X sample.  Works on the
    pooled Gram matrix directly; no kernel values are recomputed.
    """
    K = G.full
    m, n = G.m, G.n
    N = m + n
    perms = np.atleast_2d(perms)
    if statistic == "mmd_u_sq":
        _require_paired(G)
    elif statistic != "mmd_b":
        raise ValueError(f"unknown statistic {statistic!r}")
    row_tot = K.sum(axis=1)
    total = row_tot.sum()
    diag = np.diag(K)
    out = np.empty(perms.shape[0])
    for lo in range(0, perms.shape[0], PERM_CHUNK):
        P = perms[lo : lo + PERM_CHUNK]
        ind = np.zeros((N, P.shape[0]))
        ind[P[:, :m].T, np.arange(P.shape[0])] = 1.0
        KA = K @ ind
        sxx = np.einsum("ib,ib->b", ind, KA)
        sxy = ind.T @ row_tot - sxx
        syy = total - 2.0 * sxy - sxx
        if statistic == "mmd_b":
            rad = sxx / m**2 - 2.0 * sxy / (m * n) + syy / n**2
            out[lo : lo + P.shape[0]] = np.sqrt(np.maximum(rad, 0.0))
        else:
            txx = ind.T @ diag
            tyy = diag.sum() - txx
            txy = K[P[:, :m], P[:, m:]].sum(axis=1)
            u = (sxx - txx) + (syy - tyy) - 2.0 * (sxy - txy)
            out[lo : lo + P.shape[0]] = u / (m * (m - 1))
    return out


def draw_permutations(N: int, B: int, seed) -> np.ndarray:
    """``B`` permutations of ``range(N)``; permutation ``b`` uses child seed ``b``."""
    children = np.random.SeedSequence(seed).spawn(B)
    return np.stack([np.random.default_rng(c).permutation(N) for c in children])


def bootstrap_null(G: GramBlocks, B: int = DEFAULT_B, seed=0, alpha: float = 0.05,
                   statistic: str = "mmd_u_sq") -> NullModel:
    if B < 1:
        raise ValueError(f"B must be >= 1, got {B}")
    alpha = _check_alpha(alpha)
    samples = permutation_statistics(G, draw_permutations(G.m + G.n, B, seed), statistic)
    return NullModel("bootstrap", alpha, permutation_threshold(samples, alpha), samples,
                     {"B": B, "statistic": statistic})


# moments of MMD^2_u under H0

@dataclass(frozen=True)
class H0Moments:
    m2: float
    m3: float

    def __post_init__(self):
        if self.m2 < 0:
            raise ValueError(f"second moment must be nonnegative, got {self.m2}")

    @property
    def skew(self) -> float:
        return self.m3 / self.m2**1.5 if self.m2 > 0 else 0.0

    @property
    def kurt_lb(self) -> float:
        return self.skew**2 + 1.0


def _centered_h(G: GramBlocks) -> np.ndarray:
    m = _require_paired(G)
    Kc = center_gram(G.full)
    H = Kc[:m, :m] + Kc[m:, m:] - Kc[:m, m:] - Kc[:m, m:].T
    np.fill_diagonal(H, 0.0)
    return H


def _moment2(H: np.ndarray, m: int) -> float:
    mean_h2 = np.sum(H * H) / (m * (m - 1))
    return float(2.0 / (m * (m - 1)) * mean_h2)


def _moment3(H: np.ndarray, m: int) -> float:
    # zero diagonal: sum_{i,j} H_ij (H @ H)_ij runs over distinct (i, j, k) only
    triple = np.sum(H * (H @ H)) / (m * (m - 1) * (m - 2))
    return float(8.0 * (m - 2) / (m**2 * (m - 1) ** 2) * triple)


def h0_moment2(G: GramBlocks) -> float:
    """Plug-in second moment of MMD^2_u under H0."""
    m = _require_paired(G)
    return _moment2(_centered_h(G), m)


def h0_moment3(G: GramBlocks) -> float:
    """Plug-in leading-order third moment of MMD^2_u under H0; O(m^3)."""
    m = _require_paired(G, minimum=3)
    return _moment3(_centered_h(G), m)


def h0_moments(G: GramBlocks) -> H0Moments:
    m = _require_paired(G, minimum=3)
    H = _centered_h(G)
    return H0Moments(_moment2(H, m), _moment3(H, m))


# Pearson Type III fit

SKEW_FLOOR = 1e-8


def _gamma_fit(mom: H0Moments):
    """Shape, scale and location of the zero-mean shifted gamma with |skew|."""
    s = abs(mom.skew)
    sd = np.sqrt(mom.m2)
    shape = 4.0 / s**2
    scale = sd * s / 2.0
    return shape, scale, -shape * scale


def pearson_quantile(mom: H0Moments, alpha: float) -> float:
    """Upper ``alpha`` quantile of the Pearson Type III curve with mean 0 and the given m2, skew."""
    alpha = _check_alpha(alpha)
    if not mom.m2 > 0:
        raise ValueError(f"Pearson fit needs a positive second moment, got {mom.m2}")
    if abs(mom.skew) <= SKEW_FLOOR:
        return float(np.sqrt(mom.m2) * stats.norm.isf(alpha))
    shape, scale, loc = _gamma_fit(mom)
    if mom.skew > 0:
        return float(stats.gamma.isf(alpha, shape, loc=loc, scale=scale))
    # mirrored fit: upper quantile of -W is minus the lower quantile of W
    return float(-stats.gamma.ppf(alpha, shape, loc=loc, scale=scale))


def pearson_sf(mom: H0Moments, x: float) -> float:
    if abs(mom.skew) <= SKEW_FLOOR:
        return float(stats.norm.sf(x / np.sqrt(mom.m2)))
    shape, scale, loc = _gamma_fit(mom)
    if mom.skew > 0:
        return float(stats.gamma.sf(x, shape, loc=loc, scale=scale))
    return float(stats.gamma.cdf(-x, shape, loc=loc, scale=scale))


def pearson_null(G: GramBlocks, alpha: float = 0.05) -> NullModel:
    mom = h0_moments(G)
    alpha = _check_alpha(alpha)
    if not mom.m2 > 0:
        # every h vanishes, so MMD^2_u is identically zero under relabelling
        return NullModel("point_mass", alpha, 0.0, params={"moments": mom})
    skew = mom.skew
    # fitted gamma has excess kurtosis 1.5 skew^2, i.e. 3 + 1.5 skew^2 in the raw convention
    kurt = 3.0 + 1.5 * skew**2
    params = {
        "moments": mom,
        "skew": skew,
        "kurtosis": kurt,
        "kurtosis_lower_bound": mom.kurt_lb,
        "wilkins_bound_ok": bool(kurt >= mom.kurt_lb),
    }
    return NullModel("pearson_curve", alpha, pearson_quantile(mom, alpha), params=params)


# spectral null

def null_eigenvalues(K_centered, cutoff: float = EIG_CUTOFF) -> np.ndarray:
    """Estimated operator eigenvalues: eigenvalues of the centred Gram over its size."""
    Kc = np.asarray(K_centered, dtype=float)
    try:
        lam = np.linalg.eigvalsh(Kc) / Kc.shape[0]
    except np.linalg.LinAlgError as err:
        raise ArithmeticError(f"eigendecomposition failed: {err}") from err
    top = lam.max()
    if not top > 0:
        raise ValueError("centred Gram has no positive eigenvalues")
    lam = lam[lam >= cutoff * top]
    return lam[::-1].copy()


def simulate_weighted_chi2(lam, n_sim: int, seed) -> np.ndarray:
    """Draws of ``sum_l lam_l (z_l^2 - 2)`` with ``z_l ~ N(0, 2)``."""
    lam = np.asarray(lam, dtype=float)
    n_chunks = -(-n_sim // SPECTRAL_CHUNK)
    children = np.random.SeedSequence(seed).spawn(n_chunks)
    out = np.empty(n_sim)
    for c, child in enumerate(children):
        lo = c * SPECTRAL_CHUNK
        size = min(SPECTRAL_CHUNK, n_sim - lo)
        z2 = 2.0 * np.random.default_rng(child).standard_normal((size, lam.size)) ** 2
        out[lo : lo + size] = (z2 - 2.0) @ lam
    return out


def spectral_null(K_centered, m: int, n_sim: int = 5000, seed=0, alpha: float = 0.05) -> NullModel:
    """Null for MMD^2_u from the weighted chi-square limit of ``m * MMD^2_u``."""
    if n_sim < 1:
        raise ValueError(f"n_sim must be >= 1, got {n_sim}")
    alpha = _check_alpha(alpha)
    lam = null_eigenvalues(K_centered)
    samples = simulate_weighted_chi2(lam, n_sim, seed) / m
    return NullModel("spectral", alpha, permutation_threshold(samples, alpha), samples,
                     {"n_sim": n_sim, "n_eigenvalues": int(lam.size)})


# Gaussian null for the linear-time statistic

def linear_test_threshold(sigma_l_hat: float, m: int, alpha: float) -> float:
    if m < 2:
        raise ValueError(f"m must be >= 2, got {m}")
    if sigma_l_hat < 0:
        raise ValueError("sigma_l_hat must be nonnegative")
    alpha = _check_alpha(alpha)
    # ndtri avoids the per-call overhead of scipy.stats on the linear-time path
    return float(sigma_l_hat * -special.ndtri(alpha) / np.sqrt(m))


def gaussian_null(sigma_l_hat: float, m: int, alpha: float = 0.05) -> NullModel:
    return NullModel("gaussian", alpha, linear_test_threshold(sigma_l_hat, m, alpha),
                     params={"sigma_l": float(sigma_l_hat), "m": int(m)})
