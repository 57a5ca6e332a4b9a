"""MMD statistics: biased, unbiased quadratic-time and linear-time.

The unbiased statistics are U-statistics over paired observations
``z_i = (x_i, y_i)`` with core

    h(z_i, z_j) = k(x_i, x_j) + k(y_i, y_j) - k(x_i, y_j) - k(x_j, y_i)

and therefore require ``m == n``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernels import BlockSums, GramBlocks, KernelSpec, as_sample

RADICAND_TOL = 1e-12
LINEAR_CHUNK = 256

KINDS = ("mmd_b", "mmd_u_sq", "mmd_l_sq", "hsic")


class NumericalInconsistencyError(ArithmeticError):
    pass


@dataclass(frozen=True)
class StatValue:
    value: float
    kind: str
    m: int
    n: int

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown statistic kind {self.kind!r}")
        if self.kind in ("mmd_b", "hsic") and self.value < 0:
            raise ValueError(f"{self.kind} must be nonnegative, got {self.value}")


def _sums(G: GramBlocks | BlockSums) -> BlockSums:
    return G if isinstance(G, BlockSums) else G.sums()


def _require_paired(G: GramBlocks | BlockSums, minimum: int = 2) -> int:
    if G.m != G.n:
        raise ValueError(f"statistic needs paired samples (m == n), got m={G.m}, n={G.n}")
    if G.m < minimum:
        raise ValueError(f"statistic needs m >= {minimum}, got {G.m}")
    return G.m


def mmd_biased(G: GramBlocks | BlockSums) -> StatValue:
    S = _sums(G)
    m, n = S.m, S.n
    rad = S.sxx / m**2 - 2.0 * S.sxy / (m * n) + S.syy / n**2
    if rad < -RADICAND_TOL:
        raise NumericalInconsistencyError(f"squared MMD_b is negative: {rad:.3e}")
    return StatValue(float(np.sqrt(max(rad, 0.0))), "mmd_b", m, n)


def h_kernel(G: GramBlocks, i: int, j: int) -> float:
    _require_paired(G)
    if i == j:
        raise ValueError("h is undefined on the diagonal (i == j)")
    kxx, kyy, kxy = G.kxx, G.kyy, G.kxy
    # grouping the cross terms keeps h(i, j) == h(j, i) bit for bit
    return float(kxx[i, j] + kyy[i, j] - (kxy[i, j] + kxy[j, i]))


def h_matrix(G: GramBlocks) -> np.ndarray:
    """All ``h(z_i, z_j)`` as an m x m matrix with zero diagonal."""
    _require_paired(G)
    H = G.kxx + G.kyy - (G.kxy + G.kxy.T)
    np.fill_diagonal(H, 0.0)
    return H


def mmd_u_squared(G: GramBlocks | BlockSums) -> StatValue:
    m = _require_paired(G)
    S = _sums(G)
    within = (S.sxx - S.txx) + (S.syy - S.tyy)
    cross = 2.0 * (S.sxy - S.txy)
    return StatValue(float((within - cross) / (m * (m - 1))), "mmd_u_sq", m, m)


def nonneg_corrected(G: GramBlocks, v: float) -> float:
    """Add back the diagonal ``h(z_i, z_i)`` terms dropped from the U-statistic."""
    m = _require_paired(G)
    diag = np.diag(G.kxx) + np.diag(G.kyy) - 2.0 * np.diag(G.kxy)
    return float(v + diag.sum() / (m * (m - 1)))


def sigma_l_squared_hat(h_values) -> float:
    h = np.asarray(h_values, dtype=float).ravel()
    if h.size < 2:
        raise ValueError("need at least 2 h values")
    return float(2.0 * np.mean((h - h.mean()) ** 2))


class LinearMMDAccumulator:
    """Running mean and variance of the linear-statistic terms, O(1) memory.

    Feed disjoint pairs of paired observations; blocks are merged with the
    pairwise update of Chan et al., so the state is three numbers.
    """

    def __init__(self, spec: KernelSpec):
        if spec.family == "precomputed":
            raise ValueError("linear statistic needs a pointwise kernel")
        self.spec = spec
        self.count = 0
        self.mean = 0.0
        self._m2 = 0.0

    def h_terms(self, x1, y1, x2, y2) -> np.ndarray:
        k = self.spec
        if k.family == "linear":
            dot = lambda a, b: np.einsum("ij,ij->i", a, b)
            return dot(x1, x2) + dot(y1, y2) - dot(x1, y2) - dot(x2, y1)
        # the four kernel evaluations share one pass: rows are (x1,x2), (y1,y2), (x1,y2), (x2,y1)
        D = np.stack((x1 - x2, y1 - y2, x1 - y2, x2 - y1))
        if k.family == "gaussian":
            np.square(D, out=D)
            e = D.sum(axis=2)
            e *= -1.0 / (2.0 * k.sigma**2)
        else:
            np.abs(D, out=D)
            e = D.sum(axis=2)
            e *= -1.0 / k.sigma
        np.exp(e, out=e)
        return e[0] + e[1] - (e[2] + e[3])

    def update(self, x1, y1, x2, y2) -> None:
        self._update(self.h_terms(*(np.atleast_2d(np.asarray(a, dtype=float)) for a in (x1, y1, x2, y2))))

    def _update(self, h: np.ndarray) -> None:
        nb = h.size
        if nb == 0:
            return
        mb = h.sum() / nb
        dev = h - mb
        m2b = float(dev @ dev)
        tot = self.count + nb
        delta = mb - self.mean
        self.mean += delta * nb / tot
        self._m2 += m2b + delta**2 * self.count * nb / tot
        self.count = tot

    @property
    def sigma_l_squared(self) -> float:
        if self.count < 2:
            raise ValueError("need at least 2 h values")
        return 2.0 * self._m2 / self.count


def mmd_linear(X, Y, spec: KernelSpec, return_accumulator: bool = False):
    """Linear-time statistic over the pairs ``(z_1, z_2), (z_3, z_4), ...`` in input order."""
    X, Y = as_sample(X), as_sample(Y)
    m = X.shape[0]
    if Y.shape[0] != m:
        raise ValueError(f"linear statistic needs paired samples, got m={m}, n={Y.shape[0]}")
    if X.shape[1] != Y.shape[1]:
        raise ValueError(f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")
    if m < 2:
        raise ValueError(f"linear statistic needs m >= 2, got {m}")
    acc = LinearMMDAccumulator(spec)
    m2 = m // 2
    for start in range(0, m2, LINEAR_CHUNK):
        stop = min(start + LINEAR_CHUNK, m2)
        odd, even = slice(2 * start, 2 * stop, 2), slice(2 * start + 1, 2 * stop, 2)
        acc._update(acc.h_terms(X[odd], Y[odd], X[even], Y[even]))
    stat = StatValue(float(acc.mean), "mmd_l_sq", m, m)
    return (stat, acc) if return_accumulator else stat


def linear_h_values(X, Y, spec: KernelSpec) -> np.ndarray:
    """The ``floor(m/2)`` individual terms averaged by :func:`mmd_linear`."""
    X, Y = as_sample(X), as_sample(Y)
    m2 = X.shape[0] // 2
    acc = LinearMMDAccumulator(spec)
    return acc.h_terms(X[0 : 2 * m2 : 2], Y[0 : 2 * m2 : 2], X[1 : 2 * m2 : 2], Y[1 : 2 * m2 : 2])

