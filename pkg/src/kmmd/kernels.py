"""Kernel evaluation, Gram blocks, centering and the median-heuristic bandwidth."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist, pdist, squareform

FAMILIES = ("gaussian", "laplace", "linear", "precomputed")
BLOCK_ENTRIES = 1 << 15


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family plus parameters.

    ``bound_K`` is the supremum of the kernel; the bound-based tests need it.
    Gaussian and Laplace kernels are bounded by 1, the linear kernel has no
    bound, and a precomputed matrix may declare one.
    """

    family: str
    sigma: float | None = None
    bound_K: float | None = None
    matrix: np.ndarray | None = field(default=None, repr=False, compare=False)
    split: int | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}")
        if self.family in ("gaussian", "laplace"):
            if self.sigma is None or not np.isfinite(self.sigma) or self.sigma <= 0:
                raise ValueError(f"{self.family} kernel needs sigma > 0, got {self.sigma}")
            if self.bound_K is None:
                object.__setattr__(self, "bound_K", 1.0)
            elif self.bound_K != 1.0:
                raise ValueError(f"{self.family} kernel is bounded by 1")
        elif self.family == "linear":
            if self.bound_K is not None:
                raise ValueError("linear kernel is unbounded")
        else:
            if self.matrix is None or self.split is None:
                raise ValueError("precomputed kernel needs a matrix and a split index")
            mat = np.asarray(self.matrix, dtype=float)
            if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
                raise ValueError(f"precomputed Gram must be square, got shape {mat.shape}")
            if not 1 <= self.split < mat.shape[0]:
                raise ValueError(f"split {self.split} outside 1..{mat.shape[0] - 1}")
            if self.bound_K is not None:
                if self.bound_K < 0:
                    raise ValueError("bound_K must be nonnegative")
                if mat.min() < 0 or mat.max() > self.bound_K:
                    raise ValueError("precomputed Gram entries exceed the declared bound_K")
            object.__setattr__(self, "matrix", mat)

    @classmethod
    def gaussian(cls, sigma: float) -> KernelSpec:
        return cls("gaussian", sigma=float(sigma))

    @classmethod
    def laplace(cls, sigma: float) -> KernelSpec:
        return cls("laplace", sigma=float(sigma))

    @classmethod
    def linear(cls) -> KernelSpec:
        return cls("linear")

    @classmethod
    def precomputed(cls, matrix, split: int, bound_K: float | None = None) -> KernelSpec:
        return cls("precomputed", matrix=np.asarray(matrix, dtype=float), split=int(split),
                   bound_K=bound_K)

    def describe(self) -> dict:
        return {"family": self.family, "sigma": self.sigma, "bound_K": self.bound_K}


@dataclass(frozen=True)
class GramBlocks:
    """Kernel matrix on the pooled sample ``[X; Y]``, viewed as its three blocks.

    The pooled matrix is stored once; ``kxx``, ``kyy`` and ``kxy`` are views.
    """

    full: np.ndarray
    m: int

    def __post_init__(self):
        full = self.full
        if full.ndim != 2 or full.shape[0] != full.shape[1]:
            raise ValueError(f"pooled Gram must be square, got shape {full.shape}")
        if not 1 <= self.m < full.shape[0]:
            raise ValueError(f"split {self.m} outside 1..{full.shape[0] - 1}")

    @classmethod
    def from_blocks(cls, kxx, kyy, kxy) -> GramBlocks:
        kxx, kyy, kxy = (np.asarray(a, dtype=float) for a in (kxx, kyy, kxy))
        if kxy.shape != (kxx.shape[0], kyy.shape[0]):
            raise ValueError("kxy shape does not match kxx/kyy")
        return cls(np.block([[kxx, kxy], [kxy.T, kyy]]), kxx.shape[0])

    @property
    def n(self) -> int:
        return self.full.shape[0] - self.m

    @property
    def kxx(self) -> np.ndarray:
        return self.full[: self.m, : self.m]

    @property
    def kyy(self) -> np.ndarray:
        return self.full[self.m :, self.m :]

    @property
    def kxy(self) -> np.ndarray:
        return self.full[: self.m, self.m :]

    def sums(self) -> BlockSums:
        kxy = self.kxy
        txy = float(np.trace(kxy)) if self.m == self.n else float("nan")
        return BlockSums(float(self.kxx.sum()), float(self.kyy.sum()), float(kxy.sum()),
                         float(np.trace(self.kxx)), float(np.trace(self.kyy)), txy, self.m, self.n)


def as_sample(a) -> np.ndarray:
    """Coerce to a float ``(m, d)`` array; 1-D input is read as m scalar points."""
    arr = np.asarray(a, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ValueError(f"sample must be 1-D or 2-D, got {arr.ndim}-D")
    if arr.shape[0] < 1:
        raise ValueError("sample is empty")
    return arr


def _from_sqdist(spec: KernelSpec, d2):
    return np.exp(-d2 / (2.0 * spec.sigma**2))


def eval_kernel(spec: KernelSpec, x, y) -> float:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if spec.family == "precomputed":
        raise ValueError("precomputed kernel has no pointwise evaluation")
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
    if spec.family == "gaussian":
        return float(_from_sqdist(spec, np.sum((x - y) ** 2)))
    if spec.family == "laplace":
        return float(np.exp(-np.sum(np.abs(x - y)) / spec.sigma))
    return float(np.dot(x, y))


def gram_matrix(spec: KernelSpec, Z) -> np.ndarray:
    """Symmetric kernel matrix on one sample."""
    Z = as_sample(Z)
    # pdist fills one triangle and squareform mirrors it, so symmetry is exact
    if spec.family == "gaussian":
        K = squareform(pdist(Z, "sqeuclidean"))
        np.multiply(K, -1.0 / (2.0 * spec.sigma**2), out=K)
        return np.exp(K, out=K)
    if spec.family == "laplace":
        K = squareform(pdist(Z, "cityblock"))
        np.multiply(K, -1.0 / spec.sigma, out=K)
        return np.exp(K, out=K)
    if spec.family == "precomputed":
        raise ValueError("precomputed kernel has no pointwise evaluation")
    K = np.triu(Z @ Z.T)
    K += np.triu(K, 1).T
    return K


def cross_gram(spec: KernelSpec, A, B) -> np.ndarray:
    """Rectangular kernel matrix ``k(a_i, b_j)``."""
    A, B = as_sample(A), as_sample(B)
    if A.shape[1] != B.shape[1]:
        raise ValueError(f"dimension mismatch: {A.shape[1]} vs {B.shape[1]}")
    # in place: one allocation per call
    if spec.family == "gaussian":
        K = cdist(A, B, "sqeuclidean")
        np.multiply(K, -1.0 / (2.0 * spec.sigma**2), out=K)
        return np.exp(K, out=K)
    if spec.family == "laplace":
        K = cdist(A, B, "cityblock")
        np.multiply(K, -1.0 / spec.sigma, out=K)
        return np.exp(K, out=K)
    if spec.family == "linear":
        return A @ B.T
    raise ValueError("precomputed kernel has no pointwise evaluation")


def gram_blocks(spec: KernelSpec, X=None, Y=None) -> GramBlocks:
    """Gram blocks for the sample pair; a precomputed spec carries its own matrix."""
    if spec.family == "precomputed":
        if X is not None and Y is not None:
            m, n = len(X), len(Y)
            if m + n != spec.matrix.shape[0] or m != spec.split:
                raise ValueError(
                    f"precomputed Gram is {spec.matrix.shape[0]}x{spec.matrix.shape[0]} "
                    f"with split {spec.split}, samples have m={m}, n={n}")
        return GramBlocks(spec.matrix, spec.split)
    X, Y = as_sample(X), as_sample(Y)
    if X.shape[1] != Y.shape[1]:
        raise ValueError(f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")
    return GramBlocks(gram_matrix(spec, np.vstack([X, Y])), X.shape[0])


@dataclass(frozen=True)
class BlockSums:
    """Sums and traces of the three Gram blocks; all the quadratic MMD statistics need."""

    sxx: float
    syy: float
    sxy: float
    txx: float
    tyy: float
    txy: float
    m: int
    n: int


def _block_total(spec: KernelSpec, A, B, rows: int, paired_trace: bool):
    total, trace = 0.0, 0.0
    for start in range(0, A.shape[0], rows):
        K = cross_gram(spec, A[start : start + rows], B)
        total += float(K.sum())
        if paired_trace:
            idx = np.arange(K.shape[0])
            trace += float(K[idx, start + idx].sum())
    return total, trace


def block_sums(spec: KernelSpec, X, Y, block_entries: int = BLOCK_ENTRIES) -> BlockSums:
    """Block sums computed one row slab at a time, O(m + n) extra memory.

    Slabs of about ``block_entries`` kernel values stay cache resident, so the
    cost stays proportional to the number of kernel evaluations as m grows.
    """
    if spec.family == "precomputed":
        return GramBlocks(spec.matrix, spec.split).sums()
    X, Y = as_sample(X), as_sample(Y)
    if X.shape[1] != Y.shape[1]:
        raise ValueError(f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")
    m, n = X.shape[0], Y.shape[0]
    rows = max(1, block_entries // max(m, n))
    sxx, txx = _block_total(spec, X, X, rows, True)
    syy, tyy = _block_total(spec, Y, Y, rows, True)
    sxy, txy = _block_total(spec, X, Y, rows, m == n)
    return BlockSums(sxx, syy, sxy, txx, tyy, txy if m == n else float("nan"), m, n)


def median_heuristic(Z) -> float:
    """Lower median of the strictly positive pairwise Euclidean distances in ``Z``."""
    Z = as_sample(Z)
    if Z.shape[0] < 2:
        raise ValueError("median heuristic needs at least 2 points")
    d = pdist(Z)
    d = d[d > 0]
    if d.size == 0:
        raise ValueError("degenerate sample: all pairwise distances are zero")
    k = (d.size - 1) // 2
    return float(np.partition(d, k)[k])


def center_gram(K) -> np.ndarray:
    K = np.asarray(K, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {K.shape}")
    row = K.mean(axis=1, keepdims=True)
    col = K.mean(axis=0, keepdims=True)
    return K - row - col + K.mean()
