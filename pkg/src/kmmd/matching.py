"""Attribute matching with MMD costs and the Hungarian method."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import estimators as est
from .kernels import as_sample, gram_blocks
from .two_sample import TestConfig, resolve_kernel


@dataclass(frozen=True)
class Assignment:
    """``perm[i]`` is the column matched to row ``i``."""

    perm: tuple[int, ...]
    total_cost: float


def _pair_cost(a, b, cfg: TestConfig, statistic: str) -> float:
    a, b = as_sample(a), as_sample(b)
    spec = resolve_kernel(cfg, a, b)
    G = gram_blocks(spec, a, b)
    if statistic == "mmd_b":
        return est.mmd_biased(G).value
    if statistic == "mmd_u_sq":
        return max(est.mmd_u_squared(G).value, 0.0)
    raise ValueError(f"unknown cost statistic {statistic!r}")


def cost_matrix(A, B, cfg: TestConfig | None = None, statistic: str = "mmd_u_sq") -> np.ndarray:
    """``C[i, j]`` is the MMD statistic between attribute ``A[i]`` and attribute ``B[j]``.

    Negative MMD^2_u values are floored at 0.
    """
    cfg = cfg or TestConfig()
    if len(A) != len(B):
        raise ValueError(f"attribute count mismatch: {len(A)} vs {len(B)}")
    if len(A) < 1:
        raise ValueError("need at least one attribute")
    n = len(A)
    C = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            C[i, j] = _pair_cost(A[i], B[j], cfg, statistic)
    return C


def hungarian(C) -> Assignment:
    """Exact minimum-cost assignment on a square matrix, O(n^3).

    Shortest augmenting paths with row/column potentials (Kuhn-Munkres).
    Ties are broken towards the lowest column index.
    """
    C = np.asarray(C, dtype=float)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise ValueError(f"cost matrix must be square, got shape {C.shape}")
    if not np.all(np.isfinite(C)):
        raise ValueError("cost matrix has non-finite entries")
    n = C.shape[0]
    # 1-based arrays; column 0 is a virtual source
    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    match = np.zeros(n + 1, dtype=int)  # match[j] = row assigned to column j
    way = np.zeros(n + 1, dtype=int)
    for i in range(1, n + 1):
        match[0] = i
        j0 = 0
        minv = np.full(n + 1, np.inf)
        used = np.zeros(n + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = match[j0]
            delta, j1 = np.inf, 0
            for j in range(1, n + 1):
                if used[j]:
                    continue
                cur = C[i0 - 1, j - 1] - u[i0] - v[j]
                if cur < minv[j]:
                    minv[j] = cur
                    way[j] = j0
                if minv[j] < delta:
                    delta, j1 = minv[j], j
            for j in range(n + 1):
                if used[j]:
                    u[match[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if match[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            match[j0] = match[j1]
            j0 = j1
    perm = [0] * n
    for j in range(1, n + 1):
        perm[match[j] - 1] = j - 1
    total = float(sum(C[i, perm[i]] for i in range(n)))
    return Assignment(tuple(perm), total)


def match_attributes(A, B, cfg: TestConfig | None = None, statistic: str = "mmd_u_sq") -> Assignment:
    return hungarian(cost_matrix(A, B, cfg, statistic))


def delta_semimetric(A, B, cfg: TestConfig | None = None) -> float:
    """Optimal-coordinate-matching distance: min over permutations of summed MMD_b."""
    return hungarian(cost_matrix(A, B, cfg, statistic="mmd_b")).total_cost


def split_half(table, seed: int | None = None):
    """Split the rows of a table into two equal halves.

    Without a seed rows alternate (even rows to A, odd rows to B); with a seed
    the rows are shuffled first.  An odd final row is dropped.
    """
    T = np.asarray(table, dtype=float)
    if T.ndim == 1:
        T = T[:, None]
    if seed is not None:
        T = T[np.random.default_rng(seed).permutation(T.shape[0])]
    half = T.shape[0] // 2
    return T[0 : 2 * half : 2], T[1 : 2 * half : 2]


def columns(T) -> list:
    """Attributes of a table as a list of 1-D samples."""
    T = np.asarray(T, dtype=float)
    return [T[:, j] for j in range(T.shape[1])]
