"""Seeded synthetic samplers for the benchmark and experiment scripts."""
from __future__ import annotations

import numpy as np

SCENARIOS = ("mean-shift", "var-shift")


def scenario_pair(scenario: str, m: int, d: int, shift: float, rng: np.random.Generator):
    """Draw ``X ~ N(0, I_d)`` and a shifted ``Y``, each with ``m`` rows.

    ``mean-shift``: the mean of ``Y`` sits at Euclidean distance ``shift`` from 0.
    ``var-shift``: ``Y ~ N(0, shift^2 I_d)``; ``shift = 1`` is the null case.
    """
    X = rng.standard_normal((m, d))
    if scenario == "mean-shift":
        Y = rng.standard_normal((m, d)) + shift / np.sqrt(d)
    elif scenario == "var-shift":
        Y = shift * rng.standard_normal((m, d))
    else:
        raise ValueError(f"unknown scenario {scenario!r}; choose from {SCENARIOS}")
    return X, Y


def gauss_vs_laplace(m: int, rng: np.random.Generator):
    """Zero-mean, unit-variance Gaussian and Laplace samples in 1-D."""
    return rng.standard_normal(m), rng.laplace(0.0, 1.0 / np.sqrt(2.0), m)


def attribute_table(n_rows: int, rng: np.random.Generator) -> np.ndarray:
    """Six 1-D attributes with pairwise-distinct distributions, one per column."""
    return np.column_stack([
        rng.standard_normal(n_rows),
        rng.normal(5.0, 1.0, n_rows),
        rng.normal(0.0, 3.0, n_rows),
        rng.uniform(-8.0, -4.0, n_rows),
        rng.exponential(1.0, n_rows),
        rng.laplace(10.0, 1.0, n_rows),
    ])
