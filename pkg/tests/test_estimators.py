import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kmmd.estimators import (
    LinearMMDAccumulator,
    NumericalInconsistencyError,
    h_kernel,
    h_matrix,
    linear_h_values,
    mmd_biased,
    mmd_linear,
    mmd_u_squared,
    nonneg_corrected,
    sigma_l_squared_hat,
)
from kmmd.kernels import GramBlocks, KernelSpec, gram_blocks

import oracles

GAUSS = KernelSpec.gaussian(1.0)
LIN = KernelSpec.linear()
SPECS = [KernelSpec.gaussian(0.8), KernelSpec.laplace(1.5), KernelSpec.linear()]


def test_mmd_biased_identical_lists():
    X = np.random.default_rng(0).standard_normal((8, 2))
    assert mmd_biased(gram_blocks(GAUSS, X, X)).value == pytest.approx(0.0, abs=1e-7)


def test_mmd_biased_two_points():
    # mpmath: sqrt(2 - 2 exp(-2))
    v = mmd_biased(gram_blocks(GAUSS, [0.0], [2.0])).value
    assert v == pytest.approx(1.31503970796579926551192449613, rel=1e-14)


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: s.family)
def test_mmd_biased_matches_naive(spec):
    rng = np.random.default_rng(5)
    X, Y = rng.standard_normal((10, 2)), rng.standard_normal((10, 2)) + 0.3
    want = oracles.mmd_b(spec.family, spec.sigma, X, Y)
    assert mmd_biased(gram_blocks(spec, X, Y)).value == pytest.approx(want, rel=1e-12)


def test_mmd_biased_unequal_sizes():
    rng = np.random.default_rng(6)
    X, Y = rng.standard_normal((7, 1)), rng.standard_normal((12, 1))
    want = oracles.mmd_b("gaussian", 1.0, X, Y)
    assert mmd_biased(gram_blocks(GAUSS, X, Y)).value == pytest.approx(want, rel=1e-12)


def test_mmd_biased_negative_radicand_is_an_error():
    G = GramBlocks.from_blocks([[0.0]], [[0.0]], [[1.0]])
    with pytest.raises(NumericalInconsistencyError):
        mmd_biased(G)


def test_h_kernel_cases():
    X = np.array([[0.0], [1.0]])
    assert h_kernel(gram_blocks(GAUSS, X, X), 0, 1) == 0.0
    G = gram_blocks(LIN, X, [[2.0], [3.0]])
    assert h_kernel(G, 0, 1) == 4.0
    with pytest.raises(ValueError, match="diagonal"):
        h_kernel(G, 1, 1)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_h_kernel_symmetric(seed):
    rng = np.random.default_rng(seed)
    G = gram_blocks(GAUSS, rng.standard_normal((6, 2)), rng.standard_normal((6, 2)))
    H = h_matrix(G)
    assert np.array_equal(H, H.T)
    assert h_kernel(G, 1, 4) == h_kernel(G, 4, 1) == H[1, 4]


def test_mmd_u_squared_examples():
    X = np.random.default_rng(1).standard_normal((9, 3))
    assert mmd_u_squared(gram_blocks(GAUSS, X, X)).value == pytest.approx(0.0, abs=1e-15)
    G = gram_blocks(LIN, [[0.0], [1.0]], [[2.0], [3.0]])
    assert mmd_u_squared(G).value == 4.0


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: s.family)
def test_mmd_u_squared_matches_naive(spec):
    rng = np.random.default_rng(12)
    X, Y = rng.standard_normal((12, 2)), 1.2 * rng.standard_normal((12, 2))
    want = oracles.mmd_u_sq(spec.family, spec.sigma, X, Y)
    assert mmd_u_squared(gram_blocks(spec, X, Y)).value == pytest.approx(want, rel=1e-12)


def test_mmd_u_squared_rejects_unpaired_and_tiny():
    with pytest.raises(ValueError, match="paired"):
        mmd_u_squared(gram_blocks(GAUSS, np.zeros((3, 1)), np.ones((4, 1))))
    with pytest.raises(ValueError, match="m >= 2"):
        mmd_u_squared(gram_blocks(GAUSS, [[0.0]], [[1.0]]))


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_quadratic_statistics_exchangeable(seed):
    rng = np.random.default_rng(seed)
    X, Y = rng.standard_normal((8, 2)), rng.standard_normal((8, 2))
    G = gram_blocks(GAUSS, X, Y)
    Gp = gram_blocks(GAUSS, X[rng.permutation(8)], Y[rng.permutation(8)])
    assert mmd_biased(Gp).value == pytest.approx(mmd_biased(G).value, rel=1e-12, abs=1e-15)
    # MMD^2_u drops the k(x_i, y_i) terms, so only reordering whole pairs leaves it unchanged
    pi = rng.permutation(8)
    Gz = gram_blocks(GAUSS, X[pi], Y[pi])
    assert mmd_u_squared(Gz).value == pytest.approx(mmd_u_squared(G).value, rel=1e-12, abs=1e-15)


def test_mmd_linear_examples():
    X = np.random.default_rng(3).standard_normal((10, 2))
    assert mmd_linear(X, X, GAUSS).value == 0.0
    assert mmd_linear([0.0, 1.0, 2.0, 3.0], [4.0, 5.0, 6.0, 7.0], LIN).value == 16.0


def test_mmd_linear_ignores_odd_trailing_point():
    a = mmd_linear([0.0, 1.0, 2.0, 3.0, 9.0], [4.0, 5.0, 6.0, 7.0, -9.0], LIN).value
    assert a == 16.0


def test_mmd_linear_errors():
    with pytest.raises(ValueError, match="m >= 2"):
        mmd_linear([0.0], [1.0], GAUSS)
    with pytest.raises(ValueError, match="paired"):
        mmd_linear([0.0, 1.0], [1.0, 2.0, 3.0], GAUSS)


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: s.family)
def test_mmd_linear_chunking_matches_direct_mean(spec):
    rng = np.random.default_rng(4)
    X, Y = rng.standard_normal((1301, 2)), rng.standard_normal((1301, 2))
    h = [oracles.h(spec.family, spec.sigma, X, Y, 2 * i, 2 * i + 1) for i in range(650)]
    stat, acc = mmd_linear(X, Y, spec, return_accumulator=True)
    assert stat.value == pytest.approx(np.mean(h), rel=1e-10, abs=1e-14)
    assert acc.sigma_l_squared == pytest.approx(sigma_l_squared_hat(h), rel=1e-9)
    np.testing.assert_allclose(linear_h_values(X, Y, spec), h, rtol=1e-12, atol=1e-14)


def test_accumulator_streams_one_pair_at_a_time():
    rng = np.random.default_rng(8)
    X, Y = rng.standard_normal((40, 1)), rng.standard_normal((40, 1))
    acc = LinearMMDAccumulator(GAUSS)
    for i in range(0, 40, 2):
        acc.update(X[i], Y[i], X[i + 1], Y[i + 1])
    stat, batch = mmd_linear(X, Y, GAUSS, return_accumulator=True)
    assert acc.count == 20
    assert acc.mean == pytest.approx(stat.value, rel=1e-12)
    assert acc.sigma_l_squared == pytest.approx(batch.sigma_l_squared, rel=1e-10)


@pytest.mark.slow
def test_mmd_linear_unbiased_against_quadratic():
    # both estimate the same MMD^2, so the mean difference over fresh draws is 0
    rng = np.random.default_rng(2024)
    R, m = 2000, 50
    diff = np.empty(R)
    for r in range(R):
        X, Y = rng.standard_normal((m, 1)), rng.normal(0.5, 1.0, (m, 1))
        diff[r] = mmd_linear(X, Y, GAUSS).value - mmd_u_squared(gram_blocks(GAUSS, X, Y)).value
    se = diff.std(ddof=1) / np.sqrt(R)
    assert abs(diff.mean()) <= 3 * se


def test_sigma_l_squared_hat():
    assert sigma_l_squared_hat([0.7, 0.7, 0.7]) == pytest.approx(0.0, abs=1e-30)
    assert sigma_l_squared_hat([0.5] * 9) == 0.0
    assert sigma_l_squared_hat([0.0, 2.0]) == 2.0
    with pytest.raises(ValueError):
        sigma_l_squared_hat([1.0])


@given(st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=50))
def test_sigma_l_squared_hat_nonnegative(h):
    assert sigma_l_squared_hat(h) >= 0.0


def test_nonneg_corrected_identical_is_zero():
    X = np.random.default_rng(9).standard_normal((6, 2))
    G = gram_blocks(GAUSS, X, X)
    assert nonneg_corrected(G, mmd_u_squared(G).value) == pytest.approx(0.0, abs=1e-15)


def test_nonneg_corrected_toy_expansion():
    # m = 2, 1-D gaussian sigma = 1: expand every term by hand with the oracle kernel
    X, Y = [[0.0], [1.0]], [[0.5], [3.0]]
    k = lambda a, b: oracles.kernel("gaussian", 1.0, a, b)
    off = (k(X[0], X[1]) + k(Y[0], Y[1]) - k(X[0], Y[1]) - k(X[1], Y[0])) * 2 / 2
    diag = sum(k(X[i], X[i]) + k(Y[i], Y[i]) - 2 * k(X[i], Y[i]) for i in range(2)) / 2
    G = gram_blocks(GAUSS, X, Y)
    assert nonneg_corrected(G, mmd_u_squared(G).value) == pytest.approx(off + diag, rel=1e-14)


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), m=st.integers(2, 20), spec=st.sampled_from(SPECS))
def test_nonneg_corrected_is_nonnegative(seed, m, spec):
    rng = np.random.default_rng(seed)
    G = gram_blocks(spec, rng.standard_normal((m, 2)), rng.standard_normal((m, 2)) * 0.5)
    assert nonneg_corrected(G, mmd_u_squared(G).value) >= -1e-12


@pytest.mark.parametrize("m", [50, 200])
def test_corrected_and_biased_squared_converge(m):
    rng = np.random.default_rng(m)
    X, Y = rng.standard_normal((m, 1)), rng.normal(0.7, 1.0, (m, 1))
    G = gram_blocks(GAUSS, X, Y)
    corrected = nonneg_corrected(G, mmd_u_squared(G).value)
    assert corrected >= 0.0
    assert abs(corrected - mmd_biased(G).value ** 2) <= 5.0 / m
