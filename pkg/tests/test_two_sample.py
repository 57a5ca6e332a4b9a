from dataclasses import replace

import numpy as np
import pytest

from kmmd.data import gauss_vs_laplace
from kmmd.kernels import KernelSpec, gram_blocks
from kmmd.two_sample import METHODS, TestConfig, run_two_sample_test, witness

GAUSS = KernelSpec.gaussian(1.0)


@pytest.mark.parametrize("method", METHODS)
def test_identical_samples_never_reject(method):
    X = np.random.default_rng(0).standard_normal((40, 2))
    res = run_two_sample_test(X, X.copy(), TestConfig(method=method, seed=3))
    assert not res.reject
    assert res.statistic.value <= res.threshold
    assert (res.p_value is not None) == (method in ("bootstrap", "spectral", "linear", "pearson"))


@pytest.mark.parametrize("method", METHODS)
def test_result_is_deterministic(method):
    rng = np.random.default_rng(1)
    X, Y = rng.standard_normal((30, 1)), rng.normal(0.3, 1.0, (30, 1))
    cfg = TestConfig(method=method, seed=77)
    a, b = run_two_sample_test(X, Y, cfg), run_two_sample_test(X, Y, cfg)
    assert replace(a, runtime_ms=0.0) == replace(b, runtime_ms=0.0)
    assert a.reject == (a.statistic.value > a.threshold)


def test_bootstrap_p_value_range():
    rng = np.random.default_rng(2)
    for B in (1, 5, 150):
        X, Y = rng.standard_normal((20, 1)), rng.normal(2.0, 1.0, (20, 1))
        res = run_two_sample_test(X, Y, TestConfig(method="bootstrap", bootstrap_B=B))
        assert 1 / (B + 1) <= res.p_value <= 1


@pytest.mark.slow
def test_bootstrap_power_large_shift():
    ss = np.random.SeedSequence(42)
    hits = 0
    for r, child in enumerate(ss.spawn(100)):
        rng = np.random.default_rng(child)
        X, Y = rng.standard_normal(100), rng.normal(3.0, 1.0, 100)
        hits += run_two_sample_test(X, Y, TestConfig(method="bootstrap", seed=r)).reject
    assert hits >= 99


def test_median_auto_uses_pooled_sample():
    X, Y = [0.0, 1.0], [3.0, 7.0]
    res = run_two_sample_test(X, Y, TestConfig(method="biased_bound"))
    # pooled distances {1, 3, 7, 2, 6, 4}: lower median 3
    assert res.kernel == KernelSpec.gaussian(3.0)


def test_unequal_sizes():
    rng = np.random.default_rng(3)
    X, Y = rng.standard_normal((25, 1)), rng.standard_normal((40, 1))
    assert run_two_sample_test(X, Y, TestConfig(method="bootstrap", bootstrap_statistic="mmd_b")).n == 40
    assert run_two_sample_test(X, Y, TestConfig(method="biased_bound")).m == 25
    for method in ("unbiased_hoeffding", "pearson", "spectral", "linear"):
        with pytest.raises(ValueError, match="paired"):
            run_two_sample_test(X, Y, TestConfig(method=method))
    with pytest.raises(ValueError, match="paired"):
        run_two_sample_test(X, Y, TestConfig(method="bootstrap"))


def test_bound_methods_need_bounded_kernel():
    X = np.random.default_rng(4).standard_normal((10, 1))
    with pytest.raises(ValueError, match="bounded kernel"):
        run_two_sample_test(X, X + 1, TestConfig(method="biased_bound", kernel=KernelSpec.linear()))


def test_precomputed_kernel_runs_without_samples():
    rng = np.random.default_rng(5)
    X, Y = rng.standard_normal((15, 1)), rng.normal(4.0, 1.0, (15, 1))
    G = gram_blocks(GAUSS, X, Y)
    pre = KernelSpec.precomputed(G.full, 15, bound_K=1.0)
    for method in ("biased_bound", "bootstrap", "pearson", "spectral"):
        direct = run_two_sample_test(X, Y, TestConfig(method=method, kernel=GAUSS))
        viagram = run_two_sample_test(None, None, TestConfig(method=method, kernel=pre))
        assert viagram.statistic.value == pytest.approx(direct.statistic.value, rel=1e-12)
        assert viagram.reject == direct.reject


def test_config_validation():
    with pytest.raises(ValueError):
        TestConfig(alpha=1.5)
    with pytest.raises(ValueError):
        TestConfig(method="t-test")
    with pytest.raises(ValueError):
        TestConfig(bootstrap_B=0)
    with pytest.raises(ValueError):
        TestConfig(kernel="auto")


def test_witness_examples():
    X = np.random.default_rng(6).standard_normal((10, 2))
    T = np.random.default_rng(7).standard_normal((5, 2))
    assert np.all(witness(X, X, GAUSS, T) == 0.0)
    # mpmath: 1 - exp(-1)
    w = witness([[0.0, 0.0]], [[1.0, 1.0]], GAUSS, [[0.0, 0.0]])
    assert w[0] == pytest.approx(0.632120558828557678404476229839, rel=1e-14)


def test_witness_antisymmetric():
    rng = np.random.default_rng(8)
    X, Y, T = rng.standard_normal((12, 1)), rng.standard_normal((9, 1)), rng.standard_normal((20, 1))
    assert np.array_equal(witness(X, Y, GAUSS, T), -witness(Y, X, GAUSS, T))


def test_witness_dimension_mismatch():
    with pytest.raises(ValueError, match="dimension"):
        witness(np.zeros((3, 2)), np.zeros((3, 2)), GAUSS, np.zeros((1, 3)))


def test_witness_gauss_vs_laplace_sign_pattern():
    gauss, laplace = gauss_vs_laplace(20_000, np.random.default_rng(2008))
    T = np.array([0.0, -1.3, 1.3, -4.0, 4.0])
    # X = Laplace sample, so positive means the Laplace density is larger
    w = witness(laplace, gauss, KernelSpec.gaussian(0.5), T)
    assert w[0] > 0
    assert w[1] < 0 and w[2] < 0
    assert w[3] > 0 and w[4] > 0
