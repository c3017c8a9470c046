"""Benchmark harness: generator correctness, metric hand values, seeded
replication aggregation."""

import numpy as np
import pytest

from sparsevine import simbench
from sparsevine.simbench import DGPConfig, gen_dgp1, gen_dgp2, pinball, tpr_fdr

from conftest import philox


def stack(sample):
    return np.vstack([sample.train, sample.test])


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------

def test_dgp1_labels_and_shapes():
    s = gen_dgp1(DGPConfig(dgp=1, p=10, seed=3))
    assert s.train.shape == (300, 11) and s.test.shape == (150, 11)
    assert s.relevant == frozenset(range(1, 6))
    assert s.irrelevant == frozenset(range(6, 11))
    assert len(s.irrelevant) == 5  # 50% of variables irrelevant in case 1
    assert s.redundant == frozenset()


def test_dgp1_seeded_determinism():
    a = gen_dgp1(DGPConfig(dgp=1, p=10, seed=42))
    b = gen_dgp1(DGPConfig(dgp=1, p=10, seed=42))
    assert np.array_equal(a.train, b.train) and np.array_equal(a.test, b.test)
    c = gen_dgp1(DGPConfig(dgp=1, p=10, seed=43))
    assert not np.array_equal(a.train, c.train)


def test_dgp1_response_formula_noise_free():
    cfg = DGPConfig(dgp=1, p=6, sigma=0.0, n=450, seed=9)
    s = gen_dgp1(cfg)
    data = stack(s)
    y, X = data[:, 0], data[:, 1:]
    expected = X[:, 0] * X[:, 1] ** 2 * np.sqrt(np.abs(X[:, 2]) + 0.1) + np.exp(
        0.4 * X[:, 3] * X[:, 4]
    )
    assert np.allclose(y, expected, atol=1e-12)


def test_dgp1_irrelevant_block_uncorrelated_with_response():
    cfg = DGPConfig(dgp=1, p=6, sigma=0.0, n=2000, n_train=1500, n_test=500, seed=5)
    data = stack(gen_dgp1(cfg))
    corr = np.corrcoef(data[:, 0], data[:, 6])[0, 1]
    assert abs(corr) < 0.1


def test_dgp2_labels():
    s = gen_dgp2(DGPConfig(dgp=2, p=20, seed=1))
    assert s.relevant == frozenset(range(1, 11))
    assert s.redundant == frozenset(range(11, 21))
    assert s.irrelevant == frozenset()
    big = gen_dgp2(DGPConfig(dgp=2, p=1000, n=100, n_train=80, n_test=20, seed=1))
    assert len(big.redundant) == 990  # 99% redundant in case 4


def test_dgp2_toeplitz_correlation():
    cfg = DGPConfig(dgp=2, p=12, n=5000, n_train=4000, n_test=1000, seed=7)
    data = stack(gen_dgp2(cfg))
    corr = np.corrcoef(data[:, 1], data[:, 2])[0, 1]
    assert 0.70 <= corr <= 0.80


def test_dgp2_response_formula_noise_free():
    cfg = DGPConfig(dgp=2, p=10, sigma=0.0, seed=11)
    data = stack(gen_dgp2(cfg))
    y, X = data[:, 0], data[:, 1:]
    expected = (
        np.sqrt(np.abs(5 * X[:, 0] - 2 * X[:, 8] + 0.5))
        + X[:, 7] * (-4 * X[:, 2] + 1)
        + np.exp(X[:, 5])
        + 2 * X[:, 9] ** 3 + X[:, 3] ** 3
        + (X[:, 6] + 1) * np.log(np.abs(X[:, 1] + X[:, 4]) + 0.01)
    )
    assert np.allclose(y, expected, atol=1e-12)


def test_cholesky_factor_reconstructs_toeplitz():
    L = simbench._toeplitz_cholesky(50, 0.75)
    idx = np.arange(50)
    target = 0.75 ** np.abs(idx[:, None] - idx[None, :])
    assert np.max(np.abs(L @ L.T - target)) < 1e-12


def test_generator_moment_check():
    cfg = DGPConfig(dgp=2, p=15, n=5000, n_train=4000, n_test=1000, seed=13)
    data = stack(gen_dgp2(cfg))
    for j in range(1, 16):
        col = data[:, j]
        assert abs(col.mean()) < 4.0 / np.sqrt(col.size) * col.std()


def test_generator_preconditions():
    with pytest.raises(ValueError):
        gen_dgp1(DGPConfig(dgp=1, p=4))
    with pytest.raises(ValueError):
        gen_dgp2(DGPConfig(dgp=2, p=9))
    with pytest.raises(ValueError):
        DGPConfig(dgp=3)
    with pytest.raises(ValueError):
        DGPConfig(dgp=1, sigma=0.3)
    with pytest.raises(ValueError):
        DGPConfig(dgp=1, n=100, n_train=90, n_test=20)


# ---------------------------------------------------------------------------
# metrics
# ---------------------------------------------------------------------------

def test_tpr_fdr_hand_case():
    s = gen_dgp1(DGPConfig(dgp=1, p=10, seed=2))
    tpr, fdr = tpr_fdr({1, 2, 6}, s)
    assert tpr == pytest.approx(0.4)
    assert fdr == pytest.approx(1.0 / 3.0)


def test_tpr_fdr_edge_cases():
    s = gen_dgp1(DGPConfig(dgp=1, p=10, seed=2))
    assert tpr_fdr(set(s.relevant), s) == (1.0, 0.0)
    assert tpr_fdr(set(), s) == (0.0, 0.0)
    # redundant variables are not false discoveries
    s2 = gen_dgp2(DGPConfig(dgp=2, p=20, seed=2))
    assert tpr_fdr({11, 12}, s2)[1] == 0.0


def test_tpr_fdr_bounds_random_sets():
    s = gen_dgp1(DGPConfig(dgp=1, p=10, seed=4))
    rng = philox(8)
    for _ in range(25):
        chosen = set(rng.choice(np.arange(1, 11), size=rng.integers(0, 10), replace=False))
        tpr, fdr = tpr_fdr(chosen, s)
        assert 0.0 <= tpr <= 1.0 and 0.0 <= fdr <= 1.0


def test_pinball_hand_values():
    assert pinball([1.0, 2.0], [1.0, 2.0], 0.5) == 0.0
    assert pinball([2.0], [1.0], 0.95) == pytest.approx(0.95)
    assert pinball([1.0], [2.0], 0.95) == pytest.approx(0.05)


def test_pinball_validation():
    with pytest.raises(ValueError):
        pinball([1.0, 2.0], [1.0], 0.5)
    with pytest.raises(ValueError):
        pinball([1.0], [1.0], 1.5)


# ---------------------------------------------------------------------------
# replication runner
# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def tiny_benchmark():
    cfg = DGPConfig(dgp=1, p=5, n=80, n_train=60, n_test=20, seed=900)
    return cfg, simbench.run_benchmark(cfg, methods=("res",), replications=3)


def test_benchmark_determinism(tiny_benchmark):
    cfg, first = tiny_benchmark
    second = simbench.run_benchmark(cfg, methods=("res",), replications=3)
    strip = lambda rows: [r for r in rows if r["measure"] != "time"]
    assert strip(first.rows) == strip(second.rows)
    assert first.failures == second.failures == 0


def test_benchmark_aggregation_identity(tiny_benchmark):
    _, result = tiny_benchmark
    values = [r["tpr"] for r in result.replications if not r["failed"]]
    row = next(r for r in result.rows if r["measure"] == "tpr")
    assert row["mean"] == pytest.approx(np.mean(values))
    assert row["se"] == pytest.approx(np.std(values, ddof=1) / np.sqrt(len(values)))


def test_benchmark_rows_shape(tiny_benchmark):
    _, result = tiny_benchmark
    measures = {r["measure"] for r in result.rows}
    assert {"tpr", "fdr", "chosen", "time", "pinball_0.05", "pinball_0.5", "pinball_0.95"} <= measures
    assert all(r["method"] == "res" for r in result.rows)
    payload = result.to_json()
    assert '"rows"' in payload and '"replications"' in payload


def test_benchmark_per_replication_seeds(tiny_benchmark):
    _, result = tiny_benchmark
    seeds = [r["seed"] for r in result.replications]
    assert seeds == [900, 901, 902]


def test_benchmark_unknown_method():
    cfg = DGPConfig(dgp=1, p=5, n=80, n_train=60, n_test=20)
    with pytest.raises(ValueError):
        simbench.run_benchmark(cfg, methods=("nope",), replications=1)
    with pytest.raises(ValueError):
        simbench.run_benchmark(cfg, methods=("res",), replications=0)


def test_benchmark_records_failures(monkeypatch):
    cfg = DGPConfig(dgp=1, p=5, n=80, n_train=60, n_test=20, seed=901)

    def boom(*a, **k):
        raise RuntimeError("synthetic failure")

    monkeypatch.setitem(simbench._METHODS, "res", boom)
    result = simbench.run_benchmark(cfg, methods=("res",), replications=2)
    assert result.failures == 2
    assert all(r["failed"] for r in result.replications)
    assert result.rows == []
