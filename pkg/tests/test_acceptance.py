"""Acceptance suite: one test per criterion, each printing a PASS line with
the measured numbers (run with ``pytest tests/test_acceptance.py -v -s``).

The desk-scale benchmark reproductions share one 20-replication run per
DGP; quantile predictions from every fitted model in criteria
5-9 are pooled for the global no-crossing check (criterion 10).
"""

import time

import numpy as np
import pytest
from scipy.stats import kendalltau

from sparsevine import bicop as bc, dvine, genomics, select, simbench

from conftest import all_copulas, philox, planted_snp_dataset

LEVELS = (0.05, 0.50, 0.95)

# criterion 10 pools quantile-prediction matrices from criteria 5-9
_CROSSING_POOL: list[tuple[str, np.ndarray]] = []


def _register_predictions(tag: str, model, X):
    preds = dvine.predict_quantiles(model, X, LEVELS)
    _CROSSING_POOL.append((tag, preds))
    return preds


def _report(num: int, ok: bool, detail: str):
    print(f"[acceptance] criterion {num}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, f"criterion {num}: {detail}"


# ---------------------------------------------------------------------------
# criterion 1: copula engine property suite
# ---------------------------------------------------------------------------

def test_criterion_01_copula_property_suite():
    start = time.perf_counter()
    grid = np.linspace(0.05, 0.95, 19)
    U, V = np.meshgrid(grid, grid)
    u, v = U.ravel(), V.ravel()
    worst_roundtrip = 0.0
    for cop in all_copulas():
        for cond in ("first", "second"):
            back = bc.hinv(cop, bc.hfunc(cop, v, u, cond=cond), u, cond=cond)
            worst_roundtrip = max(worst_roundtrip, float(np.max(np.abs(back - v))))
    assert worst_roundtrip < 1e-6

    g = np.linspace(0.001, 0.999, 201)
    GU, GV = np.meshgrid(g, g)
    worst_integral = (1.0, "")
    for cop in all_copulas():
        if cop.rotation != 0:
            continue
        dens = bc.pdf(cop, GU.ravel(), GV.ravel()).reshape(GU.shape)
        integral = float(np.trapezoid(np.trapezoid(dens, g, axis=1), g))
        assert 0.98 <= integral <= 1.02, f"{cop.family}{cop.params}: {integral}"
        if abs(integral - 1.0) > abs(worst_integral[0] - 1.0):
            worst_integral = (integral, f"{cop.family}{cop.params}")
    elapsed = time.perf_counter() - start
    _report(1, elapsed < 60.0,
            f"roundtrip<=1e-6 (max {worst_roundtrip:.2e}), normalization in "
            f"[0.98,1.02] (worst {worst_integral[0]:.4f} at {worst_integral[1]}), "
            f"runtime {elapsed:.1f}s < 60s")


# ---------------------------------------------------------------------------
# criterion 2: MLE vs Kendall-tau-inversion oracles
# ---------------------------------------------------------------------------

def test_criterion_02_fit_oracle_equivalence():
    worst_g = worst_c = 0.0
    for rho in (0.3, 0.6, 0.9):
        for seed in range(10):
            rng = philox(10_000 + seed)
            z = rng.multivariate_normal([0, 0], [[1, rho], [rho, 1]], size=2000)
            from scipy.special import ndtr
            u, v = ndtr(z[:, 0]), ndtr(z[:, 1])
            fit = bc.fit_mle(u, v, "gaussian")
            oracle = np.sin(np.pi * kendalltau(u, v).statistic / 2.0)
            worst_g = max(worst_g, abs(fit.params[0] - oracle))
    for theta in (1.0, 2.0):
        for seed in range(10):
            rng = philox(20_000 + seed)
            E = rng.exponential(size=(2000, 2))
            G = rng.gamma(1.0 / theta, size=2000)
            u = (1.0 + E[:, 0] / G) ** (-1.0 / theta)
            v = (1.0 + E[:, 1] / G) ** (-1.0 / theta)
            fit = bc.fit_mle(u, v, "clayton")
            tau_hat = kendalltau(u, v).statistic
            oracle = 2.0 * tau_hat / (1.0 - tau_hat)
            worst_c = max(worst_c, abs(fit.params[0] - oracle))
    _report(2, worst_g < 0.05 and worst_c < 0.3,
            f"max |rho_mle - rho_tau| = {worst_g:.4f} < 0.05; "
            f"max |theta_mle - theta_tau| = {worst_c:.4f} < 0.3")


# ---------------------------------------------------------------------------
# criterion 3: truncation proposition
# ---------------------------------------------------------------------------

def test_criterion_03_truncation_invariance():
    corr = 0.5 ** np.abs(np.subtract.outer(np.arange(4), np.arange(4)))
    data = philox(301).multivariate_normal(np.zeros(4), corr, size=500)
    margin_map = dvine.fit_margins(data)
    U = dvine.pseudo_obs(margin_map, data)
    model = dvine.response_only_model(margin_map[0])
    cache = None
    for var in (1, 2, 3):
        model, cache = dvine.extend_fit(model, U, var, margin=margin_map[var], cache=cache)
    model = dvine.truncate(model, 2)
    X = data[:60, 1:]
    base = {a: dvine.conditional_quantile(model, X, a) for a in LEVELS}
    rng = philox(302)
    worst = 0.0
    for _ in range(5):
        X_pert = X.copy()
        X_pert[:, 2] = rng.uniform(-100.0, 100.0, size=X.shape[0])
        for a, ref in base.items():
            got = dvine.conditional_quantile(model, X_pert, a)
            worst = max(worst, float(np.max(np.abs(got - ref))))
    _report(3, worst < 1e-12,
            f"2-truncated 4-variable vine: max quantile shift under 4th-variable "
            f"perturbation = {worst:.2e} < 1e-12")


# ---------------------------------------------------------------------------
# criterion 4: complexity bounds
# ---------------------------------------------------------------------------

def test_criterion_04_complexity_counts():
    p, n = 8, 400
    corr = 0.4 ** np.abs(np.subtract.outer(np.arange(p + 1), np.arange(p + 1)))
    data = philox(401).multivariate_normal(np.zeros(p + 1), corr, size=n)
    cfg = dict(force_exhaustion=True, max_iterations=p)
    _, tr_res = select.vinereg_res(data, select.SelectionConfig(method="res", **cfg))
    _, tr_par = select.vinereg_parcor(data, select.SelectionConfig(method="parcor", **cfg))
    ok_counts = tr_res.total_fits == p * (p + 1) and tr_par.total_fits == p * (p + 1) // 2

    # matched state: 3 vine nodes, 2 candidates left (iteration 3 of p=4)
    corr4 = 0.4 ** np.abs(np.subtract.outer(np.arange(5), np.arange(5)))
    data4 = philox(402).multivariate_normal(np.zeros(5), corr4, size=240)
    per_iter = {}
    for method, fn in (("baseline", select.vinereg_baseline),
                       ("res", select.vinereg_res),
                       ("parcor", select.vinereg_parcor)):
        _, tr = fn(data4, select.SelectionConfig(method=method, force_exhaustion=True,
                                                 max_iterations=4))
        fits = [r.fits for r in tr.iterations]
        per_iter[method] = fits[2] - fits[1]
    ok_state = per_iter == {"baseline": 6, "res": 5, "parcor": 3}
    _report(4, ok_counts and ok_state,
            f"exhaustion fits: res {tr_res.total_fits} == p(p+1) = {p*(p+1)}, "
            f"parcor {tr_par.total_fits} == p(p+1)/2 = {p*(p+1)//2}; "
            f"matched-state per-iteration fits {per_iter} == baseline 6 / res 5 / parcor 3")


# ---------------------------------------------------------------------------
# criterion 5: redundancy example
# ---------------------------------------------------------------------------

def test_criterion_05_redundancy_example():
    # The X2-exclusion clause (>= 16/20) sits above the measured ceiling of
    # AIC-argmin family selection at a true-independence edge: with oracle
    # conditionals independence wins only ~0.66 of draws (the best of ~18
    # correlated candidate fits beats the AIC penalty ~1/3 of the time), and
    # the gates that raise it (BIC, a tau pre-test) collapse criterion 6's
    # selection-quality reproduction. Asserted as stated; fails by a small
    # deterministic margin.
    start = time.perf_counter()
    corr = np.array([[1.0, 0.5, 0.4], [0.5, 1.0, 0.8], [0.4, 0.8, 1.0]])
    first_res = first_par = excl_x2 = 0
    last_model = last_data = None
    for seed in range(20):
        data = philox(50_000 + seed).multivariate_normal(np.zeros(3), corr, size=450)
        model_r, tr_r = select.vinereg_res(data)
        model_p, tr_p = select.vinereg_parcor(data)
        first_res += bool(tr_r.chosen and tr_r.chosen[0] == 1)
        first_par += bool(tr_p.chosen and tr_p.chosen[0] == 1)
        excl_x2 += 2 not in tr_r.chosen
        last_model, last_data = model_r, data
    _register_predictions("criterion5", last_model, last_data[:100, 1:])
    elapsed = time.perf_counter() - start
    ok = first_res >= 18 and first_par >= 18 and excl_x2 >= 16 and elapsed < 120.0
    _report(5, ok,
            f"X1 first: res {first_res}/20, parcor {first_par}/20 (need >=18); "
            f"res excludes X2 {excl_x2}/20 (need >=16); runtime {elapsed:.0f}s < 120s")


# ---------------------------------------------------------------------------
# criteria 6 + 7: desk-scale reproduction of the reference benchmark
# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def dgp1_case1_benchmark():
    start = time.perf_counter()
    cfg = simbench.DGPConfig(dgp=1, p=10, seed=60_000)
    result = simbench.run_benchmark(cfg, methods=("res", "parcor"), replications=20)
    return result, time.perf_counter() - start


@pytest.fixture(scope="module")
def dgp2_case1_benchmark():
    cfg = simbench.DGPConfig(dgp=2, p=20, seed=70_000)
    return simbench.run_benchmark(cfg, methods=("res",), replications=20)


def _mean(result, method, measure):
    return next(r["mean"] for r in result.rows
                if r["method"] == method and r["measure"] == measure)


def test_criterion_06_selection_quality_reproduction(dgp1_case1_benchmark):
    result, elapsed = dgp1_case1_benchmark
    res_tpr = _mean(result, "res", "tpr")
    res_fdr = _mean(result, "res", "fdr")
    res_chosen = _mean(result, "res", "chosen")
    par_tpr = _mean(result, "parcor", "tpr")
    ok = (0.65 <= res_tpr <= 0.95 and res_fdr <= 0.20 and 3.0 <= res_chosen <= 6.5
          and 0.50 <= par_tpr <= 0.85 and result.failures == 0 and elapsed < 1800.0)
    _report(6, ok,
            f"res TPR {res_tpr:.2f} in [0.65,0.95] (reference 0.80), FDR {res_fdr:.2f} <= 0.20 "
            f"(reference 0.08), chosen {res_chosen:.2f} in [3.0,6.5] (reference 4.56); "
            f"parcor TPR {par_tpr:.2f} in [0.50,0.85] (reference 0.67); "
            f"runtime {elapsed:.0f}s < 1800s")


def test_criterion_07_pinball_reproduction(dgp1_case1_benchmark, dgp2_case1_benchmark):
    result1, _ = dgp1_case1_benchmark
    pl05 = _mean(result1, "res", "pinball_0.05")
    pl50 = _mean(result1, "res", "pinball_0.5")
    pl50_dgp2 = _mean(dgp2_case1_benchmark, "res", "pinball_0.5")
    ok = (0.15 <= pl05 <= 0.30 and 0.60 <= pl50 <= 1.00 and 1.6 <= pl50_dgp2 <= 2.1
          and dgp2_case1_benchmark.failures == 0)
    _report(7, ok,
            f"DGP1 case 1 res: PL0.05 {pl05:.3f} in [0.15,0.30] (reference 0.21), "
            f"PL0.50 {pl50:.3f} in [0.60,1.00] (reference 0.79); "
            f"DGP2 case 1 res: PL0.50 {pl50_dgp2:.3f} in [1.6,2.1] (reference 1.83)")


def test_criterion_06_07_models_do_not_cross(dgp1_case1_benchmark, dgp2_case1_benchmark):
    # refit one replication per DGP and pool its predictions for criterion 10
    for dgp, p, seed in ((1, 10, 60_000), (2, 20, 70_000)):
        sample = simbench.generate(simbench.DGPConfig(dgp=dgp, p=p, seed=seed))
        model, _ = select.vinereg_res(sample.train)
        _register_predictions(f"criterion{6 if dgp == 1 else 7}", model, sample.test[:, 1:])


# ---------------------------------------------------------------------------
# criterion 8: scalability smoke
# ---------------------------------------------------------------------------

def test_criterion_08_scalability_smoke():
    start = time.perf_counter()
    p = 100
    sample = simbench.generate(simbench.DGPConfig(dgp=2, p=p, seed=80_000))
    model, trace = select.vinereg_res(sample.train)
    elapsed = time.perf_counter() - start
    _register_predictions("criterion8", model, sample.test[:, 1:])
    ok = elapsed < 600.0 and trace.total_fits <= p * (p + 1)
    _report(8, ok,
            f"DGP2 case 3 (p=100, n=300 train): one vineregRes replication in "
            f"{elapsed:.0f}s < 600s, fits {trace.total_fits} <= p(p+1) = {p*(p+1)}, "
            f"chosen {len(trace.chosen)}")


# ---------------------------------------------------------------------------
# criterion 9: genomics pipeline
# ---------------------------------------------------------------------------

def test_criterion_09_genomics_planted_signal():
    first_hits = 0
    min_causal = 100
    for seed in range(10):
        y, snps, causal = planted_snp_dataset(90_000 + seed)
        train, _ = genomics.preprocess(snps)
        sr = genomics.screen(y, train)
        feats = genomics.extract_features(sr, train, 100)
        causal_in_first = sum(c in causal for c in feats.groups[0])
        min_causal = min(min_causal, causal_in_first)
        data = np.column_stack([y, feats.values])
        model, trace = select.vinereg_res(data)
        hit = bool(trace.chosen and trace.chosen[0] == 1)
        first_hits += hit
        if seed == 0:
            _register_predictions("criterion9", model, data[:100, 1:])

    # the 14/314 frequency-filter example drops exactly the intended column
    rng = philox(91_000)
    n = 314
    rare = np.zeros(n, dtype=np.uint8)
    rare[rng.choice(n, size=14, replace=False)] = 2
    ok_col = 2 * (rng.uniform(size=n) < 0.5).astype(np.uint8)
    mat = genomics.SNPMatrix(values=np.column_stack([ok_col, rare]),
                             col_ids=("keep", "rare14"))
    kept, _ = genomics.preprocess(mat)
    filter_ok = kept.col_ids == ("keep",)

    ok = min_causal >= 90 and first_hits >= 8 and filter_ok
    _report(9, ok,
            f"first feature holds >= 90 causal SNPs (min {min_causal}/100); "
            f"vineregRes picks it first {first_hits}/10 (need >=8); "
            f"14/314 frequency filter drops exactly the rare column: {filter_ok}")


# ---------------------------------------------------------------------------
# criterion 10: no quantile crossing anywhere
# ---------------------------------------------------------------------------

def test_criterion_10_no_quantile_crossing():
    assert len(_CROSSING_POOL) >= 4, "earlier criteria must register predictions"
    violations = 0
    rows = 0
    for _, preds in _CROSSING_POOL:
        rows += preds.shape[0]
        violations += int(np.sum(np.diff(preds, axis=1) < 0.0))
    _report(10, violations == 0,
            f"{rows} prediction rows from criteria 5-9 at levels {LEVELS}: "
            f"{violations} quantile-crossing violations")
