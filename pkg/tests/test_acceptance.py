"""Acceptance gate.

Each test carries a ``criterion`` marker; the terminal summary prints one
PASS/FAIL line per criterion. Criteria that need the official World Bank
download fail (they are not skipped) when it cannot be found; see
tests/data/README.md. Lines tagged ``proxy`` rerun the data-independent parts
on the bundled CDIAC Canada 1960-2012 series and do not replace the originals.
"""
import time
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from co2forecast import report
from co2forecast.cart import TreeParams, fit_tree, predict_tree
from co2forecast.cli import main
from co2forecast.core import Dataset, split_dataset
from co2forecast.forest import fit_forest, predict_forest
from co2forecast.ingest import extract_series, parse_worldbank_csv
from co2forecast.linreg import fit_linear, residuals
from co2forecast.report import PipelineConfig, run_pipeline
from co2forecast.svr import (Kernel, SvrParams, dual_objective, fit_svr, model_objective,
                             solve_dual, standardization, standardize)

import oracles
from conftest import PROXY_SERIES, official_csv_path

C1 = ("1", "12-row table; DT and RF constant; LR arithmetic progression (<5 s)")
C2 = ("2", "quantitative anchors against the published forecast table")
C3 = ("3", "RF mean test R2 >= 0.70 and best within 0.05 over seeds 1..20 (<60 s)")
C4 = ("4", "oracle equivalence suite (<10 s)")
C5 = ("5", "invariant suite")
C6 = ("6", "determinism and manifest replay")
C7 = ("7", "official CSV has 266 country rows; CAN 1960-2018 accounts for 59 years")

PROXY_CFG = PipelineConfig(years=(1960, 2012))


def proxy(c):
    return (c[0] + " proxy", c[1] + " [CDIAC 1960-2012 proxy]")


def official_raw():
    path = official_csv_path()
    if path is None or not path.exists():
        pytest.fail("official API_EN.ATM.CO2E.PC CSV not available; "
                    "set CO2FORECAST_WB_CSV or copy it into tests/data/")
    return parse_worldbank_csv(path.read_bytes())


def official_canada():
    return extract_series(official_raw(), "CAN", (1960, 2018))


def check_structure(result, first_year):
    t = result.table
    assert t.years == tuple(range(first_year, first_year + 12))
    cols = t.columns
    assert all(len(c) == 12 for c in cols.values())
    assert len(set(cols["DecisionTree"])) == 1
    assert len(set(cols["RandomForest"])) == 1
    lr = result.models["LinearRegression"]
    for year, value in zip(t.years, cols["LinearRegression"]):
        assert value == lr.intercept + lr.slope * year
    steps = np.diff(cols["LinearRegression"])
    assert np.allclose(steps, lr.slope, rtol=1e-12, atol=0)


# --- 1 -----------------------------------------------------------------------

@pytest.mark.criterion(*C1)
def test_c1_structure_official():
    series = official_canada()
    start = time.perf_counter()
    result = run_pipeline(series, PipelineConfig())
    elapsed = time.perf_counter() - start
    check_structure(result, 2019)
    assert elapsed < 5.0


@pytest.mark.criterion(*proxy(C1))
def test_c1_structure_proxy(proxy_series):
    start = time.perf_counter()
    result = run_pipeline(proxy_series, PROXY_CFG)
    elapsed = time.perf_counter() - start
    check_structure(result, 2019)
    assert elapsed < 5.0


# --- 2 -----------------------------------------------------------------------

@pytest.mark.criterion(*C2)
def test_c2_anchors_official():
    result = run_pipeline(official_canada(), PipelineConfig())
    cols = result.table.columns
    lr = cols["LinearRegression"]
    assert abs(lr[0] - 17.210947) <= 1.0
    assert abs((lr[1] - lr[0]) - 0.052716) <= 0.02
    assert abs(cols["DecisionTree"][0] - 15.385291) <= 0.8
    assert abs(cols["RandomForest"][0] - 15.518) <= 0.8
    sv = np.array(cols["SVM"])
    assert abs(sv[-1] - 14.515501) <= 1.0
    steps = np.diff(sv)
    assert np.all(steps < 0) or np.all(steps > 0)
    assert np.all(np.abs(steps[1:]) < np.abs(steps[:-1]))


# --- 3 -----------------------------------------------------------------------

def mean_r2(series, years):
    cfg = PipelineConfig(years=years, refit_full=False)
    data = report.window(series, years).to_dataset()
    totals = dict.fromkeys(report.MODEL_NAMES, 0.0)
    for seed in range(1, 21):
        split = split_dataset(data, 0.9, seed=seed)
        models = report.fit_models(split.train, cfg)
        for name, m in report.score_models(models, split.test).items():
            totals[name] += m.r2
    return {k: v / 20 for k, v in totals.items()}


def check_r2(means):
    print("mean R2:", {k: round(v, 4) for k, v in means.items()})
    rf = means["RandomForest"]
    assert rf >= 0.70
    assert all(rf >= v - 0.05 for v in means.values())


@pytest.mark.criterion(*C3)
def test_c3_metrics_official():
    series = official_canada()
    start = time.perf_counter()
    means = mean_r2(series, (1960, 2018))
    assert time.perf_counter() - start < 60
    check_r2(means)


@pytest.mark.criterion(*proxy(C3))
def test_c3_metrics_proxy(proxy_series):
    start = time.perf_counter()
    means = mean_r2(proxy_series, (1960, 2012))
    assert time.perf_counter() - start < 60
    check_r2(means)


# --- 4 -----------------------------------------------------------------------

_C4_TIME = []

SVR_FIXTURES = [
    ([0, 1], [0, 1], "linear", 1.0, 0.0, 1.0),
    ([0, 1, 2], [1, 3, 2], "rbf", 1.0, 0.1, 1.0),
    ([0, 1, 3], [2, 0, 1], "linear", 1.0, 0.0, 10.0),
    ([1, 2, 3, 4], [0.5, 2, 1.5, 4], "rbf", 0.5, 0.2, 2.0),
    ([1, 2, 3, 4], [0, 3, 1, 5], "linear", 1.0, 0.1, 0.5),
    ([1, 2, 3, 4], [1, 1.2, 0.9, 1.1], "rbf", 2.0, 0.15, 1.0),
]


@pytest.fixture
def c4_clock():
    start = time.perf_counter()
    yield
    _C4_TIME.append(time.perf_counter() - start)


small_sets = st.integers(2, 10).flatmap(lambda n: st.tuples(
    st.lists(st.integers(1960, 1975), min_size=n, max_size=n),
    st.lists(st.floats(-20, 20, allow_nan=False), min_size=n, max_size=n)))


@settings(max_examples=200, deadline=None, derandomize=True)
@given(small_sets)
def _cart_root_matches_enumeration(sample):
    xs, ys = sample
    tree = fit_tree(Dataset(xs, ys), TreeParams(max_depth=1))
    threshold, _ = oracles.brute_force_split(xs, ys)
    if threshold is None or len(set(ys)) == 1:
        assert not hasattr(tree.root, "threshold")
    else:
        assert tree.root.threshold == threshold


@pytest.mark.criterion(*C4)
def test_c4a_cart_root_split(c4_clock):
    _cart_root_matches_enumeration()


@pytest.mark.criterion(*C4)
def test_c4b_svr_grid(c4_clock):
    for xs, ys, kind, gamma, eps, C in SVR_FIXTURES:
        d = Dataset(xs, ys)
        m = fit_svr(d, SvrParams(C=C, epsilon=eps), Kernel(kind, gamma))
        ref, _ = oracles.grid_search_dual(oracles.gram(oracles.standardize(xs), kind, gamma),
                                          ys, C, eps)
        assert model_objective(m, d) == pytest.approx(ref, abs=1e-3)


@pytest.mark.criterion(*C4)
def test_c4c_ols_normal_equations(c4_clock):
    gen = np.random.default_rng(4)
    for _ in range(100):
        n = int(gen.integers(2, 12))
        xs = gen.choice(np.arange(1950, 2030), size=n, replace=False).astype(float)
        ys = gen.normal(10, 4, size=n).round(3)
        m = fit_linear(Dataset(xs, ys))
        b0, b1 = oracles.exact_ols(xs, ys)
        assert m.slope == pytest.approx(b1, rel=1e-9, abs=1e-12)
        assert m.intercept == pytest.approx(b0, rel=1e-9)


@pytest.mark.criterion(*C4)
def test_c4d_single_tree_forest(c4_clock, proxy_dataset):
    gen = np.random.default_rng(5)
    sets = [proxy_dataset] + [Dataset(gen.integers(0, 30, 15), gen.normal(size=15))
                              for _ in range(20)]
    for d in sets:
        f = fit_forest(d, n_trees=1, bootstrap=False, seed=9)
        t = fit_tree(d)
        for x in np.linspace(d.xs.min() - 5, d.xs.max() + 5, 97):
            assert predict_forest(f, x) == predict_tree(t, x)


@pytest.mark.criterion(*C4)
def test_c4_total_runtime():
    assert len(_C4_TIME) >= 4
    assert sum(_C4_TIME) < 10.0


# --- 5 -----------------------------------------------------------------------

def kkt_check(data):
    m = fit_svr(data)
    assert m.converged
    delta = m.dual_vector(data.n)
    resid = data.ys - m.predict(data.xs)
    C, eps, tol = m.params.C, m.params.epsilon, m.params.tol
    free = np.abs(delta) < C - tol
    inside = np.abs(resid) < eps - tol
    assert np.all(np.abs(resid[free & (np.abs(delta) > tol)]) <= eps + tol)
    assert np.all(np.abs(delta[inside]) <= tol)
    upper = delta >= C - tol
    lower = delta <= -C + tol
    assert np.all(resid[upper] >= eps - tol)
    assert np.all(resid[lower] <= -eps + tol)
    assert abs(delta.sum()) <= 1e-3


@pytest.mark.criterion(*C5)
def test_c5_kkt_canada_official():
    kkt_check(official_canada().to_dataset())


@pytest.mark.criterion(*proxy(C5))
def test_c5_kkt_canada_proxy(proxy_dataset):
    kkt_check(proxy_dataset)


@pytest.mark.criterion(*C5)
def test_c5_monotone_ascent(proxy_dataset):
    d = proxy_dataset
    params, kernel = SvrParams(tol=1e-12), Kernel()
    scaling = standardization(d.xs)
    sol = solve_dual(standardize(d.xs, *scaling), d.ys, params, kernel, history_rows=1000)
    objs = [0.0] + [dual_objective(r, d, params, kernel, scaling) for r in sol.history]
    assert len(objs) > 50
    assert np.all(np.diff(objs) >= -1e-12 * (1 + abs(objs[-1])))


@pytest.mark.criterion(*C5)
@settings(max_examples=100, deadline=None, derandomize=True)
@given(small_sets)
def test_c5_ols_residuals_and_tree_bounds(sample):
    xs, ys = sample
    d = Dataset(xs, ys)
    tree = fit_tree(d)
    lo, hi = min(ys), max(ys)
    for x in range(1955, 1981):
        assert lo <= predict_tree(tree, x) <= hi
    if len(set(xs)) < 2:
        return
    m = fit_linear(d)
    r = residuals(m, d)
    scale = float(np.abs(d.ys).sum()) + 1.0
    assert abs(float(np.sum(r))) <= 1e-9 * scale
    xc = d.xs - d.xs.mean()
    assert abs(float(np.sum(r * d.xs))) <= 1e-9 * scale * float(np.abs(d.xs).max())
    assert abs(float(np.sum(r * xc))) <= 1e-9 * scale * (float(np.abs(xc).max()) + 1)


# --- 6 -----------------------------------------------------------------------

ARTIFACTS = ("forecast.csv", "metrics.csv", "chart.svg", "manifest.txt")


@pytest.mark.criterion(*C6)
def test_c6_determinism_and_replay(tmp_path, capsys):
    argv = ["forecast", "--input", str(PROXY_SERIES)]
    assert main(argv + ["--out", str(tmp_path / "a")]) == 0
    assert main(argv + ["--out", str(tmp_path / "b")]) == 0
    assert main(["forecast", "--from-manifest", str(tmp_path / "a" / "manifest.txt"),
                 "--out", str(tmp_path / "c")]) == 0
    capsys.readouterr()
    for name in ARTIFACTS:
        ref = (tmp_path / "a" / name).read_bytes()
        assert ref == (tmp_path / "b" / name).read_bytes(), name
        assert ref == (tmp_path / "c" / name).read_bytes(), name


# --- 7 -----------------------------------------------------------------------

@pytest.mark.criterion(*C7)
def test_c7_official_ingest():
    raw = official_raw()
    assert len(raw.rows) == 266
    can = extract_series(raw, "CAN", (1960, 2018))
    assert len(can.points) + len(can.dropped_years) == 59
