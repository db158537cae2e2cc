import json

import numpy as np
import pytest
from scipy import stats as sps

from voicemarkers.errors import DataError
from voicemarkers.features import Dataset
from voicemarkers.stats import (agreement, ancova_eta, bh_adjust,
                                feature_stats, paired_t, partial_spearman,
                                significance_marker)


def test_partial_spearman_no_covariates_matches_scipy():
    rng = np.random.default_rng(3)
    for _ in range(10):
        x = rng.standard_normal(40)
        y = 0.5 * x + rng.standard_normal(40)
        rho, p = partial_spearman(x, y)
        ref = sps.spearmanr(x, y)
        assert rho == pytest.approx(ref.statistic, abs=1e-12)
        assert p == pytest.approx(ref.pvalue, abs=1e-12)


def test_partial_spearman_matches_scipy_with_ties():
    x = np.array([1.0, 2.0, 2.0, 3.0, 4.0, 4.0, 4.0, 5.0, 6.0, 7.0])
    y = np.array([2.0, 1.0, 3.0, 3.0, 5.0, 4.0, 6.0, 6.0, 7.0, 8.0])
    rho, p = partial_spearman(x, y)
    ref = sps.spearmanr(x, y)
    assert rho == pytest.approx(ref.statistic, abs=1e-12)
    assert p == pytest.approx(ref.pvalue, abs=1e-12)


def test_partial_spearman_removes_shared_covariate():
    rng = np.random.default_rng(7)
    z = rng.standard_normal(200)
    x = z + 0.2 * rng.standard_normal(200)
    y = z + 0.2 * rng.standard_normal(200)
    plain, _ = partial_spearman(x, y)
    adj, _ = partial_spearman(x, y, covariates=z)
    assert plain > 0.8
    assert abs(adj) < abs(plain) / 2


def test_partial_spearman_skips_incomplete_rows():
    rng = np.random.default_rng(1)
    x = rng.standard_normal(50)
    y = x + 0.3 * rng.standard_normal(50)
    x2 = x.copy()
    x2[5] = np.nan
    y2 = y.copy()
    y2[17] = np.nan
    mask = np.ones(50, bool)
    mask[[5, 17]] = False
    rho_full, p_full = partial_spearman(x[mask], y[mask])
    rho_nan, p_nan = partial_spearman(x2, y2)
    assert rho_nan == pytest.approx(rho_full, abs=1e-12)
    assert p_nan == pytest.approx(p_full, abs=1e-12)


def test_partial_spearman_degenerate_inputs():
    const = np.full(20, 3.0)
    varying = np.arange(20.0)
    rho, p = partial_spearman(const, varying)
    assert np.isnan(rho) and np.isnan(p)
    # a covariate identical to x leaves numerically-zero residuals
    rho, p = partial_spearman(varying, np.sin(varying), covariates=varying)
    assert (rho, p) == (0.0, 1.0)
    with pytest.raises(DataError):
        partial_spearman(varying[:3], varying[:3], covariates=varying[:3])


def test_ancova_eta_twelve_row_fixture():
    # frozen from an independent normal-equations computation: the
    # group-coefficient t-test in the full OLS, with eta = F / (F + dof)
    g = np.array([0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1], float)
    c1 = np.array([61, 72, 58, 66, 70, 63, 69, 75, 64, 71, 67, 73], float)
    c2 = np.array([12, 16, 10, 14, 12, 15, 13, 17, 11, 12, 16, 14], float)
    y = np.array([2.1, 3.0, 1.7, 2.6, 2.9, 2.2, 3.4, 4.1, 2.8, 3.5, 3.1,
                  3.9])
    eta, p = ancova_eta(y, g, np.column_stack([c1, c2]))
    assert eta == pytest.approx(0.9014211258514917, abs=1e-10)
    assert p == pytest.approx(2.6907937849015311e-05, abs=1e-10)


def test_ancova_eta_no_covariates_matches_pointbiserial_f():
    rng = np.random.default_rng(5)
    g = np.repeat([0.0, 1.0], 15)
    y = g * 1.2 + rng.standard_normal(30)
    eta, p = ancova_eta(y, g)
    t, p_ref = sps.ttest_ind(y[g == 1], y[g == 0])
    assert eta == pytest.approx(t * t / (t * t + 28), abs=1e-10)
    assert p == pytest.approx(p_ref, abs=1e-12)


def test_ancova_eta_rejects_degenerate_designs():
    y = np.arange(12.0)
    g = np.repeat([0.0, 1.0], 6)
    with pytest.raises(DataError):
        ancova_eta(y, np.zeros(12))
    with pytest.raises(DataError):
        ancova_eta(y, g, covariates=g)  # collinear with the group column


def test_bh_adjust_hand_case():
    out = bh_adjust([0.01, 0.04, 0.03, 0.005])
    assert np.allclose(out, [0.02, 0.04, 0.04, 0.02], atol=1e-15)


def test_bh_adjust_properties():
    rng = np.random.default_rng(0)
    for _ in range(20):
        p = rng.uniform(size=rng.integers(1, 60))
        q = bh_adjust(p)
        assert (q >= p - 1e-15).all()
        assert (q <= 1.0).all()
        order = np.argsort(p, kind="stable")
        assert (np.diff(q[order]) >= -1e-15).all()
    assert bh_adjust([]).size == 0
    assert bh_adjust([0.2])[0] == pytest.approx(0.2)
    with pytest.raises(ValueError):
        bh_adjust([0.1, 1.4])


def test_bh_adjust_null_false_discovery_rate():
    # all-null simulation: the fraction of repetitions with any
    # adjusted p < .05 estimates the FDR, which BH holds at the level
    rng = np.random.default_rng(2)
    hits = 0
    for _ in range(1000):
        q = bh_adjust(rng.uniform(size=40))
        hits += bool((q < 0.05).any())
    assert hits / 1000 <= 0.05


def test_paired_t_matches_scipy():
    rng = np.random.default_rng(9)
    a = rng.standard_normal(25)
    b = a + 0.4 + 0.5 * rng.standard_normal(25)
    t, p = paired_t(a, b)
    ref = sps.ttest_rel(a, b)
    assert t == pytest.approx(ref.statistic, abs=1e-12)
    assert p == pytest.approx(ref.pvalue, abs=1e-12)


def test_paired_t_rejects_bad_input():
    with pytest.raises(DataError):
        paired_t([1.0, 2.0], [1.0, 2.0])
    with pytest.raises(DataError):
        paired_t([1.0, 2.0, 3.0], [0.0, 1.0, 2.0])  # constant difference


def test_agreement_is_plain_spearman():
    rng = np.random.default_rng(11)
    a = rng.standard_normal(42)
    b = a + rng.standard_normal(42)
    rho, p = agreement(a, b)
    ref = sps.spearmanr(a, b)
    assert rho == pytest.approx(ref.statistic, abs=1e-12)
    assert p == pytest.approx(ref.pvalue, abs=1e-12)


def test_significance_marker_boundaries():
    assert significance_marker(0.0005) == "***"
    assert significance_marker(0.005) == "**"
    assert significance_marker(0.049) == "*"
    assert significance_marker(0.05) == ""
    assert significance_marker(0.2) == ""
    assert significance_marker(float("nan")) == ""


def _stats_dataset(condition, seed):
    rng = np.random.default_rng(seed)
    n = 48
    names = ("alpha", "beta", "gamma", "age", "sex", "education")
    y = np.repeat([1, 0], n // 2)
    ecog = np.where(y == 1, rng.uniform(2.2, 3.8, n), rng.uniform(1.0, 1.7, n))
    X = rng.standard_normal((n, len(names)))
    X[:, 0] += 1.5 * ecog           # alpha tracks the score
    X[:, 3] = rng.uniform(55, 80, n)
    X[:, 4] = rng.integers(0, 2, n)
    X[:, 5] = rng.uniform(8, 20, n)
    pids = ["P%02d" % i for i in range(n)]
    return Dataset(X=X, y=y, feature_names=names, participant_ids=pids,
                   row_keys=[(p, "q1") for p in pids], condition=condition,
                   ecog=ecog)


def test_feature_stats_battery(tmp_path):
    acoustic = ("alpha", "beta", "gamma")
    ds_a = _stats_dataset("cognitive", seed=21)
    ds_b = _stats_dataset("daily", seed=22)
    report = feature_stats([ds_a, ds_b], acoustic)
    assert report.conditions == ("cognitive", "daily")
    assert len(report.rows) == 6
    by_key = {(r["condition"], r["feature"]): r for r in report.rows}
    alpha = by_key[("cognitive", "alpha")]
    assert alpha["rho"] > 0.5
    assert alpha["rho_p_adj"] >= alpha["rho_p"]
    assert alpha["eta_p_adj"] >= alpha["eta_p"]
    assert set(report.paired) == {"abs_rho", "eta_sq"}
    assert set(report.agreement) == {"rho", "eta_sq"}
    jpath = tmp_path / "stats.json"
    cpath = tmp_path / "stats.csv"
    report.to_json(str(jpath))
    report.to_csv(str(cpath))
    doc = json.loads(jpath.read_text())
    assert len(doc["rows"]) == 6
    lines = cpath.read_text().strip().splitlines()
    assert lines[0].startswith("condition,feature,rho")
    assert len(lines) == 7


def test_feature_stats_single_condition_skips_comparisons():
    report = feature_stats([_stats_dataset("cognitive", seed=4)],
                           ("alpha", "beta"))
    assert report.paired == {}
    assert report.agreement == {}
    assert len(report.rows) == 2
