import json
import math
from itertools import combinations

import numpy as np
import pytest

from voicemarkers.explain import (attribute_report, common_features,
                                  selection_frequency, shapley_values)
from voicemarkers.features import Dataset
from voicemarkers.learn import make_fold_plan, nested_cv
from voicemarkers.learn.models import fit_arrays
from voicemarkers.learn.nested import EvalReport

LOGREG_CFG = {"penalty": "l2", "C": 1.0, "l1_ratio": 0.5}
SVM_CFG = {"kernel": "rbf", "C": 2.0, "gamma": 0.2}


def _training_blob(n=60, p=6, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, p))
    y = (X[:, 0] + 0.8 * X[:, 1] - 0.6 * X[:, 2]
         + 0.3 * rng.standard_normal(n) > 0).astype(np.int64)
    return X, y


def _exact_shapley(model, x, bg, sel):
    """Brute-force Shapley over all 2^k coalitions with factorial weights."""
    k = len(sel)
    cache = {}

    def v(S):
        key = tuple(sorted(S))
        if key not in cache:
            Z = bg.copy()
            idx = [sel[i] for i in key]
            Z[:, idx] = x[idx]
            cache[key] = float(np.mean(model.decision_scores(Z)))
        return cache[key]

    phi = np.zeros(k)
    for j in range(k):
        others = [i for i in range(k) if i != j]
        for r in range(k):
            for S in combinations(others, r):
                w = (math.factorial(r) * math.factorial(k - r - 1)
                     / math.factorial(k))
                phi[j] += w * (v(S + (j,)) - v(S))
    return phi


def test_shapley_local_accuracy():
    X, y = _training_blob()
    model = fit_arrays("logreg", X, y, LOGREG_CFG, seed=0)
    queries = X[:5]
    bg = X[10:30]
    attr = shapley_values(model, queries, bg, n_permutations=8, seed=1)
    # each permutation telescopes, so totals are exact at any budget
    totals = attr.values.sum(axis=1) + attr.base_value
    assert np.allclose(totals, attr.model_output, atol=1e-8)


@pytest.mark.parametrize("algorithm,config", [
    ("logreg", LOGREG_CFG),
    ("svm", SVM_CFG),
])
def test_shapley_matches_brute_force(algorithm, config):
    X, y = _training_blob(seed=3)
    sel = (0, 1, 2, 3, 4, 5)
    model = fit_arrays(algorithm, X, y, config, seed=0, selected=sel)
    bg = X[:8]
    queries = X[40:43]
    attr = shapley_values(model, queries, bg, n_permutations=600, seed=5)
    for i, x in enumerate(queries):
        exact = _exact_shapley(model, x, bg, sel)
        got = attr.values[i, list(sel)]
        # per-feature agreement within Monte Carlo error
        band = 4.0 * attr.se[i, list(sel)] + 1e-9
        assert (np.abs(got - exact) <= band).all()
        # aggregate magnitude within 5 percent relative
        assert np.mean(np.abs(got)) == pytest.approx(
            np.mean(np.abs(exact)), rel=0.05)


def test_shapley_unselected_features_get_exact_zero():
    X, y = _training_blob()
    model = fit_arrays("logreg", X, y, LOGREG_CFG, seed=0, selected=(0, 1, 2))
    attr = shapley_values(model, X[:4], X[20:40], n_permutations=10, seed=0)
    assert (attr.values[:, 3:] == 0.0).all()
    assert (attr.values[:, :3] != 0.0).any()


def test_shapley_matching_constant_column_is_exact_zero():
    X, y = _training_blob(seed=8)
    model = fit_arrays("logreg", X, y, LOGREG_CFG, seed=0)
    bg = X[:15].copy()
    q = X[45:47].copy()
    bg[:, 4] = 0.7
    q[:, 4] = 0.7  # swapping identical values is a no-op coalition move
    attr = shapley_values(model, q, bg, n_permutations=12, seed=2)
    assert (attr.values[:, 4] == 0.0).all()


def test_shapley_determinism_and_seed_sensitivity():
    X, y = _training_blob(seed=5)
    model = fit_arrays("logreg", X, y, LOGREG_CFG, seed=0)
    a = shapley_values(model, X[:3], X[10:25], n_permutations=15, seed=7)
    b = shapley_values(model, X[:3], X[10:25], n_permutations=15, seed=7)
    c = shapley_values(model, X[:3], X[10:25], n_permutations=15, seed=8)
    assert np.array_equal(a.values, b.values)
    assert not np.array_equal(a.values, c.values)


def test_shapley_input_validation():
    X, y = _training_blob()
    model = fit_arrays("logreg", X, y, LOGREG_CFG, seed=0)
    with pytest.raises(ValueError):
        shapley_values(model, X[:2], X[3:9], n_permutations=0)
    with pytest.raises(ValueError):
        shapley_values(model, X[:2], X[:0], n_permutations=5)


def _fake_report(fold_selections, names=("a", "b", "c")):
    folds = [{"fold": i, "selected_features": list(s), "tp": 0, "fn": 0,
              "tn": 0, "fp": 0}
             for i, s in enumerate(fold_selections)]
    return EvalReport(algorithm="knn", seed=0, budget=1,
                      feature_names=tuple(names), folds=folds)


def test_selection_frequency_counts_and_order():
    report = _fake_report([("a", "b"), ("a", "b"), ("a", "c"), ("a",)])
    rows = selection_frequency(report)
    assert rows == [("a", 1.0, True), ("b", 0.5, False), ("c", 0.25, False)]


def test_common_features_fractions():
    rank_a = [
        {"feature": "x", "robust": True, "mean_abs_shap": 3.0},
        {"feature": "y", "robust": True, "mean_abs_shap": 1.0},
        {"feature": "z", "robust": False, "mean_abs_shap": 9.0},
    ]
    rank_b = [
        {"feature": "x", "robust": True, "mean_abs_shap": 2.0},
        {"feature": "w", "robust": True, "mean_abs_shap": 2.0},
        {"feature": "y", "robust": False, "mean_abs_shap": 5.0},
    ]
    common, fractions = common_features(rank_a, rank_b)
    assert common == ["x"]
    assert fractions == (pytest.approx(3.0 / 4.0), pytest.approx(0.5))
    none, frac = common_features(
        [{"feature": "x", "robust": False, "mean_abs_shap": 1.0}],
        [{"feature": "x", "robust": False, "mean_abs_shap": 1.0}])
    assert none == [] and frac == (0.0, 0.0)


def _clustered_dataset(seed=0, p=8):
    rng = np.random.default_rng(seed)
    pids, ys, keys, rows = [], [], [], []
    for i in range(24):
        y = 1 if i < 12 else 0
        center = rng.standard_normal(p) * 0.4
        for q in range(4):
            x = center + rng.standard_normal(p)
            x[0] += 2.0 * (1 if y else -1)
            x[1] -= 1.6 * (1 if y else -1)
            rows.append(x)
            pids.append("P%02d" % i)
            ys.append(y)
            keys.append(("P%02d" % i, "q%d" % q))
    return Dataset(X=np.array(rows), y=np.array(ys),
                   feature_names=tuple("f%d" % j for j in range(p)),
                   participant_ids=pids, row_keys=keys, condition="cognitive",
                   ecog=rng.uniform(1, 4, len(pids)))


def test_attribute_report_end_to_end(tmp_path):
    ds = _clustered_dataset()
    plan = make_fold_plan(ds, seed=1)
    report = nested_cv(ds, "logreg", plan, budget=2, seed=1,
                       boruta_max_iter=20)
    imp = attribute_report(ds, plan, report, n_permutations=25,
                           background_size=40, seed=3)
    assert imp.values.shape == (96, 8)
    assert set(imp.ranking()[:2]) == {"f0", "f1"}
    assert "f0" in imp.robust and "f1" in imp.robust
    assert all(0.0 <= v <= 1.0 for v in imp.frequencies.values())
    again = attribute_report(ds, plan, report, n_permutations=25,
                             background_size=40, seed=3)
    assert np.array_equal(imp.values, again.values)

    jpath = tmp_path / "imp.json"
    cpath = tmp_path / "imp.csv"
    imp.to_json(str(jpath))
    imp.to_csv(str(cpath))
    doc = json.loads(jpath.read_text())
    assert doc["ranking"] == imp.ranking()
    assert set(doc["frequencies"]) == set(ds.feature_names)
    lines = cpath.read_text().strip().splitlines()
    assert len(lines) == 9  # header plus one row per feature
    assert lines[0].startswith("feature,P00:q0")
