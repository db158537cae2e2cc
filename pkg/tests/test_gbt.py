import numpy as np
import pytest

from voicemarkers.learn.gbt import GbtParams, fit_gbt


def _planted(seed=0, n=800, p=12, noise=0.2):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, p))
    logit = 2.2 * X[:, 0] - 1.6 * X[:, 1] + 1.1 * X[:, 2] * (X[:, 2] > 0)
    y = (logit + noise * rng.standard_normal(n) > 0).astype(np.float64)
    return X, y


def _logloss(y, prob):
    eps = 1e-12
    prob = np.clip(prob, eps, 1 - eps)
    return float(-np.mean(y * np.log(prob) + (1 - y) * np.log(1 - prob)))


def test_gbtree_learns_planted_signal():
    X, y = _planted(seed=1)
    Xt, yt = _planted(seed=2)
    params = GbtParams(booster="gbtree", n_rounds=50, eta=0.3, max_depth=3,
                       seed=0)
    model = fit_gbt(X, y, params)
    assert (model.predict(Xt) == yt).mean() >= 0.90


def test_gbtree_train_loss_nonincreasing_over_rounds():
    X, y = _planted(seed=3, n=300)
    losses = []
    for rounds in (5, 20, 60):
        model = fit_gbt(X, y, GbtParams(booster="gbtree", n_rounds=rounds,
                                        eta=0.3, max_depth=3, seed=0))
        losses.append(_logloss(y, model.predict_proba(X)))
    assert losses[0] >= losses[1] >= losses[2]


def test_leafwise_mode_respects_leaf_budget():
    X, y = _planted(seed=4, n=400)
    params = GbtParams(booster="gbtree", n_rounds=5, eta=0.3, max_depth=64,
                       max_leaves=8, min_child_samples=1, seed=0)
    model = fit_gbt(X, y, params)
    for root, nxt in zip(model.roots, list(model.roots[1:]) + [len(model.feat)]):
        leaves = sum(1 for i in range(root, nxt) if model.feat[i] == -1)
        internal = sum(1 for i in range(root, nxt) if model.feat[i] >= 0)
        assert leaves <= 8
        assert leaves == internal + 1


def test_dart_and_gblinear_boosters_train():
    X, y = _planted(seed=5, n=300)
    dart = fit_gbt(X, y, GbtParams(booster="dart", n_rounds=30, eta=0.3,
                                   max_depth=3, rate_drop=0.2, skip_drop=0.1,
                                   seed=0))
    assert (dart.predict(X) == y).mean() >= 0.85
    lin = fit_gbt(X, y, GbtParams(booster="gblinear", n_rounds=40, eta=0.5,
                                  reg_lambda=1.0, reg_alpha=0.0, seed=0))
    assert (lin.predict(X) == y).mean() >= 0.85


def test_gblinear_is_linear_in_features():
    X, y = _planted(seed=6, n=300)
    model = fit_gbt(X, y, GbtParams(booster="gblinear", n_rounds=40, eta=0.5,
                                    seed=0))
    a = model.predict_margin(X)
    b = X @ model.coef + model.intercept
    assert np.allclose(a, b, atol=1e-10)


def test_subsampling_modes_run_and_are_deterministic():
    X, y = _planted(seed=7, n=300)
    params = GbtParams(booster="gbtree", n_rounds=20, eta=0.3, max_depth=4,
                       subsample=0.7, colsample=0.6, seed=3)
    a = fit_gbt(X, y, params).predict_margin(X)
    b = fit_gbt(X, y, params).predict_margin(X)
    assert np.array_equal(a, b)
    c = fit_gbt(X, y, GbtParams(booster="gbtree", n_rounds=20, eta=0.3,
                                max_depth=4, subsample=0.7, colsample=0.6,
                                seed=4)).predict_margin(X)
    assert not np.array_equal(a, c)


def test_dart_deterministic_per_seed():
    X, y = _planted(seed=8, n=250)
    params = GbtParams(booster="dart", n_rounds=25, eta=0.3, max_depth=3,
                       rate_drop=0.3, skip_drop=0.0, sample_type="weighted",
                       normalize_type="forest", seed=11)
    a = fit_gbt(X, y, params).predict_margin(X)
    b = fit_gbt(X, y, params).predict_margin(X)
    assert np.array_equal(a, b)


def test_regularization_shrinks_leaf_values():
    X, y = _planted(seed=9, n=300)
    base = fit_gbt(X, y, GbtParams(booster="gbtree", n_rounds=10, eta=1.0,
                                   reg_lambda=1.0, max_depth=3, seed=0))
    reg = fit_gbt(X, y, GbtParams(booster="gbtree", n_rounds=10, eta=1.0,
                                  reg_lambda=50.0, max_depth=3, seed=0))
    mag = lambda m: np.abs(m.value[m.feat == -1]).mean()
    assert mag(reg) < mag(base)


def test_gamma_prunes_splits():
    X, y = _planted(seed=10, n=300)
    free = fit_gbt(X, y, GbtParams(booster="gbtree", n_rounds=5, eta=0.3,
                                   gamma=0.0, max_depth=6, seed=0))
    pruned = fit_gbt(X, y, GbtParams(booster="gbtree", n_rounds=5, eta=0.3,
                                     gamma=5.0, max_depth=6, seed=0))
    assert (pruned.feat >= 0).sum() < (free.feat >= 0).sum()
