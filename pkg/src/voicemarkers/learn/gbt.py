"""Second-order gradient boosting for binary logistic loss.

One engine serves both tree presets: depth-wise growth with subsample /
colsample / eta / gamma / min_child_weight (the xgb-like family, including
per-round tree dropout for the dart booster and a boosted-linear booster),
and leaf-wise growth bounded by num_leaves with feature_fraction and
periodic bagging (the lgbm-like family). Split finding lives in the
kernels package.
"""

from dataclasses import dataclass

import numpy as np

from .. import kernels

__all__ = ["GbtParams", "GbtModel", "fit_gbt"]


@dataclass
class GbtParams:
    booster: str = "gbtree"          # gbtree | dart | gblinear
    n_rounds: int = 100
    eta: float = 0.3
    reg_lambda: float = 1.0
    reg_alpha: float = 0.0
    gamma: float = 0.0               # minimum split gain
    max_depth: int = 6
    max_leaves: int = 0              # 0 = unbounded (depth-wise)
    min_child_weight: float = 1.0
    min_child_samples: int = 1
    subsample: float = 1.0
    colsample: float = 1.0
    bag_refresh: int = 1             # redraw the row bag every k rounds
    sample_type: str = "uniform"     # dart: uniform | weighted
    normalize_type: str = "tree"     # dart: tree | forest
    rate_drop: float = 0.0
    skip_drop: float = 0.0
    seed: int = 0


@dataclass
class GbtModel:
    params: GbtParams
    train_losses: list
    # tree mode: flattened forest with per-tree weights folded into leaves
    feat: np.ndarray = None
    thr: np.ndarray = None
    left: np.ndarray = None
    right: np.ndarray = None
    value: np.ndarray = None
    roots: np.ndarray = None
    # linear mode
    coef: np.ndarray = None          # (p,) weights
    intercept: float = 0.0
    mode: str = "trees"

    def predict_margin(self, X):
        X = np.ascontiguousarray(X, np.float64)
        if self.mode == "linear":
            return X @ self.coef + self.intercept
        out = np.empty(X.shape[0])
        if self.roots.size == 0:
            out[:] = 0.0
            return out
        kernels.ensemble_margin(self.feat, self.thr, self.left, self.right,
                                self.value, self.roots, X, out)
        return out

    def predict_proba(self, X):
        return _sigmoid(self.predict_margin(X))

    def predict(self, X):
        return (self.predict_margin(X) > 0.0).astype(np.int64)


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _logloss(y, pr):
    eps = 1e-12
    pr = np.clip(pr, eps, 1.0 - eps)
    return float(-np.mean(y * np.log(pr) + (1.0 - y) * np.log(1.0 - pr)))


def _tree_margin(arrays, X):
    feat, thr, left, right, value = arrays
    out = np.empty(X.shape[0])
    kernels.ensemble_margin(feat, thr, left, right, value,
                            np.zeros(1, np.int64), X, out)
    return out


def _fit_gblinear(X, y, params, rng):
    """Cyclic coordinate Newton steps on the elastic-net logistic objective;
    each pass boosts one single-feature linear correction at a time."""
    n, p = X.shape
    coef = np.zeros(p)
    intercept = 0.0
    margin = np.zeros(n)
    losses = []
    lam, alpha, eta = params.reg_lambda, params.reg_alpha, params.eta
    for _ in range(params.n_rounds):
        pr = _sigmoid(margin)
        g0, h0 = float(np.sum(pr - y)), float(np.sum(pr * (1.0 - pr)))
        if h0 > 0:
            step = eta * (-g0 / h0)
            intercept += step
            margin += step
        for j in range(p):
            xj = X[:, j]
            pr = _sigmoid(margin)
            G = float(xj @ (pr - y))
            H = float((xj * xj) @ (pr * (1.0 - pr))) + lam
            z = coef[j] * H - G
            target = np.sign(z) * max(abs(z) - alpha, 0.0) / H
            step = eta * (target - coef[j])
            coef[j] += step
            margin += step * xj
        losses.append(_logloss(y, _sigmoid(margin)))
    return GbtModel(params=params, train_losses=losses, mode="linear",
                    coef=coef, intercept=intercept)


def _draw_rows(rng, n, subsample):
    if subsample >= 1.0:
        return np.arange(n, dtype=np.int64)
    mask = rng.random(n) < subsample
    rows = np.flatnonzero(mask).astype(np.int64)
    return rows if rows.size else np.arange(n, dtype=np.int64)


def _draw_cols(rng, p, colsample):
    if colsample >= 1.0:
        return np.arange(p, dtype=np.int64)
    k = max(1, int(round(colsample * p)))
    cols = rng.permutation(p)[:k].astype(np.int64)
    cols.sort()
    return cols


def fit_gbt(X, y, params):
    X = np.ascontiguousarray(X, np.float64)
    y = np.asarray(y, np.float64)
    n, p = X.shape
    rng = np.random.default_rng(np.random.SeedSequence((int(params.seed), 0x6B7)))
    if params.booster == "gblinear":
        return _fit_gblinear(X, y, params, rng)

    trees = []          # per-tree (feat, thr, left, right, value)
    weights = []
    tree_margins = []   # per-tree raw margins on the training rows
    losses = []
    margin = np.zeros(n)
    rows = np.arange(n, dtype=np.int64)

    for rnd in range(params.n_rounds):
        drop = []
        if params.booster == "dart" and trees:
            if rng.random() >= params.skip_drop:
                w = np.array(weights)
                if params.sample_type == "weighted" and w.sum() > 0:
                    probs = np.clip(params.rate_drop * w * len(w) / w.sum(),
                                    0.0, 1.0)
                else:
                    probs = np.full(len(w), params.rate_drop)
                drop = np.flatnonzero(rng.random(len(w)) < probs).tolist()

        if drop:
            kept = margin.copy()
            for t in drop:
                kept -= weights[t] * tree_margins[t]
            work_margin = kept
        else:
            work_margin = margin

        pr = _sigmoid(work_margin)
        g = np.ascontiguousarray(pr - y)
        h = np.ascontiguousarray(pr * (1.0 - pr))

        if rnd % max(1, params.bag_refresh) == 0:
            rows = _draw_rows(rng, n, params.subsample)
        cols = _draw_cols(rng, p, params.colsample)

        feat, thr, left, right, value, n_nodes = kernels.gbt_build_tree(
            X, g, h, rows, cols, params.reg_lambda, params.reg_alpha,
            params.gamma, params.min_child_weight, params.min_child_samples,
            params.max_depth, params.max_leaves)
        arrays = (feat[:n_nodes].copy(), thr[:n_nodes].copy(),
                  left[:n_nodes].copy(), right[:n_nodes].copy(),
                  value[:n_nodes].copy())
        m_new = _tree_margin(arrays, X)

        if drop:
            k = len(drop)
            if params.normalize_type == "forest":
                new_w = params.eta / (1.0 + params.eta)
                factor = 1.0 / (1.0 + params.eta)
            else:
                new_w = params.eta / (k + params.eta)
                factor = k / (k + params.eta)
            for t in drop:
                weights[t] *= factor
            trees.append(arrays)
            weights.append(new_w)
            tree_margins.append(m_new)
            margin = np.zeros(n)
            for w_t, m_t in zip(weights, tree_margins):
                margin += w_t * m_t
        else:
            trees.append(arrays)
            weights.append(params.eta)
            tree_margins.append(m_new)
            margin = margin + params.eta * m_new
        losses.append(_logloss(y, _sigmoid(margin)))

    return _finalize(trees, weights, params, losses)


def _finalize(trees, weights, params, losses):
    feats, thrs, lefts, rights, values, roots = [], [], [], [], [], []
    base = 0
    for (feat, thr, left, right, value), w in zip(trees, weights):
        roots.append(base)
        feats.append(feat)
        thrs.append(thr)
        lefts.append(np.where(left >= 0, left + base, -1))
        rights.append(np.where(right >= 0, right + base, -1))
        values.append(value * w)
        base += feat.shape[0]
    if trees:
        model_arrays = (np.concatenate(feats), np.concatenate(thrs),
                        np.concatenate(lefts), np.concatenate(rights),
                        np.concatenate(values))
    else:
        z = np.zeros(0)
        model_arrays = (z.astype(np.int64), z, z.astype(np.int64),
                        z.astype(np.int64), z)
    return GbtModel(params=params, train_losses=losses,
                    feat=model_arrays[0], thr=model_arrays[1],
                    left=model_arrays[2], right=model_arrays[3],
                    value=model_arrays[4],
                    roots=np.array(roots, np.int64))
