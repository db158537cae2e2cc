"""Random-forest impurity importances (the engine behind Boruta)."""

import math

import numpy as np

from .. import kernels

__all__ = ["rf_importances"]


def rf_importances(X, y, n_trees, seed, max_depth=0, min_leaf=1, mtry=0):
    """Mean impurity-decrease importance over a bagged forest.

    X must be finite (the caller imputes first). max_depth/mtry of 0 pick
    the defaults: unbounded depth, sqrt(n_features) features per split.
    Returns importances normalized to sum 1 (all-zero if no split ever fires).
    """
    X = np.ascontiguousarray(X, np.float64)
    y = np.ascontiguousarray(y, np.int64)
    n, p = X.shape
    if mtry <= 0:
        mtry = max(1, int(round(math.sqrt(p))))
    if max_depth <= 0:
        max_depth = 64
    rng = np.random.default_rng(np.random.SeedSequence((int(seed), 0xF0BE)))
    imp = np.zeros(p)
    for t in range(int(n_trees)):
        boot = rng.integers(0, n, size=n).astype(np.int64)
        tree_seed = int(rng.integers(1, 2**62))
        kernels.gini_tree_importances(X, y, boot, mtry, max_depth,
                                      min_leaf, tree_seed, imp)
    total = imp.sum()
    if total > 0:
        imp /= total
    return imp
