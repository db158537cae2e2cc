"""Boruta all-relevant feature selection over the internal random forest.

Each iteration appends a value-permuted shadow copy of every feature, fits
a forest on the augmented matrix, and scores a hit for every undecided
feature whose importance exceeds the configured percentile of the shadow
importances. Hits accumulate into a two-sided binomial test at alpha:
features beating chance are confirmed, features losing to it are rejected.
Whatever is still tentative when the iteration budget runs out is resolved
by comparing its median importance against the median hit threshold.
"""

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .forest import rf_importances

__all__ = ["BorutaConfig", "boruta_select"]


@dataclass
class BorutaConfig:
    percentile: int = 100     # shadow percentile defining a hit
    n_trees: int = 100
    max_iter: int = 50
    alpha: float = 0.05

    def __post_init__(self):
        if self.max_iter < 20:
            raise ValueError("max_iter must be >= 20")
        if not 0 < self.percentile <= 100:
            raise ValueError("percentile must be in (0, 100]")


def boruta_select(X, y, config=None, seed=0):
    """Indices of confirmed features, ascending. Empty selection is valid."""
    if config is None:
        config = BorutaConfig()
    X = np.asarray(X, np.float64)
    y = np.asarray(y, np.int64)
    n, p = X.shape
    if n == 0 or p == 0:
        raise ValueError("empty training data")

    kids = np.random.SeedSequence((int(seed), 0xB0A7)).spawn(2)
    perm_rng = np.random.default_rng(kids[0])
    forest_seeds = np.random.default_rng(kids[1]).integers(
        1, 2**62, size=config.max_iter)

    status = np.zeros(p, np.int8)      # 0 tentative, 1 confirmed, -1 rejected
    hits = np.zeros(p, np.int64)
    imp_hist = []
    thr_hist = []

    for it in range(config.max_iter):
        shadow = X.copy()
        for j in range(p):
            perm_rng.shuffle(shadow[:, j])
        aug = np.hstack([X, shadow])
        imp = rf_importances(aug, y, config.n_trees, int(forest_seeds[it]))
        real, sh = imp[:p], imp[p:]
        thr = float(np.percentile(sh, config.percentile))
        imp_hist.append(real)
        thr_hist.append(thr)
        hits += (real > thr).astype(np.int64)

        n_trials = it + 1
        # two-sided test against Bin(n_trials, 0.5)
        tentative = np.flatnonzero(status == 0)
        for j in tentative:
            p_hi = stats.binom.sf(hits[j] - 1, n_trials, 0.5)
            p_lo = stats.binom.cdf(hits[j], n_trials, 0.5)
            p_two = min(1.0, 2.0 * min(p_hi, p_lo))
            if p_two < config.alpha:
                status[j] = 1 if hits[j] * 2 > n_trials else -1
        if not (status == 0).any():
            break

    # rough fix for survivors of the iteration budget
    tentative = np.flatnonzero(status == 0)
    if tentative.size:
        med_thr = float(np.median(thr_hist))
        med_imp = np.median(np.vstack(imp_hist), axis=0)
        for j in tentative:
            status[j] = 1 if med_imp[j] > med_thr else -1

    return [int(j) for j in np.flatnonzero(status == 1)]
