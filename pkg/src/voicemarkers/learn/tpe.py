"""Tree-structured Parzen estimator over the HyperSpace domains.

The first n_startup suggestions come from a scrambled Halton sequence.
After that the history is split at the gamma loss quantile; per parameter
a kernel density (Gaussian mixture on the warped scale, weighted
frequencies for categoricals) is fitted to each side, and the best of
n_candidates draws from the good-side density under the density ratio
good/bad is returned.
"""

import math

import numpy as np

__all__ = ["tpe_suggest"]

N_STARTUP = 10
GAMMA = 0.25
N_CANDIDATES = 24

_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47,
           53, 59, 61, 67, 71, 73, 79, 83, 89, 97)


def _halton(index, base):
    f, r = 1.0, 0.0
    i = index
    while i > 0:
        f /= base
        r += f * (i % base)
        i //= base
    return r


def _quasi_random(space, index, seed):
    """Halton point #index+1, Cramer-shifted by a per-seed offset."""
    rng = np.random.default_rng(np.random.SeedSequence((int(seed), 0x7BE)))
    offsets = rng.random(len(space.names))
    config = {}
    for d, name in enumerate(space.names):
        base = _PRIMES[d % len(_PRIMES)]
        u = (_halton(index + 1, base) + offsets[d]) % 1.0
        config[name] = space[name].from_unit(u)
    return config


def _kde_sample(rng, values, sigma, param):
    center = values[int(rng.integers(len(values)))]
    return param.unwarp(center + sigma * rng.standard_normal())


def _kde_logpdf(x, values, sigma, lo, hi):
    # mixture of gaussians plus a uniform floor over the domain
    z = (x - values) / sigma
    comp = np.exp(-0.5 * z * z) / (sigma * math.sqrt(2.0 * math.pi))
    dens = comp.mean() * 0.9 + 0.1 / max(hi - lo, 1e-12)
    return math.log(max(dens, 1e-300))


def _cat_probs(values, choices):
    counts = np.array([sum(1 for v in values if v == c) for c in choices],
                      np.float64)
    return (counts + 1.0) / (counts.sum() + len(choices))


def tpe_suggest(history, space, seed, n_startup=N_STARTUP, gamma=GAMMA,
                n_candidates=N_CANDIDATES):
    """Suggest the next configuration given [(config, loss), ...] history."""
    n = len(history)
    losses = np.array([l for _, l in history], np.float64)
    if n < n_startup or (n > 0 and np.all(losses == losses[0])):
        return _quasi_random(space, n, seed)

    order = np.argsort(losses, kind="stable")
    n_good = max(1, int(math.ceil(gamma * n)))
    good_idx = set(order[:n_good].tolist())
    good = [history[i][0] for i in range(n) if i in good_idx]
    bad = [history[i][0] for i in range(n) if i not in good_idx]

    rng = np.random.default_rng(np.random.SeedSequence((int(seed), n, 0x7BE1)))
    prep = {}
    for name in space.names:
        param = space[name]
        if param.kind == "cat":
            prep[name] = ("cat",
                          _cat_probs([c[name] for c in good], param.choices),
                          _cat_probs([c[name] for c in bad], param.choices))
        else:
            lo, hi = param.warp(param.lo), param.warp(param.hi)
            gv = np.array([param.warp(c[name]) for c in good])
            bv = np.array([param.warp(c[name]) for c in bad])
            # Parzen width shrinks with the good-set size
            sigma = max((hi - lo) / max(len(gv), 2), 1e-12 * max(hi - lo, 1.0))
            prep[name] = ("num", param, gv, bv, sigma, lo, hi)

    best_score, best_cfg = -np.inf, None
    for _ in range(n_candidates):
        cfg, score = {}, 0.0
        for name in space.names:
            info = prep[name]
            if info[0] == "cat":
                _, pg, pb = info
                param = space[name]
                i = int(rng.choice(len(param.choices), p=pg))
                cfg[name] = param.choices[i]
                score += math.log(pg[i]) - math.log(pb[i])
            else:
                _, param, gv, bv, sigma, lo, hi = info
                x = _kde_sample(rng, gv, sigma, param)
                xw = param.warp(x)
                score += (_kde_logpdf(xw, gv, sigma, lo, hi)
                          - _kde_logpdf(xw, bv, sigma, lo, hi))
                cfg[name] = x
        if score > best_score:
            best_score, best_cfg = score, cfg
    return best_cfg
