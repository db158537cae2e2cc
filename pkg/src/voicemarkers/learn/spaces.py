"""Hyperparameter domains for the five classifier families.

Each domain knows how to map a unit-interval draw into itself, so the same
definitions serve both the quasi-random startup phase and the Parzen
estimator in tpe.py.
"""

import math

__all__ = [
    "Uniform", "LogUniform", "UniformInt", "Categorical", "HyperSpace",
    "space_for", "BORUTA_SPACE", "ALGORITHMS",
]

ALGORITHMS = ("knn", "logreg", "svm", "gbt-a", "gbt-b")


class Uniform:
    """Continuous linear-scale range [lo, hi]."""

    kind = "float"
    log = False

    def __init__(self, lo, hi):
        if not lo < hi:
            raise ValueError("empty range")
        self.lo = float(lo)
        self.hi = float(hi)

    def from_unit(self, u):
        return self.lo + (self.hi - self.lo) * float(u)

    def contains(self, v):
        return self.lo <= v <= self.hi

    # transform to the space the KDE works in (identity here)
    def warp(self, v):
        return float(v)

    def unwarp(self, t):
        return min(self.hi, max(self.lo, float(t)))


class LogUniform(Uniform):
    """Continuous log-scale range [lo, hi], lo > 0."""

    log = True

    def __init__(self, lo, hi):
        if lo <= 0:
            raise ValueError("log range needs lo > 0")
        super().__init__(lo, hi)

    def from_unit(self, u):
        return math.exp(math.log(self.lo)
                        + (math.log(self.hi) - math.log(self.lo)) * float(u))

    def warp(self, v):
        return math.log(float(v))

    def unwarp(self, t):
        return min(self.hi, max(self.lo, math.exp(float(t))))


class UniformInt:
    """Integer range [lo, hi], both ends inclusive."""

    kind = "int"
    log = False

    def __init__(self, lo, hi):
        if not lo <= hi:
            raise ValueError("empty range")
        self.lo = int(lo)
        self.hi = int(hi)

    def from_unit(self, u):
        # u in [0,1) maps onto lo..hi with equal mass per integer
        v = self.lo + int(float(u) * (self.hi - self.lo + 1))
        return min(v, self.hi)

    def contains(self, v):
        return self.lo <= v <= self.hi and float(v) == int(v)

    def warp(self, v):
        return float(v)

    def unwarp(self, t):
        return min(self.hi, max(self.lo, int(round(float(t)))))


class Categorical:
    """Finite unordered choice set."""

    kind = "cat"
    log = False

    def __init__(self, choices):
        self.choices = tuple(choices)
        if not self.choices:
            raise ValueError("empty choice set")

    def from_unit(self, u):
        i = int(float(u) * len(self.choices))
        return self.choices[min(i, len(self.choices) - 1)]

    def contains(self, v):
        return v in self.choices


class HyperSpace:
    """Named parameter domains, iterated in a fixed order."""

    def __init__(self, params):
        self.params = dict(params)

    @property
    def names(self):
        return tuple(self.params)

    def __getitem__(self, name):
        return self.params[name]

    def contains(self, config):
        return (set(config) == set(self.params)
                and all(p.contains(config[k]) for k, p in self.params.items()))

    def merged(self, other, prefix=""):
        out = dict(self.params)
        for k, p in other.params.items():
            out[prefix + k] = p
        return HyperSpace(out)


_SPACES = {
    "knn": HyperSpace({
        "n_neighbors": UniformInt(1, 20),
        "weights": Categorical(("uniform", "distance")),
        "metric": Categorical(("euclidean", "manhattan", "minkowski")),
    }),
    "logreg": HyperSpace({
        "penalty": Categorical(("elasticnet", "l1", "l2", "none")),
        "C": LogUniform(1e0, 1e4),
        "l1_ratio": Uniform(0.1, 0.9),
    }),
    "svm": HyperSpace({
        "kernel": Categorical(("rbf", "linear")),
        "C": LogUniform(1e-2, 1e2),
        "gamma": LogUniform(1e-3, 1e0),
    }),
    "gbt-a": HyperSpace({
        "booster": Categorical(("gbtree", "gblinear", "dart")),
        "lambda": Uniform(1.0, 4.0),
        "alpha": LogUniform(1e-8, 1e2),
        "subsample": Uniform(0.5, 1.0),
        "colsample_bytree": Uniform(0.5, 1.0),
        "max_depth": UniformInt(1, 11),
        "min_child_weight": LogUniform(1.0, 1e2),
        "eta": LogUniform(1e-8, 1.0),
        "gamma": LogUniform(1e-8, 7.0),
        "grow_policy": Categorical(("depthwise", "lossguide")),
        "sample_type": Categorical(("uniform", "weighted")),
        "normalize_type": Categorical(("tree", "forest")),
        "rate_drop": LogUniform(1e-8, 1.0),
        "skip_drop": LogUniform(1e-8, 1.0),
    }),
    "gbt-b": HyperSpace({
        "lambda_l1": LogUniform(1e0, 1e1),
        "lambda_l2": LogUniform(1e-2, 1e0),
        "num_leaves": UniformInt(10, 32),
        "feature_fraction": Uniform(0.1, 0.5),
        "bagging_fraction": Uniform(0.8, 1.0),
        "bagging_freq": UniformInt(3, 7),
        "min_child_samples": UniformInt(1, 16),
    }),
}

# selector tunables exposed to the same inner search as the classifier
BORUTA_SPACE = HyperSpace({
    "percentile": Categorical((80, 90, 100)),
    "n_trees": Categorical((100, 300)),
})


def space_for(algorithm):
    if algorithm not in _SPACES:
        raise KeyError("unknown algorithm %r" % (algorithm,))
    return _SPACES[algorithm]
