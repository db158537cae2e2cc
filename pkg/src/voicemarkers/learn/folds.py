"""Subject-wise stratified fold plans for the 10x3 nested cross-validation."""

import json
from dataclasses import dataclass

import numpy as np

from ..errors import DataError

__all__ = ["FoldPlan", "make_fold_plan"]


@dataclass
class FoldPlan:
    outer: list          # n_outer lists of participant ids (test folds)
    inner: list          # per outer fold: n_inner lists of participant ids
    seed: int

    def to_json(self, path):
        doc = {"seed": self.seed, "outer": self.outer, "inner": self.inner}
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            doc = json.load(fh)
        return cls(outer=[list(f) for f in doc["outer"]],
                   inner=[[list(f) for f in folds] for folds in doc["inner"]],
                   seed=int(doc["seed"]))


def _participant_labels(dataset):
    labels = {}
    for pid, y in zip(dataset.participant_ids, dataset.y):
        prev = labels.setdefault(pid, int(y))
        if prev != int(y):
            raise DataError("participant %s has inconsistent labels" % pid)
    return labels


def _stratified_partition(labels, ids, k, rng):
    """Deal each class round-robin into k folds; per-class counts differ
    from proportional allocation by < 1."""
    folds = [[] for _ in range(k)]
    for cls in (0, 1):
        members = sorted(pid for pid in ids if labels[pid] == cls)
        if not members:
            continue
        rng.shuffle(members)
        offset = int(rng.integers(k))
        for j, pid in enumerate(members):
            folds[(j + offset) % k].append(pid)
    return [sorted(f) for f in folds]


def make_fold_plan(dataset, seed, n_outer=10, n_inner=3):
    """Partition participants into n_outer test folds, and each outer
    training set into n_inner folds, stratified by group in both layers.
    All rows of a participant follow the participant."""
    labels = _participant_labels(dataset)
    ids = sorted(labels)
    if len(ids) < n_outer:
        raise DataError("need at least %d participants for %d-fold CV, got %d"
                        % (n_outer, n_outer, len(ids)))
    rng = np.random.default_rng(np.random.SeedSequence((int(seed), 0xF01D)))
    outer = _stratified_partition(labels, ids, n_outer, rng)
    if any(not f for f in outer):
        raise DataError("empty outer fold; too few participants")
    inner = []
    for fold in outer:
        train = [pid for pid in ids if pid not in set(fold)]
        if len(train) < n_inner:
            raise DataError("too few participants for %d inner folds" % n_inner)
        inner.append(_stratified_partition(labels, train, n_inner, rng))
    return FoldPlan(outer=outer, inner=inner, seed=int(seed))
