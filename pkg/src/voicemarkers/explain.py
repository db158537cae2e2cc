"""Feature-importance layer: selection frequency and Shapley attribution.

Shapley values come from a sampling permutation estimator: features absent
from a coalition are replaced by background-sample values, and marginal
contributions are averaged over random feature orderings. Features outside
a model's selected subset receive exactly zero. Because every ordering is
walked to completion, attributions plus the base value telescope to the
model output exactly; the Monte Carlo error lives in the per-feature split,
not in the total.
"""

import csv
import json
from dataclasses import dataclass

import numpy as np

from .learn.models import fit_arrays
from .learn.nested import _derive_seed, _rows_view, _select_or_all

__all__ = [
    "ShapleyAttribution", "ImportanceReport",
    "shapley_values", "selection_frequency", "common_features",
    "attribute_report",
]


@dataclass
class ShapleyAttribution:
    values: np.ndarray        # (n_samples, n_features)
    base_value: float         # mean model output over the background
    se: np.ndarray            # (n_samples, n_features) Monte Carlo se
    model_output: np.ndarray  # (n_samples,) scores the values decompose


@dataclass
class ImportanceReport:
    feature_names: tuple
    frequencies: dict          # feature -> selection frequency in [0, 1]
    robust: tuple              # features with frequency strictly > 0.5
    mean_abs_shap: dict        # feature -> mean |phi| over all samples
    sample_keys: list          # (participant_id, question_id) per row
    values: np.ndarray         # (n_samples, n_features)

    def ranking(self):
        """Features sorted by mean |Shapley|, descending; ties keep the
        fixed feature order."""
        return sorted(self.feature_names,
                      key=lambda f: (-self.mean_abs_shap[f],
                                     self.feature_names.index(f)))

    def to_json(self, path):
        doc = {
            "feature_names": list(self.feature_names),
            "frequencies": self.frequencies,
            "robust": list(self.robust),
            "mean_abs_shap": self.mean_abs_shap,
            "ranking": self.ranking(),
        }
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)

    def to_csv(self, path):
        """Attribution matrix, one row per feature, one column per sample."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["feature"] + ["%s:%s" % k for k in self.sample_keys])
            for j, name in enumerate(self.feature_names):
                w.writerow([name] + ["%r" % v for v in self.values[:, j]])


def shapley_values(model, X, background, n_permutations=200, seed=0):
    """Attribution matrix for each row of X against the background set.

    model needs decision_scores(X) and a selected-feature tuple; every
    feature outside that subset gets exactly 0.
    """
    if n_permutations < 1:
        raise ValueError("need at least one permutation")
    X = np.asarray(X, np.float64)
    bg = np.asarray(background, np.float64)
    if bg.shape[0] == 0:
        raise ValueError("background must be non-empty")
    n, p = X.shape
    sel = np.array(sorted(model.selected), np.int64)
    k = sel.size
    base = float(np.mean(model.decision_scores(bg)))
    out = np.asarray(model.decision_scores(X), np.float64)

    values = np.zeros((n, p))
    se = np.zeros((n, p))
    nb = bg.shape[0]
    for i in range(n):
        rng = np.random.default_rng(np.random.SeedSequence(
            (int(seed), i, 0x5AB)))
        per_perm = np.zeros((n_permutations, k))
        for t in range(n_permutations):
            order = rng.permutation(k)
            # stack the k+1 coalition prefixes and score them in one call
            stack = np.tile(bg, (k + 1, 1))
            row = X[i]
            for m in range(1, k + 1):
                block = stack[m * nb:(m + 1) * nb]
                block[:, sel[order[:m]]] = row[sel[order[:m]]]
            scores = model.decision_scores(stack)
            means = scores.reshape(k + 1, nb).mean(axis=1)
            per_perm[t, order] = np.diff(means)
        phi = per_perm.mean(axis=0)
        values[i, sel] = phi
        if n_permutations > 1:
            se[i, sel] = per_perm.std(axis=0, ddof=1) / np.sqrt(n_permutations)
    return ShapleyAttribution(values=values, base_value=base, se=se,
                              model_output=out)


def selection_frequency(report):
    """Per-feature outer-fold selection frequencies from an EvalReport.

    Returns (feature, frequency, robust) triples sorted by descending
    frequency, ties keeping the report's feature order.
    """
    n_folds = len(report.folds)
    names = list(report.feature_names)
    counts = dict.fromkeys(names, 0)
    for f in report.folds:
        for name in f["selected_features"]:
            counts[name] += 1
    rows = [(name, counts[name] / n_folds) for name in names]
    rows.sort(key=lambda r: (-r[1], names.index(r[0])))
    return [(name, freq, freq > 0.5) for name, freq in rows]


def common_features(rank_a, rank_b):
    """Intersection of two conditions' robust sets plus, per condition, the
    fraction of robust-set Shapley mass the common features carry.

    Each ranking is a list of dicts with feature, robust, mean_abs_shap.
    """
    def robust_set(rank):
        return {r["feature"] for r in rank if r["robust"]}

    def mass(rank, feats):
        return sum(r["mean_abs_shap"] for r in rank if r["feature"] in feats)

    common = robust_set(rank_a) & robust_set(rank_b)
    fractions = []
    for rank in (rank_a, rank_b):
        total = mass(rank, robust_set(rank))
        fractions.append(mass(rank, common) / total if total > 0 else 0.0)
    return sorted(common), tuple(fractions)


def attribute_report(dataset, plan, report, n_permutations=200,
                     background_size=100, seed=0):
    """Shapley attributions for every sample, each scored by the model of
    the outer fold that held it out, with a training-fold background.

    Models are refit deterministically from the stored per-fold config and
    selection, so attribution needs no persisted model state.
    """
    name_to_idx = {n: j for j, n in enumerate(report.feature_names)}
    n_rows = dataset.X.shape[0]
    values = np.zeros((n_rows, len(report.feature_names)))
    for f in report.folds:
        fold_idx = f["fold"]
        test_ids = f["test_participants"]
        all_ids = sorted({pid for fold in plan.outer for pid in fold})
        train_ids = [pid for pid in all_ids if pid not in set(test_ids)]
        train_rows = _rows_view(dataset, train_ids)
        test_rows = _rows_view(dataset, test_ids)
        selected = tuple(name_to_idx[n] for n in f["selected_features"])
        model = fit_arrays(report.algorithm, dataset.X[train_rows],
                           dataset.y[train_rows], f["config"],
                           _derive_seed(report.seed, fold_idx, 0xFF),
                           selected=selected)
        rng = np.random.default_rng(np.random.SeedSequence(
            (int(seed), fold_idx, 0xB6)))
        if train_rows.size > background_size:
            pick = rng.choice(train_rows.size, background_size, replace=False)
            bg_rows = train_rows[np.sort(pick)]
        else:
            bg_rows = train_rows
        bg = _impute_like(model, dataset.X[bg_rows])
        Xt = _impute_like(model, dataset.X[test_rows])
        attr = shapley_values(model, Xt, bg, n_permutations=n_permutations,
                              seed=_derive_seed(seed, fold_idx, 0x5A))
        values[test_rows] = attr.values

    freq_rows = selection_frequency(report)
    frequencies = {name: freq for name, freq, _ in freq_rows}
    robust = tuple(name for name, _, flag in freq_rows if flag)
    mean_abs = {name: float(np.mean(np.abs(values[:, j])))
                for j, name in enumerate(report.feature_names)}
    return ImportanceReport(feature_names=tuple(report.feature_names),
                            frequencies=frequencies, robust=robust,
                            mean_abs_shap=mean_abs,
                            sample_keys=list(dataset.row_keys), values=values)


def _impute_like(model, X):
    X = np.array(X, np.float64, copy=True)
    nan = np.isnan(X)
    if nan.any():
        X[nan] = np.broadcast_to(model.medians, X.shape)[nan]
    return X
