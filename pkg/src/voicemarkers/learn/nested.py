"""Nested cross-validation: Boruta + TPE in the inner loop, pooled
confusion counts over the outer test folds.

Row access during tuning flows through one choke point (_rows_view) that
records which rows each phase touched; the per-fold audit trail ships with
the report so leakage freedom is assertable after the fact.
"""

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..errors import DataError
from .boruta import BorutaConfig, boruta_select
from .models import fit_arrays
from .spaces import BORUTA_SPACE, space_for
from .tpe import tpe_suggest

__all__ = ["EvalReport", "nested_cv", "confusion_metrics"]

log = logging.getLogger(__name__)


def confusion_metrics(tp, fn, tn, fp):
    """Percent accuracy, sensitivity, specificity, and f1 from counts."""
    n = tp + fn + tn + fp
    def pct(num, den):
        return 100.0 * num / den if den else float("nan")
    return {
        "accuracy": pct(tp + tn, n),
        "sensitivity": pct(tp, tp + fn),
        "specificity": pct(tn, tn + fp),
        "f1": pct(2 * tp, 2 * tp + fp + fn),
    }


@dataclass
class EvalReport:
    algorithm: str
    seed: int
    budget: int
    feature_names: tuple
    folds: list                  # per outer fold: dict of results
    condition: str = ""
    n_rows: int = 0

    def pooled_confusion(self):
        tp = sum(f["tp"] for f in self.folds)
        fn = sum(f["fn"] for f in self.folds)
        tn = sum(f["tn"] for f in self.folds)
        fp = sum(f["fp"] for f in self.folds)
        return tp, fn, tn, fp

    def metrics(self):
        return confusion_metrics(*self.pooled_confusion())

    def fold_metrics(self):
        return [confusion_metrics(f["tp"], f["fn"], f["tn"], f["fp"])
                for f in self.folds]

    def leakage_free(self):
        """True when no test row was touched before final evaluation."""
        for f in self.folds:
            touched = set(f["audit"]["tuning_rows"])
            if touched & set(f["audit"]["test_rows"]):
                return False
        return True

    def to_json(self, path):
        doc = {
            "algorithm": self.algorithm, "seed": self.seed,
            "budget": self.budget, "condition": self.condition,
            "n_rows": self.n_rows,
            "feature_names": list(self.feature_names),
            "metrics": self.metrics(),
            "folds": self.folds,
        }
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            doc = json.load(fh)
        return cls(algorithm=doc["algorithm"], seed=doc["seed"],
                   budget=doc["budget"], condition=doc.get("condition", ""),
                   n_rows=doc.get("n_rows", 0),
                   feature_names=tuple(doc["feature_names"]),
                   folds=doc["folds"])

    def summary_row(self):
        m = self.metrics()
        return [self.algorithm] + ["%.1f" % m[k] for k in
                                   ("accuracy", "sensitivity",
                                    "specificity", "f1")]


def _derive_seed(*parts):
    return int(np.random.SeedSequence(tuple(int(p) for p in parts))
               .generate_state(1)[0])


def _rows_view(dataset, pids, access_log=None):
    """Row indices of the given participants; every caller that reads
    feature values goes through here so access is auditable."""
    wanted = set(pids)
    rows = [r for r, pid in enumerate(dataset.participant_ids)
            if pid in wanted]
    if access_log is not None:
        access_log.update(rows)
    return np.array(rows, np.int64)


def _impute_train(X):
    med = np.nanmedian(X, axis=0)
    med = np.where(np.isnan(med), 0.0, med)
    return np.where(np.isnan(X), med, X)


def _select_or_all(X, y, pct, n_trees, max_iter, seed, context):
    cfg = BorutaConfig(percentile=pct, n_trees=n_trees, max_iter=max_iter)
    sel = boruta_select(_impute_train(X), y, cfg, seed=seed)
    if not sel:
        log.warning("empty Boruta selection (%s); falling back to all "
                    "features", context)
        sel = list(range(X.shape[1]))
    return tuple(sel)


def _run_outer_fold(args):
    (dataset, plan, algorithm, fold_idx, budget, seed, boruta_max_iter) = args
    space = space_for(algorithm).merged(BORUTA_SPACE, prefix="boruta_")
    test_ids = plan.outer[fold_idx]
    all_ids = sorted({pid for fold in plan.outer for pid in fold})
    train_ids = [pid for pid in all_ids if pid not in set(test_ids)]

    tuning_log = set()
    test_rows = _rows_view(dataset, test_ids)
    inner_folds = plan.inner[fold_idx]

    boruta_cache = {}

    def inner_selection(j, pct, n_trees, rows):
        key = (j, pct, n_trees)
        if key not in boruta_cache:
            bseed = _derive_seed(seed, fold_idx, j, pct, n_trees, 0xB0)
            boruta_cache[key] = _select_or_all(
                dataset.X[rows], dataset.y[rows], pct, n_trees,
                boruta_max_iter, bseed,
                "fold %d inner %d" % (fold_idx, j))
        return boruta_cache[key]

    history = []
    best = (np.inf, -1, None)
    tpe_seed = _derive_seed(seed, fold_idx, 0x79E)
    for trial in range(budget):
        cfg = tpe_suggest(history, space, tpe_seed)
        pct, n_trees = cfg["boruta_percentile"], cfg["boruta_n_trees"]
        accs = []
        for j, val_ids in enumerate(inner_folds):
            fit_ids = [pid for pid in train_ids if pid not in set(val_ids)]
            fit_rows = _rows_view(dataset, fit_ids, tuning_log)
            val_rows = _rows_view(dataset, val_ids, tuning_log)
            selected = inner_selection(j, pct, n_trees, fit_rows)
            try:
                model = fit_arrays(
                    algorithm, dataset.X[fit_rows], dataset.y[fit_rows], cfg,
                    _derive_seed(seed, fold_idx, j, 0xF1), selected=selected)
            except DataError as exc:
                raise DataError("fold %d inner %d: %s"
                                % (fold_idx, j, exc)) from exc
            pred = model.predict(dataset.X[val_rows])
            accs.append(float(np.mean(pred == dataset.y[val_rows])))
        loss = 1.0 - float(np.mean(accs))
        history.append((cfg, loss))
        if loss < best[0]:
            best = (loss, trial, cfg)

    cfg = best[2]
    refit_rows = _rows_view(dataset, train_ids, tuning_log)
    selected = _select_or_all(
        dataset.X[refit_rows], dataset.y[refit_rows],
        cfg["boruta_percentile"], cfg["boruta_n_trees"], boruta_max_iter,
        _derive_seed(seed, fold_idx, 0xFE), "fold %d refit" % fold_idx)
    try:
        model = fit_arrays(algorithm, dataset.X[refit_rows],
                           dataset.y[refit_rows], cfg,
                           _derive_seed(seed, fold_idx, 0xFF),
                           selected=selected)
    except DataError as exc:
        raise DataError("fold %d refit: %s" % (fold_idx, exc)) from exc

    pred = model.predict(dataset.X[test_rows])
    truth = dataset.y[test_rows]
    tp = int(np.sum((pred == 1) & (truth == 1)))
    fn = int(np.sum((pred == 0) & (truth == 1)))
    tn = int(np.sum((pred == 0) & (truth == 0)))
    fp = int(np.sum((pred == 1) & (truth == 0)))
    return {
        "fold": fold_idx,
        "test_participants": list(test_ids),
        "tp": tp, "fn": fn, "tn": tn, "fp": fp,
        "selected_features": [dataset.feature_names[j] for j in selected],
        "config": cfg,
        "inner_loss": best[0],
        "audit": {"tuning_rows": sorted(tuning_log),
                  "test_rows": [int(r) for r in test_rows]},
    }


def nested_cv(dataset, algorithm, plan, budget=50, seed=0, jobs=1,
              boruta_max_iter=50):
    """Run the full nested search for one algorithm.

    Results are bit-identical for any jobs value: every fold derives its
    own seeds and folds are reduced in plan order.
    """
    args = [(dataset, plan, algorithm, i, budget, seed, boruta_max_iter)
            for i in range(len(plan.outer))]
    if jobs and jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            folds = list(pool.map(_run_outer_fold, args))
    else:
        folds = [_run_outer_fold(a) for a in args]
    return EvalReport(algorithm=algorithm, seed=int(seed), budget=int(budget),
                      feature_names=tuple(dataset.feature_names), folds=folds,
                      condition=dataset.condition, n_rows=dataset.X.shape[0])
