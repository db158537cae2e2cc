"""Training pipeline: impute -> standardize -> select -> classifier."""

from dataclasses import dataclass

import numpy as np

from ..errors import DataError
from .classifiers import KnnClassifier, LogisticClassifier, SvmClassifier
from .gbt import GbtParams, fit_gbt
from .spaces import space_for

__all__ = ["TrainedModel", "fit", "fit_arrays"]


@dataclass
class TrainedModel:
    algorithm: str
    medians: np.ndarray        # training-fold imputation values, full width
    means: np.ndarray          # training-fold standardization statistics
    stds: np.ndarray
    selected: tuple            # feature indices the classifier sees
    clf: object
    config: dict

    def _transform(self, X):
        X = np.array(X, np.float64, copy=True)
        nan = np.isnan(X)
        if nan.any():
            X[nan] = np.broadcast_to(self.medians, X.shape)[nan]
        X = (X - self.means) / self.stds
        return X[:, list(self.selected)]

    def predict(self, X):
        return self.clf.predict(self._transform(X))

    def decision_scores(self, X):
        return self.clf.decision_scores(self._transform(X))


def _build_clf(algorithm, config, seed):
    if algorithm == "knn":
        return KnnClassifier(n_neighbors=config["n_neighbors"],
                             weights=config["weights"],
                             metric=config["metric"])
    if algorithm == "logreg":
        return LogisticClassifier(penalty=config["penalty"], C=config["C"],
                                  l1_ratio=config["l1_ratio"])
    if algorithm == "svm":
        return SvmClassifier(kernel=config["kernel"], C=config["C"],
                             gamma=config["gamma"])
    if algorithm == "gbt-a":
        return GbtParams(
            booster=config["booster"], n_rounds=100, eta=config["eta"],
            reg_lambda=config["lambda"], reg_alpha=config["alpha"],
            gamma=config["gamma"], max_depth=config["max_depth"],
            min_child_weight=config["min_child_weight"],
            subsample=config["subsample"], colsample=config["colsample_bytree"],
            sample_type=config["sample_type"],
            normalize_type=config["normalize_type"],
            rate_drop=config["rate_drop"], skip_drop=config["skip_drop"],
            seed=seed)
    if algorithm == "gbt-b":
        return GbtParams(
            booster="gbtree", n_rounds=100, eta=0.1,
            reg_lambda=config["lambda_l2"], reg_alpha=config["lambda_l1"],
            gamma=0.0, max_depth=64, max_leaves=config["num_leaves"],
            min_child_weight=1e-3,
            min_child_samples=config["min_child_samples"],
            subsample=config["bagging_fraction"],
            colsample=config["feature_fraction"],
            bag_refresh=config["bagging_freq"], seed=seed)
    raise KeyError("unknown algorithm %r" % (algorithm,))


def fit_arrays(algorithm, X, y, config, seed, selected=None):
    """Fit one pipeline on raw (possibly nan-holed) arrays.

    selected indexes features after imputation and standardization; None
    means all. Raises DataError on a single-class fold.
    """
    X = np.asarray(X, np.float64)
    y = np.asarray(y, np.int64)
    classes = np.unique(y)
    if classes.size < 2:
        raise DataError("training fold has a single class: %s"
                        % classes.tolist())
    space = space_for(algorithm)
    if not space.contains({k: v for k, v in config.items()
                           if k in space.params}):
        raise ValueError("config outside the %s hyperparameter space"
                         % algorithm)

    medians = np.nanmedian(X, axis=0)
    medians = np.where(np.isnan(medians), 0.0, medians)
    Xi = np.where(np.isnan(X), medians, X)
    means = Xi.mean(axis=0)
    stds = Xi.std(axis=0)
    stds = np.where(stds == 0.0, 1.0, stds)
    Xs = (Xi - means) / stds

    if selected is None:
        selected = tuple(range(X.shape[1]))
    else:
        selected = tuple(int(j) for j in selected)
    Xf = Xs[:, list(selected)]

    clf = _build_clf(algorithm, config, seed)
    if isinstance(clf, GbtParams):
        clf = fit_gbt(Xf, y, clf)
    else:
        clf.fit(Xf, y)
    return TrainedModel(algorithm=algorithm, medians=medians, means=means,
                        stds=stds, selected=selected, clf=clf,
                        config=dict(config))


def fit(algorithm, train, config, seed, selected=None):
    """Dataset-level wrapper around fit_arrays."""
    return fit_arrays(algorithm, train.X, train.y, config, seed,
                      selected=selected)
