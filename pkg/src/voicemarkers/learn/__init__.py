"""Model layer: folds, feature selection, tuning, classifiers, nested CV."""

from .spaces import (
    Uniform, LogUniform, UniformInt, Categorical, HyperSpace,
    space_for, BORUTA_SPACE, ALGORITHMS,
)
from .folds import FoldPlan, make_fold_plan
from .forest import rf_importances
from .boruta import BorutaConfig, boruta_select
from .tpe import tpe_suggest
from .gbt import GbtParams, GbtModel, fit_gbt
from .models import TrainedModel, fit
from .nested import EvalReport, nested_cv, confusion_metrics

__all__ = [
    "Uniform", "LogUniform", "UniformInt", "Categorical", "HyperSpace",
    "space_for", "BORUTA_SPACE", "ALGORITHMS",
    "FoldPlan", "make_fold_plan",
    "rf_importances",
    "BorutaConfig", "boruta_select",
    "tpe_suggest",
    "GbtParams", "GbtModel", "fit_gbt",
    "TrainedModel", "fit",
    "EvalReport", "nested_cv", "confusion_metrics",
]
