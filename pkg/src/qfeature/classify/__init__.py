"""Noise identification: distance ranking, peak refinement and classifiers."""
from functools import partial

from .crossval import CVReport, cross_validate, stratified_folds
from .dataset import (
    NOISE_TYPES,
    DatasetRanges,
    DatasetRecord,
    generate_dataset,
    to_arrays,
)
from .distance import (
    DistanceReport,
    ReferencePoint,
    argmin_total,
    distance_report,
    nearest_reference,
    subspace_distance,
)
from .knn import KNN
from .logistic import Logistic
from .refine import RefineResult, next_grid, refine_peak_search
from .tree import DecisionTree, TreeEnsemble


def _xy(records, target):
    if target is None:
        x, y = records
        return x, y
    return to_arrays(records, target)


def train_decision_tree(records, target=None, folds=10, seed=0, n_estimators=1):
    """Cross-validated tree accuracy and normalised Gini importances.

    ``records`` is a list of :class:`DatasetRecord` (with ``target``) or an
    ``(x, y)`` pair (with ``target=None``).
    """
    x, y = _xy(records, target)
    return cross_validate(partial(TreeEnsemble, n_estimators=n_estimators, seed=seed), x, y, folds, seed)


def train_knn(records, target=None, k=5, folds=10, seed=0):
    x, y = _xy(records, target)
    return cross_validate(partial(KNN, k=k), x, y, folds, seed)


def train_logistic(records, target=None, folds=10, seed=0, l2=1e-3):
    x, y = _xy(records, target)
    return cross_validate(partial(Logistic, l2=l2), x, y, folds, seed)


__all__ = [
    "CVReport", "DatasetRanges", "DatasetRecord", "DecisionTree", "DistanceReport", "KNN",
    "Logistic", "NOISE_TYPES", "ReferencePoint", "RefineResult", "TreeEnsemble", "argmin_total",
    "cross_validate", "distance_report", "generate_dataset", "nearest_reference", "next_grid",
    "refine_peak_search", "stratified_folds", "subspace_distance", "to_arrays",
    "train_decision_tree", "train_knn", "train_logistic",
]
