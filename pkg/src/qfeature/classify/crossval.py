"""Stratified k-fold cross-validation."""
import warnings
from dataclasses import dataclass, field

import numpy as np


def stratified_folds(y, folds, seed=0):
    """Assign each sample to one of ``folds`` held-out groups, class by class."""
    y = np.asarray(y)
    rng = np.random.default_rng(seed)
    assign = np.empty(len(y), dtype=int)
    offset = 0
    for cls in np.unique(y):
        idx = np.flatnonzero(y == cls)
        rng.shuffle(idx)
        assign[idx] = (np.arange(len(idx)) + offset) % folds
        offset += len(idx)
    return [np.flatnonzero(assign == f) for f in range(folds)]


@dataclass
class CVReport:
    accuracy: float
    fold_accuracies: list
    importances: np.ndarray = None
    flags: list = field(default_factory=list)

    def to_dict(self):
        out = {"accuracy": self.accuracy, "fold_accuracies": list(self.fold_accuracies)}
        if self.importances is not None:
            out["importances"] = [float(v) for v in self.importances]
        if self.flags:
            out["flags"] = list(self.flags)
        return out


def cross_validate(make_model, x, y, folds=10, seed=0):
    """Mean held-out accuracy; importances are averaged when the model has them."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y)
    accs, imps, flags = [], [], []
    for f, test in enumerate(stratified_folds(y, folds, seed)):
        train = np.setdiff1d(np.arange(len(y)), test)
        if len(np.unique(y[train])) < 2:
            warnings.warn(f"fold {f}: single-class training set, skipped")
            flags.append(f"fold {f} skipped")
            continue
        model = make_model().fit(x[train], y[train])
        accs.append(float(np.mean(model.predict(x[test]) == y[test])))
        if getattr(model, "feature_importances_", None) is not None:
            imps.append(model.feature_importances_)
        flags.extend(getattr(model, "flags", []))
    importances = None
    if imps:
        importances = np.mean(imps, axis=0)
        importances = importances / importances.sum() if importances.sum() > 0 else importances
    return CVReport(float(np.mean(accs)) if accs else float("nan"), accs, importances, flags)
