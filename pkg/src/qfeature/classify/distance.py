"""Distance-based identification of an unknown noise process."""
from dataclasses import dataclass

import numpy as np

from ..qsim import OBSERVABLE_NAMES


@dataclass(frozen=True)
class ReferencePoint:
    label: str
    point: object  # QfsPoint


@dataclass(frozen=True)
class DistanceReport:
    label: str
    d_x: float
    d_y: float
    d_z: float

    @property
    def total(self):
        return (self.d_x + self.d_y) + self.d_z

    def as_row(self):
        return {"label": self.label, "d_x": self.d_x, "d_y": self.d_y, "d_z": self.d_z, "total": self.total}


def _features(p):
    return np.asarray(getattr(p, "features", p), dtype=np.float64)


def subspace_distance(cluster, ref, observable):
    """Mean Euclidean distance to ``ref`` inside one observable's 3-D block."""
    pts = np.array([_features(p) for p in cluster])
    if pts.size == 0:
        raise ValueError("empty cluster")
    i = OBSERVABLE_NAMES.index(observable)
    r = _features(ref.point if isinstance(ref, ReferencePoint) else ref)
    d = np.linalg.norm(pts[:, 3 * i : 3 * i + 3] - r[3 * i : 3 * i + 3], axis=1)
    # sort first so the mean does not depend on cluster order
    return float(np.sort(d).sum() / len(d))


def distance_report(cluster, ref):
    dx, dy, dz = (subspace_distance(cluster, ref, o) for o in OBSERVABLE_NAMES)
    return DistanceReport(ref.label, dx, dy, dz)


def argmin_total(totals):
    """Label with the smallest total; ties go to the lexicographically first.

    ``totals`` maps label -> total. Returns ``(label, tied)``.
    """
    if not totals:
        raise ValueError("no references")
    best = min(totals.values())
    winners = sorted(lbl for lbl, v in totals.items() if v == best)
    return winners[0], len(winners) > 1


def nearest_reference(cluster, refs):
    """Return ``(label, reports, tied)`` for the closest reference."""
    refs = list(refs)
    if not refs:
        raise ValueError("need at least one reference")
    reports = [distance_report(cluster, r) for r in refs]
    label, tied = argmin_total({r.label: r.total for r in reports})
    return label, reports, tied
