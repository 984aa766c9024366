"""Quantum feature space: parameters of the noise operators and their extraction.

A traceless Hermitian noise operator is written ``alpha X + beta Y + gamma Z``
and an evolved state ``U rho U^dag`` as ``[[a, b - ic], [b + ic, 1 - a]]``.
Their overlap is ``2 b alpha + 2 c beta + (2a - 1) gamma``, so the six Pauli
eigenstates give an over-determined 6x3 system per observable.
"""
import csv
from dataclasses import dataclass, field

import numpy as np

from . import matcore as mc
from . import qsim

FEATURE_NAMES = tuple(
    f"{p}_{o}" for o in qsim.OBSERVABLE_NAMES for p in ("alpha", "beta", "gamma")
)
IDENTITY_POINT = np.array([1.0, 0, 0, 0, 1, 0, 0, 0, 1])


@dataclass(frozen=True)
class OtildeParams:
    alpha: float
    beta: float
    gamma: float

    def as_array(self):
        return np.array([self.alpha, self.beta, self.gamma])

    def to_matrix(self):
        return self.alpha * mc.SIGMA_X + self.beta * mc.SIGMA_Y + self.gamma * mc.SIGMA_Z


@dataclass(frozen=True)
class EvolvedStateParams:
    a: float
    b: float
    c: float

    def to_matrix(self):
        return np.array([[self.a, self.b - 1j * self.c], [self.b + 1j * self.c, 1 - self.a]])

    def is_psd(self, tol=1e-12):
        return self.b**2 + self.c**2 <= self.a * (1 - self.a) + tol


@dataclass
class QfsPoint:
    features: np.ndarray
    labels: dict = field(default_factory=dict)

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64).reshape(9)

    def subspace(self, observable):
        i = qsim.OBSERVABLE_NAMES.index(observable)
        return self.features[3 * i : 3 * i + 3]

    def clipped(self):
        """Coordinates clamped to [-1, 1]; for reporting only."""
        return np.clip(self.features, -1.0, 1.0)


def params_from_otilde(o_tilde, tol=mc.DEFAULT_TOL):
    o = np.asarray(o_tilde)
    if not mc.is_hermitian(o, tol) or abs(np.trace(o)) > tol:
        raise mc.ContractViolation("noise operator must be Hermitian and traceless")
    return OtildeParams(alpha=float(o[1, 0].real), beta=float(o[1, 0].imag), gamma=float(o[0, 0].real))


def point_from_otilde(o_tildes, labels=None):
    feats = np.concatenate([params_from_otilde(o).as_array() for o in o_tildes])
    return QfsPoint(feats, dict(labels or {}))


def state_params(u_ctrl_T, rho):
    s = qsim.evolved_state(u_ctrl_T, rho)
    return EvolvedStateParams(float(s[0, 0].real), float(s[1, 0].real), float(s[1, 0].imag))


def scalar_expectation(s, p):
    return 2 * s.b * p.alpha + 2 * s.c * p.beta + (2 * s.a - 1) * p.gamma


def build_design_matrix(states):
    """Rows ``[2b, 2c, 2a - 1]`` in state order (x+, x-, y+, y-, z+, z-)."""
    states = list(states)
    if len(states) != 6:
        raise ValueError("expected six evolved states")
    return np.array([[2 * s.b, 2 * s.c, 2 * s.a - 1] for s in states])


def design_matrix_for(u_ctrl_T):
    return build_design_matrix(state_params(u_ctrl_T, rho) for rho in qsim.INITIAL_STATES)


def _design_batch(u_ctrl_T):
    """Design matrices for a stack of control unitaries, (B, 6, 3)."""
    rho = np.stack(qsim.INITIAL_STATES)
    u = np.asarray(u_ctrl_T)[:, None]
    s = u @ rho @ mc.dagger(u)
    return np.stack([2 * s[..., 1, 0].real, 2 * s[..., 1, 0].imag, 2 * s[..., 0, 0].real - 1], axis=-1)


def extract_qfs(expectations, u_ctrl_T, labels=None, return_residual=False):
    """Least-squares QFS point from a (6, 3) expectation table."""
    e = np.asarray(expectations, dtype=np.float64).reshape(6, 3)
    a = design_matrix_for(u_ctrl_T)
    x = mc.lstsq_solve(a, e)
    point = QfsPoint(x.T.reshape(9), dict(labels or {}))
    if return_residual:
        return point, float(np.linalg.norm(a @ x - e))
    return point


def extract_qfs_batch(expectations, u_ctrl_T):
    """Vectorised extraction: (B, 6, 3) expectations -> (B, 9) features."""
    e = np.asarray(expectations, dtype=np.float64)
    u = np.asarray(u_ctrl_T)
    if u.ndim == 2:
        a = np.broadcast_to(design_matrix_for(u), (e.shape[0], 6, 3))
    else:
        a = _design_batch(u)
    x = mc.lstsq_solve_batch(a, e)
    return np.swapaxes(x, -1, -2).reshape(e.shape[0], 9)


def simulate_point(cfg, fld, model, master_seed, labels=None, backend=None):
    """Full pipeline: ensemble evolution, 18 expectations, least-squares fit."""
    res = qsim.ensemble_otilde(cfg, fld, model, master_seed, backend)
    point = extract_qfs(qsim.expectation_set(res), res.u_ctrl_final, labels)
    return point


def write_csv(path, points, label_fields=None):
    points = list(points)
    if label_fields is None:
        label_fields = sorted({k for p in points for k in p.labels})
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(list(label_fields) + list(FEATURE_NAMES))
        for p in points:
            w.writerow([p.labels.get(k, "") for k in label_fields] + [repr(float(v)) for v in p.features])


def read_csv(path):
    """Inverse of :func:`write_csv`. Raises ``ValueError`` naming the bad cell."""
    points = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        missing = [n for n in FEATURE_NAMES if n not in header]
        if missing:
            raise ValueError(f"{path}: missing columns {missing}")
        cols = [header.index(n) for n in FEATURE_NAMES]
        label_cols = [(i, h) for i, h in enumerate(header) if h not in FEATURE_NAMES]
        for rowno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ValueError(f"{path}: row {rowno} has {len(row)} fields, expected {len(header)}")
            feats = []
            for c in cols:
                try:
                    feats.append(float(row[c]))
                except ValueError:
                    raise ValueError(f"{path}: row {rowno}, column {header[c]!r}: not a number") from None
            points.append(QfsPoint(np.array(feats), {h: row[i] for i, h in label_cols}))
    return points
