"""Trotterised evolution of a driven qubit under classical noise.

The control part ``H_ctrl = Omega Z/2 + sum_j f_j sigma_j / 2`` is
exponentiated step by step and accumulated with a prefix scan. Noise enters
through the interaction-frame generator ``U_ctrl^dag H_noise U_ctrl``, whose
step factors are reduced to the final-time unitary with a binary tree.
Ensemble averages use fixed pairwise summation so that results never depend
on batching or thread count.
"""
import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from . import matcore as mc
from . import noisegen as ng
from . import _pykernels
from ._backend import kernels

OBSERVABLES = (mc.SIGMA_X, mc.SIGMA_Y, mc.SIGMA_Z)
OBSERVABLE_NAMES = ("x", "y", "z")
STATE_NAMES = ("x+", "x-", "y+", "y-", "z+", "z-")


def _pauli_state(op, sign):
    return 0.5 * (mc.IDENTITY + sign * op)


INITIAL_STATES = tuple(_pauli_state(op, s) for op in mc.PAULIS for s in (1, -1))


@dataclass(frozen=True)
class SimConfig:
    grid: ng.TimeGrid = field(default_factory=ng.TimeGrid)
    omega: float = 12.0
    realisations: int = 2000
    nthreads: int = 0
    precision: str = "double"
    chunk: int = 500

    def __post_init__(self):
        if self.realisations < 1:
            raise ValueError("realisations must be at least 1")
        if self.precision not in ("double", "single"):
            raise ValueError("precision must be 'double' or 'single'")


@dataclass
class EvolutionResult:
    u_ctrl_final: np.ndarray
    u_tilde_I: np.ndarray
    o_tilde: np.ndarray
    metadata: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "u_ctrl_final": _mat_to_list(self.u_ctrl_final),
            "o_tilde": {n: _mat_to_list(o) for n, o in zip(OBSERVABLE_NAMES, self.o_tilde)},
            "metadata": self.metadata,
        }

    def to_json(self, path=None):
        text = json.dumps(self.to_dict(), indent=2, sort_keys=True)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text + "\n")
        return text


def _mat_to_list(m):
    return [[float(z.real), float(z.imag)] for z in np.asarray(m).reshape(-1)]


def mat_from_list(entries):
    return np.array([complex(re, im) for re, im in entries]).reshape(2, 2)


def pairwise_sum(a, axis=0):
    """Sum along ``axis`` with a fixed binary-tree association order."""
    a = np.moveaxis(np.asarray(a), axis, 0)
    if a.shape[0] == 0:
        return np.zeros(a.shape[1:], dtype=a.dtype)
    while a.shape[0] > 1:
        n = a.shape[0]
        head = a[0 : n - n % 2 : 2] + a[1 : n - n % 2 : 2]
        a = np.concatenate([head, a[n - 1 :]], axis=0) if n % 2 else head
    return a[0]


def pairwise_mean(a, axis=0):
    a = np.asarray(a)
    return pairwise_sum(a, axis) / a.shape[axis]


def step_hamiltonians(fld, noise, cfg):
    """Per-step control and noise Hamiltonians.

    ``noise`` may hold a batch of realisations, giving ``(K, M, 2, 2)``
    noise Hamiltonians.
    """
    m = len(fld)
    if noise.beta_x.shape[-1] != m or m != cfg.grid.num_steps:
        raise ValueError("field, noise and grid lengths differ")
    f = fld.as_array()
    h_ctrl = 0.5 * cfg.omega * mc.SIGMA_Z + 0.5 * np.einsum("ja,abc->jbc", f, np.stack(mc.PAULIS))
    h_noise = noise.beta_x[..., None, None] * mc.SIGMA_X + noise.beta_z[..., None, None] * mc.SIGMA_Z
    return h_ctrl, h_noise


def control_unitaries(h_ctrl, dt):
    """``U_ctrl(t_j)`` for every step (inclusive prefix products)."""
    return mc.prefix_scan_products(mc.expm_skew(h_ctrl, dt))


def interaction_hamiltonians(u_ctrl, h_noise):
    return mc.dagger(u_ctrl) @ h_noise @ u_ctrl


def interaction_unitary(u_ctrl, h_noise, dt):
    """Final-time ``U_I(T)``, tree reduced; ``h_noise`` may be batched."""
    factors = mc.expm_skew(interaction_hamiltonians(u_ctrl, h_noise), dt, check=False)
    if factors.ndim == 3:
        return mc.tree_reduce_product(factors)
    return kernels.tree_reduce(np.ascontiguousarray(factors))


def modified_interaction_unitary(u_ctrl_T, u_I_T):
    """``U_ctrl U_I U_ctrl^dag``, so that ``U_ctrl U_I = U~_I U_ctrl``."""
    return u_ctrl_T @ u_I_T @ mc.dagger(u_ctrl_T)


def interaction_frame_axes(u_ctrl):
    """Bloch vectors of ``U^dag X U`` and ``U^dag Z U`` per step, each (M, 3)."""
    return mc.bloch_vectors(u_ctrl, mc.SIGMA_X), mc.bloch_vectors(u_ctrl, mc.SIGMA_Z)


def ensemble_interaction_unitaries(u_ctrl, noise, dt, nthreads=0, precision="double", backend=None):
    """``U_I(T)`` for each realisation in ``noise`` as (K, 2, 2) matrices.

    With ``H_noise = bx X + bz Z`` the interaction generator is
    ``(bx n_x + bz n_z) . sigma``, so each step is an SU(2) rotation and the
    tree reduction runs on quaternions.
    """
    k = backend or kernels
    nx, nz = interaction_frame_axes(u_ctrl)
    bx = np.atleast_2d(noise.beta_x)
    bz = np.atleast_2d(noise.beta_z)
    if precision == "single":
        q = _pykernels.ensemble_quaternions(nx, nz, bx, bz, dt, dtype=np.float32)
    else:
        q = k.ensemble_quaternions(nx, nz, bx, bz, dt, nthreads)
    return mc.quat_to_matrix(q)


def config_hash(obj):
    text = json.dumps(obj, sort_keys=True, default=str)
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def ensemble_otilde(cfg, fld, model, master_seed, backend=None):
    """Ensemble noise operators ``<U~^dag O U~>`` for O in (X, Y, Z)."""
    grid = cfg.grid
    h_ctrl = step_hamiltonians(fld, ng.NoiseRealization.from_x(np.zeros(len(fld))), cfg)[0]
    u_ctrl = control_unitaries(h_ctrl, grid.dt)
    u_T = u_ctrl[-1]
    u_tilde = np.empty((cfg.realisations, 2, 2), dtype=np.complex128)
    for start in range(0, cfg.realisations, cfg.chunk):
        idx = np.arange(start, min(start + cfg.chunk, cfg.realisations))
        noise = ng.NoiseRealization.from_x(ng.draw_x(model, grid, master_seed, idx))
        u_I = ensemble_interaction_unitaries(u_ctrl, noise, grid.dt, cfg.nthreads, cfg.precision, backend)
        u_tilde[idx] = modified_interaction_unitary(u_T, u_I)
    o_tilde = otilde_from_unitaries(u_tilde)
    meta = {
        "master_seed": int(master_seed),
        "noise": model.label,
        "config_hash": config_hash({"cfg": repr(cfg), "model": repr(model), "seed": int(master_seed)}),
    }
    return EvolutionResult(u_T, u_tilde, o_tilde, meta)


def otilde_from_unitaries(u_tilde):
    ud = mc.dagger(u_tilde)
    return np.stack([pairwise_mean(ud @ o @ u_tilde) for o in OBSERVABLES])


def is_density_matrix(rho, tol=mc.DEFAULT_TOL):
    rho = np.asarray(rho)
    if rho.shape != (2, 2) or not mc.is_hermitian(rho, tol):
        return False
    if abs(np.trace(rho) - 1) > tol:
        return False
    return bool(np.linalg.eigvalsh(rho).min() >= -tol)


def evolved_state(u_ctrl_T, rho):
    if not is_density_matrix(rho):
        raise mc.ContractViolation("rho is not a density matrix")
    return u_ctrl_T @ rho @ mc.dagger(u_ctrl_T)


def expectation(u_ctrl_T, rho, o_tilde):
    """``Tr[U rho U^dag O~]``."""
    return float(np.trace(evolved_state(u_ctrl_T, rho) @ o_tilde).real)


def expectation_set(result):
    """The 18 expectations as a (6 states, 3 observables) array."""
    out = np.empty((6, 3))
    for i, rho in enumerate(INITIAL_STATES):
        for j, o in enumerate(result.o_tilde):
            out[i, j] = expectation(result.u_ctrl_final, rho, o)
    return out


def total_unitaries(fld, noise, cfg):
    """Final unitary from Trotterising the full Hamiltonian (batched)."""
    h_ctrl, h_noise = step_hamiltonians(fld, noise, cfg)
    factors = mc.expm_skew(h_ctrl + h_noise, cfg.grid.dt, check=False)
    if factors.ndim == 3:
        return mc.tree_reduce_product(factors)
    return kernels.tree_reduce(np.ascontiguousarray(factors))


def decomposition_error(fld, noise, cfg):
    """``||U_total - U_ctrl U_I||_F`` for a single realisation."""
    h_ctrl, h_noise = step_hamiltonians(fld, noise, cfg)
    u_ctrl = control_unitaries(h_ctrl, cfg.grid.dt)
    u_I = interaction_unitary(u_ctrl, h_noise, cfg.grid.dt)
    u_tot = total_unitaries(fld, noise, cfg)
    return float(np.linalg.norm(u_tot - u_ctrl[-1] @ u_I))


def direct_expectation(cfg, fld, model, rho, obs, master_seed, return_stderr=False):
    """Monte-Carlo ``<Tr[U rho U^dag O]>`` with the full Hamiltonian."""
    if not is_density_matrix(rho):
        raise mc.ContractViolation("rho is not a density matrix")
    vals = []
    for start in range(0, cfg.realisations, cfg.chunk):
        idx = np.arange(start, min(start + cfg.chunk, cfg.realisations))
        noise = ng.NoiseRealization.from_x(ng.draw_x(model, cfg.grid, master_seed, idx))
        u = total_unitaries(fld, noise, cfg)
        vals.append(np.trace(u @ rho @ mc.dagger(u) @ obs, axis1=-2, axis2=-1).real)
    vals = np.concatenate(vals)
    mean = float(pairwise_mean(vals))
    if return_stderr:
        se = float(vals.std(ddof=1) / np.sqrt(len(vals))) if len(vals) > 1 else 0.0
        return mean, se
    return mean
