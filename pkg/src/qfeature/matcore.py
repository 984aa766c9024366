"""2x2 complex linear algebra, ordered products and small least squares.

Matrices are numpy arrays with trailing shape (2, 2); every function accepts
a leading batch of them. Ordered products follow time ordering: the factor
with the larger index multiplies from the left.
"""
import numpy as np

from ._backend import kernels

IDENTITY = np.eye(2, dtype=np.complex128)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)

DEFAULT_TOL = 1e-9


class ContractViolation(ValueError):
    """An input broke an operation's precondition."""


class RankDeficientError(np.linalg.LinAlgError):
    """The design matrix of a least-squares problem lacks full column rank."""


def dagger(m):
    return np.conj(np.swapaxes(m, -1, -2))


def is_hermitian(m, tol=DEFAULT_TOL):
    m = np.asarray(m)
    return bool(np.all(np.linalg.norm(m - dagger(m), axis=(-2, -1)) <= tol))


def is_unitary(m, tol=DEFAULT_TOL):
    m = np.asarray(m)
    err = np.linalg.norm(m @ dagger(m) - IDENTITY, axis=(-2, -1))
    return bool(np.all(err <= tol))


def pauli_coefficients(h):
    """Split Hermitian ``h`` into ``a*I + bx*X + by*Y + bz*Z``.

    Returns ``(a, b)`` with ``b`` stacked along a trailing axis of length 3.
    """
    h = np.asarray(h)
    a = 0.5 * (h[..., 0, 0] + h[..., 1, 1]).real
    b = np.stack(
        [
            0.5 * (h[..., 0, 1] + h[..., 1, 0]).real,
            0.5 * (h[..., 1, 0] - h[..., 0, 1]).imag,
            0.5 * (h[..., 0, 0] - h[..., 1, 1]).real,
        ],
        axis=-1,
    )
    return a, b


def from_pauli(a, b):
    """Inverse of :func:`pauli_coefficients`."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    out = np.empty(np.broadcast_shapes(a.shape, b.shape[:-1]) + (2, 2), dtype=np.complex128)
    out[..., 0, 0] = a + b[..., 2]
    out[..., 1, 1] = a - b[..., 2]
    out[..., 0, 1] = b[..., 0] - 1j * b[..., 1]
    out[..., 1, 0] = b[..., 0] + 1j * b[..., 1]
    return out


def expm_skew(h, dt, check=True):
    """Exact ``exp(-1j*h*dt)`` for Hermitian 2x2 ``h`` (batched).

    Uses ``h = a*I + b.sigma`` so that
    ``exp(-1j*h*dt) = exp(-1j*a*dt) * (cos(|b|dt) I - 1j*sin(|b|dt) bhat.sigma)``.
    Negative ``dt`` gives the inverse propagator.
    """
    h = np.asarray(h)
    if check and not is_hermitian(h, 1e-10):
        raise ContractViolation("expm_skew needs a Hermitian generator")
    a, b = pauli_coefficients(h)
    dt = np.asarray(dt, dtype=np.float64)
    norm = np.sqrt(np.einsum("...i,...i->...", b, b))
    theta = norm * dt
    nz = norm > 0.0
    scale = np.where(nz, np.sin(theta) / np.where(nz, norm, 1.0), dt)
    s = scale[..., None] * b
    c = np.cos(theta)
    out = np.empty(np.broadcast_shapes(a.shape, dt.shape) + (2, 2), dtype=np.complex128)
    out[..., 0, 0] = c - 1j * s[..., 2]
    out[..., 1, 1] = c + 1j * s[..., 2]
    out[..., 0, 1] = -1j * s[..., 0] - s[..., 1]
    out[..., 1, 0] = -1j * s[..., 0] + s[..., 1]
    return np.exp(-1j * a * dt)[..., None, None] * out


def _as_factor_stack(factors):
    f = np.asarray(factors, dtype=np.complex128)
    if f.ndim != 3 or f.shape[1:] != (2, 2):
        raise ContractViolation("expected a sequence of 2x2 matrices")
    if f.shape[0] == 0:
        raise ContractViolation("empty factor list")
    return f


def prefix_scan_products(factors):
    """Inclusive products ``P[j] = F[j] @ ... @ F[0]`` via a work-efficient scan."""
    return kernels.scan_products(_as_factor_stack(factors))


def tree_reduce_product(factors):
    """``F[N-1] @ ... @ F[0]`` by a pairwise binary tree."""
    return kernels.tree_reduce(_as_factor_stack(factors))


def sequential_fold(factors):
    """Step-by-step prefix products; the reference for the scan."""
    return kernels.sequential_products(_as_factor_stack(factors))


def bloch_vectors(u, op):
    """Pauli coefficients of ``U^dag op U`` for traceless Hermitian ``op``."""
    return pauli_coefficients(dagger(u) @ op @ u)[1]


def quat_to_matrix(q):
    """SU(2) matrix ``a*I - 1j*(b . sigma)`` from quaternions ``(a, b1, b2, b3)``."""
    q = np.asarray(q, dtype=np.float64)
    a, b1, b2, b3 = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    out = np.empty(q.shape[:-1] + (2, 2), dtype=np.complex128)
    out[..., 0, 0] = a - 1j * b3
    out[..., 0, 1] = -1j * b1 - b2
    out[..., 1, 0] = -1j * b1 + b2
    out[..., 1, 1] = a + 1j * b3
    return out


def _rank_check(r, tol):
    diag = np.abs(np.diagonal(r, axis1=-2, axis2=-1))
    scale = np.max(diag, axis=-1, keepdims=True)
    bad = (scale[..., 0] == 0.0) | np.any(diag <= tol * np.maximum(scale, 1e-300), axis=-1)
    if np.any(bad):
        raise RankDeficientError("design matrix is rank deficient")


def lstsq_solve(design, rhs, rank_tol=1e-10):
    """Least-squares solution of ``design @ x = rhs`` by Householder QR.

    ``rhs`` may carry extra columns, each solved independently. A design
    without full column rank raises :class:`RankDeficientError`.
    """
    a = np.asarray(design, dtype=np.float64)
    y = np.asarray(rhs, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] < a.shape[1]:
        raise ContractViolation("design must be a tall 2-D matrix")
    if y.shape[0] != a.shape[0]:
        raise ContractViolation("rhs length does not match design rows")
    q, r = np.linalg.qr(a)
    _rank_check(r, rank_tol)
    return np.linalg.solve(r, q.T @ y)


def lstsq_solve_batch(design, rhs, rank_tol=1e-10):
    """Batched :func:`lstsq_solve` over stacks ``(B, m, n)`` and ``(B, m, p)``."""
    a = np.asarray(design, dtype=np.float64)
    y = np.asarray(rhs, dtype=np.float64)
    q, r = np.linalg.qr(a)
    _rank_check(r, rank_tol)
    return np.linalg.solve(r, np.swapaxes(q, -1, -2) @ y)
