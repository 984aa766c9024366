"""Numpy implementations of the hot kernels.

Same call signatures as the compiled ``_ckernels`` module. Every function
here is vectorised over the batch/realisation axis; the time axis is handled
with O(log N) rounds of pairwise products.

Quaternion convention: ``q = (a, b1, b2, b3)`` stands for the SU(2) element
``a*I - 1j*(b1*X + b2*Y + b3*Z)``.
"""
import numpy as np

_EYE = np.eye(2, dtype=np.complex128)
_QUAT_ONE = np.array([1.0, 0.0, 0.0, 0.0])


def _next_pow2(n):
    return 1 << (n - 1).bit_length()


def scan_products(factors):
    """Inclusive time-ordered prefix products ``P[j] = F[j] @ ... @ F[0]``.

    Work-efficient (Blelloch) up-sweep/down-sweep over the last-but-two
    axis, padding with identities to a power of two.
    """
    f = np.asarray(factors)
    n = f.shape[-3]
    size = _next_pow2(n)
    buf = np.empty(f.shape[:-3] + (size, 2, 2), dtype=f.dtype)
    buf[..., :n, :, :] = f
    buf[..., n:, :, :] = np.eye(2, dtype=f.dtype)

    # up-sweep: each right node accumulates (right-subtree @ left-subtree)
    d = 1
    while d < size:
        left = buf[..., d - 1::2 * d, :, :]
        right = buf[..., 2 * d - 1::2 * d, :, :]
        buf[..., 2 * d - 1::2 * d, :, :] = right @ left
        d *= 2

    # down-sweep produces the exclusive scan
    buf[..., size - 1, :, :] = np.eye(2, dtype=f.dtype)
    d = size // 2
    while d >= 1:
        left_idx = slice(d - 1, None, 2 * d)
        right_idx = slice(2 * d - 1, None, 2 * d)
        left = buf[..., left_idx, :, :].copy()
        parent = buf[..., right_idx, :, :].copy()
        buf[..., left_idx, :, :] = parent
        buf[..., right_idx, :, :] = left @ parent
        d //= 2

    return f @ buf[..., :n, :, :]


def tree_reduce(factors):
    """Time-ordered product ``F[N-1] @ ... @ F[0]`` by pairwise rounds."""
    f = np.asarray(factors)
    while f.shape[-3] > 1:
        n = f.shape[-3]
        paired = f[..., 1:n - n % 2:2, :, :] @ f[..., 0:n - n % 2:2, :, :]
        if n % 2:
            paired = np.concatenate([paired, f[..., n - 1:, :, :]], axis=-3)
        f = paired
    return f[..., 0, :, :].copy()


def sequential_products(factors):
    """Step-by-step left fold; the baseline for :func:`scan_products`."""
    f = np.asarray(factors)
    out = np.empty_like(f)
    acc = np.broadcast_to(np.eye(2, dtype=f.dtype), f.shape[:-3] + (2, 2)).copy()
    for j in range(f.shape[-3]):
        acc = f[..., j, :, :] @ acc
        out[..., j, :, :] = acc
    return out


def sequential_reduce(factors):
    f = np.asarray(factors)
    acc = np.broadcast_to(np.eye(2, dtype=f.dtype), f.shape[:-3] + (2, 2)).copy()
    for j in range(f.shape[-3]):
        acc = f[..., j, :, :] @ acc
    return acc


def quat_mul(q1, q2):
    """Quaternion product matching the matrix product ``U(q1) @ U(q2)``."""
    a1 = q1[..., 0]
    a2 = q2[..., 0]
    b1 = q1[..., 1:]
    b2 = q2[..., 1:]
    out = np.empty(np.broadcast_shapes(q1.shape, q2.shape), dtype=q1.dtype)
    out[..., 0] = a1 * a2 - np.einsum("...i,...i->...", b1, b2)
    out[..., 1:] = a1[..., None] * b2 + a2[..., None] * b1 + np.cross(b1, b2)
    return out


def step_quaternions(nx, nz, beta_x, beta_z, dt):
    """Per-step factors ``exp(-1j*dt*(bx*nx + bz*nz).sigma)`` as quaternions."""
    v = beta_x[..., None] * nx + beta_z[..., None] * nz
    norm = np.sqrt(np.einsum("...i,...i->...", v, v))
    theta = norm * dt
    safe = np.where(norm > 0.0, norm, 1.0)
    scale = np.where(norm > 0.0, np.sin(theta) / safe, dt)
    q = np.empty(v.shape[:-1] + (4,), dtype=v.dtype)
    q[..., 0] = np.cos(theta)
    q[..., 1:] = scale[..., None] * v
    return q


def _quat_tree(q):
    while q.shape[-2] > 1:
        n = q.shape[-2]
        paired = quat_mul(q[..., 1:n - n % 2:2, :], q[..., 0:n - n % 2:2, :])
        if n % 2:
            paired = np.concatenate([paired, q[..., n - 1:, :]], axis=-2)
        q = paired
    return q[..., 0, :]


def ensemble_quaternions(nx, nz, beta_x, beta_z, dt, nthreads=0, chunk=256, dtype=np.float64):
    """Final interaction-picture unitary for each realisation (tree reduced).

    ``nx``/``nz`` are the (M, 3) Bloch vectors of the interaction-frame
    X and Z operators; ``beta_x``/``beta_z`` are (K, M). Returns (K, 4).
    ``nthreads`` is accepted for signature compatibility and ignored.
    ``dtype=np.float32`` runs the whole reduction in single precision.
    """
    nx = np.ascontiguousarray(nx, dtype=dtype)
    nz = np.ascontiguousarray(nz, dtype=dtype)
    beta_x = np.atleast_2d(np.asarray(beta_x, dtype=dtype))
    beta_z = np.atleast_2d(np.asarray(beta_z, dtype=dtype))
    dt = dtype(dt)
    k = beta_x.shape[0]
    out = np.empty((k, 4), dtype=dtype)
    for start in range(0, k, chunk):
        sl = slice(start, start + chunk)
        q = step_quaternions(nx, nz, beta_x[sl], beta_z[sl], dt)
        out[sl] = _quat_tree(q)
    return out


def ensemble_quaternions_sequential(nx, nz, beta_x, beta_z, dt, nthreads=0):
    """Time-step loop over the whole ensemble; the legacy baseline."""
    beta_x = np.atleast_2d(np.asarray(beta_x, dtype=np.float64))
    beta_z = np.atleast_2d(np.asarray(beta_z, dtype=np.float64))
    acc = np.tile(_QUAT_ONE, (beta_x.shape[0], 1))
    for j in range(beta_x.shape[1]):
        step = step_quaternions(nx[j], nz[j], beta_x[:, j], beta_z[:, j], dt)
        acc = quat_mul(step, acc)
    return acc
