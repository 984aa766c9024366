# cython: language_level=3
"""Compiled versions of the kernels in ``_pykernels``.

2x2 complex matrices are stored row-major as four ``double complex``;
SU(2) elements are quaternions ``(a, b1, b2, b3)`` meaning
``a*I - 1j*(b . sigma)``. The ensemble kernels run realisations in
parallel with OpenMP; the per-realisation reduction order is fixed so the
result does not depend on the thread count.
"""
import numpy as np

cimport cython
cimport openmp
from cython.parallel cimport parallel, prange
from libc.math cimport cos, sin, sqrt
from libc.stdlib cimport free, malloc
from libc.string cimport memcpy

ctypedef double complex cplx


cdef inline void _mm(const cplx* a, const cplx* b, cplx* out) noexcept nogil:
    # out = a @ b; out may alias neither input
    out[0] = a[0] * b[0] + a[1] * b[2]
    out[1] = a[0] * b[1] + a[1] * b[3]
    out[2] = a[2] * b[0] + a[3] * b[2]
    out[3] = a[2] * b[1] + a[3] * b[3]


cdef inline void _mm_inplace_right(const cplx* a, cplx* b) noexcept nogil:
    # b <- a @ b
    cdef cplx t[4]
    _mm(a, b, t)
    b[0] = t[0]
    b[1] = t[1]
    b[2] = t[2]
    b[3] = t[3]


cdef inline void _set_eye(cplx* m) noexcept nogil:
    m[0] = 1.0
    m[1] = 0.0
    m[2] = 0.0
    m[3] = 1.0


cdef inline void _qmul(const double* p, const double* q, double* out) noexcept nogil:
    # out = p * q (matrix order: U(p) @ U(q)); out may alias q
    cdef double a = p[0] * q[0] - p[1] * q[1] - p[2] * q[2] - p[3] * q[3]
    cdef double b1 = p[0] * q[1] + q[0] * p[1] + p[2] * q[3] - p[3] * q[2]
    cdef double b2 = p[0] * q[2] + q[0] * p[2] + p[3] * q[1] - p[1] * q[3]
    cdef double b3 = p[0] * q[3] + q[0] * p[3] + p[1] * q[2] - p[2] * q[1]
    out[0] = a
    out[1] = b1
    out[2] = b2
    out[3] = b3


cdef inline void _step_quat(const double* nx, const double* nz, double bx,
                            double bz, double dt, double* q) noexcept nogil:
    cdef double vx = bx * nx[0] + bz * nz[0]
    cdef double vy = bx * nx[1] + bz * nz[1]
    cdef double vz = bx * nx[2] + bz * nz[2]
    cdef double norm = sqrt(vx * vx + vy * vy + vz * vz)
    cdef double theta = norm * dt
    cdef double scale
    if norm > 0.0:
        scale = sin(theta) / norm
    else:
        scale = dt
    q[0] = cos(theta)
    q[1] = scale * vx
    q[2] = scale * vy
    q[3] = scale * vz


cdef int _resolve_threads(int nthreads) noexcept nogil:
    if nthreads <= 0:
        return openmp.omp_get_max_threads()
    return nthreads


cdef inline void _up(const cplx* left, cplx* right) noexcept nogil:
    # right <- right @ left
    cdef cplx t[4]
    _mm(right, left, t)
    right[0] = t[0]
    right[1] = t[1]
    right[2] = t[2]
    right[3] = t[3]


def scan_products(factors):
    """Inclusive prefix products ``F[j] @ ... @ F[0]`` (Blelloch scan)."""
    cdef cplx[:, :, ::1] f = np.ascontiguousarray(factors, dtype=np.complex128)
    cdef Py_ssize_t n = f.shape[0]
    cdef Py_ssize_t size = 1
    while size < n:
        size *= 2
    buf_arr = np.empty((size, 2, 2), dtype=np.complex128)
    cdef cplx[:, :, ::1] buf = buf_arr
    out_arr = np.empty((n, 2, 2), dtype=np.complex128)
    cdef cplx[:, :, ::1] out = out_arr
    cdef Py_ssize_t i, d
    cdef cplx left[4]
    cdef cplx parent[4]
    with nogil:
        for i in range(size):
            if i < n:
                memcpy(&buf[i, 0, 0], &f[i, 0, 0], 4 * sizeof(cplx))
            else:
                _set_eye(&buf[i, 0, 0])
        d = 1
        while d < size:
            i = 2 * d - 1
            while i < size:
                _up(&buf[i - d, 0, 0], &buf[i, 0, 0])
                i += 2 * d
            d *= 2
        _set_eye(&buf[size - 1, 0, 0])
        d = size // 2
        while d >= 1:
            i = 2 * d - 1
            while i < size:
                memcpy(left, &buf[i - d, 0, 0], 4 * sizeof(cplx))
                memcpy(parent, &buf[i, 0, 0], 4 * sizeof(cplx))
                memcpy(&buf[i - d, 0, 0], parent, 4 * sizeof(cplx))
                _mm(left, parent, &buf[i, 0, 0])
                i += 2 * d
            d //= 2
        for i in range(n):
            _mm(&f[i, 0, 0], &buf[i, 0, 0], &out[i, 0, 0])
    return out_arr


cdef void _tree_inplace(cplx* buf, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t stride = 1
    cdef Py_ssize_t i
    while stride < n:
        i = 0
        while i + stride < n:
            # buf[i] <- buf[i + stride] @ buf[i]
            _mm_inplace_right(&buf[4 * (i + stride)], &buf[4 * i])
            i += 2 * stride
        stride *= 2


def tree_reduce(factors):
    """Time-ordered product ``F[N-1] @ ... @ F[0]`` for a (B, N, 2, 2) stack."""
    arr = np.ascontiguousarray(factors, dtype=np.complex128)
    squeeze = arr.ndim == 3
    if squeeze:
        arr = arr[None]
    cdef cplx[:, :, :, ::1] f = arr
    cdef Py_ssize_t nb = f.shape[0]
    cdef Py_ssize_t n = f.shape[1]
    out_arr = np.empty((nb, 2, 2), dtype=np.complex128)
    cdef cplx[:, :, ::1] out = out_arr
    cdef cplx* buf = <cplx*> malloc(4 * n * sizeof(cplx))
    if buf == NULL:
        raise MemoryError()
    cdef Py_ssize_t b
    try:
        with nogil:
            for b in range(nb):
                memcpy(buf, &f[b, 0, 0, 0], 4 * n * sizeof(cplx))
                _tree_inplace(buf, n)
                memcpy(&out[b, 0, 0], buf, 4 * sizeof(cplx))
    finally:
        free(buf)
    return out_arr[0] if squeeze else out_arr


def sequential_products(factors):
    cdef cplx[:, :, ::1] f = np.ascontiguousarray(factors, dtype=np.complex128)
    cdef Py_ssize_t n = f.shape[0]
    out_arr = np.empty((n, 2, 2), dtype=np.complex128)
    cdef cplx[:, :, ::1] out = out_arr
    cdef cplx acc[4]
    cdef Py_ssize_t j
    with nogil:
        _set_eye(acc)
        for j in range(n):
            _mm_inplace_right(&f[j, 0, 0], acc)
            memcpy(&out[j, 0, 0], acc, 4 * sizeof(cplx))
    return out_arr


def sequential_reduce(factors):
    arr = np.ascontiguousarray(factors, dtype=np.complex128)
    squeeze = arr.ndim == 3
    if squeeze:
        arr = arr[None]
    cdef cplx[:, :, :, ::1] f = arr
    cdef Py_ssize_t nb = f.shape[0]
    cdef Py_ssize_t n = f.shape[1]
    out_arr = np.empty((nb, 2, 2), dtype=np.complex128)
    cdef cplx[:, :, ::1] out = out_arr
    cdef cplx acc[4]
    cdef Py_ssize_t b, j
    with nogil:
        for b in range(nb):
            _set_eye(acc)
            for j in range(n):
                _mm_inplace_right(&f[b, j, 0, 0], acc)
            memcpy(&out[b, 0, 0], acc, 4 * sizeof(cplx))
    return out_arr[0] if squeeze else out_arr


@cython.boundscheck(False)
def ensemble_quaternions(nx, nz, beta_x, beta_z, double dt, int nthreads=0):
    """Tree-reduced interaction unitary per realisation, as (K, 4) quaternions."""
    cdef double[:, ::1] vnx = np.ascontiguousarray(nx, dtype=np.float64)
    cdef double[:, ::1] vnz = np.ascontiguousarray(nz, dtype=np.float64)
    cdef double[:, ::1] bx = np.ascontiguousarray(np.atleast_2d(beta_x), dtype=np.float64)
    cdef double[:, ::1] bz = np.ascontiguousarray(np.atleast_2d(beta_z), dtype=np.float64)
    cdef Py_ssize_t k_total = bx.shape[0]
    cdef Py_ssize_t m = bx.shape[1]
    out_arr = np.empty((k_total, 4), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef int threads = _resolve_threads(nthreads)
    cdef Py_ssize_t k, j, stride, i
    cdef double* buf
    if m == 0:
        out_arr[:] = (1.0, 0.0, 0.0, 0.0)
        return out_arr
    with nogil, parallel(num_threads=threads):
        buf = <double*> malloc(4 * m * sizeof(double))
        for k in prange(k_total, schedule="static"):
            for j in range(m):
                _step_quat(&vnx[j, 0], &vnz[j, 0], bx[k, j], bz[k, j], dt, &buf[4 * j])
            stride = 1
            while stride < m:
                i = 0
                while i + stride < m:
                    _qmul(&buf[4 * (i + stride)], &buf[4 * i], &buf[4 * i])
                    i = i + 2 * stride
                stride = stride * 2
            out[k, 0] = buf[0]
            out[k, 1] = buf[1]
            out[k, 2] = buf[2]
            out[k, 3] = buf[3]
        free(buf)
    return out_arr


def ensemble_quaternions_sequential(nx, nz, beta_x, beta_z, double dt, int nthreads=0):
    """Sequential fold per realisation; baseline for the tree kernel."""
    cdef double[:, ::1] vnx = np.ascontiguousarray(nx, dtype=np.float64)
    cdef double[:, ::1] vnz = np.ascontiguousarray(nz, dtype=np.float64)
    cdef double[:, ::1] bx = np.ascontiguousarray(np.atleast_2d(beta_x), dtype=np.float64)
    cdef double[:, ::1] bz = np.ascontiguousarray(np.atleast_2d(beta_z), dtype=np.float64)
    cdef Py_ssize_t k_total = bx.shape[0]
    cdef Py_ssize_t m = bx.shape[1]
    out_arr = np.empty((k_total, 4), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef int threads = _resolve_threads(nthreads)
    cdef Py_ssize_t k, j
    cdef double* work
    with nogil, parallel(num_threads=threads):
        # work[0:4] is the step factor, work[4:8] the accumulator
        work = <double*> malloc(8 * sizeof(double))
        for k in prange(k_total, schedule="static"):
            work[4] = 1.0
            work[5] = 0.0
            work[6] = 0.0
            work[7] = 0.0
            for j in range(m):
                _step_quat(&vnx[j, 0], &vnz[j, 0], bx[k, j], bz[k, j], dt, work)
                _qmul(work, &work[4], &work[4])
            out[k, 0] = work[4]
            out[k, 1] = work[5]
            out[k, 2] = work[6]
            out[k, 3] = work[7]
        free(work)
    return out_arr
