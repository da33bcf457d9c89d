# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: per-row vector-matrix products and the xoshiro256** stream."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t

cnp.import_array()


def vecmat(const double[:, :] x, const double[:, :, :] w):
    """out[b, o] = sum_i x[b, i] * w[b, i, o]."""
    cdef Py_ssize_t nb = x.shape[0], ni = x.shape[1], no = w.shape[2]
    cdef Py_ssize_t b, i, o
    cdef double xi
    if w.shape[0] != nb or w.shape[1] != ni:
        raise ValueError("vecmat: shape mismatch %s vs %s" % ((nb, ni), (w.shape[0], w.shape[1])))
    out = np.zeros((nb, no), dtype=np.float64)
    cdef double[:, ::1] ov = out
    with nogil:
        for b in range(nb):
            for i in range(ni):
                xi = x[b, i]
                for o in range(no):
                    ov[b, o] += xi * w[b, i, o]
    return out


def vecmat_backward(const double[:, :] x, const double[:, :, :] w, const double[:, :] g):
    """Gradients of vecmat: (dx, dw) for upstream gradient g of shape (B, O)."""
    cdef Py_ssize_t nb = x.shape[0], ni = x.shape[1], no = w.shape[2]
    cdef Py_ssize_t b, i, o
    cdef double acc, xi
    dx = np.empty((nb, ni), dtype=np.float64)
    dw = np.empty((nb, ni, no), dtype=np.float64)
    cdef double[:, ::1] dxv = dx
    cdef double[:, :, ::1] dwv = dw
    with nogil:
        for b in range(nb):
            for i in range(ni):
                acc = 0.0
                xi = x[b, i]
                for o in range(no):
                    acc = acc + w[b, i, o] * g[b, o]
                    dwv[b, i, o] = xi * g[b, o]
                dxv[b, i] = acc
    return dx, dw


cdef inline uint64_t _rotl(uint64_t v, int k) nogil:
    return (v << k) | (v >> (64 - k))


def xoshiro_fill(cnp.uint64_t[::1] state, Py_ssize_t n):
    """Advance a xoshiro256** state in place and return n raw 64-bit outputs."""
    out = np.empty(n, dtype=np.uint64)
    cdef cnp.uint64_t[::1] ov = out
    cdef uint64_t s0 = state[0], s1 = state[1], s2 = state[2], s3 = state[3], t
    cdef Py_ssize_t k
    with nogil:
        for k in range(n):
            ov[k] = _rotl(s1 * 5, 7) * 9
            t = s1 << 17
            s2 ^= s0
            s3 ^= s1
            s1 ^= s2
            s0 ^= s3
            s2 ^= t
            s3 = _rotl(s3, 45)
    state[0] = s0
    state[1] = s1
    state[2] = s2
    state[3] = s3
    return out


def fisher_yates(const double[::1] u):
    """Permutation of range(len(u) + 1) driven by len(u) uniforms in [0, 1)."""
    cdef Py_ssize_t n = u.shape[0] + 1, i, j, tmp
    perm = np.arange(n, dtype=np.int64)
    cdef cnp.int64_t[::1] p = perm
    with nogil:
        for i in range(n - 1, 0, -1):
            j = <Py_ssize_t>(u[n - 1 - i] * (i + 1))
            tmp = p[i]
            p[i] = p[j]
            p[j] = tmp
    return perm
