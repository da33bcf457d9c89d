"""Pure-Python/numpy fallback for the compiled kernels. Same signatures, same results."""

import numpy as np

_MASK = (1 << 64) - 1


def vecmat(x, w):
    """out[b, o] = sum_i x[b, i] * w[b, i, o]."""
    x = np.asarray(x, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    if w.ndim != 3 or x.ndim != 2 or w.shape[:2] != x.shape:
        raise ValueError(f"vecmat: shape mismatch {x.shape} vs {w.shape[:2]}")
    # accumulate over i in order so results match the compiled loop bit for bit
    out = np.zeros((x.shape[0], w.shape[2]))
    for i in range(x.shape[1]):
        out += x[:, i, None] * w[:, i, :]
    return out


def vecmat_backward(x, w, g):
    x = np.asarray(x, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    dw = x[:, :, None] * g[:, None, :]
    dx = np.zeros(x.shape)
    for o in range(w.shape[2]):
        dx += w[:, :, o] * g[:, o, None]
    return dx, dw


def _rotl(v, k):
    return ((v << k) | (v >> (64 - k))) & _MASK


def xoshiro_fill(state, n):
    s0, s1, s2, s3 = (int(v) for v in state)
    out = np.empty(n, dtype=np.uint64)
    for k in range(n):
        out[k] = (_rotl((s1 * 5) & _MASK, 7) * 9) & _MASK
        t = (s1 << 17) & _MASK
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
    state[:] = np.array([s0, s1, s2, s3], dtype=np.uint64)
    return out


def fisher_yates(u):
    n = len(u) + 1
    perm = np.arange(n, dtype=np.int64)
    for i in range(n - 1, 0, -1):
        j = int(u[n - 1 - i] * (i + 1))
        perm[i], perm[j] = perm[j], perm[i]
    return perm
