from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEGREE = 20  # number of coefficients, T_0 .. T_19
COEFF_BOUND = 0.25


@dataclass(frozen=True)
class ChebCoeffs:
    c: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.c, dtype=np.float64).reshape(-1)
        if np.any(np.abs(c) > COEFF_BOUND):
            raise ValueError("Chebyshev coefficients must lie in [-1/4, 1/4]")
        object.__setattr__(self, "c", c)


def cheb_eval(c, x):
    """sum_l c_l T_l(x) by Clenshaw's backward recurrence. x may be an array."""
    c = c.c if isinstance(c, ChebCoeffs) else np.asarray(c, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if np.any(np.abs(x) > 1.0):
        raise ValueError("Chebyshev evaluation needs |x| <= 1")
    b1 = np.zeros_like(x)
    b2 = np.zeros_like(x)
    for ck in c[:0:-1]:
        b1, b2 = ck + 2.0 * x * b1 - b2, b1
    result = c[0] + x * b1 - b2 if c.size else np.zeros_like(x)
    return float(result) if result.ndim == 0 else result


def cheb_antiderivative(c) -> np.ndarray:
    """Coefficients of the antiderivative that vanishes at x = -1.

    Uses int T_0 = T_1, int T_1 = T_2 / 4 and, for l >= 2,
    int T_l = T_{l+1} / (2(l+1)) - T_{l-1} / (2(l-1)).
    """
    c = c.c if isinstance(c, ChebCoeffs) else np.asarray(c, dtype=np.float64)
    a = np.zeros(c.size + 1)
    for l, cl in enumerate(c):
        if l == 0:
            a[1] += cl
        elif l == 1:
            a[2] += cl / 4.0
        else:
            a[l + 1] += cl / (2.0 * (l + 1))
            a[l - 1] -= cl / (2.0 * (l - 1))
    # T_k(-1) = (-1)^k
    signs = (-1.0) ** np.arange(a.size)
    a[0] = -np.dot(a[1:], signs[1:])
    return a
