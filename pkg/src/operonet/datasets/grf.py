"""Periodic Gaussian random fields on the unit torus.

Covariance ``625 (-Laplacian + 25 I)^-2``: the Fourier mode ``k`` has variance
``625 / ((2 pi k)^2 + 25)^2``. Modes are truncated at the Nyquist frequency of
the sampling grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..rng import Xoshiro256, derive_seed

GRID = 128
K_MAX = GRID // 2


def grf_eigenvalues(k) -> np.ndarray:
    k = np.asarray(k, dtype=np.float64)
    return 625.0 / ((2.0 * np.pi * k) ** 2 + 25.0) ** 2


@dataclass(frozen=True)
class GrfSample:
    """``fourier_coefficients[j]`` is the amplitude of frequency ``j - K_MAX``."""

    fourier_coefficients: np.ndarray
    realization: np.ndarray

    @property
    def frequencies(self) -> np.ndarray:
        return np.arange(-K_MAX, K_MAX + 1)


def _draw_coefficients(rng: Xoshiro256) -> np.ndarray:
    # draw order: xi_0, then (xi_k, eta_k) for k = 1..K_MAX
    z = rng.normal(1 + 2 * K_MAX)
    lam = grf_eigenvalues(np.arange(K_MAX + 1))
    half = np.empty(K_MAX + 1, dtype=np.complex128)
    half[0] = np.sqrt(lam[0]) * z[0]
    half[1:] = np.sqrt(lam[1:]) * (z[1::2] + 1j * z[2::2]) / np.sqrt(2.0)
    return np.concatenate([np.conj(half[:0:-1]), half])


def realize(coefficients: np.ndarray, n_grid: int = GRID) -> np.ndarray:
    """Evaluate sum_k w_k exp(2 pi i k x_j) at x_j = j / n_grid."""
    half = np.asarray(coefficients)[..., K_MAX:]
    spec = np.zeros(half.shape[:-1] + (n_grid // 2 + 1,), dtype=np.complex128)
    top = min(K_MAX, n_grid // 2)
    spec[..., :top + 1] = half[..., :top + 1] * n_grid
    if top == n_grid // 2:
        # the +k and -k modes alias onto the same grid function at Nyquist
        spec[..., top] = 2.0 * half[..., top].real * n_grid
    return np.fft.irfft(spec, n=n_grid, axis=-1)


def grf_sample(seed: int) -> GrfSample:
    coeffs = _draw_coefficients(Xoshiro256(derive_seed(seed, "grf")))
    return GrfSample(coeffs, realize(coeffs))
