"""Synthetic operator datasets.

Each sample ``i`` draws from its own stream ``derive_seed(seed, name, i)``, so
datasets are pure functions of ``(n, seed)`` and any prefix of a larger dataset
equals the smaller dataset with the same seed.
"""

from __future__ import annotations

import numpy as np

from ..rng import Xoshiro256, derive_seed
from . import grf as _grf
from .burgers import burgers_solve
from .chebyshev import COEFF_BOUND, DEGREE, cheb_antiderivative, cheb_eval
from .dataset import OperatorDataset

GENERATOR_VERSION = 1

ADVECTION_GRID = 40
ADVECTION_RANGES = {"a": (0.1, 0.4), "omega": (0.2, 0.4), "h": (0.5, 1.5)}
BURGERS_NU = 0.1
BURGERS_T = 1.0


def _stream(seed, name, i) -> Xoshiro256:
    return Xoshiro256(derive_seed(seed, name, i))


def _meta(name, seed, **extra) -> dict:
    return {"name": name, "seed": int(seed), "generator_version": GENERATOR_VERSION, **extra}


def sample_cheb_coeffs(rng: Xoshiro256) -> np.ndarray:
    return rng.uniform(-COEFF_BOUND, COEFF_BOUND, DEGREE)


def gen_identity(n: int, seed: int, m: int = 50) -> OperatorDataset:
    x = np.linspace(-1.0, 1.0, m)
    inputs = np.empty((n, m))
    for i in range(n):
        inputs[i] = cheb_eval(sample_cheb_coeffs(_stream(seed, "identity", i)), x)
    return OperatorDataset(x, x, inputs, inputs.copy(), _meta("identity", seed))


def gen_differentiation(n: int, seed: int, m: int = 100) -> OperatorDataset:
    """Targets are Chebyshev samples s; inputs are their antiderivatives with u(-1) = 0."""
    x = np.linspace(-1.0, 1.0, m)
    inputs = np.empty((n, m))
    targets = np.empty((n, m))
    for i in range(n):
        c = sample_cheb_coeffs(_stream(seed, "differentiation", i))
        targets[i] = cheb_eval(c, x)
        inputs[i] = cheb_eval(cheb_antiderivative(c), x)
    return OperatorDataset(x, x, inputs, targets,
                           _meta("differentiation", seed, integration_constant="u(-1)=0"))


def rectangle(x, a, omega, h) -> np.ndarray:
    return 1.0 + h * ((x >= a) & (x <= a + omega))


def gen_advection(n: int, seed: int, m: int = ADVECTION_GRID) -> OperatorDataset:
    """Unit-speed advection on the torus from t = 0 to t = 0.5 (a half-period shift)."""
    if m % 2:
        raise ValueError("advection grid must have an even number of points")
    x = np.arange(m) / m
    inputs = np.empty((n, m))
    for i in range(n):
        rng = _stream(seed, "advection", i)
        a = rng.uniform(*ADVECTION_RANGES["a"], 1)[0]
        omega = rng.uniform(*ADVECTION_RANGES["omega"], 1)[0]
        h = rng.uniform(*ADVECTION_RANGES["h"], 1)[0]
        inputs[i] = rectangle(x, a, omega, h)
    targets = np.roll(inputs, m // 2, axis=1)
    ranges = {k: list(v) for k, v in ADVECTION_RANGES.items()}
    return OperatorDataset(x, x, inputs, targets,
                           _meta("advection", seed, rectangle_ranges=ranges, t=0.5))


def grf_inputs(n: int, seed: int, name: str = "burgers") -> np.ndarray:
    coeffs = np.stack([_grf._draw_coefficients(_stream(seed, name, i)) for i in range(n)]) \
        if n else np.zeros((0, 2 * _grf.K_MAX + 1), dtype=np.complex128)
    return _grf.realize(coeffs)


def gen_burgers(n: int, seed: int, nu: float = BURGERS_NU, t_end: float = BURGERS_T) -> OperatorDataset:
    x = np.arange(_grf.GRID) / _grf.GRID
    inputs = grf_inputs(n, seed)
    targets = burgers_solve(inputs, nu, t_end) if n else inputs.copy()
    return OperatorDataset(x, x, inputs, targets,
                           _meta("burgers", seed, nu=nu, t=t_end, dealias="2/3"))


GENERATORS = {
    "identity": gen_identity,
    "differentiation": gen_differentiation,
    "advection": gen_advection,
    "burgers": gen_burgers,
}


def generate(name: str, n: int, seed: int) -> OperatorDataset:
    try:
        gen = GENERATORS[name]
    except KeyError:
        raise ValueError(f"unknown dataset {name!r}; choose from {sorted(GENERATORS)}") from None
    return gen(n, seed)
