from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def inverse_time_decay(lr0: float, decay_rate: float, step_size: int, t: int) -> float:
    """lr0 / (1 + decay_rate * floor(t / step_size))."""
    if t < 0:
        raise ValueError("epoch index must be non-negative")
    if step_size < 1:
        raise ValueError("scheduler step size must be >= 1")
    return lr0 / (1.0 + decay_rate * (t // step_size))


@dataclass
class AdamState:
    first_moment: np.ndarray
    second_moment: np.ndarray
    step_count: int = 0

    @classmethod
    def zeros(cls, n: int) -> "AdamState":
        return cls(np.zeros(n), np.zeros(n), 0)

    def __post_init__(self):
        if self.first_moment.shape != self.second_moment.shape:
            raise ValueError("Adam moment arrays differ in shape")
        if self.step_count < 0:
            raise ValueError("step_count must be >= 0")


def adam_step(params: np.ndarray, grads: np.ndarray, state: AdamState, lr: float,
              beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8) -> np.ndarray:
    """Bias-corrected Adam. Updates ``state`` in place, returns new parameters."""
    if params.shape != grads.shape or params.shape != state.first_moment.shape:
        raise ValueError(f"shape mismatch: params {params.shape}, grads {grads.shape}, "
                         f"state {state.first_moment.shape}")
    state.step_count += 1
    t = state.step_count
    state.first_moment *= beta1
    state.first_moment += (1.0 - beta1) * grads
    state.second_moment *= beta2
    state.second_moment += (1.0 - beta2) * grads * grads
    m_hat = state.first_moment / (1.0 - beta1**t)
    v_hat = state.second_moment / (1.0 - beta2**t)
    return params - lr * m_hat / (np.sqrt(v_hat) + eps)


def rel_l2(pred, truth) -> float:
    pred = np.asarray(pred, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    denom = math.sqrt(float(np.dot(truth.ravel(), truth.ravel())))
    if denom == 0.0:
        raise ZeroDivisionError("relative L2 error is undefined for a zero reference")
    diff = (pred - truth).ravel()
    return math.sqrt(float(np.dot(diff, diff))) / denom
