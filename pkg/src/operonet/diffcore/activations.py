from __future__ import annotations

from dataclasses import dataclass

import numpy as np

KINDS = ("tanh", "relu", "prelu", "identity")


@dataclass(frozen=True)
class Activation:
    """Pointwise nonlinearity. ``prelu_slope`` is the initial value of the
    trainable slope and must be given iff ``kind == "prelu"``."""

    kind: str = "tanh"
    prelu_slope: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown activation {self.kind!r}; expected one of {KINDS}")
        if self.kind == "prelu" and self.prelu_slope is None:
            object.__setattr__(self, "prelu_slope", 0.25)
        if self.kind != "prelu" and self.prelu_slope is not None:
            raise ValueError("prelu_slope is only meaningful for prelu")

    @classmethod
    def parse(cls, text: str) -> "Activation":
        return cls(text.strip().lower())

    def __str__(self):
        return self.kind


TANH = Activation("tanh")
RELU = Activation("relu")
IDENTITY = Activation("identity")


def apply(kind: str, x: np.ndarray, slope: float | None = None) -> np.ndarray:
    if kind == "tanh":
        return np.tanh(x)
    if kind == "relu":
        return np.maximum(x, 0.0)
    if kind == "prelu":
        return np.where(x > 0.0, x, slope * x)
    if kind == "identity":
        return x
    raise ValueError(kind)


def derivative(kind: str, x: np.ndarray, y: np.ndarray, slope: float | None = None) -> np.ndarray:
    """d act / dx given input x and output y. relu'(0) = 0, prelu'(0) = slope."""
    if kind == "tanh":
        return 1.0 - y * y
    if kind == "relu":
        return (x > 0.0).astype(np.float64)
    if kind == "prelu":
        return np.where(x > 0.0, 1.0, slope)
    if kind == "identity":
        return np.ones_like(x)
    raise ValueError(kind)
