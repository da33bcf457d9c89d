"""Fully connected networks with a fixed flat parameter layout.

Layout of the flat vector: for each layer in order, the weight matrix of shape
``(fan_in, fan_out)`` in row-major order followed by the bias of length
``fan_out``. A layer maps ``x -> x @ W + b``. This order is part of the public
contract: generated parameter vectors (hypernetwork outputs) and checkpoints
rely on it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..diffcore import Activation, DimensionError, Tape, Var
from ..diffcore import activations as _act


@dataclass(frozen=True)
class MlpSpec:
    layer_widths: tuple[int, ...]
    activation: Activation = Activation("tanh")

    def __post_init__(self):
        widths = tuple(int(w) for w in self.layer_widths)
        object.__setattr__(self, "layer_widths", widths)
        if len(widths) < 2:
            raise ValueError(f"an MLP needs at least 2 widths, got {widths}")
        if any(w < 1 for w in widths):
            raise ValueError(f"all widths must be >= 1, got {widths}")

    @property
    def n_in(self) -> int:
        return self.layer_widths[0]

    @property
    def n_out(self) -> int:
        return self.layer_widths[-1]

    @property
    def n_layers(self) -> int:
        return len(self.layer_widths) - 1

    @property
    def n_hidden(self) -> int:
        """Number of activation sites (one per hidden layer)."""
        return len(self.layer_widths) - 2

    def layer_slices(self):
        """Yield ``(fan_in, fan_out, w_start, b_start, end)`` per layer."""
        offset = 0
        for fi, fo in zip(self.layer_widths[:-1], self.layer_widths[1:]):
            yield fi, fo, offset, offset + fi * fo, offset + fi * fo + fo
            offset += fi * fo + fo

    def with_output(self, width: int) -> "MlpSpec":
        return MlpSpec(self.layer_widths[:-1] + (int(width),), self.activation)

    def __str__(self):
        return "-".join(str(w) for w in self.layer_widths)


def count_params(spec) -> int:
    """sum_i (w_i * w_{i+1} + w_{i+1}) for an MlpSpec; total trainable count
    for anything with ``n_params()`` (an OperatorModel)."""
    if hasattr(spec, "n_params"):
        return spec.n_params()
    w = spec.layer_widths
    return sum(a * b + b for a, b in zip(w[:-1], w[1:]))


@dataclass
class MlpParams:
    flat: np.ndarray
    spec: MlpSpec

    def __post_init__(self):
        self.flat = np.asarray(self.flat, dtype=np.float64).reshape(-1)
        n = count_params(self.spec)
        if self.flat.size != n:
            raise DimensionError(f"spec {self.spec} needs {n} parameters, got {self.flat.size}")

    def layers(self):
        """Yield ``(W, b)`` views per layer."""
        for fi, fo, ws, bs, end in self.spec.layer_slices():
            yield self.flat[ws:bs].reshape(fi, fo), self.flat[bs:end]


def mlp_forward(params: MlpParams, x, slopes=None) -> np.ndarray:
    """Plain numpy evaluation; x is a vector or a batch of row vectors."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != params.spec.n_in:
        raise DimensionError(f"input width {x.shape[-1]} does not match spec {params.spec}")
    kind = params.spec.activation.kind
    if kind == "prelu" and slopes is None:
        slopes = np.full(params.spec.n_hidden, params.spec.activation.prelu_slope)
    h = x
    last = params.spec.n_layers - 1
    for k, (W, b) in enumerate(params.layers()):
        h = h @ W + b
        if k < last:
            h = _act.apply(kind, h, None if slopes is None else float(slopes[k]))
    return h


def mlp_tape(
    tape: Tape,
    spec: MlpSpec,
    theta: Var,
    x: Var,
    slopes: Var | None = None,
    rowwise: bool = False,
    first_preact_shift: Var | None = None,
    name: str = "mlp",
) -> Var:
    """Record an MLP on ``tape``.

    ``theta`` is the flat parameter node: shape ``(N,)`` for shared weights or
    ``(B, N)`` when ``rowwise`` (each row of ``x`` has its own generated
    parameters). ``first_preact_shift`` (B, w1) is added to the first layer's
    pre-activation (used by FlexDeepONet's pre-net).
    """
    kind = spec.activation.kind
    h = x
    last = spec.n_layers - 1
    for k, (fi, fo, ws, bs, end) in enumerate(spec.layer_slices()):
        tag = f"{name}.{k}"
        if rowwise:
            W = tape.reshape(tape.slice(theta, ws, bs), (-1, fi, fo), name=f"{tag}.W")
            b = tape.slice(theta, bs, end, name=f"{tag}.b")
            h = tape.add(tape.vecmat(h, W), b, name=f"{tag}.z")
        else:
            W = tape.reshape(tape.slice(theta, ws, bs), (fi, fo), name=f"{tag}.W")
            b = tape.slice(theta, bs, end, name=f"{tag}.b")
            h = tape.add_bias(tape.matmul(h, W), b, name=f"{tag}.z")
        if k == 0 and first_preact_shift is not None:
            h = tape.add(h, first_preact_shift, name=f"{tag}.shifted")
        if k < last:
            slope = None
            if kind == "prelu":
                slope = tape.slice(slopes, k, k + 1, name=f"{tag}.slope")
            h = tape.activation(h, kind, slope, name=f"{tag}.act")
    return h
