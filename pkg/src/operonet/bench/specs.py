"""Pinned experiment descriptions."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..diffcore import Activation
from ..models import (
    ChunkConfig,
    MlpSpec,
    OperatorModel,
    make_chunked_hyper,
    make_deeponet,
    make_flex_deeponet,
    make_hyper_deeponet,
    make_nomad,
    make_shift_deeponet,
)

DECAY_GRID = (0.0001, 0.0002, 0.0005, 0.001, 0.002, 0.005)
DEFAULT_TRIALS = (0, 1, 2, 3, 4)

_BUILDERS = {
    "deeponet": lambda m, d_y, n, chunk: make_deeponet(m, n["branch"], n["trunk"]),
    "shift": lambda m, d_y, n, chunk: make_shift_deeponet(m, n["scale"], n["shift"], n["branch"], n["trunk"], d_y),
    "flex": lambda m, d_y, n, chunk: make_flex_deeponet(m, n["pre"], n["branch"], n["trunk"]),
    "nomad": lambda m, d_y, n, chunk: make_nomad(m, n["branch"], n["target"], d_y),
    "hyper": lambda m, d_y, n, chunk: make_hyper_deeponet(m, n["hyper"], n["target"]),
    "chunked_hyper": lambda m, d_y, n, chunk: make_chunked_hyper(m, n["hyper"], n["target"], chunk),
}


@dataclass(frozen=True)
class ModelSpec:
    """One model of a comparison: sub-network widths, activation, decay rate.

    ``expected_params`` is asserted exactly before any training;
    ``printed_params`` is the printed rounded count it is compared with.
    """

    label: str
    kind: str
    nets: tuple[tuple[str, tuple[int, ...]], ...]
    activation: str = "tanh"
    decay_rate: float = 0.0001
    chunk: tuple[int, int] | None = None  # (chunk size, latent width)
    expected_params: int | None = None
    printed_params: str | None = None

    def net_specs(self) -> dict[str, MlpSpec]:
        act = Activation.parse(self.activation)
        return {name: MlpSpec(widths, act) for name, widths in self.nets}

    def build(self, m: int, d_y: int) -> OperatorModel:
        chunk = ChunkConfig(self.chunk[0], self.chunk[1]) if self.chunk else None
        return _BUILDERS[self.kind](m, d_y, self.net_specs(), chunk)


@dataclass(frozen=True)
class Bound:
    """``model`` mean error compared against a number or other models.

    kind ``"ratio"``: mean(model) < factor * mean(other) for every listed other.
    kind ``"above"``: mean(model) > value.
    """

    kind: str
    model: str
    value: float
    others: tuple[str, ...] = ()

    def describe(self) -> str:
        if self.kind == "ratio":
            return f"{self.model} < {self.value:g} x " + ", ".join(self.others)
        return f"{self.model} > {self.value:g}"


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    problem: str
    m: int
    d_y: int
    models: tuple[ModelSpec, ...]
    n_train: int = 200
    n_test: int = 50
    epochs: int = 100
    batch_fraction: float = 0.1  # of all training triplets
    lr0: float = 1e-3
    trial_seeds: tuple[int, ...] = DEFAULT_TRIALS
    data_seeds: tuple[int, int] = (1000, 2000)
    bounds: tuple[Bound, ...] = ()
    reference_errors: dict = field(default_factory=dict)
    runtime_budget_s: float | None = None
    scaling: dict = field(default_factory=dict)
    external_data: str | None = None
    eval_every: int = 0  # 0: only first and last epoch

    def model(self, label: str) -> ModelSpec:
        for spec in self.models:
            if spec.label == label:
                return spec
        raise KeyError(label)
