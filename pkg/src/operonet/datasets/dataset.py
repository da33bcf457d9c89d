from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class DatasetError(ValueError):
    pass


@dataclass
class OperatorDataset:
    """Sampled input functions and their images under an operator.

    ``inputs[i]`` holds the i-th input function at ``sensor_locations``;
    ``targets[i, q]`` is the image function at ``query_points[q]``.
    """

    sensor_locations: np.ndarray
    query_points: np.ndarray
    inputs: np.ndarray
    targets: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.sensor_locations = _as_2d(self.sensor_locations)
        self.query_points = _as_2d(self.query_points)
        self.inputs = np.asarray(self.inputs, dtype=np.float64)
        self.targets = np.asarray(self.targets, dtype=np.float64)
        self.meta = dict(self.meta)
        self.validate()

    @property
    def m(self) -> int:
        return self.sensor_locations.shape[0]

    @property
    def d_x(self) -> int:
        return self.sensor_locations.shape[1]

    @property
    def d_y(self) -> int:
        return self.query_points.shape[1]

    @property
    def n(self) -> int:
        return self.inputs.shape[0]

    @property
    def q(self) -> int:
        return self.query_points.shape[0]

    @property
    def name(self) -> str:
        return str(self.meta.get("name", "unnamed"))

    def validate(self):
        if self.inputs.ndim != 2 or self.inputs.shape[1] != self.m:
            raise DatasetError(f"inputs must be N x {self.m}, got {self.inputs.shape}")
        if self.targets.shape != (self.n, self.q):
            raise DatasetError(f"targets must be {self.n} x {self.q}, got {self.targets.shape}")
        for label in ("sensor_locations", "query_points", "inputs", "targets"):
            if not np.all(np.isfinite(getattr(self, label))):
                raise DatasetError(f"{label} contains non-finite values")
        loc = self.sensor_locations
        if self.d_x == 1:
            if np.any(np.diff(loc[:, 0]) <= 0):
                raise DatasetError("sensor locations must be strictly increasing")
        elif len({tuple(row) for row in loc.tolist()}) != self.m:
            raise DatasetError("sensor locations must be distinct")

    def subset(self, index) -> "OperatorDataset":
        index = np.asarray(index)
        return OperatorDataset(self.sensor_locations, self.query_points,
                               self.inputs[index], self.targets[index], self.meta)

    def split(self, n_first: int) -> tuple["OperatorDataset", "OperatorDataset"]:
        return self.subset(np.arange(n_first)), self.subset(np.arange(n_first, self.n))

    def triplets(self):
        """Flattened (function index, query index, target) view, function-major."""
        fi = np.repeat(np.arange(self.n), self.q)
        qi = np.tile(np.arange(self.q), self.n)
        return fi, qi, self.targets.reshape(-1)

    def equals(self, other: "OperatorDataset") -> bool:
        return all(
            np.array_equal(getattr(self, k), getattr(other, k))
            for k in ("sensor_locations", "query_points", "inputs", "targets")
        ) and self.meta == other.meta


def _as_2d(a) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    return a.reshape(-1, 1) if a.ndim == 1 else a
