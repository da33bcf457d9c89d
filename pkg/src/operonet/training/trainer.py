"""Minibatch MSE training over (function, query, value) triplets."""

from __future__ import annotations

import csv
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from ..datasets import OperatorDataset
from ..diffcore import DimensionError
from ..models.architectures import OperatorModel, _as_rows, _feed, build_graph, compact_rows, predict, rows_per_chunk
from ..rng import Xoshiro256, derive_seed
from .optim import AdamState, adam_step, inverse_time_decay, rel_l2

CSV_HEADER = ("epoch", "train_mse", "test_rel_l2", "lr", "wall_seconds")


class DivergenceError(ArithmeticError):
    def __init__(self, epoch: int, last_good_epoch: int, report: "TrainReport"):
        super().__init__(f"non-finite loss in epoch {epoch}; last good epoch {last_good_epoch}")
        self.epoch = epoch
        self.last_good_epoch = last_good_epoch
        self.report = report


@dataclass
class TrainConfig:
    lr0: float = 1e-3
    decay_rate: float = 0.0
    scheduler_step: int = 1
    weight_decay: float = 0.0
    batch_size: int = 10_000
    epochs: int = 100
    seed: int = 0
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    max_rows: int = 8192  # cap on rows per forward/backward chunk; bounds memory only

    def __post_init__(self):
        if not self.lr0 > 0:
            raise ValueError("lr0 must be positive")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        for b in (self.adam_beta1, self.adam_beta2):
            if not 0.0 < b < 1.0:
                raise ValueError("Adam betas must lie in (0, 1)")
        if self.scheduler_step < 1 or self.max_rows < 1:
            raise ValueError("scheduler_step and max_rows must be >= 1")

    def lr_at(self, t: int) -> float:
        return inverse_time_decay(self.lr0, self.decay_rate, self.scheduler_step, t)


@dataclass
class EpochRecord:
    epoch: int
    train_mse: float
    test_rel_l2: float
    lr: float
    wall_seconds: float


@dataclass
class TrainReport:
    records: list[EpochRecord] = field(default_factory=list)
    checkpoint: str | None = None
    config: TrainConfig | None = None

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])

    @property
    def final(self) -> EpochRecord:
        return self.records[-1]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_HEADER)
            for r in self.records:
                w.writerow([r.epoch] + [f"{v:.17g}" for v in
                                        (r.train_mse, r.test_rel_l2, r.lr, r.wall_seconds)])

    @classmethod
    def from_csv(cls, path) -> "TrainReport":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows or tuple(rows[0]) != CSV_HEADER:
            raise ValueError(f"{path}: not a training report")
        return cls([EpochRecord(int(r[0]), *map(float, r[1:])) for r in rows[1:]])

    def config_dict(self) -> dict:
        return asdict(self.config) if self.config else {}


def _check_compatible(model: OperatorModel, ds: OperatorDataset):
    if ds.m != model.m or ds.d_y != model.d_y:
        raise DimensionError(f"dataset (m={ds.m}, d_y={ds.d_y}) does not fit model "
                             f"(m={model.m}, d_y={model.d_y})")


def mse_loss(model: OperatorModel, sensors, ys, targets, rows=None, max_rows: int | None = None, tape=None):
    """Mean squared error over a batch and its gradient as a flat vector.

    Rows pair queries with input functions as in :func:`predict`. Large
    batches are processed in chunks of ``max_rows`` whose gradients are summed
    in a fixed order.
    """
    targets = np.asarray(targets, dtype=np.float64).reshape(-1)
    n = targets.size
    if n == 0:
        raise ValueError("mse_loss needs a non-empty batch")
    sensors, ys, rows = _as_rows(model, sensors, ys, rows)
    max_rows = max_rows or rows_per_chunk(model)
    if ys.shape[0] != n:
        raise DimensionError(f"{ys.shape[0]} query rows vs {n} targets")
    if tape is None:
        tape, _ = build_graph(model)
    blocks = list(model.block_shapes())
    total = 0.0
    grad = None
    for start in range(0, n, max_rows):
        stop = min(start + max_rows, n)
        funcs, local = compact_rows(rows[start:stop])
        pred = tape.forward(**_feed(model, sensors[funcs], ys[start:stop], local))
        resid = pred - targets[start:stop]
        total += float(np.dot(resid, resid))
        g = tape.backward((2.0 / n) * resid)
        flat = np.concatenate([np.asarray(g[k]).reshape(-1) for k in blocks])
        grad = flat if grad is None else grad + flat
    return total / n, grad


def evaluate(model: OperatorModel, ds: OperatorDataset, max_rows: int | None = None) -> tuple[float, float]:
    """Mean and (population) standard deviation of per-function relative L2 error."""
    errs = per_function_errors(model, ds, max_rows)
    return float(np.mean(errs)), float(np.std(errs))


def predict_dataset(model: OperatorModel, ds: OperatorDataset, max_rows: int | None = None) -> np.ndarray:
    _check_compatible(model, ds)
    max_rows = max_rows or rows_per_chunk(model)
    fi, qi, _ = ds.triplets()
    return predict(model, ds.inputs, ds.query_points[qi], max_rows, rows=fi).reshape(ds.n, ds.q)


def per_function_errors(model, ds, max_rows: int | None = None) -> np.ndarray:
    pred = predict_dataset(model, ds, max_rows)
    return np.array([rel_l2(p, t) for p, t in zip(pred, ds.targets)])


def train(model: OperatorModel, train_ds: OperatorDataset, test_ds: OperatorDataset | None,
          cfg: TrainConfig, eval_every: int = 1) -> TrainReport:
    """Adam on shuffled triplet minibatches, learning rate decayed per epoch.

    Row ``t`` of the report holds the state after epoch ``t`` (row 0 is the
    untrained model) and ``lr = inverse_time_decay(t)``, the rate the next
    epoch uses. Test error is computed every ``eval_every`` epochs and on the
    last one; other rows carry NaN.
    """
    _check_compatible(model, train_ds)
    if test_ds is not None:
        _check_compatible(model, test_ds)
    report = TrainReport(config=cfg)
    clock = time.perf_counter()
    tape, _ = build_graph(model)
    chunk = min(cfg.max_rows, rows_per_chunk(model))
    fi, qi, tgt = train_ds.triplets()
    n_trip = tgt.size

    def test_error(epoch):
        if test_ds is None or not (epoch % eval_every == 0 or epoch == cfg.epochs):
            return math.nan
        return evaluate(model, test_ds, chunk)[0]

    pred0 = predict_dataset(model, train_ds, chunk).reshape(-1)
    report.records.append(EpochRecord(0, float(np.mean((pred0 - tgt) ** 2)), test_error(0),
                                      cfg.lr_at(0), time.perf_counter() - clock))

    params = model.get_flat()
    state = AdamState.zeros(params.size)
    shuffle = Xoshiro256(derive_seed(cfg.seed, "shuffle"))
    last_good = params.copy()
    for epoch in range(1, cfg.epochs + 1):
        lr = cfg.lr_at(epoch - 1)
        order = shuffle.permutation(n_trip)
        running = 0.0
        for start in range(0, n_trip, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            loss, grad = mse_loss(model, train_ds.inputs, train_ds.query_points[qi[idx]],
                                  tgt[idx], fi[idx], chunk, tape)
            if not (math.isfinite(loss) and np.all(np.isfinite(grad))):
                model.set_flat(last_good)
                raise DivergenceError(epoch, epoch - 1, report)
            if cfg.weight_decay:
                grad = grad + cfg.weight_decay * params
            params = adam_step(params, grad, state, lr, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps)
            model.set_flat(params)
            running += loss * idx.size
        last_good = params.copy()
        report.records.append(EpochRecord(epoch, running / n_trip, test_error(epoch),
                                          cfg.lr_at(epoch), time.perf_counter() - clock))
    return report
