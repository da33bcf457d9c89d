"""Train every (model, trial) cell of an experiment and check its assertions."""

from __future__ import annotations

import csv
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from ..datasets import generate, read_dataset
from ..models import init_params
from ..training import DivergenceError, TrainConfig, evaluate, train
from .scenarios import FULL_TEST, FULL_TRAIN
from .specs import ExperimentSpec

CSV_HEADER = ("scenario", "model", "trial", "param_count", "final_train_mse",
              "test_rel_l2_mean", "test_rel_l2_std", "seconds")


class BenchAssertionError(AssertionError):
    pass


@dataclass
class TrialRow:
    scenario: str
    model: str
    trial: int
    param_count: int
    final_train_mse: float
    test_rel_l2_mean: float
    test_rel_l2_std: float
    seconds: float
    status: str = "ok"


@dataclass
class BenchResult:
    scenario: str
    rows: list[TrialRow] = field(default_factory=list)
    param_checks: list[tuple[str, int, int, bool]] = field(default_factory=list)
    bound_checks: list[tuple[str, bool, str]] = field(default_factory=list)
    scaling: dict = field(default_factory=dict)
    status: str = "ok"

    def aggregate(self) -> dict[str, tuple[float, float]]:
        """Per model: mean and population std over trials of the per-trial mean error."""
        out = {}
        for label in dict.fromkeys(r.model for r in self.rows):
            vals = np.array([r.test_rel_l2_mean for r in self.rows if r.model == label])
            out[label] = (float(np.mean(vals)), float(np.std(vals)))
        return out

    @property
    def passed(self) -> bool:
        return all(c[3] for c in self.param_checks) and all(c[1] for c in self.bound_checks)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_HEADER)
            for r in self.rows:
                w.writerow([r.scenario, r.model, r.trial, r.param_count] +
                           [f"{v:.17g}" for v in (r.final_train_mse, r.test_rel_l2_mean,
                                                   r.test_rel_l2_std, r.seconds)])

    def summary(self) -> str:
        lines = [f"scenario {self.scenario}: {self.status}"]
        for k, v in self.scaling.items():
            lines.append(f"  scale {k}: {v}")
        for label, (mean, std) in self.aggregate().items():
            n_fail = sum(r.status != "ok" for r in self.rows if r.model == label)
            extra = f"  ({n_fail} diverged)" if n_fail else ""
            lines.append(f"  {label:<10} rel_l2 {mean:.4f} +- {std:.4f}{extra}")
        for name, exact, expected, ok in self.param_checks:
            lines.append(f"  params {name}: {exact} (expected {expected}) {'ok' if ok else 'MISMATCH'}")
        for desc, ok, detail in self.bound_checks:
            lines.append(f"  bound {desc}: {'pass' if ok else 'FAIL'} ({detail})")
        return "\n".join(lines)


def check_params(spec: ExperimentSpec) -> list[tuple[str, int, int, bool]]:
    checks = []
    for ms in spec.models:
        exact = ms.build(spec.m, spec.d_y).n_params()
        if ms.expected_params is not None:
            checks.append((ms.label, exact, ms.expected_params, exact == ms.expected_params))
    return checks


def _datasets(spec: ExperimentSpec, n_train: int, n_test: int):
    if spec.external_data is not None:
        ds = read_dataset(spec.external_data)
        n_tr = min(n_train, ds.n - 1)
        return ds.split(n_tr)
    return (generate(spec.problem, n_train, spec.data_seeds[0]),
            generate(spec.problem, n_test, spec.data_seeds[1]))


def _run_cell(args):
    spec, label, trial, train_ds, test_ds = args
    ms = spec.model(label)
    model = init_params(ms.build(spec.m, spec.d_y), trial)
    n_trip = train_ds.n * train_ds.q
    cfg = TrainConfig(lr0=spec.lr0, decay_rate=ms.decay_rate, epochs=spec.epochs, seed=trial,
                      batch_size=max(1, int(round(spec.batch_fraction * n_trip))))
    start = time.perf_counter()
    try:
        report = train(model, train_ds, test_ds, cfg, eval_every=spec.eval_every or spec.epochs or 1)
        mean, std = evaluate(model, test_ds)
        mse, status = report.final.train_mse, "ok"
    except DivergenceError as exc:
        mean = std = mse = math.nan
        status = f"diverged at epoch {exc.epoch}"
    return TrialRow(spec.name, label, trial, model.n_params(), mse, mean, std,
                    time.perf_counter() - start, status)


def _evaluate_bounds(spec: ExperimentSpec, agg: dict) -> list[tuple[str, bool, str]]:
    out = []
    for b in spec.bounds:
        mine = agg[b.model][0]
        if b.kind == "ratio":
            ratios = {o: mine / agg[o][0] for o in b.others}
            ok = all(r < b.value for r in ratios.values())
            detail = ", ".join(f"{o} ratio {r:.3f}" for o, r in ratios.items())
        elif b.kind == "above":
            ok = mine > b.value
            detail = f"{b.model} mean {mine:.4f}"
        else:
            raise ValueError(f"unknown bound kind {b.kind!r}")
        out.append((b.describe(), bool(ok), detail))
    return out


def thread_cap() -> int:
    try:
        return max(1, int(os.environ.get("OPERONET_THREADS", "1")))
    except ValueError:
        return 1


def run(spec: ExperimentSpec, trials=None, epochs: int | None = None, paper_scale: bool = False,
        models=None, workers: int | None = None, csv_path=None) -> BenchResult:
    """Run an experiment.

    Parameter-count assertions run first and raise :class:`BenchAssertionError`
    before any training. Divergent trials are recorded and the run continues.
    Cells run in up to ``workers`` processes (default ``OPERONET_THREADS``);
    results do not depend on the worker count.
    """
    result = BenchResult(spec.name, scaling=dict(spec.scaling))
    result.param_checks = check_params(spec)
    bad = [c for c in result.param_checks if not c[3]]
    if bad:
        raise BenchAssertionError("parameter count mismatch: " +
                                  "; ".join(f"{n} has {e}, expected {x}" for n, e, x, _ in bad))
    if epochs is not None:
        spec = replace(spec, epochs=int(epochs), eval_every=0)
        result.scaling["epochs"] = f"{epochs} (override)"
    if trials is not None:
        spec = replace(spec, trial_seeds=tuple(trials))
    n_train, n_test = spec.n_train, spec.n_test
    if paper_scale and spec.external_data is None:
        n_train, n_test = FULL_TRAIN, FULL_TEST
        result.scaling.update(n_train=f"{FULL_TRAIN} (full scale)", n_test=f"{FULL_TEST} (full scale)")
    if spec.external_data is not None and not os.path.exists(spec.external_data):
        result.status = "skipped: external data missing"
        return result
    if spec.problem == "shallow" and spec.external_data is None:
        result.status = "skipped: external data missing"
        return result

    train_ds, test_ds = _datasets(spec, n_train, n_test)
    labels = [ms.label for ms in spec.models if models is None or ms.label in models]
    cells = [(spec, label, t, train_ds, test_ds) for label in labels for t in spec.trial_seeds]
    workers = workers or thread_cap()
    if workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            result.rows = list(pool.map(_run_cell, cells))
    else:
        result.rows = [_run_cell(c) for c in cells]
    result.bound_checks = _evaluate_bounds(spec, result.aggregate()) if models is None else []
    if csv_path is not None:
        result.to_csv(csv_path)
    return result
