"""Acceptance criteria, one test each, run at their stated tolerances.

Every test records a PASS/FAIL line into ``conftest.ACCEPTANCE`` (printed in
the terminal summary) before asserting, so a failing criterion still reports
its measured numbers.
"""

import time

import numpy as np
import pytest

import conftest
from conftest import hand_built_shallow_water
from operonet.bench import param_table, run, scenario_same_budget, scenario_same_target
from operonet.bench import runner as bench_runner
from operonet.bench.scenarios import FULL_TRAIN
from operonet.cli import build_parser
from operonet.datasets import (
    burgers_solve,
    dataset_bytes,
    gen_advection,
    gen_differentiation,
    gen_identity,
    generate,
    grf_sample,
    parse_dataset,
    read_dataset,
    realize,
    write_dataset,
)
from operonet.diffcore import Activation
from operonet.models import (
    ChunkConfig,
    MlpSpec,
    embed_deeponet_as_hyper,
    init_params,
    load_checkpoint,
    make_chunked_hyper,
    make_deeponet,
    make_flex_deeponet,
    make_hyper_deeponet,
    make_nomad,
    make_shift_deeponet,
    predict,
    save_checkpoint,
    value_and_grad,
)
from operonet.training import TrainConfig, train


def record(key, ok, detail):
    conftest.ACCEPTANCE[key] = (bool(ok), detail)
    print(f"{'PASS' if ok else 'FAIL'}  criterion {key}: {detail}")


# -- 1: gradients ------------------------------------------------------------

def small_architectures(m=10, d_y=1):
    s = lambda *w: MlpSpec(w, Activation.parse("tanh"))
    return {
        "deeponet": make_deeponet(m, s(m, 8, 8, 6), s(d_y, 8, 8, 6)),
        "shift": make_shift_deeponet(m, s(m, 8, d_y), s(m, 8, d_y), s(m, 8, 6), s(d_y, 8, 6)),
        "flex": make_flex_deeponet(m, s(m, 8, 8), s(m, 8, 7), s(d_y, 8, 6)),
        "nomad": make_nomad(m, s(m, 8, 4), s(4 + d_y, 8, 8, 1)),
        "hyper": make_hyper_deeponet(m, s(m, 8, 8, 25), s(d_y, 8, 1)),
        "chunked_hyper": make_chunked_hyper(m, s(m + 3, 8, 8), s(d_y, 8, 1), ChunkConfig(8, 3)),
    }


def central_differences(model, u, y, h=1e-6):
    base = model.get_flat()
    numeric = np.empty_like(base)
    for k in range(base.size):
        p = base.copy()
        p[k] += h
        model.set_flat(p)
        fp = predict(model, u, y).sum()
        p[k] -= 2 * h
        model.set_flat(p)
        fm = predict(model, u, y).sum()
        numeric[k] = (fp - fm) / (2 * h)
    model.set_flat(base)
    return numeric


def test_criterion_1_gradient_correctness():
    start = time.perf_counter()
    worst, worst_resolved, worst_floor = {}, {}, {}
    for kind, model in small_architectures().items():
        rng = np.random.default_rng(100)
        worst[kind] = worst_resolved[kind] = worst_floor[kind] = 0.0
        for probe in range(20):
            init_params(model, probe)
            u = rng.normal(size=(1, 10))
            y = rng.uniform(-1, 1, size=(1, 1))
            _, _, grads = value_and_grad(model, u, y, lambda p: (float(p.sum()), np.ones_like(p)))
            a = np.concatenate([grads[k].reshape(-1) for k in model.block_shapes()])
            n = central_differences(model, u, y)
            rel = np.abs(a - n) / (np.abs(n) + 1e-12)
            worst[kind] = max(worst[kind], rel.max())
            # coordinates above the ~1e-10 roundoff floor of a 1e-6 step
            resolved = np.abs(n) >= 1e-4 * np.abs(n).max()
            worst_resolved[kind] = max(worst_resolved[kind], rel[resolved].max())
            worst_floor[kind] = max(worst_floor[kind], np.abs(a - n)[~resolved].max(initial=0.0))
    elapsed = time.perf_counter() - start
    over = [k for k, v in worst.items() if v >= 1e-5]
    ok = not over and elapsed < 30
    detail = (f"max rel err per kind {', '.join(f'{k} {v:.1e}' for k, v in worst.items())}; "
              f"above 1e-5: {over or 'none'}; resolved coordinates max {max(worst_resolved.values()):.1e}, "
              f"others abs max {max(worst_floor.values()):.1e}; {elapsed:.1f}s")
    record("1 gradient correctness", ok, detail)
    assert max(worst_resolved.values()) < 1e-5 and max(worst_floor.values()) < 1e-9
    assert ok, detail


# -- 2: embedding ------------------------------------------------------------

def test_criterion_2_embedding_equivalence():
    start = time.perf_counter()
    rng = np.random.default_rng(2)
    act = Activation.parse("tanh")
    d = make_deeponet(10, MlpSpec((10, 16, 16, 8), act), MlpSpec((1, 12, 12, 8), act))
    d.set_flat(rng.normal(scale=0.5, size=d.n_params()))
    h = embed_deeponet_as_hyper(d)
    u = rng.normal(size=(100, 10))
    y = rng.uniform(-1, 1, size=(100, 1))
    rows = np.arange(100)
    gap = np.abs(predict(d, u, y, rows=rows) - predict(h, u, y, rows=rows)).max()
    elapsed = time.perf_counter() - start
    ok = gap <= 1e-12 and elapsed < 5
    record("2 embedding equivalence", ok, f"max |DeepONet - embedded| {gap:.1e} over 100 probes; {elapsed:.2f}s")
    assert ok


# -- 3: parameter parity -----------------------------------------------------

def test_criterion_3_parameter_parity():
    start = time.perf_counter()
    rows = param_table()
    primary = [r for r in rows if r.model in ("DeepONet", "Hyper") and not r.note and r.exact is not None]
    assert len(primary) == 8
    misses = [f"{r.config} {r.model} {r.exact:,} -> {r.formatted} vs {r.printed}" for r in primary if not r.match]
    discrepancy = [r for r in rows if r.note.startswith("second listing")]
    reported = any(r.config == "shallow-small" and r.printed == "5.6K" and r.formatted == "5.7K" for r in discrepancy)
    exact_adv = next(r.exact for r in primary if r.config == "advection" and r.model == "DeepONet")
    elapsed = time.perf_counter() - start
    ok = not misses and reported and exact_adv == 274_177 and elapsed < 1
    detail = (f"{8 - len(misses)}/8 rows match; mismatches: {'; '.join(misses) or 'none'}; "
              f"5.7K vs 5.6K listing reported: {reported}; advection DeepONet {exact_adv:,}; {elapsed:.2f}s")
    record("3 parameter parity", ok, detail)
    assert reported and exact_adv == 274_177
    assert ok, detail


# -- 4, 5: desk-scale orderings ---------------------------------------------

@pytest.mark.slow
def test_criterion_4_identity_ordering():
    spec = scenario_same_target("identity")
    start = time.perf_counter()
    result = run(spec)
    elapsed = time.perf_counter() - start
    agg = result.aggregate()
    hyper = agg["Hyper"][0]
    ratios = {k: hyper / v[0] for k, v in agg.items() if k != "Hyper"}
    ok = all(r < 0.5 for r in ratios.values()) and agg["DeepONet"][0] > 0.3 and elapsed < 900
    detail = (", ".join(f"{k} {v[0]:.3f}" for k, v in agg.items()) +
              f"; Hyper ratios {', '.join(f'{k} {r:.2f}' for k, r in ratios.items())}; "
              f"{spec.epochs} epochs, {elapsed:.0f}s")
    record("4 identity ordering", ok, detail)
    assert ok, detail


@pytest.mark.slow
def test_criterion_5_differentiation_ordering():
    spec = scenario_same_target("differentiation")
    start = time.perf_counter()
    result = run(spec)
    elapsed = time.perf_counter() - start
    agg = result.aggregate()
    factor = agg["DeepONet"][0] / agg["Hyper"][0]
    ok = factor >= 2 and elapsed < 1200
    detail = (", ".join(f"{k} {v[0]:.3f}" for k, v in agg.items()) +
              f"; DeepONet/Hyper {factor:.2f}; {spec.epochs} epochs, {elapsed:.0f}s")
    record("5 differentiation ordering", ok, detail)
    assert ok, detail


# -- 6: dataset oracles ------------------------------------------------------

def test_criterion_6_dataset_oracles():
    start = time.perf_counter()
    checks = {}
    ident = gen_identity(200, seed=1000)
    checks["identity exact"] = np.array_equal(ident.targets, ident.inputs)
    adv = gen_advection(200, seed=1000)
    checks["advection 20-cell shift"] = np.array_equal(adv.targets, np.roll(adv.inputs, 20, axis=1))

    diff = gen_differentiation(200, seed=1000)
    x = diff.sensor_locations[:, 0]
    fd = (diff.inputs[:, 2:] - diff.inputs[:, :-2]) / (x[2:] - x[:-2])
    fd_gap = np.abs(fd - diff.targets[:, 1:-1]).max()
    checks[f"differentiation grid FD {fd_gap:.3f}"] = fd_gap < 1e-3

    worst = 0.0
    for i in range(5):
        s = grf_sample(i)
        coarse = burgers_solve(s.realization, 0.1, 1.0)
        fine = burgers_solve(realize(s.fourier_coefficients, 512), 0.1, 1.0)[::4]
        worst = max(worst, np.abs(coarse - fine).max() / np.abs(fine).max())
    checks[f"burgers 128 vs 512 {worst:.1e}"] = worst < 1e-4
    const = max(np.abs(burgers_solve(np.full(128, c), 0.1, 1.0) - c).max() for c in (0.0, 0.7, -2.5))
    checks[f"burgers constant state {const:.0e}"] = const <= 1e-14

    elapsed = time.perf_counter() - start
    ok = all(checks.values()) and elapsed < 300
    detail = "; ".join(f"{k} {'ok' if v else 'FAIL'}" for k, v in checks.items()) + f"; {elapsed:.1f}s"
    record("6 dataset oracles", ok, detail)
    assert ok, detail


# -- 7: determinism and formats ----------------------------------------------

def test_criterion_7_determinism_and_formats(tmp_path):
    start = time.perf_counter()
    checks = {}
    checks["regeneration"] = all(dataset_bytes(generate(p, 20, 3)) == dataset_bytes(generate(p, 20, 3))
                                 for p in ("identity", "differentiation", "advection", "burgers"))

    tr, te = gen_identity(16, seed=4, m=10).split(12)
    cfg = TrainConfig(lr0=3e-3, decay_rate=0.001, epochs=5, batch_size=40, seed=9)
    runs = []
    for i in range(2):
        model = init_params(make_hyper_deeponet(10, MlpSpec((10, 12, 31)), MlpSpec((1, 10, 1))), 1)
        rep = train(model, tr, te, cfg)
        numbers = [rep.column(c).tobytes() for c in ("epoch", "train_mse", "test_rel_l2", "lr")]
        save_checkpoint(model, tmp_path / f"run{i}.opnw")
        runs.append((numbers, (tmp_path / f"run{i}.opnw").read_bytes()))
    checks["retraining"] = runs[0] == runs[1]

    ds = generate("burgers", 4, 5)
    write_dataset(ds, tmp_path / "b.odnb")
    checks["ODNB round trip"] = dataset_bytes(read_dataset(tmp_path / "b.odnb")) == dataset_bytes(ds)
    back = load_checkpoint(tmp_path / "run0.opnw")
    save_checkpoint(back, tmp_path / "again.opnw")
    checks["OPNW round trip"] = (back.get_flat().tobytes() == model.get_flat().tobytes()
                                 and (tmp_path / "again.opnw").read_bytes() == runs[0][1])
    raw = hand_built_shallow_water()
    sw = parse_dataset(raw)
    checks["hand-built d_y=3 file"] = sw.d_y == 3 and dataset_bytes(sw) == raw

    elapsed = time.perf_counter() - start
    ok = all(checks.values()) and elapsed < 60
    detail = "; ".join(f"{k} {'ok' if v else 'FAIL'}" for k, v in checks.items()) + f"; {elapsed:.1f}s"
    record("7 determinism and formats", ok, detail)
    assert ok, detail


# -- 8: long-run path --------------------------------------------------------

def test_criterion_8_paper_scale_path(monkeypatch):
    """The long-run path exists and carries the documented targets; it is
    not trained here."""
    spec = scenario_same_budget("burgers")
    targets = {k: spec.reference_errors[k][0] for k in ("DeepONet", "Hyper")}
    seen = {}

    def capture(spec_, n_train, n_test):
        seen["n_train"] = n_train
        raise RuntimeError("stop before training")

    monkeypatch.setattr(bench_runner, "_datasets", capture)
    with pytest.raises(RuntimeError, match="stop before training"):
        run(spec, paper_scale=True)
    flag = build_parser().parse_args(["bench", "same-budget-burgers", "--paper-scale"]).paper_scale
    ok = targets == {"DeepONet": 0.0391, "Hyper": 0.0196} and seen["n_train"] == FULL_TRAIN and flag
    record("8 long-run path", ok, f"--paper-scale trains on {seen['n_train']} functions; "
                                  f"documented targets DeepONet {targets['DeepONet']}, Hyper {targets['Hyper']}")
    assert ok
