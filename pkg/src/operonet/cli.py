"""operonet command line.

Exit codes: 0 success, 1 a benchmark assertion failed, 2 usage or config
error, 3 numeric failure (divergence, instability).
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import os
import sys
from dataclasses import fields

import numpy as np

from . import bench
from .datasets import GENERATORS, BurgersInstabilityError, FormatError, OperatorDataset, read_dataset, write_dataset
from .datasets import generate as generate_dataset
from .diffcore import Activation, NumericError
from .models import CheckpointError, init_params, load_checkpoint, save_checkpoint
from .training import DivergenceError, TrainConfig, evaluate, train

EXIT_OK, EXIT_ASSERT, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


# -- config files ------------------------------------------------------------

_TRAIN_KEYS = {f.name: f.type for f in fields(TrainConfig)}
_SCHEMA = {
    "data": {"train": str, "test": str},
    "model": {"kind": str, "activation": str, "seed": int, "chunk_size": int, "latent_dim": int,
              "branch": "widths", "trunk": "widths", "scale": "widths", "shift": "widths",
              "pre": "widths", "hyper": "widths", "target": "widths", "m": int, "d_y": int},
    "train": {k: ("int" if t in (int, "int") else "float") for k, t in _TRAIN_KEYS.items()},
    "output": {"checkpoint": str, "report": str},
}


def _line_of(path, section, key) -> int | None:
    current = None
    with open(path) as fh:
        for no, line in enumerate(fh, 1):
            s = line.strip()
            if s.startswith("[") and s.endswith("]"):
                current = s[1:-1].strip()
            elif current == section and s.split("=")[0].split(":")[0].strip().lower() == key:
                return no
    return None


def load_config(path, sections=None) -> dict:
    """Parse an INI file into typed values; unknown sections and keys are errors."""
    if not os.path.exists(path):
        raise ConfigError(f"{path}: config file not found")
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    allowed = sections or _SCHEMA
    out: dict[str, dict] = {}
    base = os.path.dirname(os.path.abspath(path))
    for section in parser.sections():
        if section not in allowed:
            raise ConfigError(f"{path}: unknown section [{section}]")
        out[section] = {}
        for key, raw in parser.items(section):
            where = f"{path}:{_line_of(path, section, key)} [{section}] {key}"
            kind = _SCHEMA[section].get(key)
            if kind is None:
                raise ConfigError(f"{where}: unknown key")
            try:
                if kind == "widths":
                    value = tuple(int(v) for v in raw.replace(" ", "").split(","))
                elif kind in (int, "int"):
                    value = int(raw)
                elif kind in (float, "float"):
                    value = float(raw)
                else:
                    value = raw.strip()
            except ValueError:
                raise ConfigError(f"{where}: cannot read {raw!r} as {getattr(kind, '__name__', kind)}") from None
            if section in ("data", "output"):
                value = os.path.join(base, value)
            out[section][key] = value
    return out


def model_from_config(cfg: dict, m: int | None = None, d_y: int | None = None):
    mc = dict(cfg.get("model", {}))
    kind = mc.pop("kind", None)
    if kind is None:
        raise ConfigError("[model] kind is required")
    from .models import KINDS
    if kind not in KINDS:
        raise ConfigError(f"[model] unknown kind {kind!r}; choose from {', '.join(KINDS)}")
    activation = mc.pop("activation", "tanh")
    mc.pop("seed", None)
    m = mc.pop("m", m)
    d_y = mc.pop("d_y", d_y)
    chunk = None
    if "chunk_size" in mc:
        chunk = (mc.pop("chunk_size"), mc.pop("latent_dim", 8))
    mc.pop("latent_dim", None)
    nets = tuple((k, v) for k, v in mc.items())
    m = m if m is not None else _infer_m(kind, mc, chunk)
    d_y = d_y if d_y is not None else _infer_d_y(kind, mc)
    if m is None or d_y is None:
        raise ConfigError("[model] needs m and d_y when no dataset is given")
    spec = bench.ModelSpec(kind, kind, nets, activation, chunk=chunk)
    try:
        Activation.parse(activation)
        return spec.build(m, d_y)
    except KeyError as exc:
        raise ConfigError(f"[model] kind {kind!r} is missing network {exc}") from None
    except ValueError as exc:
        raise ConfigError(f"[model] {exc}") from None


def _infer_m(kind, nets, chunk):
    for name in ("branch", "hyper", "scale", "pre"):
        if name in nets:
            first = nets[name][0]
            return first - chunk[1] if kind == "chunked_hyper" and chunk else first
    return None


def _infer_d_y(kind, nets):
    if kind in ("deeponet", "flex") and "trunk" in nets:
        return nets["trunk"][0]
    if kind in ("hyper", "chunked_hyper") and "target" in nets:
        return nets["target"][0]
    if kind == "nomad" and "target" in nets and "branch" in nets:
        return nets["target"][0] - nets["branch"][-1]
    if kind == "shift" and "scale" in nets and "shift" in nets:
        return nets["scale"][-1] // nets["shift"][-1]
    return None


def _echo_config(cfg: dict, path: str):
    parser = configparser.ConfigParser(interpolation=None)
    for section, values in cfg.items():
        parser[section] = {k: ",".join(map(str, v)) if isinstance(v, tuple) else str(v)
                           for k, v in values.items()}
    with open(path, "w") as fh:
        parser.write(fh)


# -- commands ----------------------------------------------------------------

def _sha256(path) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def cmd_generate(args) -> int:
    ds = generate_dataset(args.problem, args.n, args.seed)
    write_dataset(ds, args.out)
    print(f"{args.out}: {args.problem} N={ds.n} m={ds.m} Q={ds.q} d_y={ds.d_y} sha256={_sha256(args.out)}")
    return EXIT_OK


def cmd_train(args) -> int:
    cfg = load_config(args.config)
    data = cfg.get("data", {})
    if "train" not in data:
        raise ConfigError(f"{args.config}: [data] train is required")
    for key in ("train", "test"):
        if key in data and not os.path.exists(data[key]):
            raise ConfigError(f"{args.config}: [data] {key} file not found: {data[key]}")
    train_ds = read_dataset(data["train"])
    test_ds = read_dataset(data["test"]) if "test" in data else None
    tc = dict(cfg.get("train", {}))
    if args.seed is not None:
        tc["seed"] = args.seed
        cfg.setdefault("train", {})["seed"] = args.seed
    try:
        tconf = TrainConfig(**tc)
    except ValueError as exc:
        raise ConfigError(f"{args.config}: [train] {exc}") from None
    model = model_from_config(cfg, train_ds.m, train_ds.d_y)
    init_params(model, cfg.get("model", {}).get("seed", tconf.seed))
    out = cfg.get("output", {})
    stem = os.path.splitext(args.config)[0]
    ckpt = out.get("checkpoint", stem + ".opnw")
    report_path = out.get("report", stem + ".csv")
    try:
        report = train(model, train_ds, test_ds, tconf)
    except DivergenceError as exc:
        exc.report.to_csv(report_path)
        save_checkpoint(model, ckpt)
        print(f"diverged: {exc}; report up to epoch {exc.last_good_epoch} in {report_path}", file=sys.stderr)
        return EXIT_NUMERIC
    report.to_csv(report_path)
    save_checkpoint(model, ckpt)
    _echo_config(cfg, report_path + ".ini")
    line = f"trained {model.kind} ({model.n_params()} params) for {tconf.epochs} epochs"
    if test_ds is not None:
        mean, std = evaluate(model, test_ds)
        line += f"; test rel_l2 {mean:.6g} +- {std:.6g}"
    print(line)
    print(f"checkpoint {ckpt}\nreport {report_path}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    model = load_checkpoint(args.checkpoint)
    ds = read_dataset(args.data)
    mean, std = evaluate(model, ds)
    print(f"rel_l2 {mean:.17g} +- {std:.17g} over {ds.n} functions")
    return EXIT_OK


def cmd_count_params(args) -> int:
    if args.table:
        print(bench.format_param_table())
        return EXIT_OK
    if not args.config:
        raise ConfigError("count-params needs a model config or --table")
    cfg = load_config(args.config, sections={"model": None, "data": None, "train": None, "output": None})
    model = model_from_config(cfg, args.m, args.d_y)
    for name, shape in model.block_shapes().items():
        print(f"  {name:<14}{int(np.prod(shape)):>10,}")
    n = model.n_params()
    print(f"{model.describe()}\ntotal {n:,} ({bench.k_format(n)})")
    return EXIT_OK


def cmd_bench(args) -> int:
    reg = bench.registry(args.shallow_data)
    if args.list:
        print("\n".join(reg))
        return EXIT_OK
    if args.scenario not in reg:
        print(f"unknown scenario {args.scenario!r}; registered: {', '.join(reg)}", file=sys.stderr)
        return EXIT_USAGE
    trials = range(args.trials) if args.trials is not None else None
    try:
        result = bench.run(reg[args.scenario], trials=trials, epochs=args.epochs,
                           paper_scale=args.paper_scale, workers=args.workers,
                           csv_path=args.out or f"{args.scenario}.csv")
    except bench.BenchAssertionError as exc:
        print(f"assertion failed: {exc}", file=sys.stderr)
        return EXIT_ASSERT
    print(result.summary())
    return EXIT_OK if result.passed else EXIT_ASSERT


def cmd_convert(args) -> int:
    with np.load(args.input, allow_pickle=False) as z:
        missing = [k for k in ("sensor_locations", "query_points", "inputs", "targets") if k not in z]
        if missing:
            raise ConfigError(f"{args.input}: missing arrays {missing}")
        ds = OperatorDataset(z["sensor_locations"], z["query_points"], z["inputs"], z["targets"],
                             {"name": args.name, "source": os.path.basename(args.input)})
    write_dataset(ds, args.out)
    print(f"{args.out}: N={ds.n} m={ds.m} d_x={ds.d_x} Q={ds.q} d_y={ds.d_y} sha256={_sha256(args.out)}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="operonet", description="Operator-learning networks and benchmarks.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a synthetic dataset as ODNB")
    g.add_argument("problem", choices=sorted(GENERATORS))
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    t = sub.add_parser("train", help="train a model from an INI config")
    t.add_argument("config")
    t.add_argument("--seed", type=int)
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("evaluate", help="relative L2 error of a checkpoint on a dataset")
    e.add_argument("--checkpoint", required=True)
    e.add_argument("--data", required=True)
    e.set_defaults(func=cmd_evaluate)

    c = sub.add_parser("count-params", help="exact parameter count of a model config")
    c.add_argument("config", nargs="?")
    c.add_argument("--m", type=int)
    c.add_argument("--d-y", dest="d_y", type=int)
    c.add_argument("--table", action="store_true", help="print the reference parameter table")
    c.set_defaults(func=cmd_count_params)

    b = sub.add_parser("bench", help="run a registered comparison")
    b.add_argument("scenario", nargs="?")
    b.add_argument("--list", action="store_true")
    b.add_argument("--paper-scale", action="store_true", help="1,000 train / 200 test functions")
    b.add_argument("--trials", type=int)
    b.add_argument("--epochs", type=int)
    b.add_argument("--workers", type=int)
    b.add_argument("--out")
    b.add_argument("--shallow-data")
    b.set_defaults(func=cmd_bench)

    v = sub.add_parser("convert", help="convert an .npz array dump to ODNB")
    v.add_argument("input")
    v.add_argument("--out", required=True)
    v.add_argument("--name", default="external")
    v.set_defaults(func=cmd_convert)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "bench" and not args.list and not args.scenario:
        parser.error("bench needs a scenario name (or --list)")
    try:
        return args.func(args)
    except (ConfigError, FormatError, CheckpointError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DivergenceError, NumericError, BurgersInstabilityError, FloatingPointError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
