import csv
import hashlib
import subprocess
import sys
import time

import numpy as np
import pytest

from operonet.cli import load_config, main, ConfigError
from operonet.datasets import read_dataset
from operonet.models import load_checkpoint
from operonet.training import TrainReport


def sha(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


@pytest.fixture
def tiny_data(tmp_path):
    assert main(["generate", "identity", "--n", "12", "--seed", "1", "--out", str(tmp_path / "train.odnb")]) == 0
    assert main(["generate", "identity", "--n", "4", "--seed", "2", "--out", str(tmp_path / "test.odnb")]) == 0
    return tmp_path


def write_config(path, body):
    path.write_text(body)
    return path


TRAIN_INI = """\
[data]
train = train.odnb
test = test.odnb

[model]
kind = hyper
hyper = 50,16,31
target = 1,10,1

[train]
epochs = 15
batch_size = 120
lr0 = 0.003
decay_rate = 0.0005
seed = 0
"""


def test_generate_writes_identity_file(tmp_path, capsys):
    out = tmp_path / "id.odnb"
    assert main(["generate", "identity", "--n", "200", "--seed", "0", "--out", str(out)]) == 0
    ds = read_dataset(out)
    assert (ds.m, ds.q, ds.n) == (50, 50, 200)
    assert sha(out) in capsys.readouterr().out
    first = sha(out)
    main(["generate", "identity", "--n", "200", "--seed", "0", "--out", str(out)])
    assert sha(out) == first


def test_generate_rejects_unknown_problem(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["generate", "heat", "--n", "3", "--out", str(tmp_path / "x")])
    assert exc.value.code == 2


def test_train_end_to_end(tiny_data, capsys):
    cfg = write_config(tiny_data / "run.ini", TRAIN_INI)
    start = time.perf_counter()
    assert main(["train", str(cfg)]) == 0
    assert time.perf_counter() - start < 60
    out = capsys.readouterr().out
    assert "test rel_l2" in out
    report = TrainReport.from_csv(tiny_data / "run.csv")
    assert report.column("epoch").tolist() == list(range(16))
    model = load_checkpoint(tiny_data / "run.opnw")
    assert model.kind == "hyper" and model.n_params() == 50 * 16 + 16 + 16 * 31 + 31
    echoed = load_config(tiny_data / "run.csv.ini")
    assert echoed["train"]["epochs"] == 15 and echoed["model"]["target"] == (1, 10, 1)

    capsys.readouterr()
    assert main(["evaluate", "--checkpoint", str(tiny_data / "run.opnw"), "--data", str(tiny_data / "test.odnb")]) == 0
    assert "over 4 functions" in capsys.readouterr().out


def test_seed_override_changes_report(tiny_data):
    cfg = write_config(tiny_data / "run.ini", TRAIN_INI)
    main(["train", str(cfg)])
    base = (tiny_data / "run.csv").read_text()
    main(["train", str(cfg)])
    again = (tiny_data / "run.csv").read_text()
    main(["train", str(cfg), "--seed", "5"])
    other = (tiny_data / "run.csv").read_text()

    def numbers(text):
        return [row[:4] for row in csv.reader(text.splitlines())]

    assert numbers(base) == numbers(again)
    assert numbers(base) != numbers(other)
    assert load_config(tiny_data / "run.csv.ini")["train"]["seed"] == 5


def test_missing_dataset_is_usage_error(tmp_path, capsys):
    cfg = write_config(tmp_path / "run.ini", TRAIN_INI)
    assert main(["train", str(cfg)]) == 2
    assert "file not found" in capsys.readouterr().err


def test_unknown_key_names_location(tiny_data, capsys):
    cfg = write_config(tiny_data / "bad.ini", TRAIN_INI.replace("epochs = 15", "epoch = 15"))
    assert main(["train", str(cfg)]) == 2
    assert "bad.ini:11 [train] epoch: unknown key" in capsys.readouterr().err
    cfg = write_config(tiny_data / "bad2.ini", TRAIN_INI + "\n[extra]\nx = 1\n")
    assert main(["train", str(cfg)]) == 2
    cfg = write_config(tiny_data / "bad3.ini", TRAIN_INI.replace("epochs = 15", "epochs = many"))
    assert main(["train", str(cfg)]) == 2
    assert "cannot read 'many'" in capsys.readouterr().err


def test_bad_model_kind_is_usage_error(tiny_data):
    cfg = write_config(tiny_data / "k.ini", TRAIN_INI.replace("kind = hyper", "kind = fno"))
    assert main(["train", str(cfg)]) == 2


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_divergence_exits_3(tiny_data, capsys):
    body = TRAIN_INI.replace("lr0 = 0.003", "lr0 = 1e100").replace("kind = hyper", "kind = hyper\nactivation = identity")
    cfg = write_config(tiny_data / "div.ini", body)
    with np.errstate(all="ignore"):
        code = main(["train", str(cfg)])
    assert code == 3
    assert "diverged" in capsys.readouterr().err
    assert (tiny_data / "div.csv").exists()


def test_count_params(tmp_path, capsys):
    cfg = write_config(tmp_path / "adv.ini", "[model]\nkind = deeponet\nactivation = relu\n"
                                             "branch = 40,256,256\ntrunk = 1,256,256,256,256\n")
    assert main(["count-params", str(cfg)]) == 0
    assert "total 274,177 (274K)" in capsys.readouterr().out

    cfg = write_config(tmp_path / "h.ini", "[model]\nkind = hyper\nhyper = 10,681\ntarget = 1,20,20,10,1\n")
    assert main(["count-params", str(cfg)]) == 0
    out = capsys.readouterr().out
    assert "total 7,491" in out  # 10*681 + 681

    cfg = write_config(tmp_path / "c.ini", "[model]\nkind = chunked_hyper\nactivation = relu\nchunk_size = 1024\n"
                                           "latent_dim = 16\nhyper = 56,128,128,128,128,128,1024\n"
                                           "target = 1,256,256,256,256,1\n")
    assert main(["count-params", str(cfg)]) == 0
    out = capsys.readouterr().out
    assert "latents" in out and "208,544" in out

    assert main(["count-params", "--table"]) == 0
    assert "5.6K" in capsys.readouterr().out


def test_bench_list_and_unknown(capsys):
    assert main(["bench", "--list"]) == 0
    assert "same-target-identity" in capsys.readouterr().out
    assert main(["bench", "no-such-scenario"]) == 2
    assert "registered:" in capsys.readouterr().err


def test_bench_same_target_identity_grid(tmp_path, capsys):
    out = tmp_path / "b.csv"
    code = main(["bench", "same-target-identity", "--epochs", "1", "--out", str(out)])
    with open(out, newline="") as fh:
        rows = list(csv.reader(fh))
    assert len(rows) == 1 + 25
    assert {r[1] for r in rows[1:]} == {"DeepONet", "Shift", "Flex", "NOMAD", "Hyper"}
    summary = capsys.readouterr().out
    assert code == (0 if "FAIL" not in summary else 1)


def test_bench_paper_scale_flag(monkeypatch, capsys, tmp_path):
    seen = {}
    import operonet.bench as bench_pkg

    def fake_run(spec, **kw):
        seen.update(kw)
        return bench_pkg.BenchResult(spec.name)

    monkeypatch.setattr(bench_pkg, "run", fake_run)
    assert main(["bench", "same-budget-burgers", "--paper-scale", "--out", str(tmp_path / "x.csv")]) == 0
    assert seen["paper_scale"] is True


def test_convert_three_input_dump(tmp_path, capsys):
    g = [0.25, 0.75]
    sensors = np.array([(a, b) for a in g for b in g])
    queries = np.array([(t, a, b) for t in (0.25, 0.5, 0.75) for a, b in sensors])
    inputs = np.array([[1.0, 1.1, 0.9, 1.2], [0.8, 1.0, 1.05, 0.95]])
    targets = np.tile(inputs, 3)
    src = tmp_path / "sw.npz"
    np.savez(src, sensor_locations=sensors, query_points=queries, inputs=inputs, targets=targets)
    out = tmp_path / "sw.odnb"
    assert main(["convert", str(src), "--out", str(out), "--name", "shallow-water"]) == 0
    ds = read_dataset(out)
    assert (ds.d_x, ds.d_y, ds.q) == (2, 3, 12)
    assert np.array_equal(ds.targets, targets)
    np.savez(src, inputs=inputs)
    assert main(["convert", str(src), "--out", str(out)]) == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "operonet", "bench", "--list"], capture_output=True, text=True)
    assert proc.returncode == 0 and "shallow-small" in proc.stdout
