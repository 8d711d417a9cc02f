import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
import yaml

from labelstop import cli
from labelstop.config import ConfigError, load_config, parse_config
from labelstop.experiment import plan_runs, read_records

ROOT = Path(__file__).resolve().parents[1]


def synthetic_cfg(tmp_path, **stopping):
    cfg = {
        "seed": 3,
        "dataset": {"source": "synthetic", "num_classes": 3, "dim": 4, "class_separation": 2.0, "train_per_class": 8, "test_per_class": 30},
        "learner": {"kind": "nearest_centroid"},
        "stopping": stopping or {"gamma": 0.001},
    }
    path = tmp_path / "sim.yaml"
    path.write_text(yaml.safe_dump(cfg))
    return path


def csv_cfg(tmp_path, **extra):
    rng = np.random.default_rng(0)
    X = rng.normal(size=(30, 2))
    y = (X[:, 0] + 0.3 * rng.normal(size=30) > 0).astype(int)
    lines = [f"{a!r},{b!r},{'pos' if c else 'neg'}" for (a, b), c in zip(X.tolist(), y)]
    (tmp_path / "toy.csv").write_text("\n".join(lines) + "\n")
    cfg = {
        "seed": 5,
        "dataset": {"source": "csv", "path": "toy.csv", "class_map": {"neg": 0, "pos": 1}},
        "learner": {"kind": "adaboost", "rounds": 5},
        "sampling": {"strategies": ["random", "mixed"]},
        "stopping": {"gamma_grid": [0.01, 0.001, 0.0]},
        "evaluation": {"folds": 3, "repetitions": 2, "trim": 2},
    }
    for k, v in extra.items():
        cfg[k] = v
    path = tmp_path / "toy.yaml"
    path.write_text(yaml.safe_dump(cfg))
    return path


def files(directory):
    return {p.relative_to(directory).as_posix(): p.read_bytes() for p in sorted(Path(directory).rglob("*")) if p.is_file()}


def test_simulate_outputs(tmp_path, capsys):
    cfg = synthetic_cfg(tmp_path)
    assert cli.main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "a")]) == 0
    table = (tmp_path / "a" / "trajectory.csv").read_text().splitlines()
    assert table[0] == "t,v_t,predicted_error,test_error,cost,stop"
    assert table[-1].endswith(",1") or len(table) == 26
    rec = json.loads((tmp_path / "a" / "record.jsonl").read_text())
    assert rec["gamma"] == 0.001
    assert json.loads(capsys.readouterr().out)["stop_time"] == rec["stop_time"]


def test_simulate_large_gamma_single_row(tmp_path):
    cfg = synthetic_cfg(tmp_path)
    assert cli.main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "a"), "--gamma", "0.1"]) == 0
    rows = (tmp_path / "a" / "trajectory.csv").read_text().splitlines()
    assert len(rows) == 2 and rows[1].startswith("0,,") and rows[1].endswith(",1")


def test_simulate_deterministic(tmp_path):
    cfg = synthetic_cfg(tmp_path)
    for name in ("a", "b"):
        assert cli.main(["simulate", "--config", str(cfg), "--out", str(tmp_path / name)]) == 0
    a, b = files(tmp_path / "a"), files(tmp_path / "b")
    a.pop("config.yaml"), b.pop("config.yaml")
    assert a == b


def test_sweep_report_idempotent(tmp_path):
    cfg = csv_cfg(tmp_path)
    out = tmp_path / "sweep"
    assert cli.main(["sweep", "--config", str(cfg), "--out", str(out)]) == 0
    records, skipped = read_records(out)
    assert not skipped and len(records) == 2 * 3 * 2 * 3
    assert cli.main(["report", str(out)]) == 0
    assert (out / "report.csv").read_text() == (out / "summary.csv").read_text()
    first = files(out)
    out2 = tmp_path / "sweep2"
    assert cli.main(["sweep", "--config", str(cfg), "--out", str(out2), "--parallel", "2"]) == 0
    second = files(out2)
    first.pop("report.csv")
    assert first.keys() == second.keys()
    for k in first:
        if k != "config.yaml":
            assert first[k] == second[k], k


def test_run_needs_single_gamma(tmp_path):
    cfg = csv_cfg(tmp_path)
    assert cli.main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1
    err = json.loads((tmp_path / "o" / "error.json").read_text())
    assert err["error"] == "config" and err["path"] == "stopping.gamma"
    assert cli.main(["run", "--config", str(cfg), "--out", str(tmp_path / "r"), "--gamma", "0.01"]) == 0
    assert len(list((tmp_path / "r" / "records").glob("*.jsonl"))) == 12


def test_report_skips_corrupt(tmp_path, capsys):
    cfg = csv_cfg(tmp_path)
    out = tmp_path / "s"
    cli.main(["sweep", "--config", str(cfg), "--out", str(out)])
    victim = sorted((out / "records").glob("*.jsonl"))[0]
    victim.write_text("{not json")
    capsys.readouterr()
    assert cli.main(["report", str(out)]) == 0
    io = capsys.readouterr()
    assert victim.name in io.err
    assert victim.name in json.loads(io.out)["skipped"]


def test_report_empty_dir(tmp_path, capsys):
    (tmp_path / "empty").mkdir()
    assert cli.main(["report", str(tmp_path / "empty")]) == 2
    assert json.loads(capsys.readouterr().err)["type"] == "EmptyInputError"
    assert cli.main(["report", str(tmp_path / "missing")]) == 2


def test_missing_dataset_is_config_error(tmp_path):
    cfg = csv_cfg(tmp_path)
    (tmp_path / "toy.csv").unlink()
    assert cli.main(["sweep", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1


def test_runtime_error_exit_code(tmp_path):
    cfg = csv_cfg(tmp_path)
    (tmp_path / "toy.csv").write_text("1,2,neg\n1,x,pos\n")
    assert cli.main(["sweep", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    err = json.loads((tmp_path / "o" / "error.json").read_text())
    assert err["error"] == "runtime" and ":2:" in err["message"]


def test_subprocess_entry_point(tmp_path):
    cfg = synthetic_cfg(tmp_path)
    bad = tmp_path / "bad.yaml"
    bad.write_text("seed: 1\ndataset: {source: synthetic}\nbogus: 3\n")
    res = subprocess.run([sys.executable, "-m", "labelstop.cli", "simulate", "--config", str(bad)], capture_output=True, text=True)
    assert res.returncode == 1
    assert json.loads(res.stderr.strip().splitlines()[-1])["path"] == "bogus"
    res = subprocess.run([sys.executable, "-m", "labelstop.cli", "simulate", "--config", str(cfg), "--out", str(tmp_path / "x"), "--gamma", "0.2"], capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout)["stop_time"] == 0


# --- config validation ------------------------------------------------------


def base():
    return {"seed": 1, "dataset": {"source": "synthetic"}}


@pytest.mark.parametrize(
    "patch,path",
    [
        ({"stopping": {"gamma_grid": []}}, "stopping.gamma_grid"),
        ({"stopping": {"gamma": -1}}, "stopping.gamma"),
        ({"stopping": {"horizon": 21}}, "stopping.horizon"),
        ({"learner": {"kind": "svm"}}, "learner.kind"),
        ({"learner": {"kind": "adaboost"}}, "learner.kind"),
        ({"sampling": {"strategies": ["greedy"]}}, "sampling.strategies"),
        ({"dataset": {"source": "synthetic", "dim": 0}}, "dataset.dim"),
        ({"dataset": {"source": "arff"}}, "dataset.source"),
        ({"belief": {"curves": [{"family": "inverse", "constants": [0.5]}]}}, "belief.curves"),
        ({"belief": {"curves": [{"family": "cubic", "constants": [2]}]}}, "belief.curves[0].family"),
        ({"evaluation": {"folds": 1}}, "evaluation.folds"),
        ({"evaluation": {"nope": 1}}, "evaluation.nope"),
        ({"seed": "abc"}, "seed"),
    ],
)
def test_config_errors(patch, path):
    raw = {**base(), **patch}
    with pytest.raises(ConfigError) as info:
        parse_config(raw)
    assert info.value.path == path


def test_seed_required():
    with pytest.raises(ConfigError):
        parse_config({"dataset": {"source": "synthetic"}})


def test_overrides_and_defaults():
    cfg = parse_config(base(), {"stopping.gamma": 0.5, "output.dir": "x", "seed": 9})
    assert cfg.gammas == [0.5] and cfg.output["dir"] == "x" and cfg.seed == 9
    cfg = parse_config(base())
    assert len(cfg.gammas) == 64 and cfg.dataset["class_separation"] == 2.5
    cfg = parse_config({**base(), "stopping": {"gamma_grid": [0.001, 0.1, 0.001]}})
    assert cfg.gammas == [0.1, 0.001]
    spec = parse_config({**base(), "belief": {"curves": [{"family": "inverse", "constants": [1, 2]}], "r_inf_points": 5}}).belief_spec(10)
    assert spec.shape == (2, 5) and spec.r_inf_grid[-1] == pytest.approx(0.9)


def test_run_counts_for_shipped_configs():
    wdbc = load_config(ROOT / "configs" / "wdbc.yaml")
    assert len([p for p in plan_runs(wdbc) if p.strategy == "random"]) == 15
    spam = load_config(ROOT / "configs" / "spambase.yaml")
    assert len([p for p in plan_runs(spam) if p.strategy == "random"]) == 9
    fig1 = load_config(ROOT / "configs" / "fig1.yaml")
    assert fig1.gammas == [0.001] and fig1.dataset["num_classes"] == 10 and fig1.dataset["dim"] == 8
