"""Experiment configuration: one YAML (or JSON) document, validated up front."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .belief import BeliefGridSpec, initial_error
from .curves import CurveFamily, models_from_config, default_models
from .evaluation import RULES, default_gamma_grid
from .learners import KINDS
from .sampling import STRATEGIES
from .stopping import MAX_HORIZON


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message


_SCHEMA = {
    "seed": None,
    "dataset": {
        "source", "num_classes", "dim", "class_separation", "train_per_class", "test_per_class",
        "path", "label_column", "ignore_columns", "class_map", "header", "delimiter", "minmax", "name",
    },
    "learner": {"kind", "rounds", "temperature"},
    "sampling": {"strategies", "active_fraction"},
    "belief": {"curves", "r_inf_points", "enforce_order"},
    "stopping": {"rule", "gamma", "gamma_grid", "horizon"},
    "evaluation": {"folds", "repetitions", "test_stride", "max_labels", "trim", "snapshot_every"},
    "output": {"dir", "parallel", "table"},
}


def _check_keys(raw: dict, allowed, where: str):
    if not isinstance(raw, dict):
        raise ConfigError(where, "expected a mapping")
    for key in raw:
        if key not in allowed:
            raise ConfigError(f"{where}.{key}" if where else key, "unknown key")


def _num(value, path, kind=float, lo=None, hi=None, lo_open=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, f"expected a number, got {value!r}")
    if kind is int and int(value) != value:
        raise ConfigError(path, f"expected an integer, got {value!r}")
    value = kind(value)
    if lo is not None and (value <= lo if lo_open else value < lo):
        raise ConfigError(path, f"must be {'>' if lo_open else '>='} {lo}")
    if hi is not None and value > hi:
        raise ConfigError(path, f"must be <= {hi}")
    return value


@dataclass
class ExperimentConfig:
    seed: int
    dataset: dict
    learner: dict = field(default_factory=dict)
    sampling: dict = field(default_factory=dict)
    belief: dict = field(default_factory=dict)
    stopping: dict = field(default_factory=dict)
    evaluation: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)

    @property
    def gammas(self) -> list[float]:
        if "gamma" in self.stopping:
            return [self.stopping["gamma"]]
        return list(self.stopping["gamma_grid"])

    @property
    def num_classes(self) -> int:
        return self.dataset["num_classes"]

    def belief_spec(self, num_classes: int) -> BeliefGridSpec:
        b = self.belief
        models = models_from_config(b["curves"]) if b.get("curves") else default_models()
        grid = np.linspace(0.0, initial_error(num_classes), b.get("r_inf_points", 51))
        return BeliefGridSpec.uniform(models, grid)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "dataset": self.dataset,
            "learner": self.learner,
            "sampling": self.sampling,
            "belief": self.belief,
            "stopping": self.stopping,
            "evaluation": self.evaluation,
            "output": self.output,
        }


def parse_config(raw: dict, overrides: dict | None = None) -> ExperimentConfig:
    """Validate a raw mapping and fill defaults.

    ``overrides`` maps dotted keys (``"output.dir"``) to values and is
    applied before validation.
    """
    raw = {k: (dict(v) if isinstance(v, dict) else v) for k, v in (raw or {}).items()}
    for dotted, value in (overrides or {}).items():
        if value is None:
            continue
        head, _, tail = dotted.partition(".")
        if tail:
            raw.setdefault(head, {})
            raw[head][tail] = value
            if dotted == "stopping.gamma":
                raw[head].pop("gamma_grid", None)
        else:
            raw[head] = value
    _check_keys(raw, _SCHEMA, "")
    if "seed" not in raw:
        raise ConfigError("seed", "a seed is required")
    seed = _num(raw["seed"], "seed", int, lo=0)
    for section, keys in _SCHEMA.items():
        if keys is not None and section in raw:
            _check_keys(raw[section], keys, section)
    if "dataset" not in raw:
        raise ConfigError("dataset", "missing section")

    ds = dict(raw["dataset"])
    source = ds.get("source")
    if source == "synthetic":
        ds["num_classes"] = _num(ds.get("num_classes", 10), "dataset.num_classes", int, lo=2)
        ds["dim"] = _num(ds.get("dim", 8), "dataset.dim", int, lo=1)
        ds["class_separation"] = _num(ds.get("class_separation", 2.5), "dataset.class_separation", lo=0)
        ds["train_per_class"] = _num(ds.get("train_per_class", 100), "dataset.train_per_class", int, lo=1)
        ds["test_per_class"] = _num(ds.get("test_per_class", 1000), "dataset.test_per_class", int, lo=1)
    elif source == "csv":
        if "path" not in ds:
            raise ConfigError("dataset.path", "required for csv datasets")
        ds["path"] = str(ds["path"])
        ds.setdefault("label_column", -1)
        ds.setdefault("ignore_columns", [])
        ds.setdefault("header", False)
        ds.setdefault("delimiter", ",")
        ds.setdefault("minmax", False)
        if ds.get("class_map") is not None:
            if not isinstance(ds["class_map"], dict):
                raise ConfigError("dataset.class_map", "expected a mapping")
            ds["class_map"] = {str(k): _num(v, f"dataset.class_map.{k}", int, lo=0) for k, v in ds["class_map"].items()}
            ds["num_classes"] = max(max(ds["class_map"].values()) + 1, 2)
    else:
        raise ConfigError("dataset.source", f"expected 'synthetic' or 'csv', got {source!r}")

    lr = dict(raw.get("learner", {}))
    lr.setdefault("kind", "nearest_centroid")
    if lr["kind"] not in KINDS:
        raise ConfigError("learner.kind", f"expected one of {KINDS}")
    lr["rounds"] = _num(lr.get("rounds", 100), "learner.rounds", int, lo=1)
    lr["temperature"] = _num(lr.get("temperature", 1.0), "learner.temperature", lo=0, lo_open=True)
    if lr["kind"] != "nearest_centroid" and ds.get("num_classes", 2) != 2:
        raise ConfigError("learner.kind", f"{lr['kind']} needs a binary dataset")

    sm = dict(raw.get("sampling", {}))
    strategies = sm.get("strategies", ["random"])
    if isinstance(strategies, str):
        strategies = [strategies]
    if not strategies or any(s not in STRATEGIES for s in strategies):
        raise ConfigError("sampling.strategies", f"expected a nonempty subset of {STRATEGIES}")
    sm["strategies"] = list(dict.fromkeys(strategies))
    sm["active_fraction"] = _num(sm.get("active_fraction", 0.5), "sampling.active_fraction", lo=0, hi=1, lo_open=True)
    if sm["active_fraction"] >= 1:
        raise ConfigError("sampling.active_fraction", "must be < 1")

    bl = dict(raw.get("belief", {}))
    if "curves" in bl:
        if not isinstance(bl["curves"], list) or not bl["curves"]:
            raise ConfigError("belief.curves", "expected a nonempty list")
        for n, entry in enumerate(bl["curves"]):
            where = f"belief.curves[{n}]"
            _check_keys(entry, {"family", "constants"}, where)
            try:
                CurveFamily(entry.get("family"))
            except ValueError:
                raise ConfigError(f"{where}.family", f"unknown family {entry.get('family')!r}") from None
            if not isinstance(entry.get("constants"), list) or not entry["constants"]:
                raise ConfigError(f"{where}.constants", "expected a nonempty list")
        try:
            models_from_config(bl["curves"])
        except ValueError as exc:
            raise ConfigError("belief.curves", str(exc)) from None
    bl["r_inf_points"] = _num(bl.get("r_inf_points", 51), "belief.r_inf_points", int, lo=1)
    bl["enforce_order"] = bool(bl.get("enforce_order", True))

    st = dict(raw.get("stopping", {}))
    st.setdefault("rule", "obsv")
    if st["rule"] not in RULES:
        raise ConfigError("stopping.rule", f"expected one of {RULES}")
    st["horizon"] = _num(st.get("horizon", 1), "stopping.horizon", int, lo=1, hi=MAX_HORIZON)
    if "gamma" in st:
        st["gamma"] = _num(st["gamma"], "stopping.gamma", lo=0)
        st.pop("gamma_grid", None)
    else:
        grid = st.get("gamma_grid", "default")
        if grid == "default":
            grid = default_gamma_grid()
        if not isinstance(grid, list) or not grid:
            raise ConfigError("stopping.gamma_grid", "expected a nonempty list")
        grid = [_num(g, f"stopping.gamma_grid[{n}]", lo=0) for n, g in enumerate(grid)]
        st["gamma_grid"] = sorted(set(grid), reverse=True)

    ev = dict(raw.get("evaluation", {}))
    ev["folds"] = _num(ev.get("folds", 3), "evaluation.folds", int, lo=2)
    ev["repetitions"] = _num(ev.get("repetitions", 1), "evaluation.repetitions", int, lo=1)
    ev["test_stride"] = _num(ev.get("test_stride", 1), "evaluation.test_stride", int, lo=1)
    if ev.get("max_labels") is not None:
        ev["max_labels"] = _num(ev["max_labels"], "evaluation.max_labels", int, lo=1)
    else:
        ev["max_labels"] = None
    ev["trim"] = _num(ev.get("trim", 1), "evaluation.trim", int, lo=1)
    ev["snapshot_every"] = _num(ev.get("snapshot_every", 0), "evaluation.snapshot_every", int, lo=0)

    out = dict(raw.get("output", {}))
    out["dir"] = str(out.get("dir", "labelstop-out"))
    out["parallel"] = _num(out.get("parallel", 1), "output.parallel", int, lo=1)
    out.setdefault("table", "until_stop")
    if out["table"] not in ("until_stop", "full"):
        raise ConfigError("output.table", "expected 'until_stop' or 'full'")

    return ExperimentConfig(seed, ds, lr, sm, bl, st, ev, out)


def load_config(path, overrides: dict | None = None) -> ExperimentConfig:
    """Read and validate a config file; relative dataset paths resolve against its directory."""
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text())
    except OSError as exc:
        raise ConfigError(str(path), f"cannot read config ({exc.strerror})") from None
    except yaml.YAMLError as exc:
        raise ConfigError(str(path), f"invalid YAML ({exc})") from None
    cfg = parse_config(raw or {}, overrides)
    if cfg.dataset["source"] == "csv" and not Path(cfg.dataset["path"]).is_absolute():
        cfg.dataset["path"] = str(path.parent / cfg.dataset["path"])
    return cfg
