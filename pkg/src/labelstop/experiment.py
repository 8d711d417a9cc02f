"""Wiring an :class:`ExperimentConfig` to datasets, runs and output files."""

from __future__ import annotations

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from . import datasets
from .config import ConfigError, ExperimentConfig
from .evaluation import RunRecord, make_record, run_trace, summarize
from .learners import Learner

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunPlan:
    run_id: str
    repetition: int
    fold: int
    strategy: str
    seed: int


def derived_seed(*parts: int) -> int:
    return int(np.random.SeedSequence(list(parts)).generate_state(1)[0])


def load_dataset(cfg: ExperimentConfig):
    ds = cfg.dataset
    if ds["source"] != "csv":
        return None
    try:
        data = datasets.load_csv(
            ds["path"],
            label_column=ds["label_column"],
            ignore_columns=ds["ignore_columns"],
            class_map=ds.get("class_map"),
            header=ds["header"],
            delimiter=ds["delimiter"],
            name=ds.get("name"),
        )
    except FileNotFoundError:
        raise ConfigError("dataset.path", f"file not found: {ds['path']}") from None
    if ds["minmax"]:
        data = datasets.minmax_scale(data)
    if cfg.learner["kind"] != "nearest_centroid" and data.num_classes != 2:
        raise ConfigError("learner.kind", f"{cfg.learner['kind']} needs a binary dataset, found {data.num_classes} classes")
    return data


def plan_runs(cfg: ExperimentConfig) -> list[RunPlan]:
    plans = []
    synthetic = cfg.dataset["source"] == "synthetic"
    for rep in range(cfg.evaluation["repetitions"]):
        folds = [0] if synthetic else range(cfg.evaluation["folds"])
        for fold in folds:
            run_id = f"rep{rep:02d}" if synthetic else f"rep{rep:02d}-fold{fold}"
            seed = derived_seed(cfg.seed, rep, fold)
            for strategy in cfg.sampling["strategies"]:
                plans.append(RunPlan(run_id, rep, fold, strategy, seed))
    return plans


def _split(cfg: ExperimentConfig, plan: RunPlan, data):
    ds = cfg.dataset
    if data is None:
        train, test = datasets.gen_gaussian_holdout(
            ds["num_classes"], ds["dim"], ds["class_separation"], ds["train_per_class"], ds["test_per_class"],
            derived_seed(cfg.seed, plan.repetition),
        )
        return train, test
    fp = datasets.stratified_kfold(data, cfg.evaluation["folds"], derived_seed(cfg.seed, plan.repetition))
    tr, te = fp.split(plan.fold)
    return data.subset(tr), data.subset(te)


def execute(cfg: ExperimentConfig, plan: RunPlan, data):
    train, test = _split(cfg, plan, data)
    learner = Learner(cfg.learner["kind"], train.num_classes, cfg.learner["rounds"], cfg.learner["temperature"])
    ev = cfg.evaluation
    return run_trace(
        train.X, train.y, test.X, test.y, learner, cfg.belief_spec(train.num_classes),
        strategy=plan.strategy,
        seed=plan.seed,
        run_id=plan.run_id,
        rule=cfg.stopping["rule"],
        gammas=cfg.gammas,
        horizon=cfg.stopping["horizon"],
        active_fraction=cfg.sampling["active_fraction"],
        test_stride=ev["test_stride"],
        max_labels=ev["max_labels"],
        snapshot_every=ev["snapshot_every"],
        enforce_order=cfg.belief["enforce_order"],
    )


def _execute_star(args):
    return execute(*args)


def run_experiment(cfg: ExperimentConfig, parallel: int | None = None, plans=None):
    data = load_dataset(cfg)
    plans = plan_runs(cfg) if plans is None else plans
    jobs = [(cfg, p, data) for p in plans]
    workers = parallel or cfg.output["parallel"]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            traces = list(pool.map(_execute_star, jobs))
    else:
        traces = [execute(*job) for job in jobs]
    return traces


def records_from_traces(cfg: ExperimentConfig, traces) -> list[RunRecord]:
    snapshot = {k: v for k, v in cfg.to_dict().items() if k != "output"}
    out = []
    for trace in traces:
        for gamma in cfg.gammas:
            out.append(make_record(trace, gamma, cfg.stopping["rule"], snapshot))
    return out


def gamma_tag(gamma: float) -> str:
    return "0" if gamma == 0 else f"{gamma:.3e}"


def record_filename(rec: RunRecord) -> str:
    return f"{rec.strategy}_{rec.run_id}_g{gamma_tag(rec.gamma)}.jsonl"


def write_records(records, out_dir: Path) -> None:
    rec_dir = out_dir / "records"
    rec_dir.mkdir(parents=True, exist_ok=True)
    for rec in records:
        (rec_dir / record_filename(rec)).write_text(rec.to_json() + "\n")


def write_config(cfg: ExperimentConfig, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "config.yaml").write_text(yaml.safe_dump(cfg.to_dict(), sort_keys=True))


def read_records(directory) -> tuple[list[RunRecord], list[tuple[str, str]]]:
    """Load every ``*.jsonl`` record below ``directory``.

    Returns ``(records, skipped)`` where ``skipped`` lists ``(file, reason)``
    for unreadable or inconsistent files.
    """
    directory = Path(directory)
    rec_dir = directory / "records" if (directory / "records").is_dir() else directory
    records, skipped = [], []
    for path in sorted(rec_dir.glob("*.jsonl")):
        try:
            for line in path.read_text().splitlines():
                if line.strip():
                    records.append(RunRecord.from_dict(json.loads(line)))
        except (ValueError, TypeError, KeyError) as exc:
            skipped.append((path.name, f"{type(exc).__name__}: {exc}"))
            log.warning("skipping %s: %s", path.name, exc)
    return records, skipped


def trajectory_table(rec: RunRecord, full: bool = False) -> str:
    """Per-decision-point table: t, observed error, predicted error, test error, cost, stop flag."""
    tr = rec.trace
    lines = ["t,v_t,predicted_error,test_error,cost,stop"]
    for c, t in enumerate(tr.check_times):
        z = tr.observations[c]
        r = tr.error_at(t)
        flag = 1 if rec.stop_check == c else 0
        lines.append(f"{t},{'' if z is None else z},{tr.predicted_history[c]!r},{r!r},{r + rec.gamma * t!r},{flag}")
        if flag and not full:
            break
    return "\n".join(lines) + "\n"
