"""Command-line entry point: ``labelstop {simulate,run,sweep,report}``.

Exit codes: 0 success, 1 configuration error, 2 runtime error.  Failures
print a one-line JSON error record on stderr (and to ``error.json`` in the
output directory when one is known).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import experiment as exp
from .config import ConfigError, load_config
from .evaluation import summarize

log = logging.getLogger("labelstop")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


class EmptyInputError(RuntimeError):
    pass


def _config(args):
    overrides = {
        "output.dir": args.out,
        "seed": args.seed,
        "output.parallel": args.parallel,
        "stopping.gamma": args.gamma,
    }
    return load_config(args.config, overrides)


def cmd_simulate(args) -> int:
    cfg = _config(args)
    if len(cfg.gammas) != 1:
        raise ConfigError("stopping.gamma", "simulate needs a single gamma (set stopping.gamma or pass --gamma)")
    plan = exp.plan_runs(cfg)[0]
    traces = exp.run_experiment(cfg, parallel=1, plans=[plan])
    rec = exp.records_from_traces(cfg, traces)[0]
    out = Path(cfg.output["dir"])
    exp.write_config(cfg, out)
    (out / "record.jsonl").write_text(rec.to_json() + "\n")
    (out / "trajectory.csv").write_text(exp.trajectory_table(rec, full=cfg.output["table"] == "full"))
    print(json.dumps({"stop_time": rec.stop_time, "stop_reason": rec.stop_reason, "cost": rec.cost, "out": str(out)}))
    return EXIT_OK


def _run_grid(cfg) -> int:
    traces = exp.run_experiment(cfg)
    records = exp.records_from_traces(cfg, traces)
    out = Path(cfg.output["dir"])
    exp.write_config(cfg, out)
    exp.write_records(records, out)
    # round-trip through the serialised form so report reproduces this file exactly
    summary = summarize(exp.read_records(out)[0], trim=cfg.evaluation["trim"])
    (out / "summary.csv").write_text(summary.to_csv())
    print(json.dumps({"runs": len(traces), "records": len(records), "out": str(out)}))
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = _config(args)
    if len(cfg.gammas) != 1:
        raise ConfigError("stopping.gamma", "run needs a single gamma; use sweep for a grid")
    return _run_grid(cfg)


def cmd_sweep(args) -> int:
    return _run_grid(_config(args))


def cmd_report(args) -> int:
    directory = Path(args.records)
    if not directory.is_dir():
        raise EmptyInputError(f"{directory} is not a directory")
    records, skipped = exp.read_records(directory)
    for name, reason in skipped:
        print(f"skipped {name}: {reason}", file=sys.stderr)
    if not records:
        raise EmptyInputError(f"no readable records in {directory}")
    trim = records[0].config.get("evaluation", {}).get("trim", 1)
    summary = summarize(records, trim=trim)
    target = Path(args.out) if args.out else directory / "report.csv"
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(summary.to_csv())
    print(json.dumps({"records": len(records), "skipped": [n for n, _ in skipped], "out": str(target)}))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="labelstop", description="Cost-aware stopping for label acquisition.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_config=True):
        p.add_argument("--config", required=needs_config, help="experiment config (YAML or JSON)")
        p.add_argument("--out", help="output directory (overrides output.dir)")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--parallel", type=int, help="worker processes")
        p.add_argument("--gamma", type=float, help="single labelling cost (overrides the grid)")

    for name, fn, help_ in (
        ("simulate", cmd_simulate, "single illustrative run with a trajectory table"),
        ("run", cmd_run, "cross-validated runs at one labelling cost"),
        ("sweep", cmd_sweep, "cross-validated runs over a grid of labelling costs"),
    ):
        p = sub.add_parser(name, help=help_)
        common(p)
        p.set_defaults(func=fn)
    p = sub.add_parser("report", help="recompute summary tables from stored records")
    p.add_argument("records", help="experiment directory or directory of record files")
    p.add_argument("--out", help="summary file to write (default: <records>/report.csv)")
    p.set_defaults(func=cmd_report)
    return parser


def _fail(kind: str, exc: Exception, out_dir) -> None:
    payload = {"error": kind, "type": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, ConfigError):
        payload["path"] = exc.path
    line = json.dumps(payload, sort_keys=True)
    print(line, file=sys.stderr)
    if out_dir:
        try:
            Path(out_dir).mkdir(parents=True, exist_ok=True)
            (Path(out_dir) / "error.json").write_text(line + "\n")
        except OSError:
            pass


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    out_dir = args.out if args.command != "report" else None
    try:
        return args.func(args)
    except ConfigError as exc:
        _fail("config", exc, out_dir)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001
        log.debug("runtime failure", exc_info=True)
        _fail("runtime", exc, out_dir)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
