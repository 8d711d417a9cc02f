"""Running OBSV against held-out data and scoring stopping rules by cost.

A single run queries labels until the random pool is exhausted (or a cap
is hit), recording the test-error trajectory and, at every decision point,
the quantities the stopping rules need.  Because the stopping decision
never changes which labels are bought afterwards, one trace serves every
labelling cost: the stopping time for a given ``gamma`` is the first
decision point at which the rule fires.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import belief as bel
from .learners import Learner
from .sampling import add_to_training, next_active, next_random, split_pool
from .stopping import StoppingConfig, bounded_should_stop, oracle_stop

RULES = ("obsv", "bayes_risk")
RULE_FIRED = "rule"
EXHAUSTED = "budget-exhausted"


def default_gamma_grid() -> list[float]:
    """``m * 10**-k`` for m = 9..1 and k = 1..7, then 0; descending."""
    grid = [float(f"{m}e-{k}") for k in range(1, 8) for m in range(9, 0, -1)]
    return grid + [0.0]


@dataclass
class Trace:
    """Everything one run observed, independent of the labelling cost."""

    run_id: str
    strategy: str
    seed: int
    r0: float
    query_order: list = field(default_factory=list)
    # one entry per decision point; the first is the prior check before any label
    check_times: list = field(default_factory=list)
    check_k: list = field(default_factory=list)
    observations: list = field(default_factory=list)
    predicted_history: list = field(default_factory=list)
    expected_gain: list = field(default_factory=list)
    # decision-point index at which a gamma-dependent rule fired, keyed by repr(gamma)
    rule_stops: dict = field(default_factory=dict)
    test_times: list = field(default_factory=list)
    test_errors: list = field(default_factory=list)
    measured: list = field(default_factory=list)
    belief_spec: dict | None = None
    belief_snapshots: list = field(default_factory=list)

    @property
    def final_time(self) -> int:
        return self.test_times[-1]

    @property
    def interpolated(self) -> bool:
        return not all(self.measured)

    def error_at(self, t: int) -> float:
        return self.test_errors[self.test_times.index(t)]


@dataclass
class RunRecord:
    run_id: str
    strategy: str
    gamma: float
    seed: int
    stop_time: int
    stop_reason: str
    stop_check: int | None
    stop_error: float
    cost: float
    trace: Trace
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["trace"]["interpolated"] = self.trace.interpolated
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, allow_nan=False)

    @classmethod
    def from_dict(cls, d: dict) -> "RunRecord":
        d = dict(d)
        tr = dict(d.pop("trace"))
        tr.pop("interpolated", None)
        rec = cls(trace=Trace(**tr), **d)
        expected = rec.stop_error + rec.gamma * rec.stop_time
        if rec.stop_time > rec.trace.final_time or not math.isclose(expected, rec.cost, rel_tol=0, abs_tol=1e-12):
            raise ValueError(f"record {rec.run_id} is internally inconsistent")
        return rec


def run_trace(
    X_train,
    y_train,
    X_test,
    y_test,
    learner: Learner,
    spec: bel.BeliefGridSpec,
    strategy: str = "random",
    seed: int = 0,
    run_id: str = "run",
    rule: str = "obsv",
    gammas=(),
    horizon: int = 1,
    active_fraction: float = 0.5,
    test_stride: int = 1,
    max_labels: int | None = None,
    snapshot_every: int = 0,
    enforce_order: bool = True,
) -> Trace:
    """Execute the OBSV loop to exhaustion and return its trace.

    Belief updates use only draws from the random pool; active-pool draws
    only train the classifier.  With ``rule="bayes_risk"`` the
    bounded-horizon rule is evaluated for each of ``gammas`` until it
    fires, and the firing times are stored in ``rule_stops``.
    """
    if rule not in RULES:
        raise ValueError(f"unknown stopping rule {rule!r}")
    if test_stride < 1:
        raise ValueError("test_stride must be >= 1")
    X_train = np.asarray(X_train, dtype=np.float64)
    y_train = np.asarray(y_train, dtype=np.int64)
    X_test = np.asarray(X_test, dtype=np.float64)
    y_test = np.asarray(y_test, dtype=np.int64)
    dim = X_train.shape[1]

    state = split_pool(len(y_train), strategy, seed, active_fraction)
    belief = bel.init_belief(spec, learner.num_classes, enforce_order)
    model = learner.initial_model(dim)
    trace = Trace(run_id, strategy, int(seed), belief.r0)
    if snapshot_every:
        trace.belief_spec = spec.to_dict()
    pending = sorted(set(float(g) for g in gammas)) if rule == "bayes_risk" else []

    def measure(t, force=False):
        steps = len(trace.test_times)
        if force or steps % test_stride == 0:
            trace.test_errors.append(model.error_rate(X_test, y_test))
            trace.measured.append(True)
        else:
            trace.test_errors.append(math.nan)
            trace.measured.append(False)
        trace.test_times.append(t)

    def check(t, z):
        k = 2 if state.d_a else 1
        trace.check_times.append(t)
        trace.check_k.append(k)
        trace.observations.append(z)
        trace.expected_gain.append(bel.expected_error(belief, t) - bel.expected_error(belief, t + k))
        if snapshot_every and (len(trace.check_times) - 1) % snapshot_every == 0:
            trace.belief_snapshots.append(belief.to_dict(include_spec=False))
        for g in list(pending):
            decision = bounded_should_stop(belief, t, StoppingConfig(g, horizon))
            if decision.stop:
                trace.rule_stops[repr(g)] = len(trace.check_times) - 1
                pending.remove(g)

    t = 0
    measure(0, force=True)
    trace.predicted_history.append(bel.expected_error(belief, 0))
    check(0, None)
    while state.d_r and (max_labels is None or t < max_labels):
        i, state = next_random(state)
        z = int(model.predict(X_train[i]) != y_train[i])
        trace.predicted_history.append(bel.expected_error(belief, t))
        belief = bel.update(belief, bel.ErrorObservation((z,)), t)
        check(t, z)
        if state.d_a:
            j, state = next_active(state, model, X_train)
            state = add_to_training(state, j)
        state = add_to_training(state, i)
        idx = np.asarray(state.d_t, dtype=np.int64)
        model = learner.fit(X_train[idx], y_train[idx])
        t = len(state.d_t)
        measure(t, force=not state.d_r)
    if not trace.measured[-1]:
        trace.test_errors[-1] = model.error_rate(X_test, y_test)
        trace.measured[-1] = True
    trace.query_order = list(state.d_t)
    _interpolate(trace)
    return trace


def _interpolate(trace: Trace) -> None:
    m = np.asarray(trace.measured)
    if m.all():
        return
    t = np.asarray(trace.test_times, dtype=np.float64)
    r = np.asarray(trace.test_errors, dtype=np.float64)
    r[~m] = np.interp(t[~m], t[m], r[m])
    trace.test_errors = r.tolist()


def obsv_stop_check(trace: Trace, gamma: float) -> int | None:
    """Index of the first decision point whose expected gain does not repay ``k`` labels."""
    for c, (k, gain) in enumerate(zip(trace.check_k, trace.expected_gain)):
        if gain <= k * gamma:
            return c
    return None


def stop_time(trace: Trace, gamma: float, rule: str = "obsv") -> tuple[int, str, int | None]:
    """``(T, reason, decision index)`` for one labelling cost."""
    if rule == "obsv":
        c = obsv_stop_check(trace, gamma)
    else:
        c = trace.rule_stops.get(repr(float(gamma)))
    if c is None:
        return trace.final_time, EXHAUSTED, None
    return trace.check_times[c], RULE_FIRED, c


def make_record(trace: Trace, gamma: float, rule: str = "obsv", config: dict | None = None) -> RunRecord:
    T, reason, c = stop_time(trace, gamma, rule)
    r_T = trace.error_at(T)
    return RunRecord(trace.run_id, trace.strategy, float(gamma), trace.seed, T, reason, c, r_T, r_T + gamma * T, trace, config or {})


def run_obsv(X_train, y_train, X_test, y_test, learner, spec, stopping: StoppingConfig, strategy="random", seed=0, **kw) -> RunRecord:
    """One OBSV run at a single labelling cost."""
    rule = kw.pop("rule", "obsv")
    if rule == "bayes_risk":
        kw.setdefault("gammas", [stopping.gamma])
        kw.setdefault("horizon", stopping.horizon)
    trace = run_trace(X_train, y_train, X_test, y_test, learner, spec, strategy, seed, rule=rule, **kw)
    return make_record(trace, stopping.gamma, rule)


def compute_ve(records, gamma: float) -> float:
    """Empirical expected cost: mean of ``R_T + gamma * T`` over runs."""
    records = list(records)
    if not records:
        raise ValueError("no records to average")
    return float(np.mean([r.stop_error + gamma * r.stop_time for r in records]))


def oracle_from_record(record: RunRecord, gamma: float) -> tuple[int, float]:
    tr = record.trace
    if not tr.test_errors:
        raise ValueError(f"record {record.run_id} has no test-error trajectory")
    return oracle_stop(tr.test_errors, gamma, tr.test_times)


ZERO_DENOMINATOR = "zero-den"


def _stats(values, trim: int):
    v = np.sort(np.asarray(values, dtype=np.float64))
    if v.size == 0:
        return None
    k = min(max(trim, 1), v.size) - 1
    return {"mean": float(v.mean()), "low": float(v[0]), "high": float(v[-1]), "trim_low": float(v[k]), "trim_high": float(v[-1 - k])}


@dataclass
class SweepSummary:
    rows: list

    COLUMNS = ("strategy", "gamma", "metric", "mean", "low", "high", "trim_low", "trim_high", "n", "n_zero_den")

    def get(self, strategy: str, gamma: float, metric: str) -> dict:
        for row in self.rows:
            if row["strategy"] == strategy and row["gamma"] == gamma and row["metric"] == metric:
                return row
        raise KeyError((strategy, gamma, metric))

    def to_csv(self) -> str:
        lines = [",".join(self.COLUMNS)]
        for row in self.rows:
            cells = []
            for c in self.COLUMNS:
                v = row[c]
                cells.append(repr(v) if isinstance(v, float) else str(v))
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"


def summarize(records, trim: int = 1) -> SweepSummary:
    """Aggregate per-run records into per-(strategy, gamma) statistics.

    Ratios with a zero denominator are counted in ``n_zero_den`` and left
    out of the statistics; a cell with no finite ratio is reported with
    the ``zero-den`` marker.
    """
    groups: dict = {}
    for rec in records:
        groups.setdefault((rec.strategy, rec.gamma), []).append(rec)
    rows = []

    def emit(strategy, gamma, metric, values, n_zero=0):
        s = _stats(values, trim)
        if s is None:
            s = {k: ZERO_DENOMINATOR for k in ("mean", "low", "high", "trim_low", "trim_high")}
        rows.append({"strategy": strategy, "gamma": gamma, "metric": metric, **s, "n": len(values) + n_zero, "n_zero_den": n_zero})

    def ratio(num, den):
        pairs = list(zip(num, den))
        vals = [a / b for a, b in pairs if b > 0]
        return vals, len(pairs) - len(vals)

    strategies = sorted({s for s, _ in groups})
    gammas = sorted({g for _, g in groups}, reverse=True)
    for strategy in strategies:
        for gamma in gammas:
            recs = sorted(groups.get((strategy, gamma), []), key=lambda r: r.run_id)
            if not recs:
                continue
            oracle = [oracle_from_record(r, gamma) for r in recs]
            emit(strategy, gamma, "obsv_stop_time", [r.stop_time for r in recs])
            emit(strategy, gamma, "oracle_stop_time", [t for t, _ in oracle])
            emit(strategy, gamma, "obsv_cost", [r.cost for r in recs])
            emit(strategy, gamma, "oracle_cost", [c for _, c in oracle])
            emit(strategy, gamma, "obsv_test_error", [r.stop_error for r in recs])
            vals, nz = ratio([r.cost for r in recs], [c for _, c in oracle])
            emit(strategy, gamma, "ratio_obsv_oracle", vals, nz)
    if "mixed" in strategies and "random" in strategies:
        for gamma in gammas:
            mixed = {r.run_id: r for r in groups.get(("mixed", gamma), [])}
            rand = {r.run_id: r for r in groups.get(("random", gamma), [])}
            paired = sorted(set(mixed) & set(rand))
            if not paired:
                continue
            vals, nz = ratio([mixed[k].cost for k in paired], [rand[k].cost for k in paired])
            emit("mixed/random", gamma, "ratio_obsv_cost", vals, nz)
            emit("mixed/random", gamma, "stop_time_difference", [mixed[k].stop_time - rand[k].stop_time for k in paired])
    return SweepSummary(rows)
