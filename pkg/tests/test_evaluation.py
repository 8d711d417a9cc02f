import dataclasses
import json
import math

import numpy as np
import pytest

from labelstop.belief import BeliefGridSpec
from labelstop.datasets import gen_gaussian_holdout
from labelstop.evaluation import (
    EXHAUSTED,
    RULE_FIRED,
    RunRecord,
    Trace,
    compute_ve,
    default_gamma_grid,
    make_record,
    oracle_from_record,
    run_obsv,
    run_trace,
    stop_time,
    summarize,
)
from labelstop.learners import Learner
from labelstop.stopping import StoppingConfig


@pytest.fixture(scope="module")
def small():
    train, test = gen_gaussian_holdout(3, 4, 2.0, 12, 40, 5)
    return train, test, Learner("nearest_centroid", 3), BeliefGridSpec.default(3, 21)


def trace_for(small, strategy="random", seed=0, **kw):
    train, test, learner, spec = small
    return run_trace(train.X, train.y, test.X, test.y, learner, spec, strategy, seed, **kw)


def fake_record(errors, gamma, stop, run_id="r", strategy="random"):
    tr = Trace(run_id, strategy, 0, 0.5, test_times=list(range(len(errors))), test_errors=list(errors), measured=[True] * len(errors))
    return RunRecord(run_id, strategy, gamma, 0, stop, RULE_FIRED, None, errors[stop], errors[stop] + gamma * stop, tr)


def test_default_grid():
    g = default_gamma_grid()
    assert len(g) == 64 and g[-1] == 0.0 and sum(x > 0 for x in g) == 63
    assert g == sorted(g, reverse=True)
    assert g[0] == 0.9 and g[-2] == 1e-7


def test_large_gamma_stops_at_zero(small):
    train, test, learner, spec = small
    rec = run_obsv(train.X, train.y, test.X, test.y, learner, spec, StoppingConfig(0.1))
    assert rec.stop_time == 0 and rec.stop_reason == RULE_FIRED
    assert rec.cost == pytest.approx(rec.trace.test_errors[0])


def test_zero_gamma_runs_to_exhaustion(small):
    tr = trace_for(small)
    T, reason, c = stop_time(tr, 0.0)
    assert reason == EXHAUSTED and c is None
    assert T == tr.final_time == len(small[0].y)
    assert all(g > 0 for g in tr.expected_gain)


def test_random_strategy_one_label_per_step(small):
    tr = trace_for(small)
    assert tr.check_k == [1] * len(tr.check_k)
    # the prior check and the first observation both happen before any label
    assert tr.check_times == [0] + list(range(len(small[0].y)))
    assert np.all(np.diff(tr.test_times) == 1)
    assert sorted(tr.query_order) == list(range(len(small[0].y)))


def test_mixed_strategy_belief_uses_random_pool_only(small):
    tr = trace_for(small, "mixed")
    n = len(small[0].y)
    observed = [z for z in tr.observations if z is not None]
    assert len(observed) == n - n // 2
    # equal halves: the active pool lasts exactly as long as the random one
    assert tr.check_k == [2] * len(tr.check_k)
    assert np.all(np.diff(tr.test_times) == 2)
    assert sorted(tr.query_order) == list(range(n))


def test_oracle_from_record_examples():
    rec = fake_record([0.5, 0.3, 0.25, 0.24], 0.02, 3)
    assert oracle_from_record(rec, 0.02) == (2, pytest.approx(0.29))
    assert oracle_from_record(rec, 0.0)[0] == 3
    ts = [oracle_from_record(rec, g)[0] for g in default_gamma_grid()]
    assert ts == sorted(ts)
    with pytest.raises(ValueError):
        oracle_from_record(dataclasses.replace(rec, trace=Trace("x", "random", 0, 0.5)), 0.1)


def test_compute_ve_examples():
    rec = fake_record([0.5] * 10 + [0.2], 0.01, 10)
    assert compute_ve([rec], 0.01) == pytest.approx(0.3)
    a = fake_record([0.3], 0.0, 0)
    b = fake_record([0.5], 0.0, 0)
    assert compute_ve([a, b], 0.0) == pytest.approx(0.4)
    with pytest.raises(ValueError):
        compute_ve([], 0.1)


def test_compute_ve_linear(small):
    tr = trace_for(small)
    recs = [make_record(tr, 1e-3)]
    T = np.mean([r.stop_time for r in recs])
    R = np.mean([r.stop_error for r in recs])
    for g in (0.0, 1e-3, 0.2):
        assert compute_ve(recs, g) == pytest.approx(R + g * T, abs=1e-15)


def test_oracle_bounds_obsv_and_monotone(small):
    tr = trace_for(small, "mixed", seed=3)
    prev_T = None
    for g in default_gamma_grid():
        rec = make_record(tr, g)
        t_star, c_star = oracle_from_record(rec, g)
        assert c_star <= rec.cost + 1e-15
        if prev_T is not None:
            assert rec.stop_time >= prev_T
        prev_T = rec.stop_time


def test_summary_self_ratio_and_extremes(small):
    recs = []
    for seed in range(3):
        tr = trace_for(small, seed=seed, run_id=f"r{seed}")
        recs += [make_record(tr, g) for g in (0.01, 0.001, 0.0)]
    s = summarize(recs, trim=2)
    for row in s.rows:
        if row["mean"] != "zero-den":
            assert row["low"] <= row["mean"] + 1e-12 <= row["high"] + 2e-12
            assert row["low"] <= row["trim_low"] <= row["trim_high"] <= row["high"]
    # obsv against itself: costs divided by costs
    for g in (0.01, 0.001, 0.0):
        costs = [r.cost for r in recs if r.gamma == g]
        assert all(c / c == 1.0 for c in costs if c > 0)


def test_summary_zero_denominator_marker():
    recs = [fake_record([0.0, 0.0], 0.0, 0)]
    row = summarize(recs).get("random", 0.0, "ratio_obsv_oracle")
    assert row["mean"] == "zero-den" and row["n_zero_den"] == 1


def test_summary_pairs_strategies():
    recs = [fake_record([0.4, 0.2], 0.01, 1, "a", "random"), fake_record([0.4, 0.2], 0.01, 0, "a", "mixed")]
    s = summarize(recs)
    assert s.get("mixed/random", 0.01, "stop_time_difference")["mean"] == -1
    assert s.get("mixed/random", 0.01, "ratio_obsv_cost")["mean"] == pytest.approx(0.4 / 0.21)


def test_record_json_roundtrip(small):
    tr = trace_for(small, "mixed", snapshot_every=5)
    rec = make_record(tr, 1e-3, config={"seed": 1})
    text = rec.to_json()
    back = RunRecord.from_dict(json.loads(text))
    assert back.to_json() == text
    assert rec.cost == rec.stop_error + rec.gamma * rec.stop_time
    assert len(tr.belief_snapshots) == math.ceil(len(tr.check_times) / 5)


def test_record_inconsistency_rejected(small):
    d = json.loads(make_record(trace_for(small), 1e-3).to_json())
    d["cost"] += 0.1
    with pytest.raises(ValueError):
        RunRecord.from_dict(d)


def test_determinism(small):
    a = make_record(trace_for(small, "mixed", seed=4), 1e-3).to_json()
    b = make_record(trace_for(small, "mixed", seed=4), 1e-3).to_json()
    assert a == b


def test_stride_interpolates(small):
    tr = trace_for(small, test_stride=4)
    assert tr.interpolated and tr.measured[0] and tr.measured[-1]
    assert all(np.isfinite(tr.test_errors))
    full = trace_for(small)
    for t, m, e in zip(tr.test_times, tr.measured, tr.test_errors):
        if m:
            assert e == full.error_at(t)


def test_max_labels_cap(small):
    tr = trace_for(small, max_labels=5)
    assert tr.final_time == 5


def test_bayes_risk_rule(small):
    train, test, learner, spec = small
    rec = run_obsv(train.X, train.y, test.X, test.y, learner, spec, StoppingConfig(0.1, horizon=2), rule="bayes_risk")
    assert rec.stop_time == 0 and rec.stop_reason == RULE_FIRED
    rec = run_obsv(train.X, train.y, test.X, test.y, learner, spec, StoppingConfig(0.0, horizon=1), rule="bayes_risk")
    assert rec.stop_reason == EXHAUSTED
