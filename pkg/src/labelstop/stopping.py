"""Stopping rules: one-step OBSV test, bounded-horizon Bayes risk, the
retrospective oracle, and a one-step rule for probabilistic classifiers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .belief import G_CLAMP, Belief, expected_error, predictive_prob_error

MAX_HORIZON = 20


class HorizonTooLargeError(ValueError):
    pass


@dataclass(frozen=True)
class StoppingConfig:
    gamma: float
    horizon: int = 1
    samples_per_step: int = 1

    def __post_init__(self):
        if not self.gamma >= 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.horizon > MAX_HORIZON:
            raise HorizonTooLargeError(f"horizon {self.horizon} exceeds the limit of {MAX_HORIZON}")
        if self.samples_per_step not in (1, 2):
            raise ValueError("samples_per_step must be 1 or 2")


@dataclass(frozen=True)
class StopDecision:
    stop: bool
    current_risk: float
    continuation_value: float
    expected_gain: float

    def to_dict(self) -> dict:
        return {
            "stop": self.stop,
            "current_risk": self.current_risk,
            "continuation_value": self.continuation_value,
            "expected_gain": self.expected_gain,
        }


def rho0(belief: Belief, t_now: int) -> float:
    return expected_error(belief, t_now)


def _rho(weights: np.ndarray, belief: Belief, t: int, depth: int, gamma: float) -> float:
    g = belief.predicted_matrix(t)
    now = float(np.sum(weights * g))
    if depth == 0:
        return now
    g_next = belief.predicted_matrix(t + 1)
    p_err = float(np.sum(weights * g_next))
    gc = np.clip(g_next, G_CLAMP, 1.0 - G_CLAMP)
    future = 0.0
    for z, p_z in ((1, p_err), (0, 1.0 - p_err)):
        if p_z <= 0.0:
            continue
        child = weights * (gc if z else 1.0 - gc)
        s = child.sum()
        if s <= 0.0:
            continue
        future += p_z * _rho(child / s, belief, t + 1, depth - 1, gamma)
    return min(now, future + gamma)


def rho_k(belief: Belief, t_now: int, config: StoppingConfig) -> float:
    """Optimal risk when at most ``config.horizon`` more labels may be bought.

    Expands the full binary tree of next observations, so the cost grows
    as ``2**horizon`` times the grid size.
    """
    if config.horizon > MAX_HORIZON:
        raise HorizonTooLargeError(f"horizon {config.horizon} exceeds {MAX_HORIZON}")
    return _rho(belief.weights, belief, t_now, config.horizon, config.gamma)


def bounded_should_stop(belief: Belief, t_now: int, config: StoppingConfig) -> StopDecision:
    """Stop when no lookahead up to the horizon promises a strictly lower risk.

    Because the recursion is monotone in the horizon, checking the full
    horizon suffices.
    """
    now = rho0(belief, t_now)
    best = rho_k(belief, t_now, config)
    return StopDecision(stop=not best < now, current_risk=now, continuation_value=best, expected_gain=now - best)


def obsv_gain(belief: Belief, t_now: int, k: int) -> float:
    return expected_error(belief, t_now) - expected_error(belief, t_now + k)


def obsv_should_stop(belief: Belief, t_now: int, config: StoppingConfig) -> StopDecision:
    k = config.samples_per_step
    now = expected_error(belief, t_now)
    later = expected_error(belief, t_now + k)
    gain = now - later
    return StopDecision(
        stop=gain <= k * config.gamma,
        current_risk=now,
        continuation_value=later + k * config.gamma,
        expected_gain=gain,
    )


def oracle_stop(errors, gamma: float, times=None) -> tuple[int, float]:
    """Earliest stopping time minimising measured error plus label spend.

    ``errors[i]`` is the test error of the hypothesis trained on
    ``times[i]`` labels (``times`` defaults to ``0, 1, 2, ...``).
    """
    r = np.asarray(errors, dtype=np.float64)
    if r.size == 0:
        raise ValueError("empty error trajectory")
    t = np.arange(r.size, dtype=np.int64) if times is None else np.asarray(times, dtype=np.int64)
    if t.shape != r.shape:
        raise ValueError("times and errors differ in length")
    cost = r + gamma * t
    i = int(np.argmin(cost))
    return int(t[i]), float(cost[i])


def oracle_stop_grid(errors, gammas, times=None) -> list[tuple[int, float]]:
    return [oracle_stop(errors, g, times) for g in gammas]


class UnsupportedLearnerError(TypeError):
    pass


def _empirical_error(model, X: np.ndarray) -> float:
    probs = model.class_posterior_batch(X)
    return float(np.mean(1.0 - probs.max(axis=1)))


def subjective_one_step_stop(learner, X_train, y_train, X_pool, gamma: float, num_classes: int | None = None):
    """One-step rule for learners that report class probabilities.

    ``learner`` is a :class:`~labelstop.learners.Learner`; it is refit for
    every (candidate, label) pair.  Returns ``(decision, best_candidate)``.
    """
    X_train = np.asarray(X_train, dtype=np.float64)
    y_train = np.asarray(y_train, dtype=np.int64)
    X_pool = np.asarray(X_pool, dtype=np.float64)
    if X_pool.shape[0] == 0:
        raise ValueError("empty pool")
    if not learner.supports_posterior:
        raise UnsupportedLearnerError(f"{learner.kind} does not provide class posteriors")
    n_classes = num_classes or learner.num_classes
    model = learner.fit(X_train, y_train)
    now = _empirical_error(model, X_pool)
    post = model.class_posterior_batch(X_pool)
    best_i, best_val = -1, np.inf
    for i in range(X_pool.shape[0]):
        Xa = np.vstack([X_train, X_pool[i : i + 1]])
        val = 0.0
        for y in range(n_classes):
            p = post[i, y]
            if p == 0.0:
                continue
            m = learner.fit(Xa, np.append(y_train, y))
            val += p * _empirical_error(m, X_pool)
        if val < best_val:
            best_i, best_val = i, val
    gain = now - best_val
    decision = StopDecision(stop=gain < gamma, current_risk=now, continuation_value=best_val + gamma, expected_gain=gain)
    return decision, best_i
