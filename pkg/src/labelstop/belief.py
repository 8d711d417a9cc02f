"""Grid posterior over (convergence curve, asymptotic error).

The belief is a joint weight matrix with one row per curve model and one
column per candidate asymptotic error ``r_inf``.  Updates are exact Bayes
on the grid, carried out in log space.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .curves import CurveBank, CurveModel, check_error_range, default_models

G_CLAMP = 1e-9


class ZeroLikelihoodError(ArithmeticError):
    """Every grid cell assigned zero probability to an observation."""


@dataclass(frozen=True)
class ErrorObservation:
    indicators: tuple

    def __post_init__(self):
        z = tuple(int(v) for v in self.indicators)
        if any(v not in (0, 1) for v in z):
            raise ValueError("error indicators must be 0 or 1")
        object.__setattr__(self, "indicators", z)

    @property
    def count(self) -> int:
        return len(self.indicators)

    @property
    def errors(self) -> int:
        return sum(self.indicators)

    @property
    def mean(self) -> float:
        return self.errors / self.count if self.indicators else 0.0


@dataclass(frozen=True, eq=False)
class BeliefGridSpec:
    models: tuple
    r_inf_grid: np.ndarray
    prior: np.ndarray
    bank: CurveBank = field(init=False, repr=False)

    def __post_init__(self):
        models = tuple(self.models)
        grid = np.asarray(self.r_inf_grid, dtype=np.float64).copy()
        prior = np.asarray(self.prior, dtype=np.float64).copy()
        if not models or grid.size == 0:
            raise ValueError("belief grid needs at least one model and one r_inf value")
        if grid.ndim != 1:
            raise ValueError("r_inf grid must be one-dimensional")
        if prior.shape != (len(models), grid.size):
            raise ValueError(f"prior shape {prior.shape} != ({len(models)}, {grid.size})")
        if np.any(prior < 0) or not np.all(np.isfinite(prior)):
            raise ValueError("prior weights must be finite and nonnegative")
        if abs(prior.sum() - 1.0) > 1e-12:
            raise ValueError(f"prior must sum to 1, sums to {prior.sum()!r}")
        grid.flags.writeable = False
        prior.flags.writeable = False
        object.__setattr__(self, "models", models)
        object.__setattr__(self, "r_inf_grid", grid)
        object.__setattr__(self, "prior", prior)
        object.__setattr__(self, "bank", CurveBank(models))

    @property
    def shape(self):
        return self.prior.shape

    @classmethod
    def uniform(cls, models, r_inf_grid) -> "BeliefGridSpec":
        n, m = len(models), len(r_inf_grid)
        return cls(tuple(models), r_inf_grid, np.full((n, m), 1.0 / (n * m)))

    @classmethod
    def default(cls, num_classes: int, n_r_inf: int = 51) -> "BeliefGridSpec":
        r0 = initial_error(num_classes)
        return cls.uniform(default_models(), np.linspace(0.0, r0, n_r_inf))

    def to_dict(self) -> dict:
        return {
            "models": [m.to_dict() for m in self.models],
            "r_inf_grid": self.r_inf_grid.tolist(),
            "prior": self.prior.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BeliefGridSpec":
        return cls(tuple(CurveModel.from_dict(m) for m in d["models"]), d["r_inf_grid"], d["prior"])


def initial_error(num_classes: int) -> float:
    """Error of an uninformed guess among ``num_classes`` classes."""
    if num_classes < 2:
        raise ValueError("need at least two classes")
    return 1.0 - 1.0 / num_classes


@dataclass(frozen=True, eq=False)
class Belief:
    spec: BeliefGridSpec
    r0: float
    weights: np.ndarray
    t: int = 0
    log_evidence: float = 0.0

    def predicted_matrix(self, t: int) -> np.ndarray:
        """``g`` for every cell at query count ``t``."""
        h = self.spec.bank.h(t)[:, None]
        return self.r0 * h + self.spec.r_inf_grid[None, :] * (1.0 - h)

    def to_dict(self, include_spec: bool = True) -> dict:
        d = {
            "r0": self.r0,
            "t": self.t,
            "log_evidence": self.log_evidence,
            "weights": self.weights.tolist(),
        }
        if include_spec:
            d["spec"] = self.spec.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict, spec: BeliefGridSpec | None = None) -> "Belief":
        spec = spec if spec is not None else BeliefGridSpec.from_dict(d["spec"])
        w = np.array(d["weights"], dtype=np.float64)
        w.flags.writeable = False
        return cls(spec, float(d["r0"]), w, int(d["t"]), float(d["log_evidence"]))


def init_belief(spec: BeliefGridSpec, num_classes: int, enforce_order: bool = True) -> Belief:
    r0 = initial_error(num_classes)
    return belief_with_r0(spec, r0, enforce_order)


def belief_with_r0(spec: BeliefGridSpec, r0: float, enforce_order: bool = True) -> Belief:
    """Start a belief from an explicit initial error instead of ``1 - 1/N_c``."""
    check_error_range(r0, spec.r_inf_grid, enforce_order)
    w = spec.prior.copy()
    w.flags.writeable = False
    return Belief(spec, float(r0), w, 0, 0.0)


def log_likelihood(g: np.ndarray, errors: int, count: int) -> np.ndarray:
    g = np.clip(g, G_CLAMP, 1.0 - G_CLAMP)
    return errors * np.log(g) + (count - errors) * np.log1p(-g)


def update(belief: Belief, obs: ErrorObservation, t_query: int) -> Belief:
    """Absorb one batch of error indicators measured on the ``t_query``-label model.

    Returns a new belief; the input is left untouched.
    """
    if obs.count == 0:
        return Belief(belief.spec, belief.r0, belief.weights, belief.t + 1, belief.log_evidence)
    g = belief.predicted_matrix(t_query)
    with np.errstate(divide="ignore"):
        logw = np.log(belief.weights) + log_likelihood(g, obs.errors, obs.count)
    top = logw.max()
    if not np.isfinite(top):
        raise ZeroLikelihoodError(f"observation at t={t_query} has zero likelihood on every cell")
    w = np.exp(logw - top)
    total = w.sum()
    w /= total
    w.flags.writeable = False
    return Belief(belief.spec, belief.r0, w, belief.t + 1, belief.log_evidence + top + float(np.log(total)))


def expected_error(belief: Belief, t_future: int) -> float:
    """Posterior mean of the modelled error after ``t_future`` labels."""
    return float(np.sum(belief.weights * belief.predicted_matrix(t_future)))


def predictive_prob_error(belief: Belief, t_future: int) -> float:
    """Probability that the next held-out example is misclassified.

    Identical to :func:`expected_error`; kept as its own name because the
    risk recursion branches on it.
    """
    return expected_error(belief, t_future)


def marginals(belief: Belief):
    """Return ``(model weights, r_inf weights, posterior mean of r_inf)``."""
    by_model = belief.weights.sum(axis=1)
    by_r_inf = belief.weights.sum(axis=0)
    return by_model, by_r_inf, float(by_r_inf @ belief.spec.r_inf_grid)
