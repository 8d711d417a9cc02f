"""Convergence-curve families and the predicted-error map.

Each curve ``h(t)`` describes the fraction of the gap between the initial
error ``r0`` and the asymptotic error ``r_inf`` that remains after ``t``
labels.  Every valid curve satisfies ``h(0) == 1`` and decreases strictly
towards zero.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

BETA_MIN = 1e-6
BETA_MAX = 1.0 - 1e-6


class CurveFamily(str, enum.Enum):
    INVERSE_SQRT = "inverse_sqrt"  # sqrt(k / (t + k)), O(1/eps^2) sample complexity
    INVERSE = "inverse"  # l / (t + l), O(1/eps)
    EXPONENTIAL = "exponential"  # b ** t, O(log 1/eps)


@dataclass(frozen=True)
class CurveModel:
    family: CurveFamily
    constant: float

    def __post_init__(self):
        family = CurveFamily(self.family)
        object.__setattr__(self, "family", family)
        c = float(self.constant)
        if not math.isfinite(c):
            raise ValueError(f"curve constant must be finite, got {c!r}")
        if family is CurveFamily.EXPONENTIAL:
            if not 0.0 < c < 1.0:
                raise ValueError(f"exponential base must lie in (0, 1), got {c}")
            c = min(max(c, BETA_MIN), BETA_MAX)
        elif c < 1.0:
            raise ValueError(f"{family.value} constant must be >= 1, got {c}")
        object.__setattr__(self, "constant", c)

    def h(self, t):
        return eval_h(self, t)

    def to_dict(self) -> dict:
        return {"family": self.family.value, "constant": self.constant}

    @classmethod
    def from_dict(cls, d: dict) -> "CurveModel":
        return cls(CurveFamily(d["family"]), d["constant"])


def eval_h(model: CurveModel, t):
    """Remaining fraction of the error gap after ``t`` labels.

    ``t`` may be an integer or an integer array; arrays are evaluated
    elementwise.
    """
    t_arr = np.asarray(t)
    if np.any(t_arr < 0):
        raise ValueError("t must be nonnegative")
    t_f = t_arr.astype(np.float64)
    c = model.constant
    if model.family is CurveFamily.INVERSE_SQRT:
        out = np.sqrt(c / (t_f + c))
    elif model.family is CurveFamily.INVERSE:
        out = c / (t_f + c)
    else:
        out = np.power(c, t_f)
    if out.ndim == 0:
        return float(out)
    return out


_FAMILY_CODES = {CurveFamily.INVERSE_SQRT: 0, CurveFamily.INVERSE: 1, CurveFamily.EXPONENTIAL: 2}


class CurveBank:
    """Vectorised ``h`` over a fixed list of models."""

    def __init__(self, models):
        self.models = list(models)
        self.codes = np.array([_FAMILY_CODES[m.family] for m in self.models], dtype=np.int8)
        self.constants = np.array([m.constant for m in self.models], dtype=np.float64)

    def __len__(self):
        return len(self.models)

    def h(self, t: int) -> np.ndarray:
        if t < 0:
            raise ValueError("t must be nonnegative")
        t = float(t)
        c = self.constants
        out = np.empty_like(c)
        sel = self.codes == 0
        out[sel] = np.sqrt(c[sel] / (t + c[sel]))
        sel = self.codes == 1
        out[sel] = c[sel] / (t + c[sel])
        sel = self.codes == 2
        out[sel] = np.power(c[sel], t)
        return out


def check_error_range(r0: float, r_inf, enforce_order: bool = True) -> None:
    r_inf_arr = np.asarray(r_inf, dtype=np.float64)
    if not 0.0 <= r0 <= 1.0:
        raise ValueError(f"r0 must lie in [0, 1], got {r0}")
    if np.any(r_inf_arr < 0.0) or np.any(r_inf_arr > 1.0):
        raise ValueError("r_inf must lie in [0, 1]")
    if enforce_order and np.any(r_inf_arr > r0):
        raise ValueError(f"r_inf must not exceed r0={r0}")


def predicted_error(model: CurveModel, r0: float, r_inf: float, t, enforce_order: bool = True):
    """Modelled expected error ``r0*h(t) + r_inf*(1 - h(t))``."""
    check_error_range(r0, r_inf, enforce_order)
    h = eval_h(model, t)
    return r0 * h + r_inf * (1.0 - h)


def default_models() -> list[CurveModel]:
    """Geometric kappa/lambda grids plus a fixed set of exponential bases."""
    consts = [2.0**i for i in range(15)]
    betas = [0.5, 0.8, 0.9, 0.95, 0.99, 0.995, 0.999, 0.9995, 0.9999]
    models = [CurveModel(CurveFamily.INVERSE_SQRT, c) for c in consts]
    models += [CurveModel(CurveFamily.INVERSE, c) for c in consts]
    models += [CurveModel(CurveFamily.EXPONENTIAL, b) for b in betas]
    return models


def models_from_config(entries) -> list[CurveModel]:
    """Build a model list from ``[{"family": name, "constants": [...]}, ...]``."""
    models = []
    for entry in entries:
        family = CurveFamily(entry["family"])
        for c in entry["constants"]:
            models.append(CurveModel(family, c))
    if not models:
        raise ValueError("curve grid is empty")
    return models
