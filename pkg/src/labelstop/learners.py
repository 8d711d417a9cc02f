"""Classifiers used by the stopping experiments.

Three learners are provided: nearest centroid (any number of classes),
a single decision stump and discrete AdaBoost over stumps (both binary).
Every trained model exposes ``predict``, ``margin`` and, where it makes
sense, ``class_posterior``; the ``*_batch`` variants take a 2-d array.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels

KINDS = ("nearest_centroid", "stump", "adaboost")


class EmptyTrainingSetError(ValueError):
    pass


class DimensionMismatchError(ValueError):
    pass


class UnsupportedKindError(TypeError):
    pass


def _as_batch(X, dim: int) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != dim:
        raise DimensionMismatchError(f"expected feature dimension {dim}, got shape {X.shape}")
    return X


class TrainedModel:
    kind: str = ""
    dim: int
    num_classes: int

    def predict(self, x) -> int:
        return int(self.predict_batch(x)[0])

    def margin(self, x) -> float:
        return float(self.margin_batch(x)[0])

    def class_posterior(self, x) -> np.ndarray:
        return self.class_posterior_batch(x)[0]

    def class_posterior_batch(self, X) -> np.ndarray:
        raise UnsupportedKindError(f"{self.kind} models have no class posterior")

    def error_rate(self, X, y) -> float:
        return float(np.mean(self.predict_batch(X) != np.asarray(y)))


@dataclass
class ConstantModel(TrainedModel):
    """Predicts one label everywhere; used before any label is seen and
    for single-class training sets."""

    label: int
    dim: int
    num_classes: int
    kind: str = field(default="constant", init=False)

    def predict_batch(self, X) -> np.ndarray:
        X = _as_batch(X, self.dim)
        return np.full(X.shape[0], self.label, dtype=np.int64)

    def margin_batch(self, X) -> np.ndarray:
        X = _as_batch(X, self.dim)
        return np.full(X.shape[0], np.inf)

    def class_posterior_batch(self, X) -> np.ndarray:
        X = _as_batch(X, self.dim)
        out = np.zeros((X.shape[0], self.num_classes))
        out[:, self.label] = 1.0
        return out


@dataclass
class NearestCentroidModel(TrainedModel):
    classes: np.ndarray  # class index for each centroid row, ascending
    centroids: np.ndarray
    num_classes: int
    temperature: float = 1.0
    kind: str = field(default="nearest_centroid", init=False)

    @property
    def dim(self) -> int:
        return self.centroids.shape[1]

    def sq_distances(self, X) -> np.ndarray:
        X = _as_batch(X, self.dim)
        c = self.centroids
        d2 = (X * X).sum(axis=1)[:, None] - 2.0 * (X @ c.T) + (c * c).sum(axis=1)[None, :]
        return np.maximum(d2, 0.0)

    def predict_batch(self, X) -> np.ndarray:
        return self.classes[np.argmin(self.sq_distances(X), axis=1)]

    def margin_batch(self, X) -> np.ndarray:
        d2 = self.sq_distances(X)
        if d2.shape[1] < 2:
            return np.full(d2.shape[0], np.inf)
        d = np.sqrt(np.partition(d2, 1, axis=1)[:, :2])
        return d[:, 1] - d[:, 0]

    def class_posterior_batch(self, X) -> np.ndarray:
        logits = -self.sq_distances(X) / self.temperature
        logits -= logits.max(axis=1, keepdims=True)
        p = np.exp(logits)
        p /= p.sum(axis=1, keepdims=True)
        out = np.zeros((p.shape[0], self.num_classes))
        out[:, self.classes] = p
        return out


def _stump_predict(X, feature, threshold, polarity) -> np.ndarray:
    return np.where(polarity * (X[:, feature] - threshold) > 0, 1.0, -1.0)


@dataclass
class StumpModel(TrainedModel):
    feature: int
    threshold: float
    polarity: int
    dim: int
    num_classes: int = 2
    kind: str = field(default="stump", init=False)

    def predict_batch(self, X) -> np.ndarray:
        X = _as_batch(X, self.dim)
        return (_stump_predict(X, self.feature, self.threshold, self.polarity) > 0).astype(np.int64)

    def margin_batch(self, X) -> np.ndarray:
        X = _as_batch(X, self.dim)
        return np.abs(X[:, self.feature] - self.threshold)


@dataclass
class AdaBoostModel(TrainedModel):
    features: np.ndarray
    thresholds: np.ndarray
    polarities: np.ndarray
    alphas: np.ndarray
    dim: int
    num_classes: int = 2
    kind: str = field(default="adaboost", init=False)

    def __post_init__(self):
        if not np.all(np.isfinite(self.alphas)):
            raise ValueError("stump weights must be finite")

    def score_batch(self, X) -> np.ndarray:
        """Weighted vote ``sum(alpha_m * h_m(x))`` with ``h_m`` in {-1, +1}."""
        X = _as_batch(X, self.dim)
        votes = self.polarities[None, :] * (X[:, self.features] - self.thresholds[None, :]) > 0
        return np.where(votes, 1.0, -1.0) @ self.alphas

    def predict_batch(self, X) -> np.ndarray:
        return (self.score_batch(X) > 0).astype(np.int64)

    def margin_batch(self, X) -> np.ndarray:
        return np.abs(self.score_batch(X)) / self.alphas.sum()

    def class_posterior_batch(self, X) -> np.ndarray:
        p1 = 1.0 / (1.0 + np.exp(-2.0 * self.score_batch(X)))
        return np.column_stack([1.0 - p1, p1])


def _check_training(X, y):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise EmptyTrainingSetError("training set is empty")
    if y.shape != (X.shape[0],):
        raise ValueError("labels and features differ in length")
    return X, y


def fit_nearest_centroid(X, y, num_classes: int, temperature: float = 1.0) -> NearestCentroidModel:
    X, y = _check_training(X, y)
    classes = np.unique(y)
    centroids = np.array([X[y == c].mean(axis=0) for c in classes])
    return NearestCentroidModel(classes, centroids, num_classes, temperature)


def _binary(X, y):
    X, y = _check_training(X, y)
    if np.any((y != 0) & (y != 1)):
        raise UnsupportedKindError("stump and AdaBoost learners are binary; labels must be 0/1")
    return X, y


def fit_stump(X, y) -> TrainedModel:
    X, y = _binary(X, y)
    if np.all(y == y[0]):
        return ConstantModel(int(y[0]), X.shape[1], 2)
    n = X.shape[0]
    order = np.argsort(X, axis=0, kind="stable")
    f, thr, pol, _ = kernels.best_stump(X, order, np.where(y > 0, 1.0, -1.0), np.full(n, 1.0 / n))
    if f < 0:
        return ConstantModel(int(np.bincount(y, minlength=2).argmax()), X.shape[1], 2)
    return StumpModel(f, thr, pol, X.shape[1])


ZERO_ERROR_EPS = 1e-10


def fit_adaboost(X, y, rounds: int = 100) -> TrainedModel:
    """Discrete AdaBoost over exhaustive decision stumps.

    Stops early when a stump is perfect on the weighted sample or no stump
    beats chance.
    """
    X, y = _binary(X, y)
    n, dim = X.shape
    majority = int(np.bincount(y, minlength=2).argmax())
    if np.all(y == y[0]):
        return ConstantModel(int(y[0]), dim, 2)
    ypm = np.where(y > 0, 1.0, -1.0)
    order = np.argsort(X, axis=0, kind="stable")
    w = np.full(n, 1.0 / n)
    feats, thrs, pols, alphas = [], [], [], []
    for _ in range(rounds):
        f, thr, pol, err = kernels.best_stump(X, order, ypm, w)
        if f < 0 or err >= 0.5:
            break
        eps = max(err, ZERO_ERROR_EPS)
        alpha = 0.5 * np.log((1.0 - eps) / eps)
        feats.append(f)
        thrs.append(thr)
        pols.append(pol)
        alphas.append(alpha)
        if err <= 0.0:
            break
        w = w * np.exp(-alpha * ypm * _stump_predict(X, f, thr, pol))
        w /= w.sum()
    if not alphas:
        return ConstantModel(majority, dim, 2)
    return AdaBoostModel(
        np.array(feats, dtype=np.int64),
        np.array(thrs),
        np.array(pols, dtype=np.float64),
        np.array(alphas),
        dim,
    )


@dataclass(frozen=True)
class Learner:
    """A learning algorithm plus its hyperparameters."""

    kind: str
    num_classes: int
    rounds: int = 100
    temperature: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown learner kind {self.kind!r}; choose from {KINDS}")
        if self.kind != "nearest_centroid" and self.num_classes != 2:
            raise UnsupportedKindError(f"{self.kind} supports binary problems only")
        if self.rounds < 1:
            raise ValueError("rounds must be >= 1")
        if not self.temperature > 0:
            raise ValueError("temperature must be positive")

    @property
    def supports_posterior(self) -> bool:
        return self.kind != "stump"

    def initial_model(self, dim: int) -> TrainedModel:
        return ConstantModel(0, dim, self.num_classes)

    def fit(self, X, y) -> TrainedModel:
        if self.kind == "nearest_centroid":
            return fit_nearest_centroid(X, y, self.num_classes, self.temperature)
        if self.kind == "stump":
            return fit_stump(X, y)
        return fit_adaboost(X, y, self.rounds)


def fit(kind: str, X, y, num_classes: int = 2, **config) -> TrainedModel:
    return Learner(kind, num_classes, **config).fit(X, y)


def predict(model: TrainedModel, x) -> int:
    return model.predict(x)


def margin(model: TrainedModel, x) -> float:
    return model.margin(x)


def class_posterior(model: TrainedModel, x) -> np.ndarray:
    return model.class_posterior(x)
