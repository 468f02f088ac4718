"""Wrapper fitness: classification error of a masked KNN plus a subset-size penalty."""
from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Optional, Protocol

import numpy as np

from .errors import ConfigError, InvalidMaskError

__all__ = [
    "ClassifierSpec",
    "EvaluationContext",
    "FitnessValue",
    "FitnessWeights",
    "KNNClassifier",
    "evaluate",
    "fitness",
    "knn_error",
    "repair_mask",
]

DEFAULT_OMEGA = 0.99
# Above this many (query, train, feature) cells, squared differences are
# recomputed per mask instead of being held in memory.
_TENSOR_BUDGET = 8_000_000


@dataclass(frozen=True)
class FitnessWeights:
    omega: float = DEFAULT_OMEGA

    def __post_init__(self):
        if not 0.0 <= self.omega <= 1.0:
            raise ConfigError(f"omega must lie in [0, 1], got {self.omega}")


@dataclass(frozen=True)
class FitnessValue:
    fitness: float
    error_rate: float
    selected_count: int
    mask: Optional[np.ndarray] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class ClassifierSpec:
    kind: str = "knn"
    k: int = 5

    def __post_init__(self):
        if self.kind != "knn":
            raise ConfigError(f"unsupported classifier {self.kind!r}; only 'knn' ships")
        if self.k < 1:
            raise ConfigError(f"k must be >= 1, got {self.k}")

    def build(self, X_train, y_train, X_eval):
        return KNNClassifier(self.k, X_train, y_train, X_eval)


class MaskedClassifier(Protocol):
    def error(self, mask: np.ndarray, y_eval: np.ndarray) -> float: ...


def fitness(error: float, selected: int, total: int, weights: FitnessWeights) -> float:
    if selected <= 0:
        raise InvalidMaskError("fitness is undefined for an empty feature subset")
    if selected > total:
        raise ValueError(f"selected={selected} exceeds total={total}")
    if not 0.0 <= error <= 1.0:
        raise ValueError(f"error rate {error} outside [0, 1]")
    w = weights.omega
    return w * error + (1.0 - w) * selected / total


class KNNClassifier:
    """k-nearest-neighbour predictor over a fixed train/query pair.

    Distances are Euclidean over the selected columns. Equal distances are
    ordered by training index and vote ties go to the smallest class id, so
    predictions are fully deterministic.
    """

    def __init__(self, k: int, X_train, y_train, X_query):
        self.k = int(k)
        self.X_train = np.asarray(X_train, dtype=float)
        self.y_train = np.asarray(y_train, dtype=int)
        self.X_query = np.asarray(X_query, dtype=float)
        if self.k > len(self.X_train):
            raise ConfigError(f"k={self.k} exceeds training size {len(self.X_train)}")
        if self.X_train.shape[1] != self.X_query.shape[1]:
            raise ValueError("train and query feature counts differ")
        self.n_classes = int(self.y_train.max()) + 1 if len(self.y_train) else 0
        n_q, n_t = len(self.X_query), len(self.X_train)
        d = self.X_train.shape[1]
        self._sqdiff = None
        if n_q * n_t * d <= _TENSOR_BUDGET:
            self._sqdiff = (self.X_query[:, None, :] - self.X_train[None, :, :]) ** 2

    def sq_distances(self, mask) -> np.ndarray:
        mask = np.asarray(mask, dtype=bool)
        if self._sqdiff is not None:
            return self._sqdiff[:, :, mask].sum(axis=2)
        q = self.X_query[:, mask]
        t = self.X_train[:, mask]
        out = np.empty((len(q), len(t)))
        step = max(1, _TENSOR_BUDGET // max(1, len(t) * q.shape[1]))
        for s in range(0, len(q), step):
            out[s:s + step] = ((q[s:s + step, None, :] - t[None, :, :]) ** 2).sum(axis=2)
        return out

    def predict(self, mask) -> np.ndarray:
        mask = np.asarray(mask, dtype=bool)
        if not mask.any():
            raise InvalidMaskError("KNN needs at least one selected feature")
        d2 = self.sq_distances(mask)
        nearest = np.argsort(d2, axis=1, kind="stable")[:, :self.k]
        votes = np.zeros((len(d2), self.n_classes), dtype=int)
        rows = np.repeat(np.arange(len(d2)), self.k)
        np.add.at(votes, (rows, self.y_train[nearest].ravel()), 1)
        # argmax returns the first maximum, i.e. the smallest tied class id.
        return votes.argmax(axis=1)

    def error(self, mask, y_query) -> float:
        pred = self.predict(mask)
        y_query = np.asarray(y_query, dtype=int)
        return float(np.count_nonzero(pred != y_query)) / len(y_query)


class EvaluationContext:
    """Train/evaluation partitions, classifier, weights and a per-mask fitness cache.

    The cache is keyed by the packed mask bytes and is safe to share between
    threads: a key is written at most once and later writers keep the first value.
    """

    def __init__(self, X_train, y_train, X_eval, y_eval,
                 classifier: ClassifierSpec = ClassifierSpec(),
                 weights: FitnessWeights = FitnessWeights(),
                 use_cache: bool = True):
        self.X_train = np.asarray(X_train, dtype=float)
        self.y_train = np.asarray(y_train, dtype=int)
        self.X_eval = np.asarray(X_eval, dtype=float)
        self.y_eval = np.asarray(y_eval, dtype=int)
        if self.X_train.shape[1] != self.X_eval.shape[1]:
            raise ValueError("train and evaluation partitions differ in feature count")
        if len(self.y_eval) == 0:
            raise ValueError("evaluation partition is empty")
        self.classifier_spec = classifier
        self.weights = weights
        self.n_features = self.X_train.shape[1]
        self.model = classifier.build(self.X_train, self.y_train, self.X_eval)
        self.use_cache = use_cache
        self._cache: dict = {}
        self._lock = threading.Lock()
        self.classifier_calls = 0

    @classmethod
    def from_split(cls, train, test, **kwargs) -> "EvaluationContext":
        return cls(train.features, train.labels, test.features, test.labels, **kwargs)

    @property
    def cache_size(self) -> int:
        return len(self._cache)

    def lookup(self, mask) -> Optional[FitnessValue]:
        return self._cache.get(np.packbits(mask).tobytes()) if self.use_cache else None

    def store(self, mask, value: FitnessValue) -> FitnessValue:
        if not self.use_cache:
            return value
        with self._lock:
            return self._cache.setdefault(np.packbits(mask).tobytes(), value)


def knn_error(ctx: EvaluationContext, mask) -> float:
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise InvalidMaskError("cannot classify with an empty feature mask")
    with ctx._lock:
        ctx.classifier_calls += 1
    return ctx.model.error(mask, ctx.y_eval)


def repair_mask(mask, rng) -> np.ndarray:
    """Return ``mask`` unchanged, or with one random bit set if it is empty."""
    mask = np.asarray(mask, dtype=bool)
    if mask.any():
        return mask
    fixed = mask.copy()
    fixed[rng.integers(len(mask))] = True
    return fixed


def evaluate(ctx: EvaluationContext, mask, rng=None) -> FitnessValue:
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != (ctx.n_features,):
        raise ValueError(f"mask length {mask.shape} != feature count {ctx.n_features}")
    if not mask.any():
        if rng is None:
            raise InvalidMaskError("empty mask and no random stream to repair it")
        mask = repair_mask(mask, rng)
    hit = ctx.lookup(mask)
    if hit is not None:
        return hit
    err = knn_error(ctx, mask)
    n_sel = int(mask.sum())
    value = FitnessValue(
        fitness=fitness(err, n_sel, ctx.n_features, ctx.weights),
        error_rate=err,
        selected_count=n_sel,
        mask=mask.copy(),
    )
    return ctx.store(mask, value)
