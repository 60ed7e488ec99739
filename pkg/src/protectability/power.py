"""Loss-based predictive power and the coalition games built on it.

The restricted predictor for a subset S is the empirical conditional
frequency table P(Y | Z_S = cell); with cross-entropy in bits its loss
reduction over the prior equals the plug-in I(Y; Z_S) on the same sample.
"""

from __future__ import annotations

import threading
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .core import AttributeVector, ContractError, canonical_subset, check_subset
from .information import DiscretizedTable, entropy, mutual_information, subset_keys

CROSS_ENTROPY = "cross_entropy"
MSE = "mse"
LOSSES = (CROSS_ENTROPY, MSE)

PROBABILITY_FLOOR = 1e-12


class FlooredProbabilityWarning(RuntimeWarning):
    """A true class was assigned probability zero and the floor was used."""


@dataclass(frozen=True)
class RestrictedPredictor:
    subset: tuple[int, ...]
    table: dict[tuple[int, ...], np.ndarray]
    prior: np.ndarray

    @property
    def n_classes(self) -> int:
        return len(self.prior)

    def predict_proba(self, disc: DiscretizedTable) -> np.ndarray:
        if not self.subset:
            return np.broadcast_to(self.prior, (disc.n_samples, self.n_classes))
        rows = disc.codes[:, list(self.subset)]
        cells, inverse = np.unique(rows, axis=0, return_inverse=True)
        lookup = np.array([self.table.get(tuple(int(v) for v in c), self.prior) for c in cells])
        return lookup[inverse.ravel()]

    def predict(self, disc: DiscretizedTable) -> np.ndarray:
        # argmax picks the lowest class index on ties
        return np.argmax(self.predict_proba(disc), axis=1)


def fit_restricted(disc: DiscretizedTable, subset: Sequence[int], target: AttributeVector) -> RestrictedPredictor:
    subset = check_subset(subset, disc.n_features)
    k = target.cardinality
    prior = np.bincount(target.labels, minlength=k) / len(target)
    if not subset:
        return RestrictedPredictor(subset, {}, prior)
    key, _ = subset_keys(disc, subset)
    uniq, first, inverse = np.unique(key, return_index=True, return_inverse=True)
    inverse = inverse.ravel()
    joint = np.bincount(inverse * k + target.labels, minlength=len(uniq) * k).reshape(len(uniq), k)
    cond = joint / joint.sum(axis=1, keepdims=True)
    cells = disc.codes[first][:, list(subset)]
    table = {tuple(int(v) for v in cell): cond[c] for c, cell in enumerate(cells)}
    return RestrictedPredictor(subset, table, prior)


def expected_loss(pred: RestrictedPredictor, disc: DiscretizedTable, target: AttributeVector,
                  loss: str = CROSS_ENTROPY) -> float:
    """Mean per-sample loss; cross-entropy is in bits, MSE is against one-hot targets."""
    if loss not in LOSSES:
        raise ContractError(f"unknown loss {loss!r}")
    if pred.n_classes != target.cardinality:
        raise ContractError("predictor and target disagree on the number of classes")
    probs = pred.predict_proba(disc)
    if loss == CROSS_ENTROPY:
        p_true = probs[np.arange(len(target)), target.labels]
        if np.any(p_true <= 0):
            warnings.warn("true class assigned probability 0; flooring at 1e-12", FlooredProbabilityWarning,
                          stacklevel=2)
            p_true = np.maximum(p_true, PROBABILITY_FLOOR)
        return float(-np.mean(np.log2(p_true)))
    onehot = np.eye(target.cardinality)[target.labels]
    return float(np.mean(np.sum((probs - onehot) ** 2, axis=1)))


def predictive_power(disc: DiscretizedTable, subset: Sequence[int], target: AttributeVector,
                     loss: str = CROSS_ENTROPY) -> float:
    subset = check_subset(subset, disc.n_features)
    mean_model = fit_restricted(disc, (), target)
    if not subset:
        return 0.0
    return expected_loss(mean_model, disc, target, loss) - expected_loss(
        fit_restricted(disc, subset, target), disc, target, loss)


@dataclass
class CoalitionGame:
    """Characteristic function over feature subsets with a thread-safe memo.

    ``calls`` counts every evaluation request, cached or not; ``computed``
    counts actual computations. With ``memoize=False`` every call computes.
    """

    value_fn: Callable[[tuple[int, ...]], float]
    n_players: int
    kind: str = "mi"
    memoize: bool = True
    calls: int = 0
    computed: int = 0
    _memo: dict = field(default_factory=dict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def evaluate(self, subset: Sequence[int]) -> float:
        key = canonical_subset(subset)
        with self._lock:
            self.calls += 1
            if self.memoize and key in self._memo:
                return self._memo[key]
        value = 0.0 if not key else float(self.value_fn(key))
        with self._lock:
            self.computed += 1
            if self.memoize:
                # first writer wins; values are identical anyway
                value = self._memo.setdefault(key, value)
        return value

    __call__ = evaluate

    @property
    def memo_size(self) -> int:
        return len(self._memo)

    def reset_counters(self) -> None:
        with self._lock:
            self.calls = 0
            self.computed = 0


def marginal_payoff(game: CoalitionGame, i: int, subset: Sequence[int]) -> float:
    subset = canonical_subset(subset)
    if i in subset:
        raise ContractError(f"feature {i} is already in the coalition")
    return game.evaluate(subset + (i,)) - game.evaluate(subset)


def make_game(disc: DiscretizedTable, target: AttributeVector, kind: str = "mi",
              loss: str | None = None, memoize: bool = True) -> CoalitionGame:
    if len(target) != disc.n_samples:
        raise ContractError("target length does not match the table")
    if kind == "mi":
        h_y = entropy(target)
        fn = lambda s: mutual_information(disc, s, target, target_entropy=h_y)  # noqa: E731
    elif kind == "loss":
        if loss is None:
            raise ContractError("a loss game needs a loss function")
        if loss not in LOSSES:
            raise ContractError(f"unknown loss {loss!r}")
        fn = lambda s: predictive_power(disc, s, target, loss)  # noqa: E731
    else:
        raise ContractError(f"unknown game kind {kind!r}")
    return CoalitionGame(fn, disc.n_features, kind, memoize)
