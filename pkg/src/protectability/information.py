"""Plug-in entropy and mutual information over discretized feature tables.

Everything is in bits. Joint distributions are never densified: a subset's
code tuples are folded into one int64 key per row (mixed radix, re-densified
whenever the radix product grows large), and cell counts are taken over those
keys.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import DISCRETE, AttributeVector, ContractError, FeatureTable, check_subset

# re-densify the running key once the radix product passes this
_RADIX_LIMIT = 1 << 40
# bincount is used instead of unique when the key space is at most this large
_BINCOUNT_LIMIT = 1 << 16


@dataclass(frozen=True)
class DiscretizedTable:
    codes: np.ndarray  # (N, n) int64
    n_bins: tuple[int, ...]
    edges: tuple[np.ndarray | None, ...]
    names: tuple[str, ...] = ()

    def __post_init__(self):
        # column-major: subset keys read whole columns
        codes = np.asfortranarray(self.codes, dtype=np.int64)
        codes.setflags(write=False)
        object.__setattr__(self, "codes", codes)

    @property
    def n_samples(self) -> int:
        return self.codes.shape[0]

    @property
    def n_features(self) -> int:
        return self.codes.shape[1]


def equal_width_codes(values: np.ndarray, bins: int) -> tuple[np.ndarray, np.ndarray | None]:
    """Equal-width codes over ``[min, max]``.

    Bins are closed on the right: value v lands in bin k when
    ``edge[k] < v <= edge[k+1]``, and the minimum lands in bin 0. A constant
    column maps to code 0.
    """
    values = np.asarray(values, dtype=np.float64)
    lo, hi = float(values.min()), float(values.max())
    if lo == hi:
        return np.zeros(len(values), dtype=np.int64), None
    if bins < 2:
        raise ContractError("continuous columns need bins >= 2")
    edges = np.linspace(lo, hi, bins + 1)
    codes = np.searchsorted(edges[1:-1], values, side="left").astype(np.int64)
    return codes, edges


def discretize(table: FeatureTable, bins: int) -> DiscretizedTable:
    codes, n_bins, edges = [], [], []
    for col in table.columns:
        if col.kind == DISCRETE:
            c, e = col.values.astype(np.int64), None
            k = int(c.max()) + 1
        else:
            c, e = equal_width_codes(col.values, bins)
            k = 1 if e is None else bins
        codes.append(c)
        n_bins.append(k)
        edges.append(e)
    return DiscretizedTable(np.column_stack(codes), tuple(n_bins), tuple(edges), tuple(table.names))


def subset_keys(disc: DiscretizedTable, subset: Sequence[int]) -> tuple[np.ndarray, int]:
    """One int64 key per row identifying the row's cell over ``subset``.

    Returns the keys and an upper bound on the key space.
    """
    key = np.zeros(disc.n_samples, dtype=np.int64)
    radix = 1
    for j in subset:
        b = disc.n_bins[j]
        if b == 1:
            continue
        key = key * b + disc.codes[:, j]
        radix *= b
        if radix > _RADIX_LIMIT:
            uniq, key = np.unique(key, return_inverse=True)
            key = key.astype(np.int64).ravel()
            radix = len(uniq)
    return key, radix


def _cell_counts(key: np.ndarray, radix: int) -> np.ndarray:
    if radix <= _BINCOUNT_LIMIT:
        counts = np.bincount(key, minlength=0)
        return counts[counts > 0]
    return np.unique(key, return_counts=True)[1]


def entropy_from_counts(counts: np.ndarray) -> float:
    counts = np.asarray(counts, dtype=np.float64)
    counts = counts[counts > 0]
    total = counts.sum()
    if counts.size <= 1:
        return 0.0
    h = np.log2(total) - float(np.dot(counts, np.log2(counts))) / total
    return max(h, 0.0)


def entropy(attr: AttributeVector) -> float:
    return entropy_from_counts(np.bincount(attr.labels, minlength=attr.cardinality))


def joint_entropy(disc: DiscretizedTable, subset: Sequence[int], target: AttributeVector | None = None) -> float:
    key, radix = subset_keys(disc, subset)
    if target is not None:
        key = key * target.cardinality + target.labels
        radix *= target.cardinality
    return entropy_from_counts(_cell_counts(key, radix))


def mutual_information(disc: DiscretizedTable, subset: Sequence[int], target: AttributeVector,
                       target_entropy: float | None = None) -> float:
    """I(Y; Z_S) = H(Y) + H(Z_S) - H(Y, Z_S); zero for the empty subset."""
    subset = check_subset(subset, disc.n_features)
    if len(target) != disc.n_samples:
        raise ContractError("target length does not match the table")
    if not subset:
        return 0.0
    h_y = entropy(target) if target_entropy is None else target_entropy
    key, radix = subset_keys(disc, subset)
    if radix > _BINCOUNT_LIMIT:
        uniq, key = np.unique(key, return_inverse=True)
        key, radix = key.ravel(), len(uniq)
    cells = np.bincount(key, minlength=radix)
    joint = np.bincount(key * target.cardinality + target.labels, minlength=radix * target.cardinality)
    mi = h_y + entropy_from_counts(cells) - entropy_from_counts(joint)
    return max(mi, 0.0)


def conditional_mi(disc: DiscretizedTable, i: int, subset: Sequence[int], target: AttributeVector) -> float:
    """I(Y; z_i | Z_S) as the difference of two plug-in MI values, floored at zero."""
    subset = check_subset(subset, disc.n_features)
    if i in subset:
        raise ContractError(f"feature {i} is already in the conditioning set")
    with_i = mutual_information(disc, subset + (i,), target)
    return max(with_i - mutual_information(disc, subset, target), 0.0)


@dataclass(frozen=True)
class JointDistribution:
    """Empirical cell probabilities keyed by code tuples (subset order, then label)."""

    subset: tuple[int, ...]
    cells: dict[tuple[int, ...], float]
    with_target: bool

    @property
    def total_mass(self) -> float:
        return float(sum(self.cells.values()))


def joint_distribution(disc: DiscretizedTable, subset: Sequence[int],
                       target: AttributeVector | None = None) -> JointDistribution:
    subset = check_subset(subset, disc.n_features)
    rows = disc.codes[:, list(subset)]
    if target is not None:
        rows = np.column_stack([rows, target.labels])
    if rows.shape[1] == 0:
        return JointDistribution(subset, {(): 1.0}, target is not None)
    uniq, counts = np.unique(rows, axis=0, return_counts=True)
    n = float(disc.n_samples)
    cells = {tuple(int(v) for v in u): c / n for u, c in zip(uniq, counts)}
    return JointDistribution(subset, cells, target is not None)
