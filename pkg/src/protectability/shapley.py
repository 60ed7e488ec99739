"""Exact and Monte-Carlo Shapley contribution scores over a coalition game."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .core import ContractError, RandomSource
from .power import CoalitionGame

UNBIASED = "unbiased"
PAPER = "paper"
EXACT = "exact"

DEFAULT_EXACT_LIMIT = 16

PAPER_NORMALIZATION_NOTE = (
    "paper sampler: sum of w_S * marginal over M uniform subsets, rescaled by 2^(n-1)/M "
    "so the estimate is unbiased for the Shapley value"
)


@dataclass(frozen=True)
class SubsetSample:
    subset: tuple[int, ...]
    weight: float


@dataclass(frozen=True)
class ContributionScores:
    values: np.ndarray
    role: str = "task"
    sampler: str = EXACT
    m_samples: int | None = None
    seed: int | None = None
    stderr: np.ndarray | None = None
    notes: tuple[str, ...] = ()

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, i):
        return self.values[i]


def shapley_weight(subset_size: int, n: int) -> float:
    """|S|! (n - |S| - 1)! / n!, evaluated as 1 / (n * C(n-1, |S|))."""
    if n < 1:
        raise ContractError("n must be >= 1")
    if not 0 <= subset_size <= n - 1:
        raise ContractError(f"subset size {subset_size} outside [0, {n - 1}]")
    return 1.0 / (n * math.comb(n - 1, subset_size))


def _others(n: int, i: int) -> list[int]:
    return [j for j in range(n) if j != i]


def enumerate_subsets(n: int, i: int) -> list[tuple[int, ...]]:
    """All subsets of the other n-1 features, in bitmask order."""
    others = _others(n, i)
    return [tuple(o for b, o in enumerate(others) if mask >> b & 1) for mask in range(1 << (n - 1))]


def _marginals(game: CoalitionGame, i: int, subsets: Sequence[tuple[int, ...]]) -> list[float]:
    return [game.evaluate(tuple(sorted(s + (i,)))) - game.evaluate(s) for s in subsets]


def _weighted_total(subsets: Sequence[tuple[int, ...]], marginals: Sequence[float], n: int) -> float:
    # fixed left-to-right order keeps exact and enumerated-sampler runs bitwise equal
    total = 0.0
    for s, mu in zip(subsets, marginals):
        total += shapley_weight(len(s), n) * mu
    return total


def _exact_one(game: CoalitionGame, i: int, n: int) -> float:
    subsets = enumerate_subsets(n, i)
    return _weighted_total(subsets, _marginals(game, i, subsets), n)


def _map_features(fn: Callable[[int], object], n: int, threads: int) -> list:
    if threads == 1 or n == 1:
        return [fn(i) for i in range(n)]
    with ThreadPoolExecutor(max_workers=threads or None) as pool:
        return list(pool.map(fn, range(n)))


def exact_contributions(game: CoalitionGame, n: int | None = None, limit: int = DEFAULT_EXACT_LIMIT,
                        role: str = "task", threads: int = 1) -> ContributionScores:
    n = game.n_players if n is None else n
    if n > limit:
        raise ContractError(
            f"exact enumeration over {n} features exceeds the limit of {limit}; "
            "use the unbiased or paper Monte-Carlo sampler instead")
    values = _map_features(lambda i: _exact_one(game, i, n), n, threads)
    return ContributionScores(np.array(values, dtype=np.float64), role=role, sampler=EXACT)


# --- samplers -----------------------------------------------------------------

Sampler = Callable[[int, int, int, RandomSource], list[SubsetSample]]


def sample_unbiased(n: int, i: int, m: int, rng: RandomSource) -> list[SubsetSample]:
    """Size uniform on {0..n-1}, then a uniform subset of that size."""
    gen = rng.generator()
    others = np.array(_others(n, i), dtype=np.int64)
    out = []
    for _ in range(m):
        k = int(gen.integers(0, n))
        chosen = gen.choice(others, size=k, replace=False) if k else others[:0]
        out.append(SubsetSample(tuple(sorted(int(v) for v in chosen)), 1.0))
    return out


def sample_paper(n: int, i: int, m: int, rng: RandomSource) -> list[SubsetSample]:
    """Uniform over all 2^(n-1) subsets; each carries its Shapley weight."""
    gen = rng.generator()
    others = _others(n, i)
    out = []
    for _ in range(m):
        mask = gen.integers(0, 2, size=n - 1)
        s = tuple(o for o, keep in zip(others, mask) if keep)
        out.append(SubsetSample(s, shapley_weight(len(s), n)))
    return out


def enumeration_sampler(n: int, i: int, m: int, rng: RandomSource) -> list[SubsetSample]:
    """Deterministic 'sampler' returning every subset once (m must be 2^(n-1))."""
    subsets = enumerate_subsets(n, i)
    if m != len(subsets):
        raise ContractError(f"enumeration sampler needs m = {len(subsets)}")
    return [SubsetSample(s, shapley_weight(len(s), n)) for s in subsets]


_SAMPLERS = {UNBIASED: sample_unbiased, PAPER: sample_paper}


def draw_samples(n: int, m: int, rng: RandomSource, mode: str = UNBIASED,
                 sampler: Sampler | None = None) -> list[list[SubsetSample]]:
    """Per focal feature, ``m`` subsets drawn from its own child stream."""
    if m < 1:
        raise ContractError("M must be >= 1")
    if sampler is None:
        if mode not in _SAMPLERS:
            raise ContractError(f"unknown Monte-Carlo mode {mode!r}")
        sampler = _SAMPLERS[mode]
    return [sampler(n, i, m, rng.child(i)) for i in range(n)]


def _estimate(game: CoalitionGame, i: int, samples: list[SubsetSample], n: int, mode: str) -> tuple[float, float]:
    m = len(samples)
    subsets = [s.subset for s in samples]
    mus = _marginals(game, i, subsets)
    if mode == PAPER:
        value = _weighted_total(subsets, mus, n) * (2.0 ** (n - 1) / m)
        terms = np.array([s.weight * mu for s, mu in zip(samples, mus)]) * 2.0 ** (n - 1)
    else:
        terms = np.array(mus)
        value = float(np.mean(terms))
    stderr = float(np.std(terms, ddof=1) / math.sqrt(m)) if m > 1 else float("nan")
    return value, stderr


def contributions_from_samples(game: CoalitionGame, samples: list[list[SubsetSample]], mode: str = UNBIASED,
                               role: str = "task", seed: int | None = None, threads: int = 1) -> ContributionScores:
    n = len(samples)
    results = _map_features(lambda i: _estimate(game, i, samples[i], n, mode), n, threads)
    values = np.array([r[0] for r in results], dtype=np.float64)
    stderr = np.array([r[1] for r in results], dtype=np.float64)
    notes = (PAPER_NORMALIZATION_NOTE,) if mode == PAPER else ()
    return ContributionScores(values, role=role, sampler=mode, m_samples=len(samples[0]),
                              seed=seed, stderr=stderr, notes=notes)


def mc_contributions(game: CoalitionGame, n: int | None, m: int, rng: RandomSource, mode: str = UNBIASED,
                     sampler: Sampler | None = None, role: str = "task", threads: int = 1) -> ContributionScores:
    n = game.n_players if n is None else n
    samples = draw_samples(n, m, rng, mode, sampler)
    return contributions_from_samples(game, samples, mode, role=role, seed=rng.seed, threads=threads)
