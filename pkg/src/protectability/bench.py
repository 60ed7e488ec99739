"""Cost measurement of the Monte-Carlo pipeline against exhaustive enumeration.

Games are built without memoization so that every requested evaluation is
paid for: this counts the work a sampler asks for rather than how much a
cache happens to absorb.
"""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass
from typing import Sequence

from .core import AnalysisConfig, AttributeVector, FeatureTable, RandomSource
from .information import discretize
from .power import make_game
from .shapley import EXACT, contributions_from_samples, draw_samples, exact_contributions


@dataclass(frozen=True)
class BenchRow:
    pipeline: str
    m_samples: int | None
    wall_time_s: float
    game_evaluations: int
    distinct_subsets: int


def expected_evaluations(n_features: int, m: int, n_targets: int = 2) -> int:
    """targets x features x draws x two subsets per marginal payoff."""
    return n_targets * n_features * m * 2


def _games(table, targets, config):
    disc = discretize(table, config.bins)
    loss = config.loss if config.estimator == "loss" else None
    return [make_game(disc, t, config.estimator, loss, memoize=False) for t in targets]


def _mc_run(table, targets, config, m):
    games = _games(table, targets, config)
    n = table.n_features
    start = time.perf_counter()
    samples = draw_samples(n, m, RandomSource(config.seed), config.sampler if config.sampler != EXACT else "unbiased")
    for g in games:
        contributions_from_samples(g, samples, config.sampler if config.sampler != EXACT else "unbiased")
    elapsed = time.perf_counter() - start
    distinct = {tuple(sorted(s.subset + (i,))) for i, per in enumerate(samples) for s in per}
    distinct |= {s.subset for per in samples for s in per}
    return elapsed, sum(g.calls for g in games), len(distinct)


def _exact_run(table, targets, config):
    games = _games(table, targets, config)
    start = time.perf_counter()
    for g in games:
        exact_contributions(g, limit=config.exact_limit)
    elapsed = time.perf_counter() - start
    return elapsed, sum(g.calls for g in games), 2 ** table.n_features


def bench(table: FeatureTable, task: AttributeVector, private: AttributeVector, m_values: Sequence[int],
          config: AnalysisConfig | None = None, repeats: int = 3, include_exact: bool = True) -> list[BenchRow]:
    """Time the MC pipeline for each M (best of ``repeats``), plus one exact run when n is small enough."""
    config = config or AnalysisConfig()
    targets = [task, private]
    rows = []
    for m in m_values:
        if m < 1:
            raise ValueError("M values must be positive")
        runs = [_mc_run(table, targets, config, m) for _ in range(repeats)]
        rows.append(BenchRow("mc", m, min(r[0] for r in runs), runs[0][1], runs[0][2]))
    if include_exact and table.n_features <= config.exact_limit:
        runs = [_exact_run(table, targets, config) for _ in range(repeats)]
        rows.append(BenchRow("exact", None, min(r[0] for r in runs), runs[0][1], runs[0][2]))
    return rows


def rows_to_csv(rows: Sequence[BenchRow], with_time: bool = True) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = ["pipeline", "m_samples", "game_evaluations", "distinct_subsets"]
    writer.writerow(header + (["wall_time_s"] if with_time else []))
    for r in rows:
        line = [r.pipeline, "" if r.m_samples is None else r.m_samples, r.game_evaluations, r.distinct_subsets]
        writer.writerow(line + ([f"{r.wall_time_s:.6f}"] if with_time else []))
    return buf.getvalue()
