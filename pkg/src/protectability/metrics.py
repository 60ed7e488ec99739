"""Protectable/protected feature selection, P-score, LP-score and the EP baseline.

The perturbation schemes here are small stand-ins for the kinds of protection
the scores are meant to judge: additive Gaussian noise, noise calibrated to
how much private signal each feature carries, and feature pruning. They are
analogues, not reimplementations of any learned scheme.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import (
    CONTINUOUS, DISCRETE, AnalysisConfig, AttributeVector, ContractError, FeatureColumn, FeatureTable,
    RandomSource, validate_pair,
)
from .information import DiscretizedTable, discretize, equal_width_codes
from .power import fit_restricted, make_game
from .shapley import (
    EXACT, ContributionScores, contributions_from_samples, draw_samples, exact_contributions,
)

# child stream reserved for scheme noise; feature indices never reach it
SCHEME_STREAM = 2**32

P_SCORE = "PScore"
LP_SCORE = "LPScore"


# --- perturbation schemes ------------------------------------------------------

@dataclass(frozen=True)
class GaussianNoise:
    sigma: float | tuple[float, ...] = 0.0

    def sigmas(self, n: int) -> np.ndarray:
        s = np.broadcast_to(np.asarray(self.sigma, dtype=np.float64), (n,)).copy()
        if np.any(s < 0):
            raise ContractError("sigma must be nonnegative")
        return s

    def describe(self, names: Sequence[str]) -> str:
        if isinstance(self.sigma, tuple):
            return "gaussian:sigma=" + "/".join(repr(float(s)) for s in self.sigma)
        return f"gaussian:sigma={float(self.sigma)!r}"


@dataclass(frozen=True)
class CalibratedNoise:
    """Per-feature sigma = ``sigma * weight``; weights come from :func:`calibrate`."""

    sigma: float = 0.0
    weights: tuple[float, ...] | None = None

    def describe(self, names: Sequence[str]) -> str:
        return f"calibrated:sigma={float(self.sigma)!r}"


@dataclass(frozen=True)
class Prune:
    features: tuple[int, ...] = ()

    def describe(self, names: Sequence[str]) -> str:
        return "prune:features=" + ",".join(names[i] for i in self.features)


@dataclass(frozen=True)
class Quantize:
    levels: int = 16

    def describe(self, names: Sequence[str]) -> str:
        return f"quantize:levels={self.levels}"


PerturbationScheme = GaussianNoise | CalibratedNoise | Prune | Quantize

_DESCRIPTOR = re.compile(r"^(gaussian|calibrated|prune|quantize):(sigma|features|levels)=(.*)$")


def parse_scheme(text: str, names: Sequence[str]) -> PerturbationScheme:
    """Parse ``gaussian:sigma=F | calibrated:sigma=F | prune:features=a,b | quantize:levels=K``."""
    m = _DESCRIPTOR.match(text.strip())
    expected = {"gaussian": "sigma", "calibrated": "sigma", "prune": "features", "quantize": "levels"}
    if not m or expected[m.group(1)] != m.group(2):
        raise ValueError(f"malformed scheme descriptor {text!r}")
    kind, value = m.group(1), m.group(3).strip()
    try:
        if kind in ("gaussian", "calibrated"):
            sigma = float(value)
            if not np.isfinite(sigma) or sigma < 0:
                raise ValueError
            return GaussianNoise(sigma) if kind == "gaussian" else CalibratedNoise(sigma)
        if kind == "quantize":
            levels = int(value)
            if levels < 1:
                raise ValueError
            return Quantize(levels)
    except ValueError:
        raise ValueError(f"malformed scheme descriptor {text!r}") from None
    chosen = [v.strip() for v in value.split(",") if v.strip()]
    unknown = [v for v in chosen if v not in names]
    if unknown:
        raise ValueError(f"prune names unknown feature(s): {', '.join(unknown)}")
    return Prune(tuple(sorted({list(names).index(v) for v in chosen})))


def calibrate(scheme: CalibratedNoise, private_scores: ContributionScores) -> CalibratedNoise:
    """Weight ``(n - rank) / n``, rank 0 being the largest private contribution."""
    values = np.asarray(private_scores.values)
    n = len(values)
    order = sorted(range(n), key=lambda i: (-values[i], i))
    weights = [0.0] * n
    for rank, i in enumerate(order):
        weights[i] = (n - rank) / n
    return CalibratedNoise(scheme.sigma, tuple(weights))


def _noised(table: FeatureTable, sigmas: np.ndarray, rng: RandomSource) -> FeatureTable:
    gen = rng.generator()
    cols = []
    for col, sigma in zip(table.columns, sigmas):
        # draw for every column so each column's noise is independent of the others' sigmas
        noise = gen.standard_normal(len(col.values))
        if sigma == 0:
            cols.append(col)
        elif col.kind == CONTINUOUS:
            cols.append(FeatureColumn(col.name, col.values + sigma * noise, CONTINUOUS))
        else:
            top = int(col.values.max())
            codes = np.clip(np.rint(col.values + sigma * noise), 0, top).astype(np.int64)
            cols.append(FeatureColumn(col.name, codes, DISCRETE))
    return FeatureTable(tuple(cols))


def apply_scheme(table: FeatureTable, scheme: PerturbationScheme, rng: RandomSource) -> FeatureTable:
    n = table.n_features
    if isinstance(scheme, GaussianNoise):
        return _noised(table, scheme.sigmas(n), rng)
    if isinstance(scheme, CalibratedNoise):
        if scheme.weights is None:
            raise ContractError("calibrated noise needs weights; call calibrate() first")
        if len(scheme.weights) != n or scheme.sigma < 0:
            raise ContractError("calibrated noise does not match the table width")
        return _noised(table, scheme.sigma * np.asarray(scheme.weights), rng)
    if isinstance(scheme, Prune):
        if any(not 0 <= i < n for i in scheme.features):
            raise ContractError("prune set outside the table")
        out = table
        for i in scheme.features:
            col = table.columns[i]
            if np.all(col.values == col.values[0]):
                continue  # already constant; keeps pruning idempotent bitwise
            out = out.replace(i, FeatureColumn(col.name, np.full(len(col.values), float(np.mean(col.values))),
                                               CONTINUOUS))
        return out
    if isinstance(scheme, Quantize):
        if scheme.levels < 1:
            raise ContractError("levels must be >= 1")
        out = table
        for i, col in enumerate(table.columns):
            if col.kind != CONTINUOUS:
                continue
            if scheme.levels == 1:
                codes = np.zeros(len(col.values), dtype=np.int64)
            else:
                codes, _ = equal_width_codes(col.values, scheme.levels)
            out = out.replace(i, FeatureColumn(col.name, codes, DISCRETE))
        return out
    raise ContractError(f"unknown scheme {scheme!r}")


def identity_scheme(kind: str, config: AnalysisConfig) -> PerturbationScheme:
    """Zero-strength instance of each scheme variant."""
    return {"gaussian": GaussianNoise(0.0), "calibrated": CalibratedNoise(0.0), "prune": Prune(()),
            "quantize": Quantize(config.bins)}[kind]


# --- selection and scores --------------------------------------------------------

def select_protectable(private_scores: ContributionScores, epsilon: float) -> tuple[int, ...]:
    if epsilon < 0:
        raise ContractError("epsilon must be nonnegative")
    return tuple(int(i) for i in np.flatnonzero(np.asarray(private_scores.values) <= epsilon))


select_protected = select_protectable


def p_score(task_scores: ContributionScores, protectable: Sequence[int], tol: float = 1e-9) -> tuple[float, bool]:
    """Share of total task contribution held by the protectable features.

    A total below ``tol`` in magnitude yields ``(0.0, True)``.
    """
    values = np.asarray(task_scores.values, dtype=np.float64)
    total = float(np.sum(values))
    if abs(total) < tol:
        return 0.0, True
    kept = float(np.sum(values[list(protectable)])) if len(protectable) else 0.0
    return kept / total, False


lp_score = p_score


@dataclass(frozen=True)
class ProtectabilityReport:
    kind: str
    score: float
    degenerate: bool
    selected: tuple[int, ...]
    task: ContributionScores
    private: ContributionScores
    config: AnalysisConfig
    feature_names: tuple[str, ...]
    scheme: str | None = None
    notes: tuple[str, ...] = ()

    @property
    def selected_names(self) -> list[str]:
        return [self.feature_names[i] for i in self.selected]

    @property
    def meets_threshold(self) -> bool:
        return not self.degenerate and self.score >= self.config.protectability_threshold


@dataclass(frozen=True)
class SchemeOutcome:
    scheme: str
    acc_task: float
    acc_private: float
    ep: float


@dataclass(frozen=True)
class EvalReport:
    outcomes: tuple[SchemeOutcome, ...]
    config: AnalysisConfig

    @property
    def best(self) -> SchemeOutcome:
        # first maximum wins on ties
        return max(self.outcomes, key=lambda o: o.ep)

    @property
    def ep(self) -> float:
        return self.best.ep


# --- pipelines -------------------------------------------------------------------

def _games(disc: DiscretizedTable, targets: Sequence[AttributeVector], config: AnalysisConfig):
    return [make_game(disc, t, config.estimator, config.loss if config.estimator == "loss" else None)
            for t in targets]


def contribution_pipeline(disc: DiscretizedTable, targets: Sequence[AttributeVector], config: AnalysisConfig,
                          roles: Sequence[str] | None = None) -> list[ContributionScores]:
    """Shapley scores for each target; Monte-Carlo modes share one set of subset draws."""
    roles = roles or ["task", "private"][: len(targets)]
    games = _games(disc, targets, config)
    threads = config.threads
    if config.sampler == EXACT:
        return [exact_contributions(g, limit=config.exact_limit, role=r, threads=threads)
                for g, r in zip(games, roles)]
    samples = draw_samples(disc.n_features, config.m_samples, RandomSource(config.seed), config.sampler)
    return [contributions_from_samples(g, samples, config.sampler, role=r, seed=config.seed, threads=threads)
            for g, r in zip(games, roles)]


def preserved_contributions(perturbed: FeatureTable, target: AttributeVector, config: AnalysisConfig,
                            role: str = "private") -> ContributionScores:
    validate_pair(perturbed, target)
    return contribution_pipeline(discretize(perturbed, config.bins), [target], config, [role])[0]


def _report(kind: str, table: FeatureTable, task_scores: ContributionScores, priv_scores: ContributionScores,
            config: AnalysisConfig, scheme: str | None = None) -> ProtectabilityReport:
    selected = select_protectable(priv_scores, config.epsilon)
    score, degenerate = p_score(task_scores, selected, config.degenerate_tolerance)
    notes = tuple(dict.fromkeys(task_scores.notes + priv_scores.notes))
    return ProtectabilityReport(kind, score, degenerate, selected, task_scores, priv_scores, config,
                                tuple(table.names), scheme, notes)


def ppe(table: FeatureTable, task: AttributeVector, private: AttributeVector,
        config: AnalysisConfig | None = None) -> ProtectabilityReport:
    """Contribution scores for both attributes, protectable selection, P-score."""
    config = config or AnalysisConfig()
    validate_pair(table, task)
    validate_pair(table, private)
    disc = discretize(table, config.bins)
    task_scores, priv_scores = contribution_pipeline(disc, [task, private], config)
    return _report(P_SCORE, table, task_scores, priv_scores, config)


def _resolve(scheme: PerturbationScheme, table: FeatureTable, private: AttributeVector,
             config: AnalysisConfig) -> PerturbationScheme:
    if isinstance(scheme, CalibratedNoise) and scheme.weights is None:
        clean = contribution_pipeline(discretize(table, config.bins), [private], config, ["private"])[0]
        return calibrate(scheme, clean)
    return scheme


def perturb(table: FeatureTable, private: AttributeVector, scheme: PerturbationScheme,
            config: AnalysisConfig) -> FeatureTable:
    scheme = _resolve(scheme, table, private, config)
    return apply_scheme(table, scheme, RandomSource(config.seed).child(SCHEME_STREAM))


def lpe(table: FeatureTable, task: AttributeVector, private: AttributeVector, scheme: PerturbationScheme,
        config: AnalysisConfig | None = None) -> ProtectabilityReport:
    """P-score pipeline run on the perturbed features: selects protected features and the LP-score."""
    config = config or AnalysisConfig()
    validate_pair(table, task)
    validate_pair(table, private)
    perturbed = perturb(table, private, scheme, config)
    disc = discretize(perturbed, config.bins)
    task_scores, priv_scores = contribution_pipeline(disc, [task, private], config)
    return _report(LP_SCORE, table, task_scores, priv_scores, config, scheme.describe(table.names))


def accuracy(disc: DiscretizedTable, target: AttributeVector) -> float:
    """Held-in 0-1 accuracy of the full-feature Bayes predictor."""
    pred = fit_restricted(disc, range(disc.n_features), target)
    return float(np.mean(pred.predict(disc) == target.labels))


def empirical_protection(table: FeatureTable, task: AttributeVector, private: AttributeVector,
                         schemes: Sequence[PerturbationScheme], config: AnalysisConfig | None = None) -> EvalReport:
    config = config or AnalysisConfig()
    if not schemes:
        raise ContractError("at least one scheme is required")
    validate_pair(table, task)
    validate_pair(table, private)
    outcomes = []
    for scheme in schemes:
        disc = discretize(perturb(table, private, scheme, config), config.bins)
        acc_a = accuracy(disc, task)
        acc_p = accuracy(disc, private)
        ep = acc_a / max(acc_p, 1.0 / private.cardinality)
        outcomes.append(SchemeOutcome(scheme.describe(table.names), acc_a, acc_p, ep))
    return EvalReport(tuple(outcomes), config)
