import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from protectability.core import AnalysisConfig, AttributeVector, ContractError, FeatureTable, RandomSource
from protectability.generate import GeneratorSpec, generate
from protectability.information import discretize
from protectability.metrics import (
    CalibratedNoise, GaussianNoise, Prune, Quantize, apply_scheme, calibrate, empirical_protection,
    identity_scheme, lp_score, lpe, p_score, parse_scheme, ppe, preserved_contributions, select_protectable,
    select_protected,
)
from protectability.power import make_game
from protectability.shapley import ContributionScores, exact_contributions

EXACT = AnalysisConfig(sampler="exact")


def scores(values):
    return ContributionScores(np.asarray(values, dtype=float))


def exact_scores(table, target, bins=16):
    return exact_contributions(make_game(discretize(table, bins), target)).values


@pytest.fixture(scope="module")
def copy_big():
    return generate(GeneratorSpec(family="copy", n_samples=4000, seed=1))


@pytest.fixture(scope="module")
def xor_big():
    return generate(GeneratorSpec(family="xor", n_samples=4000, seed=1))


# --- selection and scores -----------------------------------------------------

def test_independent_private_selects_everything():
    assert select_protectable(scores([0.0, 0.0, 0.0]), 0.0) == (0, 1, 2)


def test_comparison_is_inclusive():
    assert select_protectable(scores([0.05, 0.0500001, 0.01]), 0.05) == (0, 2)


def test_copy_feature_is_excluded(copy_big):
    c_priv = scores(exact_scores(copy_big.table, copy_big.private))
    assert 0 not in select_protectable(c_priv, 0.05)


def test_overlap_selection_matches_threshold_scan(overlap8):
    c_priv = exact_scores(overlap8.table, overlap8.private)
    report = ppe(overlap8.table, overlap8.task, overlap8.private, EXACT)
    assert report.selected == tuple(i for i in range(8) if c_priv[i] <= 0.05)
    assert set(report.selected).isdisjoint(overlap8.unprotectable)


def test_p_score_cases():
    assert p_score(scores([0.3, 0.2]), (0, 1)) == (1.0, False)
    assert p_score(scores([0.5, 0.0]), ()) == (0.0, False)
    assert p_score(scores([0.0, 0.0]), (0, 1)) == (0.0, True)
    assert p_score(scores([0.6, 0.2, 0.2]), (1, 2)) == pytest.approx((0.4, False))


def test_all_constant_features_are_degenerate():
    t = FeatureTable.from_arrays({"a": np.zeros(10, dtype=int), "b": np.ones(10, dtype=int)})
    y = AttributeVector(np.arange(10) % 2, 2)
    r = ppe(t, y, y, EXACT)
    assert r.degenerate and r.score == 0.0


def test_ppe_anchors(xor_big, copy_big):
    r = ppe(xor_big.table, xor_big.task, xor_big.private)
    assert r.score == 1.0 and not r.degenerate
    # identical attributes, epsilon below the smallest positive private score
    c = ppe(copy_big.table, copy_big.task, copy_big.private, AnalysisConfig(epsilon=1e-12))
    assert c.score == 0.0


def test_ppe_exhaustive_xor_table():
    ds = generate(GeneratorSpec(family="xor", n_samples=4))
    assert ppe(ds.table, ds.task, ds.private, EXACT).score == 1.0


def test_ppe_close_to_exact_pipeline(overlap8):
    exact = ppe(overlap8.table, overlap8.task, overlap8.private, EXACT).score
    diffs = [abs(ppe(overlap8.table, overlap8.task, overlap8.private, AnalysisConfig(m_samples=200, seed=s)).score
                 - exact) for s in range(20)]
    assert np.mean(diffs) < 0.05


def test_report_carries_provenance(overlap4):
    cfg = AnalysisConfig(sampler="paper", m_samples=30, seed=5)
    r = ppe(overlap4.table, overlap4.task, overlap4.private, cfg)
    assert r.config is cfg and r.task.m_samples == 30 and r.task.seed == 5
    assert r.notes and r.task.stderr is not None
    assert r.meets_threshold == (r.score >= 0.7)


# --- schemes ------------------------------------------------------------------

def test_prune_makes_column_constant(overlap8):
    out = apply_scheme(overlap8.table, Prune((2,)), RandomSource(0))
    assert len(np.unique(out.columns[2].values)) == 1
    for j in range(8):
        if j != 2:
            assert out.columns[j] is overlap8.table.columns[j]


def test_zero_sigma_is_identity(overlap8):
    out = apply_scheme(overlap8.table, GaussianNoise(0.0), RandomSource(0))
    assert out.equals(overlap8.table)


def test_gaussian_noise_lowers_contribution(copy_big):
    std = float(np.std(copy_big.table.columns[0].values))
    noised = apply_scheme(copy_big.table, GaussianNoise((10 * std, 0.0)), RandomSource(3))
    before = exact_scores(copy_big.table, copy_big.task)[0]
    after = exact_scores(noised, copy_big.task)[0]
    assert after < before


def test_gaussian_on_continuous_columns():
    ds = generate(GeneratorSpec(family="gaussian_mix", n_samples=300, seed=1))
    out = apply_scheme(ds.table, GaussianNoise(0.5), RandomSource(1))
    diff = out.columns[0].values - ds.table.columns[0].values
    assert 0.3 < np.std(diff) < 0.7


def test_discrete_noise_stays_in_code_range(overlap8):
    out = apply_scheme(overlap8.table, GaussianNoise(2.0), RandomSource(1))
    for a, b in zip(out.columns, overlap8.table.columns):
        assert a.kind == b.kind and a.values.min() >= 0 and a.values.max() <= b.values.max()


def test_quantize():
    ds = generate(GeneratorSpec(family="gaussian_mix", n_samples=300, seed=1))
    out = apply_scheme(ds.table, Quantize(3), RandomSource(0))
    assert all(set(c.values.tolist()) <= {0, 1, 2} for c in out.columns)


def test_calibrated_needs_weights(overlap8):
    with pytest.raises(ContractError):
        apply_scheme(overlap8.table, CalibratedNoise(1.0), RandomSource(0))


def test_calibration_ranks_private_contribution():
    cal = calibrate(CalibratedNoise(2.0), scores([0.1, 0.5, 0.0, 0.3]))
    assert cal.weights == (0.5, 1.0, 0.25, 0.75)


def test_prune_idempotent(overlap8):
    once = apply_scheme(overlap8.table, Prune((1, 4)), RandomSource(0))
    twice = apply_scheme(once, Prune((1, 4)), RandomSource(0))
    assert once.equals(twice)


@pytest.mark.parametrize("text,expected", [
    ("gaussian:sigma=0.5", GaussianNoise(0.5)),
    ("calibrated:sigma=1", CalibratedNoise(1.0)),
    ("prune:features=z3,z1", Prune((0, 2))),
    ("quantize:levels=4", Quantize(4)),
])
def test_parse_scheme(text, expected):
    assert parse_scheme(text, ["z1", "z2", "z3"]) == expected


@pytest.mark.parametrize("text", ["gaussian", "gaussian:sigma=-1", "prune:features=q", "quantize:levels=0",
                                  "gaussian:levels=3", "blur:sigma=1"])
def test_parse_scheme_rejects(text):
    with pytest.raises(ValueError):
        parse_scheme(text, ["z1", "z2", "z3"])


def test_describe_round_trips():
    names = ["z1", "z2", "z3"]
    for s in (GaussianNoise(0.25), CalibratedNoise(1.5), Prune((0, 2)), Quantize(5)):
        assert parse_scheme(s.describe(names), names) == s


# --- preserved contributions and LP ---------------------------------------------

def test_identity_preserves_contributions(overlap8):
    cfg = AnalysisConfig(seed=4)
    clean = preserved_contributions(overlap8.table, overlap8.private, cfg)
    same = preserved_contributions(apply_scheme(overlap8.table, GaussianNoise(0.0), RandomSource(0)),
                                   overlap8.private, cfg)
    assert np.array_equal(clean.values, same.values)


def test_prune_all_zeroes_everything(overlap8):
    pruned = apply_scheme(overlap8.table, Prune(tuple(range(8))), RandomSource(0))
    c = preserved_contributions(pruned, overlap8.private, EXACT)
    assert np.all(np.abs(c.values) < 1e-12)
    assert select_protected(c, 0.0) == tuple(range(8))


def test_prune_unprotectable(overlap8):
    unprot = tuple(overlap8.unprotectable)
    pruned = apply_scheme(overlap8.table, Prune(unprot), RandomSource(0))
    c = preserved_contributions(pruned, overlap8.private, EXACT)
    assert np.all(c.values[list(unprot)] == 0.0)
    assert select_protected(c, 0.05) == tuple(range(8))


def test_lp_identity_equals_p(overlap8):
    p = ppe(overlap8.table, overlap8.task, overlap8.private)
    lp = lpe(overlap8.table, overlap8.task, overlap8.private, GaussianNoise(0.0))
    assert lp.score == p.score and lp.selected == p.selected
    assert lp_score(lp.task, lp.selected) == (lp.score, False)


def test_lp_prune_all_degenerate(overlap4):
    lp = lpe(overlap4.table, overlap4.task, overlap4.private, Prune((0, 1, 2, 3)), EXACT)
    assert lp.degenerate and lp.score == 0.0


def test_lp_prune_unprotectable_four_features(overlap4):
    assert [overlap4.table.names[i] for i in overlap4.unprotectable] == ["z3", "z4"]
    lp = lpe(overlap4.table, overlap4.task, overlap4.private, Prune(tuple(overlap4.unprotectable)), EXACT)
    assert lp.score == pytest.approx(1.0, abs=1e-9) and lp.selected == (0, 1, 2, 3)


def test_prune_exact_unprotectable_ranks_first(overlap8):
    p = ppe(overlap8.table, overlap8.task, overlap8.private, EXACT)
    unprot = tuple(i for i in range(8) if i not in p.selected)
    results = {}
    for name, scheme in [("gaussian", GaussianNoise(0.5)), ("calibrated", CalibratedNoise(0.5)),
                         ("prune", Prune(unprot))]:
        results[name] = lpe(overlap8.table, overlap8.task, overlap8.private, scheme, EXACT).score
    assert max(results, key=results.get) == "prune"


@given(st.floats(0, 0.3), st.floats(0, 0.3))
@settings(max_examples=25, deadline=None)
def test_epsilon_monotonicity(e1, e2):
    lo, hi = sorted((e1, e2))
    c_task = scores([0.3, 0.2, 0.15, 0.1, 0.0, 0.05])
    c_priv = scores([0.25, 0.01, 0.12, 0.0, 0.2, 0.04])
    z_lo, z_hi = select_protectable(c_priv, lo), select_protectable(c_priv, hi)
    assert set(z_lo) <= set(z_hi)
    assert p_score(c_task, z_lo)[0] <= p_score(c_task, z_hi)[0]


# --- empirical protection ---------------------------------------------------------

def test_ep_identity_on_copy(copy_big):
    ev = empirical_protection(copy_big.table, copy_big.task, copy_big.private, [GaussianNoise(0.0)])
    assert ev.ep == 1.0


def test_ep_prune_all_gives_majority_rates(copy_big):
    ev = empirical_protection(copy_big.table, copy_big.task, copy_big.private, [Prune((0, 1))])
    o = ev.outcomes[0]
    majority = np.bincount(copy_big.task.labels).max() / len(copy_big.task)
    assert o.acc_task == majority and o.acc_private == majority


def test_ep_is_max_over_schemes(overlap8):
    ev = empirical_protection(overlap8.table, overlap8.task, overlap8.private,
                              [GaussianNoise(0.5), Prune(tuple(overlap8.unprotectable))])
    assert ev.ep == max(o.ep for o in ev.outcomes)
    assert all(0 <= o.acc_task <= 1 and 0 <= o.acc_private <= 1 for o in ev.outcomes)


def test_ep_needs_a_scheme(overlap4):
    with pytest.raises(ContractError):
        empirical_protection(overlap4.table, overlap4.task, overlap4.private, [])


@pytest.mark.parametrize("kind", ["gaussian", "calibrated", "prune", "quantize"])
def test_zero_strength_schemes(overlap8, kind):
    cfg = AnalysisConfig(seed=2)
    p = ppe(overlap8.table, overlap8.task, overlap8.private, cfg)
    lp = lpe(overlap8.table, overlap8.task, overlap8.private, identity_scheme(kind, cfg), cfg)
    assert lp.score == p.score and lp.selected == p.selected


def test_quantize_identity_on_continuous_table():
    ds = generate(GeneratorSpec(family="gaussian_mix", n_samples=2000, seed=6, n_features=5))
    cfg = AnalysisConfig(bins=8, seed=1)
    p = ppe(ds.table, ds.task, ds.private, cfg)
    lp = lpe(ds.table, ds.task, ds.private, Quantize(8), cfg)
    assert np.array_equal(lp.task.values, p.task.values) and lp.score == p.score
