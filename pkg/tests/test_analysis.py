import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from topodense.analysis import (
    DiscreteToyProblem,
    draw_subbatches,
    estimate_c_beta,
    estimate_mass_concentration,
    lifetime_distribution,
    mass_concentration_by_class,
    random_toy,
    set_margin,
    validate_lemma1,
)
from oracles import margin_separated_cloud
from topodense.measures import ReferenceSet
from topodense.persistence import is_beta_connected

GRID = np.array(list(itertools.product(range(4), range(4))), dtype=float)


def test_lifetimes_of_identical_latents():
    stats = lifetime_distribution({0: np.ones((10, 3))}, b=4, trials=50)
    assert stats.trials == 50 and stats.deaths_per_trial == 3
    assert stats.mean == 0.0 and stats.variance == 0.0
    assert stats.counts.sum() == 150


def test_lifetimes_on_a_unit_grid():
    # sub-batches holding the whole 4x4 grid: every MST edge is a unit grid edge
    stats = lifetime_distribution({0: GRID}, b=16, trials=5, seed=1)
    np.testing.assert_array_equal(stats.deaths, np.ones((5, 15)))


def test_lifetimes_are_reproducible_and_histogram_is_complete():
    rng = np.random.default_rng(0)
    lat = {0: rng.normal(size=(30, 2)), 1: rng.normal(size=(3, 2)) + 5}
    a = lifetime_distribution(lat, 4, 200, seed=9, bin_edges=np.linspace(0, 0.5, 6))
    b = lifetime_distribution(lat, 4, 200, seed=9, bin_edges=np.linspace(0, 0.5, 6))
    np.testing.assert_array_equal(a.deaths, b.deaths)
    assert a.counts.sum() == a.deaths.size
    assert set(np.unique(a.class_ids)) == {0, 1}


def test_empty_class_is_skipped_with_warning():
    with pytest.warns(RuntimeWarning):
        drawn = draw_subbatches({0: np.zeros((0, 2)), 1: np.ones((5, 2))}, 3, 4)
    assert list(drawn) == [1]


def test_c_beta_examples():
    rng = np.random.default_rng(0)
    tight = {0: rng.uniform(0, 0.1, (40, 2))}
    assert estimate_c_beta(tight, 5, beta=0.5, trials=200).pooled == 1.0
    assert estimate_c_beta(tight, 5, beta=1e-9, trials=200).pooled == 0.0
    two = np.concatenate([rng.normal(0, 1e-3, (500, 2)), rng.normal(0, 1e-3, (500, 2)) + 100])
    est = estimate_c_beta({0: two}, 8, beta=1.0, trials=20_000, seed=3, replace=True)
    assert abs(est.pooled - 2 * 0.5**8) < 4 * est.pooled_se + 1e-3
    assert est.per_class_se[0] == pytest.approx(math.sqrt(est.pooled * (1 - est.pooled) / 20_000))


def test_c_beta_is_monotone_in_beta():
    rng = np.random.default_rng(1)
    lat = {0: rng.normal(size=(50, 3)), 1: rng.normal(size=(50, 3))}
    vals = [estimate_c_beta(lat, 6, beta, 300, seed=4).pooled for beta in np.linspace(0.1, 3, 30)]
    assert all(a <= b for a, b in zip(vals, vals[1:]))


def test_mass_fixture():
    # anchor at the origin, test points at distances 0.1 .. 1.0; r = 0.45, beta = 0.3
    test = np.array([[0.1 * k, 0.0] for k in range(1, 11)])
    ref = ReferenceSet(np.zeros((1, 2)), radius=0.45)
    (pt,) = estimate_mass_concentration(ref, test, [0.45], beta=0.3)
    assert (pt.p_hat, pt.q_hat) == (0.4, 0.7)


def test_mass_extremes_and_errors():
    test = np.array([[5.0, 0.0], [6.0, 0.0]])
    ref = ReferenceSet(np.zeros((1, 2)), radius=1.0)
    lo, hi = estimate_mass_concentration(ref, test, [0.0, 100.0], beta=1.0)
    assert (lo.p_hat, lo.q_hat) == (0.0, 0.0)
    assert (hi.p_hat, hi.q_hat) == (1.0, 1.0)
    with pytest.raises(ValueError):
        estimate_mass_concentration(ref, np.zeros((0, 2)), [1.0], 1.0)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_mass_curve_properties(seed):
    rng = np.random.default_rng(seed)
    ref = ReferenceSet(rng.normal(size=(5, 2)), radius=0.0)
    test = rng.normal(size=(40, 2)) * 2
    r = np.linspace(0, 4, 17)
    small = estimate_mass_concentration(ref, test, r, 0.2)
    big = estimate_mass_concentration(ref, test, r, 0.7)
    assert all(m.p_hat <= m.q_hat for m in small)
    assert all(a.p_hat <= b.p_hat for a, b in zip(small, small[1:]))
    assert all(s.q_hat <= t.q_hat for s, t in zip(small, big))


def test_mass_by_class_pools_against_own_anchors():
    anchors = {0: np.zeros((1, 2)), 1: np.full((1, 2), 10.0)}
    test = {0: np.array([[0.5, 0.0]]), 1: np.array([[10.0, 10.75]])}
    per, pooled = mass_concentration_by_class(anchors, test, [0.5, 1.0], beta=0.25)
    assert [m.p_hat for m in per[0]] == [1.0, 1.0]
    assert [m.p_hat for m in per[1]] == [0.0, 1.0]
    assert [(m.p_hat, m.q_hat) for m in pooled] == [(0.5, 1.0), (1.0, 1.0)]


def test_set_margin():
    assert set_margin([[0.0, 0.0]], [[0.0, 0.0], [1.0, 1.0]]) == 0.0
    assert set_margin([0.0], [3.0]) == 3.0
    rng = np.random.default_rng(4)
    a, b = rng.normal(size=(7, 2)), rng.normal(size=(9, 2)) + 3
    brute = min(math.dist(p, q) for p in a for q in b)
    assert set_margin(a, b) == pytest.approx(brute, rel=1e-14)
    with pytest.raises(ValueError):
        set_margin(np.zeros((0, 2)), [[1.0, 1.0]])


@pytest.mark.parametrize("seed", range(10))
def test_margin_constructions_disconnect(seed):
    rng = np.random.default_rng(seed)
    l = int(rng.integers(1, 5))
    beta = float(rng.uniform(0.2, 2))
    a, b, mids = margin_separated_cloud(rng, l, beta)
    assert set_margin(a, b) >= l * beta
    assert not is_beta_connected(np.concatenate([a, b, mids]), beta)


def test_region_bound_separated_toy():
    toy = DiscreteToyProblem(
        masses=[Fraction(1, 2), Fraction(1, 2)],
        labels=[0, 1],
        latents=[[-1.0], [1.0]],
        weight=[[-1.0, 1.0]],
        bias=[0.0, 0.0],
    )
    rep = validate_lemma1(toy, epsilon=0)
    assert rep.error == 0 and rep.pessimistic_error == 0 and rep.holds


def test_region_bound_mislabeled_region():
    # the class-1 point of mass 1/10 sits in class 0's decision region
    toy = DiscreteToyProblem(
        masses=[Fraction(6, 10), Fraction(3, 10), Fraction(1, 10)],
        labels=[0, 1, 1],
        latents=[[-1.0], [1.0], [-2.0]],
        weight=[[-1.0, 1.0]],
        bias=[0.0, 0.0],
    )
    rep = validate_lemma1(toy)
    assert rep.error == Fraction(1, 10)
    assert rep.class_deficit == {0: 0, 1: Fraction(1, 4)}
    assert rep.uniform_bound == Fraction(1, 2) and rep.per_class_bound == Fraction(1, 4)
    assert rep.error <= 2 * Fraction(1, 10) and rep.holds


def test_region_bound_collapsed_latents_count_as_errors():
    toy = DiscreteToyProblem(
        masses=[Fraction(1, 4), Fraction(1, 4), Fraction(1, 2)],
        labels=[0, 1, 1],
        latents=[[0.0], [0.0], [3.0]],
        weight=[[-1.0, 1.0]],
        bias=[0.1, 0.0],
    )
    rep = validate_lemma1(toy)
    assert rep.error == Fraction(1, 4)
    assert rep.pessimistic_error == Fraction(1, 2)
    # class 1 region mass: latent 0 collides with class 0, so C_1 contains both
    assert rep.class_deficit[1] == Fraction(1, 2)
    assert rep.holds


def test_region_bound_rejects_bad_labels():
    with pytest.raises(ValueError):
        DiscreteToyProblem([Fraction(1)], [2], [[0.0]], [[1.0, 0.0]], [0.0, 0.0])
    with pytest.raises(ValueError):
        DiscreteToyProblem([Fraction(1, 2)], [0], [[0.0]], [[1.0, 0.0]], [0.0, 0.0])


@pytest.mark.parametrize("seed", range(50))
def test_region_bound_random_toys(seed):
    rep = validate_lemma1(random_toy(np.random.default_rng(seed)))
    assert rep.holds
