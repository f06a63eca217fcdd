"""Probability weighting, loss functions, and investment profiles."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bgame import (
    DefenderSpec,
    InvestmentProfile,
    edge_probability,
    path_success_probability,
    perceived_loss,
    prelec_weight,
    true_loss,
    two_path_diamond,
)

probs = st.floats(min_value=1e-12, max_value=1.0)
levels = st.floats(min_value=0.05, max_value=1.0)


def diamond_defender(alpha=0.5, budget=10.0, eta=0.0):
    g = two_path_diamond()
    return g, DefenderSpec("d1", frozenset(g.edge_keys()), frozenset({"t"}), budget, alpha, eta)


def test_prelec_fixed_points():
    assert prelec_weight(1.0, 0.4) == 1.0
    for alpha in (0.2, 0.5, 0.8, 1.0):
        assert prelec_weight(math.exp(-1.0), alpha) == pytest.approx(math.exp(-1.0), abs=1e-12)


def test_prelec_identity_at_rational_level():
    for p in (0.01, 0.2, 1 / math.e, 0.7, 1.0):
        assert prelec_weight(p, 1.0) == pytest.approx(p, rel=1e-12)


@given(p=probs, alpha=levels)
def test_prelec_stays_a_probability(p, alpha):
    w = prelec_weight(p, alpha)
    assert 0.0 <= w <= 1.0


@given(p=st.floats(min_value=1e-9, max_value=0.9999), alpha=levels)
def test_prelec_monotone_in_p(p, alpha):
    hi = min(1.0, p * 1.01 + 1e-9)
    assert prelec_weight(p, alpha) <= prelec_weight(hi, alpha) + 1e-15


@given(p=probs, alpha=st.floats(min_value=0.05, max_value=0.99))
def test_prelec_crossover_at_inverse_e(p, alpha):
    w = prelec_weight(p, alpha)
    if p < math.exp(-1.0):
        assert w >= p - 1e-15
    else:
        assert w <= p + 1e-15


def test_edge_probability_decays_exponentially():
    assert edge_probability(0.8, 2.0, 0.0) == pytest.approx(0.8)
    assert edge_probability(0.8, 2.0, 1.5) == pytest.approx(0.8 * math.exp(-3.0))
    assert edge_probability(1.0, 1.0, 0.0) == 1.0


def test_losses_on_undefended_diamond():
    g, d = diamond_defender()
    zero = InvestmentProfile.zero([d])
    assert true_loss(g, d, zero) == pytest.approx(1.0)
    assert perceived_loss(g, d, zero) == pytest.approx(1.0)


def test_true_loss_uses_worst_path():
    g, d = diamond_defender(alpha=1.0)
    profile = InvestmentProfile({"d1": {("a", "b"): 3.0}})
    # the untouched branch keeps probability one on every other edge
    assert true_loss(g, d, profile) == pytest.approx(1.0)
    both = InvestmentProfile({"d1": {("a", "b"): 3.0, ("a", "c"): 1.0}})
    assert true_loss(g, d, both) == pytest.approx(math.exp(-1.0))


def test_path_probability_multiplies_edges():
    g, d = diamond_defender()
    profile = InvestmentProfile({"d1": {("s", "a"): 1.0, ("a", "b"): 0.5}})
    p = path_success_probability(g, ("s", "a", "b", "d", "t"), profile)
    assert p == pytest.approx(math.exp(-1.5))


def test_perceived_equals_true_when_rational():
    g, _ = diamond_defender()
    rng = np.random.default_rng(5)
    d = DefenderSpec("d1", frozenset(g.edge_keys()), frozenset({"t"}), 10.0, 1.0)
    for _ in range(20):
        alloc = {k: float(rng.uniform(0, 2)) for k in g.edge_keys()}
        profile = InvestmentProfile({"d1": alloc})
        assert perceived_loss(g, d, profile) == pytest.approx(
            true_loss(g, d, profile), rel=1e-12
        )


def test_perceived_at_most_true_for_behavioral_level():
    # under-weighting of moderate probabilities never inflates a path product
    g, d = diamond_defender(alpha=0.5)
    rng = np.random.default_rng(6)
    for _ in range(20):
        alloc = {k: float(rng.uniform(0.2, 3)) for k in g.edge_keys()}
        profile = InvestmentProfile({"d1": alloc})
        pl = perceived_loss(g, d, profile)
        assert pl <= 1.0 + 1e-12 and pl > 0.0


@settings(max_examples=60, deadline=None)
@given(
    lam=st.floats(min_value=0.0, max_value=1.0),
    seed=st.integers(min_value=0, max_value=10_000),
    alpha=levels,
)
def test_perceived_loss_convex_in_own_allocation(lam, seed, alpha):
    g = two_path_diamond()
    d = DefenderSpec("d1", frozenset(g.edge_keys()), frozenset({"t"}), 10.0, alpha)
    rng = np.random.default_rng(seed)
    keys = sorted(g.edge_keys())
    ax = {k: float(rng.uniform(0, 3)) for k in keys}
    ay = {k: float(rng.uniform(0, 3)) for k in keys}
    mix = {k: lam * ax[k] + (1 - lam) * ay[k] for k in keys}
    lhs = perceived_loss(g, d, InvestmentProfile({"d1": mix}))
    rhs = lam * perceived_loss(g, d, InvestmentProfile({"d1": ax})) + (
        1 - lam
    ) * perceived_loss(g, d, InvestmentProfile({"d1": ay}))
    assert lhs <= rhs + 1e-9


def test_profile_operations():
    d1 = DefenderSpec("d1", frozenset({("s", "a")}), frozenset({"t"}), 4.0, 0.5)
    d2 = DefenderSpec("d2", frozenset({("s", "a"), ("a", "b")}), frozenset({"t"}), 6.0, 1.0)
    zero = InvestmentProfile.zero([d1, d2])
    assert zero.spent("d1") == 0.0

    p = zero.with_allocation("d1", {("s", "a"): 4.0})
    p = p.with_allocation("d2", {("s", "a"): 1.0, ("a", "b"): 5.0})
    assert zero.spent("d1") == 0.0, "with_allocation must not mutate the original"
    assert p.spent("d1") == pytest.approx(4.0)
    assert p.spent("d2") == pytest.approx(6.0)
    assert p.edge_totals()[("s", "a")] == pytest.approx(5.0)
    assert p.total_on(("a", "b")) == pytest.approx(5.0)
    assert p.for_defender("d1") == {("s", "a"): 4.0}


def test_defender_spec_validation():
    with pytest.raises(ValueError):
        DefenderSpec("d", frozenset({("s", "a")}), frozenset({"t"}), -1.0, 0.5)
    with pytest.raises(ValueError):
        DefenderSpec("d", frozenset({("s", "a")}), frozenset({"t"}), 1.0, 0.0)
    with pytest.raises(ValueError):
        DefenderSpec("d", frozenset({("s", "a")}), frozenset({"t"}), 1.0, 1.2)
