"""Attacker models: choice rules, determinism, and simulated outcomes."""

import math
from collections import Counter

import numpy as np
import pytest

from bgame import (
    ATTACKER_KINDS,
    AttackerModel,
    AttackHistory,
    DefenderSpec,
    InvestmentProfile,
    attack_path_sets,
    choose_paths,
    realized_loss,
    simulate_round,
    two_path_diamond,
)


def diamond_setup(alloc=None):
    g = two_path_diamond()
    paths = attack_path_sets(g)
    profile = InvestmentProfile({"d1": alloc or {}})
    return g, paths, profile


def test_model_kinds_and_validation():
    assert set(ATTACKER_KINDS) == {"min_max", "replay", "randomizing", "adaptive"}
    for kind in ATTACKER_KINDS:
        AttackerModel(kind)
    with pytest.raises(ValueError):
        AttackerModel("clairvoyant")
    with pytest.raises(ValueError):
        AttackerModel("min_max", history_window=0)


def test_path_sets_cover_each_critical_asset():
    g, paths, _ = diamond_setup()
    assert set(paths) == {"t"}
    assert len(paths["t"].paths) == 2


def test_path_sets_reject_unreachable_target():
    from bgame import AttackGraph, Edge

    g = AttackGraph(
        ["s", "a", "t", "vault"],
        [Edge("s", "a"), Edge("a", "t")],
        ["s"],
        {"t": 1.0, "vault": 2.0},
    )
    with pytest.raises(ValueError):
        attack_path_sets(g)


def test_worst_case_attacker_takes_most_likely_path():
    g, paths, profile = diamond_setup({("a", "b"): 2.0})
    choice = choose_paths(AttackerModel("min_max"), g, paths, profile, AttackHistory())
    # the b-branch is defended, so the c-branch is strictly more likely
    assert paths["t"].paths[choice["t"]] == ("s", "a", "c", "d", "t")


def test_worst_case_breaks_ties_by_first_index():
    g, paths, profile = diamond_setup()
    choice = choose_paths(AttackerModel("min_max"), g, paths, profile, AttackHistory())
    assert choice["t"] == 0


def test_replay_repeats_its_first_choice():
    g, paths, profile = diamond_setup({("a", "b"): 2.0})
    model = AttackerModel("replay")
    hist = AttackHistory()
    first = choose_paths(model, g, paths, profile, hist)
    assert paths["t"].paths[first["t"]] == ("s", "a", "c", "d", "t")
    hist.append(first)
    # even after the defense shifts, the replay attacker stays put
    shifted = InvestmentProfile({"d1": {("a", "c"): 5.0}})
    for _ in range(3):
        nxt = choose_paths(model, g, paths, shifted, hist)
        assert nxt == first
        hist.append(nxt)


def test_randomizing_attacker_is_seeded_and_covers_paths():
    g, paths, profile = diamond_setup()
    model = AttackerModel("randomizing", rng_seed=9)
    seq_a = [choose_paths(model, g, paths, profile, AttackHistory(),
                          rng=np.random.default_rng(k))["t"] for k in range(40)]
    seq_b = [choose_paths(model, g, paths, profile, AttackHistory(),
                          rng=np.random.default_rng(k))["t"] for k in range(40)]
    assert seq_a == seq_b
    counts = Counter(seq_a)
    assert set(counts) == {0, 1}


def test_randomizing_frequencies_are_near_uniform():
    g, paths, profile = diamond_setup()
    rng = np.random.default_rng(123)
    model = AttackerModel("randomizing")
    picks = [choose_paths(model, g, paths, profile, AttackHistory(), rng=rng)["t"]
             for _ in range(2000)]
    freq = sum(picks) / len(picks)
    assert freq == pytest.approx(0.5, abs=0.05)


def test_adaptive_attacker_rotates_away_from_recent_choices():
    g, paths, profile = diamond_setup()
    model = AttackerModel("adaptive", history_window=10)
    hist = AttackHistory()
    seen = []
    for _ in range(6):
        c = choose_paths(model, g, paths, profile, hist)
        seen.append(c["t"])
        hist.append(c)
    assert seen[:4] == [0, 1, 0, 1]


def test_history_window_and_consistency():
    hist = AttackHistory()
    for i in (0, 1, 1, 0, 1):
        hist.append({"t": i})
    assert len(hist) == 5
    assert hist.trailing("t", 3) == [1, 0, 1]
    assert hist.trailing("t", 99) == [0, 1, 1, 0, 1]
    with pytest.raises(ValueError):
        hist.append({"other": 0})


def test_realized_loss_prices_the_chosen_path():
    g, paths, profile = diamond_setup({("s", "a"): 1.0, ("a", "b"): 2.0})
    loss0 = realized_loss(g, profile, {"t": 0}, paths)
    loss1 = realized_loss(g, profile, {"t": 1}, paths)
    assert loss0 == pytest.approx(math.exp(-3.0), rel=1e-12)
    assert loss1 == pytest.approx(math.exp(-1.0), rel=1e-12)


def test_simulated_rounds_concentrate_on_path_probability():
    g, paths, profile = diamond_setup({("s", "a"): 0.5})
    p = math.exp(-0.5)
    rng = np.random.default_rng(77)
    hits = sum(simulate_round(g, profile, {"t": 0}, paths, rng)["t"]
               for _ in range(10_000))
    assert hits / 10_000 == pytest.approx(p, abs=0.02)
