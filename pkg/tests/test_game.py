"""Equilibria, planner optima, inefficiency ratios, gains, and baselines."""

import math

import pytest

from bgame import (
    DefenderSpec,
    InvestmentProfile,
    PLANNER_ID,
    baseline_defense_in_depth,
    baseline_min_cut,
    best_response,
    build_case_study,
    gain_report,
    min_edge_cut,
    nash_equilibrium,
    perceived_loss,
    price_of_anarchy,
    probability_of_successful_attack,
    social_optimum,
    two_path_diamond,
    with_joint_ownership,
)


def rebudget(d, budget):
    return DefenderSpec(d.id, d.edge_set, d.assets, budget, d.alpha, d.eta)


def relevel(d, alpha):
    return DefenderSpec(d.id, d.edge_set, d.assets, d.budget, alpha, d.eta)


def test_equilibrium_result_shape():
    case = build_case_study("shared_edge_pair")
    eq = nash_equilibrium(case.graph, case.defenders)
    assert eq.converged and eq.sweeps <= 200
    assert set(eq.true_losses) == {"d1", "d2"}
    assert eq.total_true_loss == pytest.approx(sum(eq.true_losses.values()))
    for d in case.defenders:
        assert eq.profile.spent(d.id) == pytest.approx(d.budget, abs=1e-6)
        assert set(eq.profile.for_defender(d.id)) <= set(d.edge_set)


def test_equilibrium_is_stable_under_resolve():
    case = build_case_study("shared_edge_pair")
    eq = nash_equilibrium(case.graph, case.defenders)
    for d in case.defenders:
        current = perceived_loss(case.graph, d, eq.profile)
        br = best_response(case.graph, d, eq.profile)
        assert current - br.objective <= 1e-5


def test_symmetric_chains_have_no_inefficiency():
    case = build_case_study("split_chain_pair")
    res = price_of_anarchy(case.graph, case.defenders)
    assert res.ratio == pytest.approx(1.0, abs=1e-3)


def test_price_of_anarchy_at_least_one():
    for name in ("der1", "voip"):
        case = build_case_study(name, budget=8.0)
        res = price_of_anarchy(case.graph, case.defenders)
        assert res.ratio >= 1.0 - 1e-9
        assert res.optimum.total_true_loss <= res.equilibrium.total_true_loss + 1e-9


def test_social_optimum_pools_budget_across_all_edges():
    case = build_case_study("scada_external", budget=10.0)
    so = social_optimum(case.graph, case.defenders)
    alloc = so.profile.for_defender(PLANNER_ID)
    total = case.total_budget
    assert sum(alloc.values()) == pytest.approx(total, abs=1e-5)
    owned = set().union(*(d.edge_set for d in case.defenders))
    planner_support = {k for k, v in alloc.items() if v > 1e-6}
    assert planner_support - owned, "planner may invest on shared edges nobody owns"


def test_gain_report_rational_only_grid_is_exactly_one():
    case = build_case_study("diamond", alpha=1.0)
    rep = gain_report(case.graph, case.defenders, alpha_grid=(1.0,))
    assert rep.avg_gain == 1.0
    assert rep.max_gain == 1.0
    assert list(rep.losses_by_alpha) == [1.0]


def test_gain_report_on_scada():
    case = build_case_study("scada_external")
    rep = gain_report(case.graph, case.defenders)
    assert set(rep.losses_by_alpha) == {0.2, 0.4, 0.6, 0.8, 1.0}
    assert rep.behavioral_band == (0.4, 0.6, 0.8)
    assert rep.avg_gain >= 1.0 - 1e-9
    assert rep.max_gain >= rep.losses_by_alpha[0.4] / rep.losses_by_alpha[1.0] - 1e-9
    rational = rep.losses_by_alpha[1.0]
    for alpha, loss in rep.losses_by_alpha.items():
        if alpha < 1.0:
            assert loss >= rational - 1e-6


def test_min_cut_baseline_support_and_objectives():
    case = build_case_study("ecommerce")
    d = relevel(case.defenders[0], 1.0)
    res = baseline_min_cut(case.graph, [d])
    assert res.name == "min_cut"
    union = min_edge_cut(case.graph, sorted(d.assets)).edge_union
    support = {k for k, v in res.allocation.items() if v > 1e-9}
    assert support <= set(union)
    br = best_response(case.graph, d, InvestmentProfile.zero([d]))
    assert res.objectives[d.id] == pytest.approx(br.objective, rel=1e-4)


def test_defense_in_depth_even_spread_frozen():
    # every one of the six diamond edges sits on a path, so budget 12
    # spreads to 2 per edge and the worst path carries 4 edges: PSA e^(-8)
    g = two_path_diamond()
    d = DefenderSpec("d1", frozenset(g.edge_keys()), frozenset({"t"}), 12.0, 1.0)
    res = baseline_defense_in_depth(g, [d])
    assert res.name == "defense_in_depth"
    for k in g.edge_keys():
        assert res.allocation[k] == pytest.approx(2.0, abs=1e-12)
    assert res.attack_probability == pytest.approx(math.exp(-8.0), rel=1e-12)


def test_defense_in_depth_stays_on_owned_edges():
    case = build_case_study("scada_external")
    res = baseline_defense_in_depth(case.graph, case.defenders)
    owned = set().union(*(d.edge_set for d in case.defenders))
    support = {k for k, v in res.allocation.items() if v > 1e-12}
    assert support <= owned


def test_joint_ownership_never_hurts():
    case = build_case_study("shared_edge_pair")
    separate = nash_equilibrium(case.graph, case.defenders)
    widened = with_joint_ownership(case.graph, case.defenders)
    assert all(d.edge_set == frozenset(case.graph.edge_keys()) for d in widened)
    joint = nash_equilibrium(case.graph, widened)
    assert joint.total_true_loss <= separate.total_true_loss + 1e-6


def test_attack_probability_of_idle_defenders():
    case = build_case_study("diamond")
    zero = InvestmentProfile.zero(case.defenders)
    assert probability_of_successful_attack(case.graph, zero) == pytest.approx(1.0)


def test_losses_fall_when_budget_grows():
    case = build_case_study("scada_external")
    losses = []
    for budget in (10.0, 20.0, 40.0):
        ds = [rebudget(d, budget / 2) for d in case.defenders]
        losses.append(nash_equilibrium(case.graph, ds).total_true_loss)
    assert losses[0] > losses[1] > losses[2]
