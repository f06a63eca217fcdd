"""Multi-defender game engine.

Equilibria come from round-robin best-response dynamics: defenders are
visited in id order, each re-optimizes against the current profile, and
the loop stops when no allocation moves by more than the tolerance. The
planner benchmark merges everyone into a single risk-neutral defender
with the pooled budget and access to every edge; an asset guarded by
several defenders keeps its multiplicity in the planner objective so the
two totals stay comparable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .behavior import (
    DefenderSpec,
    InvestmentProfile,
    _max_path_logs,
    perceived_loss,
    true_loss,
)
from .graph import AttackGraph, EdgeKey, NodeId, min_cut_edge_union
from .solver import SolverConfig, SolverError, best_response

PLANNER_ID = "__planner__"
POA_CAP = 1e9


@dataclass(frozen=True)
class EquilibriumResult:
    profile: InvestmentProfile
    true_losses: dict[str, float]
    perceived_losses: dict[str, float]
    sweeps: int
    max_delta: float
    converged: bool
    failures: tuple[str, ...] = ()

    @property
    def total_true_loss(self) -> float:
        return sum(self.true_losses.values())


@dataclass(frozen=True)
class PlannerResult:
    allocation: dict[EdgeKey, float]
    total_true_loss: float
    asset_weights: dict[NodeId, float]

    @property
    def profile(self) -> InvestmentProfile:
        return InvestmentProfile({PLANNER_ID: self.allocation})


@dataclass(frozen=True)
class PoaResult:
    equilibrium: EquilibriumResult
    optimum: PlannerResult
    ratio: float


@dataclass(frozen=True)
class BaselineResult:
    name: str
    allocation: dict[EdgeKey, float]
    total_true_loss: float
    attack_probability: float
    objectives: dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class GainReport:
    losses_by_alpha: dict[float, float]
    avg_gain: float
    max_gain: float
    behavioral_band: tuple[float, ...]


def _delta(old: InvestmentProfile, new: InvestmentProfile, ids) -> float:
    worst = 0.0
    for did in ids:
        a, b = old.for_defender(did), new.for_defender(did)
        for k in a.keys() | b.keys():
            worst = max(worst, abs(a.get(k, 0.0) - b.get(k, 0.0)))
    return worst


def nash_equilibrium(
    graph: AttackGraph,
    defenders: list[DefenderSpec],
    config: SolverConfig | None = None,
    initial: InvestmentProfile | None = None,
    max_sweeps: int = 200,
    tol: float = 1e-6,
) -> EquilibriumResult:
    """Gauss-Seidel best-response dynamics until the profile stops moving.

    A defender moves only when re-solving improves her perceived loss by
    more than ten times the solver tolerance. Optimal faces are flat at
    alpha=1 (budget splits along a min cut tie exactly), so accepting every
    re-solve would wander the face forever without shrinking the profile
    delta.

    A defender whose inner solve fails to certify still contributes its
    best iterate; such ids are reported in ``failures``.
    """
    ids = sorted(d.id for d in defenders)
    if len(set(ids)) != len(ids):
        raise ValueError("defender ids must be unique")
    order = sorted(defenders, key=lambda d: d.id)
    profile = initial if initial is not None else InvestmentProfile.zero(defenders)
    improve_tol = 10.0 * (config.tolerance if config is not None
                          else SolverConfig().tolerance)
    failures: set[str] = set()
    sweeps = 0
    delta = math.inf
    for sweeps in range(1, max_sweeps + 1):
        before = profile
        for d in order:
            try:
                br = best_response(graph, d, profile, config)
            except SolverError as err:
                if err.best is None:
                    raise
                failures.add(d.id)
                br = err.best
            if perceived_loss(graph, d, profile) > br.objective + improve_tol:
                profile = profile.with_allocation(d.id, br.allocation)
        delta = _delta(before, profile, ids)
        if delta < tol:
            break
    return EquilibriumResult(
        profile=profile,
        true_losses={d.id: true_loss(graph, d, profile) for d in order},
        perceived_losses={d.id: perceived_loss(graph, d, profile) for d in order},
        sweeps=sweeps,
        max_delta=delta,
        converged=delta < tol,
        failures=tuple(sorted(failures)),
    )


def _planner_weights(
    graph: AttackGraph, defenders: list[DefenderSpec]
) -> dict[NodeId, float]:
    weights: dict[NodeId, float] = {}
    for d in defenders:
        for m in d.assets:
            weights[m] = weights.get(m, 0.0) + graph.critical_assets[m]
    return weights


def _solve_planner(
    graph: AttackGraph,
    defenders: list[DefenderSpec],
    edge_subset: frozenset[EdgeKey] | None,
    config: SolverConfig | None,
) -> PlannerResult:
    weights = _planner_weights(graph, defenders)
    merged = AttackGraph(
        nodes=list(graph.nodes),
        edges=list(graph.edges),
        sources=list(graph.sources),
        critical_assets=weights,
    )
    edge_set = (
        frozenset(graph.edge_keys()) if edge_subset is None else frozenset(edge_subset)
    )
    planner = DefenderSpec(
        id=PLANNER_ID,
        edge_set=edge_set,
        assets=frozenset(weights),
        budget=sum(d.budget for d in defenders),
        alpha=1.0,
        eta=0.0,
    )
    br = best_response(merged, planner, InvestmentProfile.zero([planner]), config)
    return PlannerResult(
        allocation=dict(br.allocation),
        total_true_loss=br.true_loss,
        asset_weights=weights,
    )


def social_optimum(
    graph: AttackGraph,
    defenders: list[DefenderSpec],
    config: SolverConfig | None = None,
) -> PlannerResult:
    """Risk-neutral pooled-budget optimum over all edges (floors dropped)."""
    return _solve_planner(graph, defenders, None, config)


def price_of_anarchy(
    graph: AttackGraph,
    defenders: list[DefenderSpec],
    config: SolverConfig | None = None,
    equilibrium: EquilibriumResult | None = None,
) -> PoaResult:
    eq = equilibrium if equilibrium is not None else nash_equilibrium(
        graph, defenders, config
    )
    opt = social_optimum(graph, defenders, config)
    if opt.total_true_loss <= 0.0:
        ratio = 1.0 if eq.total_true_loss <= 0.0 else math.inf
    else:
        ratio = eq.total_true_loss / opt.total_true_loss
    if ratio > POA_CAP:
        ratio = math.inf
    return PoaResult(equilibrium=eq, optimum=opt, ratio=ratio)


def with_joint_ownership(
    graph: AttackGraph, defenders: list[DefenderSpec]
) -> list[DefenderSpec]:
    """A joint-defense variant: every defender may invest on every edge."""
    all_edges = frozenset(graph.edge_keys())
    out = []
    for d in defenders:
        out.append(
            DefenderSpec(d.id, all_edges, d.assets, d.budget, d.alpha, d.eta)
        )
    return out


def gain_report(
    graph: AttackGraph,
    defenders: list[DefenderSpec],
    alpha_grid: tuple[float, ...] = (0.2, 0.4, 0.6, 0.8, 1.0),
    config: SolverConfig | None = None,
) -> GainReport:
    """Equilibrium losses across a probability-weighting grid.

    Gains compare against the fully rational equilibrium: ``max_gain`` is
    the loss ratio at the strongest weighting in the moderate band
    [0.4, 1), and ``avg_gain`` mixes the rational loss with the band
    average half-and-half before taking the ratio.
    """
    grid = tuple(sorted(set(float(a) for a in alpha_grid) | {1.0}))
    losses: dict[float, float] = {}
    for a in grid:
        shifted = [d.with_alpha(a) for d in defenders]
        losses[a] = nash_equilibrium(graph, shifted, config).total_true_loss
    rational = losses[1.0]
    band = tuple(a for a in grid if 0.4 <= a < 1.0)
    if not band or rational <= 0.0:
        avg_gain = 1.0
        max_gain = 1.0
    else:
        band_mean = sum(losses[a] for a in band) / len(band)
        avg_gain = (0.5 * rational + 0.5 * band_mean) / rational
        max_gain = losses[band[0]] / rational
    return GainReport(
        losses_by_alpha=losses,
        avg_gain=avg_gain,
        max_gain=max_gain,
        behavioral_band=band,
    )


def probability_of_successful_attack(
    graph: AttackGraph,
    profile: InvestmentProfile,
    targets=None,
) -> float:
    """Largest true success probability over the critical assets."""
    scope = list(targets) if targets is not None else sorted(graph.critical_assets)
    if not scope:
        return 0.0
    logs = _max_path_logs(graph, profile.edge_totals(), scope, None)
    best = max(logs.values())
    return 0.0 if best == float("-inf") else math.exp(best)


def baseline_min_cut(
    graph: AttackGraph,
    defenders: list[DefenderSpec],
    config: SolverConfig | None = None,
) -> BaselineResult:
    """Rational spending restricted to minimum-cut edges, one defender at
    a time.

    Each defender is taken in isolation (no co-investment) at full
    rationality, with her admissible edges cut down to the union, over
    her own assets, of edges belonging to at least one minimum
    source-to-asset cut. ``objectives`` holds these isolated per-defender
    losses; the totals are evaluated on the combined profile.
    """
    assets = sorted({m for d in defenders for m in d.assets})
    allocations: dict[str, dict[EdgeKey, float]] = {}
    objectives: dict[str, float] = {}
    for d in sorted(defenders, key=lambda d: d.id):
        union: set[EdgeKey] = set()
        for m in sorted(d.assets):
            union |= set(min_cut_edge_union(graph, [m]))
        restricted = DefenderSpec(
            d.id, frozenset(union) & d.edge_set, d.assets, d.budget, 1.0, d.eta
        )
        br = best_response(
            graph, restricted, InvestmentProfile.zero(defenders), config
        )
        allocations[d.id] = dict(br.allocation)
        objectives[d.id] = br.objective
    profile = InvestmentProfile(allocations)
    weights = _planner_weights(graph, defenders)
    return BaselineResult(
        name="min_cut",
        allocation=profile.edge_totals(),
        total_true_loss=true_loss(graph, None, profile, assets=weights),
        attack_probability=probability_of_successful_attack(graph, profile, assets),
        objectives=objectives,
    )


def baseline_defense_in_depth(
    graph: AttackGraph,
    defenders: list[DefenderSpec],
) -> BaselineResult:
    """Each defender spreads her budget evenly over her edges that sit on
    some attack path toward one of her own assets. Edges nobody owns stay
    uncovered, exactly as they do under best responses."""
    assets = sorted({m for d in defenders for m in d.assets})
    per_defender: dict[str, dict[EdgeKey, float]] = {}
    for d in defenders:
        onpath = [k for k in graph.on_path_edges(sorted(d.assets))
                  if k in d.edge_set]
        if not onpath:
            per_defender[d.id] = {}
            continue
        per_defender[d.id] = {k: d.budget / len(onpath) for k in onpath}
    if not any(per_defender.values()):
        raise ValueError("no attack paths reach the guarded assets")
    profile = InvestmentProfile(per_defender)
    weights = _planner_weights(graph, defenders)
    return BaselineResult(
        name="defense_in_depth",
        allocation=profile.edge_totals(),
        total_true_loss=true_loss(graph, None, profile, assets=weights),
        attack_probability=probability_of_successful_attack(graph, profile, assets),
    )
