"""Defender model: investments, probability weighting, and loss functions.

Edge compromise probability decays exponentially in the *combined*
investment placed on the edge by all defenders:

    p_e(x) = p0_e * exp(-s_e * sum_k x_k_e)

A defender with weighting parameter ``alpha`` in (0, 1] perceives each edge
probability through the Prelec function

    w(p) = exp(-(-ln p) ** alpha)

which is the identity at alpha = 1, fixes 0, 1/e, and 1, and overweights
small probabilities for alpha < 1. True (alpha = 1) and perceived losses
aggregate over attack paths: each critical asset contributes its loss times
the probability of the most likely path reaching it, and path probabilities
multiply edge terms. All aggregation happens in log space so long paths and
large budgets cannot underflow intermediate products.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .graph import (
    ORIGIN,
    AttackGraph,
    EdgeKey,
    GraphError,
    NodeId,
    PathSet,
    with_origin,
)

NEG_INF = float("-inf")


@dataclass(frozen=True)
class DefenderSpec:
    """One defender: owned edges, protected assets, budget, and behavior.

    ``eta`` is a per-edge spreading floor: any feasible allocation puts at
    least ``eta`` on every owned edge, so ``eta * |edge_set| <= budget``
    must hold.
    """

    id: str
    edge_set: frozenset[EdgeKey]
    assets: frozenset[NodeId]
    budget: float
    alpha: float = 1.0
    eta: float = 0.0

    def __post_init__(self):
        if not (0.0 < self.alpha <= 1.0):
            raise ValueError(f"defender {self.id}: alpha must be in (0, 1]")
        if self.budget < 0.0:
            raise ValueError(f"defender {self.id}: negative budget")
        if self.eta < 0.0:
            raise ValueError(f"defender {self.id}: negative eta")
        if self.eta * len(self.edge_set) > self.budget + 1e-12:
            raise ValueError(
                f"defender {self.id}: spreading floor eta*|edges| "
                f"= {self.eta * len(self.edge_set)} exceeds budget {self.budget}"
            )

    def with_alpha(self, alpha: float) -> "DefenderSpec":
        return DefenderSpec(
            id=self.id,
            edge_set=self.edge_set,
            assets=self.assets,
            budget=self.budget,
            alpha=alpha,
            eta=self.eta,
        )


class InvestmentProfile:
    """Per-defender, per-edge investments. Values are nonnegative floats."""

    def __init__(self, allocations: Mapping[str, Mapping[EdgeKey, float]] | None = None):
        self.allocations: dict[str, dict[EdgeKey, float]] = {}
        if allocations:
            for did, alloc in allocations.items():
                self.allocations[did] = {tuple(k): float(v) for k, v in alloc.items()}

    @classmethod
    def zero(cls, defenders: Iterable[DefenderSpec]) -> "InvestmentProfile":
        return cls({d.id: {e: 0.0 for e in sorted(d.edge_set)} for d in defenders})

    def for_defender(self, defender_id: str) -> dict[EdgeKey, float]:
        return dict(self.allocations.get(defender_id, {}))

    def with_allocation(
        self, defender_id: str, alloc: Mapping[EdgeKey, float]
    ) -> "InvestmentProfile":
        out = InvestmentProfile(self.allocations)
        out.allocations[defender_id] = {tuple(k): float(v) for k, v in alloc.items()}
        return out

    def edge_totals(self, exclude: str | None = None) -> dict[EdgeKey, float]:
        totals: dict[EdgeKey, float] = {}
        for did, alloc in self.allocations.items():
            if did == exclude:
                continue
            for key, x in alloc.items():
                totals[key] = totals.get(key, 0.0) + x
        return totals

    def total_on(self, key: EdgeKey) -> float:
        return sum(alloc.get(key, 0.0) for alloc in self.allocations.values())

    def spent(self, defender_id: str) -> float:
        return sum(self.allocations.get(defender_id, {}).values())

    def to_dict(self) -> dict:
        return {
            did: {f"{k[0]}->{k[1]}": v for k, v in sorted(alloc.items())}
            for did, alloc in sorted(self.allocations.items())
        }

    def __repr__(self) -> str:
        return f"InvestmentProfile({self.to_dict()!r})"


@dataclass
class PathWeights:
    """Per-target weights over an enumerated path family.

    ``paths`` maps each target to its PathSet and ``weights`` to an array
    of the same length. Weights are nonnegative and, when built from
    attack histories, sum to one per target.
    """

    paths: dict[NodeId, PathSet]
    weights: dict[NodeId, np.ndarray]

    def __post_init__(self):
        for t, ps in self.paths.items():
            w = np.asarray(self.weights[t], dtype=float)
            if w.shape != (len(ps),):
                raise ValueError(f"weight shape mismatch for target {t!r}")
            if (w < 0).any():
                raise ValueError(f"negative path weight for target {t!r}")
            self.weights[t] = w

    @classmethod
    def uniform(cls, paths: dict[NodeId, PathSet]) -> "PathWeights":
        return cls(
            paths=paths,
            weights={
                t: np.full(len(ps), 1.0 / len(ps)) if len(ps) else np.zeros(0)
                for t, ps in paths.items()
            },
        )


# -- elementary quantities ----------------------------------------------


def edge_probability(p0: float, s: float, x: float) -> float:
    """Compromise probability of one edge under combined investment x."""
    return p0 * math.exp(-s * x)


def prelec_weight(p: float, alpha: float) -> float:
    """Prelec probability weighting w(p) = exp(-(-ln p)^alpha).

    Defined on [0, 1] with w(0) = 0 (continuity limit) and w(1) = 1 exact.
    """
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"probability {p} outside [0, 1]")
    if not (0.0 < alpha <= 1.0):
        raise ValueError(f"alpha {alpha} outside (0, 1]")
    if p == 0.0:
        return 0.0
    if p == 1.0:
        return 1.0
    return math.exp(-((-math.log(p)) ** alpha))


def _log_edge_prob(edge, x: float) -> float:
    # ln p_e = ln p0 - s * x  (<= 0)
    return math.log(edge.p0) - edge.s * x


def _log_perceived_edge(edge, x: float, alpha: float) -> float:
    # ln w(p_e) = -(-ln p_e)^alpha = -(s*x - ln p0)^alpha
    arg = edge.s * x - math.log(edge.p0)
    if arg < 0.0:  # numeric guard; only possible through rounding
        arg = 0.0
    return -(arg**alpha)


# -- loss aggregation -----------------------------------------------------


def _asset_weights_for(
    graph: AttackGraph, assets: Iterable[NodeId] | Mapping[NodeId, float] | None
) -> dict[NodeId, float]:
    if assets is None:
        return dict(graph.critical_assets)
    if isinstance(assets, Mapping):
        return {m: float(w) for m, w in assets.items()}
    out = {}
    for m in assets:
        if m not in graph.critical_assets:
            raise GraphError(f"{m!r} is not a critical asset of this graph")
        out[m] = graph.critical_assets[m]
    return out


def _max_path_logs(
    graph: AttackGraph,
    totals: Mapping[EdgeKey, float],
    targets: Iterable[NodeId],
    alpha: float | None,
) -> dict[NodeId, float]:
    """Log of the best (most likely / most weighted) path value per target.

    alpha None means true probabilities; otherwise per-edge Prelec logs.
    Longest-path DP over the topological order, so no path enumeration.
    """
    aug, _ = with_origin(graph)
    best: dict[NodeId, float] = {n: NEG_INF for n in aug.nodes}
    for s in aug.sources:
        best[s] = 0.0
    for n in aug.topological_order():
        b = best[n]
        if b == NEG_INF:
            continue
        for e in aug.out_edges(n):
            x = totals.get(e.key, 0.0)
            if alpha is None:
                step = _log_edge_prob(e, x)
            else:
                step = _log_perceived_edge(e, x, alpha)
            if b + step > best[e.dst]:
                best[e.dst] = b + step
    return {t: best.get(t, NEG_INF) for t in targets}


def _loss_over_assets(
    graph: AttackGraph,
    asset_weights: Mapping[NodeId, float],
    totals: Mapping[EdgeKey, float],
    alpha: float | None,
) -> float:
    if not asset_weights:
        return 0.0
    logs = _max_path_logs(graph, totals, asset_weights.keys(), alpha)
    return float(
        sum(w * math.exp(logs[m]) for m, w in asset_weights.items() if logs[m] > NEG_INF)
    )


def true_loss(
    graph: AttackGraph,
    defender: DefenderSpec | None,
    profile: InvestmentProfile,
    assets: Iterable[NodeId] | Mapping[NodeId, float] | None = None,
) -> float:
    """Expected loss under true probabilities (worst-case attack paths).

    Scope: the defender's assets if one is given, the explicit ``assets``
    argument otherwise, and all critical assets by default.
    """
    scope = defender.assets if (defender is not None and assets is None) else assets
    weights = _asset_weights_for(graph, scope)
    return _loss_over_assets(graph, weights, profile.edge_totals(), None)


def perceived_loss(
    graph: AttackGraph,
    defender: DefenderSpec,
    profile: InvestmentProfile,
) -> float:
    """Loss as the defender perceives it: Prelec weight on every edge factor,
    evaluated at the combined investments, worst perceived path per asset."""
    weights = _asset_weights_for(graph, defender.assets)
    return _loss_over_assets(graph, weights, profile.edge_totals(), defender.alpha)


def path_log_true(graph: AttackGraph, path: tuple[NodeId, ...], totals) -> float:
    out = 0.0
    for i in range(len(path) - 1):
        e = graph.edge((path[i], path[i + 1]))
        out += _log_edge_prob(e, totals.get(e.key, 0.0))
    return out


def path_log_perceived(
    graph: AttackGraph, path: tuple[NodeId, ...], totals, alpha: float
) -> float:
    out = 0.0
    for i in range(len(path) - 1):
        e = graph.edge((path[i], path[i + 1]))
        out += _log_perceived_edge(e, totals.get(e.key, 0.0), alpha)
    return out


def path_success_probability(
    graph: AttackGraph, path: tuple[NodeId, ...], profile: InvestmentProfile
) -> float:
    """True success probability of one concrete attack path."""
    if len(path) < 2:
        raise GraphError("a path needs at least two nodes")
    return math.exp(path_log_true(graph, path, profile.edge_totals()))


def weighted_perceived_loss(
    graph: AttackGraph,
    defender: DefenderSpec,
    profile: InvestmentProfile,
    weights: PathWeights,
) -> float:
    """Perceived loss against a mixed attacker: per target, a weighted sum
    of perceived path values instead of the worst case."""
    totals = profile.edge_totals()
    asset_weights = _asset_weights_for(graph, defender.assets)
    total = 0.0
    for m, lw in sorted(asset_weights.items()):
        ps = weights.paths.get(m)
        if ps is None:
            raise GraphError(f"no path set supplied for target {m!r}")
        wvec = weights.weights[m]
        acc = 0.0
        for j, path in enumerate(ps.paths):
            if wvec[j] == 0.0:
                continue
            acc += wvec[j] * math.exp(
                path_log_perceived(graph, path, totals, defender.alpha)
            )
        total += lw * acc
    return total
