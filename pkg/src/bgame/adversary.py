"""Attacker models: one chosen attack path per critical asset per round.

Four kinds are supported. ``min_max`` picks the most probable path under
the current investments, ``replay`` repeats its first pick forever,
``randomizing`` draws uniformly from the path family, and ``adaptive``
picks its own least-chosen path over a trailing window. Attackers have no
budget; a choice is just a path index into the asset's PathSet.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .behavior import InvestmentProfile, path_log_true
from .graph import AttackGraph, GraphError, NodeId, PathSet, enumerate_paths

ATTACKER_KINDS = ("min_max", "replay", "randomizing", "adaptive")


@dataclass(frozen=True)
class AttackerModel:
    kind: str
    history_window: int = 10
    rng_seed: int | None = None

    def __post_init__(self):
        if self.kind not in ATTACKER_KINDS:
            raise ValueError(
                f"unknown attacker kind {self.kind!r}; expected one of "
                f"{', '.join(ATTACKER_KINDS)}"
            )
        if self.history_window < 1:
            raise ValueError("history_window must be at least 1")


@dataclass
class AttackHistory:
    """Chosen path indices per asset, oldest first, equal length per asset."""

    choices: dict[NodeId, list[int]] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(next(iter(self.choices.values()))) if self.choices else 0

    def append(self, chosen: dict[NodeId, int]) -> None:
        if self.choices and set(chosen) != set(self.choices):
            raise ValueError("asset set changed between rounds")
        for m, idx in chosen.items():
            self.choices.setdefault(m, []).append(idx)

    def trailing(self, asset: NodeId, window: int) -> list[int]:
        seq = self.choices.get(asset, [])
        return seq[-window:] if window < len(seq) else list(seq)


def attack_path_sets(
    graph: AttackGraph, targets=None, cap: int = 100_000
) -> dict[NodeId, PathSet]:
    """Enumerate the path family for each target (default: all criticals)."""
    scope = sorted(graph.critical_assets) if targets is None else list(targets)
    out = {}
    for m in scope:
        ps = enumerate_paths(graph, m, cap=cap)
        if not len(ps):
            raise GraphError(f"critical asset {m!r} is unreachable")
        out[m] = ps
    return out


def _min_max_choice(
    graph: AttackGraph, ps: PathSet, totals: dict
) -> int:
    logs = np.array([path_log_true(graph, p, totals) for p in ps.paths])
    return int(np.argmax(logs))


def choose_paths(
    model: AttackerModel,
    graph: AttackGraph,
    paths: dict[NodeId, PathSet],
    profile: InvestmentProfile,
    history: AttackHistory,
    rng: np.random.Generator | None = None,
) -> dict[NodeId, int]:
    """One path index per asset for this round.

    Ties break toward the smallest path index (the path families are in
    lexicographic order, argmax/argmin return the first hit). The replay
    attacker behaves like min_max on its very first round and repeats that
    pick afterwards; the adaptive attacker counts its own trailing choices.
    """
    totals = profile.edge_totals()
    chosen: dict[NodeId, int] = {}
    for m in sorted(paths):
        ps = paths[m]
        if not len(ps):
            raise GraphError(f"empty path set for asset {m!r}")
        if model.kind == "min_max":
            chosen[m] = _min_max_choice(graph, ps, totals)
        elif model.kind == "replay":
            past = history.choices.get(m)
            chosen[m] = past[0] if past else _min_max_choice(graph, ps, totals)
        elif model.kind == "randomizing":
            if rng is None:
                rng = np.random.default_rng(model.rng_seed)
            chosen[m] = int(rng.integers(len(ps)))
        else:  # adaptive
            counts = np.zeros(len(ps), dtype=int)
            for idx in history.trailing(m, model.history_window):
                counts[idx] += 1
            chosen[m] = int(np.argmin(counts))
    return chosen


def realized_loss(
    graph: AttackGraph,
    profile: InvestmentProfile,
    chosen: dict[NodeId, int],
    paths: dict[NodeId, PathSet],
    assets=None,
) -> float:
    """Loss actually incurred: sum of L_m times the chosen path's true
    success probability. ``assets`` restricts the sum (default: every
    asset with a choice)."""
    totals = profile.edge_totals()
    scope = sorted(chosen) if assets is None else sorted(assets)
    total = 0.0
    for m in scope:
        path = paths[m].paths[chosen[m]]
        total += graph.critical_assets[m] * float(
            np.exp(path_log_true(graph, path, totals))
        )
    return total


def simulate_round(
    graph: AttackGraph,
    profile: InvestmentProfile,
    chosen: dict[NodeId, int],
    paths: dict[NodeId, PathSet],
    rng: np.random.Generator,
) -> dict[NodeId, bool]:
    """Bernoulli outcome per asset at the chosen path's true probability."""
    totals = profile.edge_totals()
    out = {}
    for m in sorted(chosen):
        path = paths[m].paths[chosen[m]]
        p = float(np.exp(path_log_true(graph, path, totals)))
        out[m] = bool(rng.random() < p)
    return out
