"""Multi-round defense: path-frequency learning, reinforcement over
behavioral levels, and the hybrid of the two.

Three modes share one driver, ``run_learning``. In ``paths`` mode the
defender best-responds each round to a path-weighted perceived cost whose
weights are trailing-window frequencies of the attacker's past choices.
In ``rl`` mode she samples a behavioral level from propensity-derived
probabilities, best-responds to the ordinary worst-case perceived cost at
that level, and reinforces the sampled level by how much true loss her
allocation avoided. ``hybrid`` mode runs the propensity loop on top of the
path-weighted cost, updating both states every round.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .adversary import (
    AttackerModel,
    AttackHistory,
    attack_path_sets,
    choose_paths,
    realized_loss,
)
from .behavior import (
    DefenderSpec,
    InvestmentProfile,
    PathWeights,
    true_loss,
)
from .graph import AttackGraph, NodeId, PathSet
from .solver import BestResponse, SolverConfig, best_response

LEARNING_MODES = ("paths", "rl", "hybrid")
DEFAULT_ALPHA_GRID = (0.2, 0.4, 0.6, 0.8, 1.0)


class LearningError(ValueError):
    pass


@dataclass
class PathLearningState:
    """Trailing-window view of the attacker's choices.

    Weights are empirical frequencies over the last ``window`` rounds per
    asset, uniform before the first observation so the initial cost is the
    unweighted average over the path family.
    """

    window: int
    paths: dict[NodeId, PathSet]
    history: AttackHistory = field(default_factory=AttackHistory)

    def __post_init__(self):
        if self.window < 1:
            raise LearningError("window must be at least 1")

    def weights(self) -> PathWeights:
        out: dict[NodeId, np.ndarray] = {}
        for m, ps in self.paths.items():
            trail = self.history.trailing(m, self.window)
            if not trail:
                out[m] = (
                    np.full(len(ps), 1.0 / len(ps))
                    if len(ps)
                    else np.zeros(0)
                )
                continue
            freq = np.zeros(len(ps))
            for idx in trail:
                freq[idx] += 1.0
            out[m] = freq / len(trail)
        return PathWeights(paths=dict(self.paths), weights=out)

    def observe(self, chosen: dict[NodeId, int]) -> "PathLearningState":
        hist = AttackHistory({m: list(v) for m, v in self.history.choices.items()})
        hist.append(chosen)
        return replace(self, history=hist)


def update_path_weights(
    state: PathLearningState, chosen: dict[NodeId, int]
) -> PathLearningState:
    """Append one round of attacker choices and refresh the frequencies."""
    for m, idx in chosen.items():
        if m not in state.paths:
            raise LearningError(f"choice for unknown asset {m!r}")
        if not (0 <= idx < len(state.paths[m])):
            raise LearningError(f"path index {idx} out of range for {m!r}")
    return state.observe(chosen)


@dataclass
class RlState:
    alpha_grid: tuple[float, ...]
    propensities: dict[float, float]
    c_max: float
    current_alpha: float
    init_selected: float
    init_other: float

    def __post_init__(self):
        if not any(abs(a - 1.0) < 1e-12 for a in self.alpha_grid):
            raise LearningError("alpha grid must include 1.0")
        if any(q <= 0 for q in self.propensities.values()):
            raise LearningError("propensities must be strictly positive")

    def probabilities(self) -> dict[float, float]:
        total = sum(self.propensities.values())
        return {a: self.propensities[a] / total for a in self.alpha_grid}

    def p_rational(self) -> float:
        return self.probabilities()[1.0]


def make_rl_state(
    initial_alpha: float,
    c_max: float,
    alpha_grid=DEFAULT_ALPHA_GRID,
    init_propensity: float = 0.1,
    other_propensity: float = 0.1,
) -> RlState:
    grid = tuple(float(a) for a in alpha_grid)
    matches = [a for a in grid if abs(a - initial_alpha) < 1e-9]
    if not matches:
        raise LearningError(
            f"initial behavioral level {initial_alpha} is not on the grid {grid}"
        )
    q = {a: (init_propensity if a == matches[0] else other_propensity) for a in grid}
    return RlState(
        alpha_grid=grid,
        propensities=q,
        c_max=c_max,
        current_alpha=matches[0],
        init_selected=init_propensity,
        init_other=other_propensity,
    )


@dataclass(frozen=True)
class LearningRound:
    round: int
    alpha: float
    loss_true: float
    loss_perceived: float
    reinforcement: float | None
    p_rational: float | None
    realized: float | None
    chosen_paths: dict[NodeId, int]
    allocation: dict
    propensities: dict[float, float] | None


@dataclass
class LearningTrace:
    mode: str
    defender_id: str
    c_max: float
    seed: int | None
    alpha_grid: tuple[float, ...]
    init_alpha: float
    init_propensity: float
    other_propensity: float
    window: int
    rounds: list[LearningRound] = field(default_factory=list)

    def column_rows(self) -> list[dict]:
        """Per-round rows in the serialization column order."""
        return [
            {
                "round": r.round,
                "alpha": r.alpha,
                "loss_true": r.loss_true,
                "loss_perceived": r.loss_perceived,
                "R": r.reinforcement,
                "p_rational": r.p_rational,
            }
            for r in self.rounds
        ]

    @property
    def realized_losses(self) -> list[float]:
        return [r.realized for r in self.rounds if r.realized is not None]


class _ResponseCache:
    """Memoizes best responses by (alpha, path-weight fingerprint).

    Worst-case responses depend only on alpha; weighted ones recur whenever
    the trailing window stops changing (replay attackers reach a fixed
    point after ``window`` rounds).
    """

    def __init__(self, graph, defender, profile, config):
        self.graph = graph
        self.defender = defender
        self.profile = profile
        self.config = config
        self._hits: dict[tuple, BestResponse] = {}

    @staticmethod
    def _weights_key(weights: PathWeights | None):
        if weights is None:
            return None
        parts = []
        for m in sorted(weights.weights):
            parts.append((m, np.round(weights.weights[m], 12).tobytes()))
        return tuple(parts)

    def solve(self, alpha: float, weights: PathWeights | None) -> BestResponse:
        key = (round(alpha, 12), self._weights_key(weights))
        found = self._hits.get(key)
        if found is None:
            found = best_response(
                self.graph,
                self.defender.with_alpha(alpha),
                self.profile,
                self.config,
                weights=weights,
            )
            self._hits[key] = found
        return found


def rl_round(
    graph: AttackGraph,
    defender: DefenderSpec,
    state: RlState,
    rng: np.random.Generator,
    cache: _ResponseCache,
    weights: PathWeights | None = None,
) -> tuple[float, BestResponse, RlState]:
    """Play the pending level, reinforce it, and sample the next one."""
    alpha = state.current_alpha
    br = cache.solve(alpha, weights)
    reinforcement = state.c_max - br.true_loss
    if reinforcement < -1e-9 * max(1.0, abs(state.c_max)):
        raise LearningError(
            f"negative reinforcement {reinforcement:.3e}: loss exceeded the "
            "zero-investment ceiling, c_max was mis-set"
        )
    reinforcement = max(reinforcement, 0.0)
    q = dict(state.propensities)
    q[alpha] += reinforcement
    nxt = replace(state, propensities=q)
    probs = nxt.probabilities()
    chosen = rng.choice(len(nxt.alpha_grid), p=[probs[a] for a in nxt.alpha_grid])
    nxt = replace(nxt, current_alpha=nxt.alpha_grid[int(chosen)])
    return reinforcement, br, nxt


def run_learning(
    graph: AttackGraph,
    defender: DefenderSpec,
    mode: str,
    rounds: int,
    attacker: AttackerModel | None = None,
    profile: InvestmentProfile | None = None,
    window: int = 10,
    alpha_grid=DEFAULT_ALPHA_GRID,
    init_propensity: float = 0.1,
    other_propensity: float = 0.1,
    seed: int | None = None,
    config: SolverConfig | None = None,
    path_cap: int = 100_000,
) -> LearningTrace:
    """Run one defender's multi-round loop against an attacker.

    Other defenders stay at ``profile`` (zero if omitted). The attacker
    defaults to min_max. Everything is deterministic given the seed.
    """
    if mode not in LEARNING_MODES:
        raise LearningError(
            f"unknown mode {mode!r}; expected one of {', '.join(LEARNING_MODES)}"
        )
    if rounds < 1:
        raise LearningError("rounds must be at least 1")
    attacker = attacker or AttackerModel("min_max")
    base = profile if profile is not None else InvestmentProfile.zero([defender])
    base = base.with_allocation(defender.id, {})
    rng = np.random.default_rng(seed)

    paths = attack_path_sets(graph, sorted(defender.assets), cap=path_cap)
    path_state = PathLearningState(window=window, paths=paths)
    c_max = true_loss(graph, defender, base)
    cache = _ResponseCache(graph, defender, base, config)

    rl_state = None
    if mode in ("rl", "hybrid"):
        rl_state = make_rl_state(
            defender.alpha, c_max, alpha_grid, init_propensity, other_propensity
        )

    trace = LearningTrace(
        mode=mode,
        defender_id=defender.id,
        c_max=c_max,
        seed=seed,
        alpha_grid=tuple(float(a) for a in alpha_grid),
        init_alpha=defender.alpha,
        init_propensity=init_propensity,
        other_propensity=other_propensity,
        window=window,
    )
    for t in range(rounds):
        weights = path_state.weights() if mode in ("paths", "hybrid") else None
        if mode == "paths":
            alpha = defender.alpha
            br = cache.solve(alpha, weights)
            reinforcement = None
            p_rational = None
            propensities = None
        else:
            alpha = rl_state.current_alpha
            reinforcement, br, rl_state = rl_round(
                graph, defender, rl_state, rng, cache, weights
            )
            p_rational = rl_state.p_rational()
            propensities = dict(rl_state.propensities)

        played = base.with_allocation(defender.id, br.allocation)
        chosen = choose_paths(attacker, graph, paths, played, path_state.history, rng)
        realized = realized_loss(graph, played, chosen, paths)
        path_state = update_path_weights(path_state, chosen)

        trace.rounds.append(
            LearningRound(
                round=t,
                alpha=alpha,
                loss_true=br.true_loss,
                loss_perceived=br.objective,
                reinforcement=reinforcement,
                p_rational=p_rational,
                realized=realized,
                chosen_paths=chosen,
                allocation=br.allocation,
                propensities=propensities,
            )
        )
    return trace


@dataclass(frozen=True)
class LemmaCondition:
    alpha: float
    lhs: float
    rhs: float
    held: bool


@dataclass(frozen=True)
class LemmaReport:
    matches: bool
    max_deviation: float
    conditions: tuple[LemmaCondition, ...]
    rounds_per_alpha: dict[float, int]
    mean_loss_per_alpha: dict[float, float]


def lemma_convergence_check(trace: LearningTrace) -> LemmaReport:
    """Replay the propensity recurrence analytically and compare.

    The recurrence is q(a) at round t = q0(a) plus the sum of observed
    reinforcements for a up to t; every recorded snapshot must agree. The
    sufficient-condition rows compare, per non-rational level,
    (N1 - Na) * c_max + Na * C_a - N1 * C_opt against q0(a) - q0(1).
    """
    if trace.mode not in ("rl", "hybrid"):
        raise LearningError("convergence check applies to rl or hybrid traces")
    grid = trace.alpha_grid
    q = {
        a: (
            trace.init_propensity
            if abs(a - trace.init_alpha) < 1e-9
            else trace.other_propensity
        )
        for a in grid
    }
    max_dev = 0.0
    counts = {a: 0 for a in grid}
    sums = {a: 0.0 for a in grid}
    for r in trace.rounds:
        q[r.alpha] += r.reinforcement
        counts[r.alpha] += 1
        sums[r.alpha] += r.loss_true
        for a in grid:
            max_dev = max(max_dev, abs(q[a] - r.propensities[a]))
    means = {a: (sums[a] / counts[a] if counts[a] else float("nan")) for a in grid}
    n1 = counts[1.0]
    c_opt = means[1.0]
    conditions = []
    for a in grid:
        if abs(a - 1.0) < 1e-12:
            continue
        na = counts[a]
        ca = means[a] if na else 0.0
        lhs = (n1 - na) * trace.c_max + na * ca - n1 * (c_opt if n1 else 0.0)
        q0a = (
            trace.init_propensity
            if abs(a - trace.init_alpha) < 1e-9
            else trace.other_propensity
        )
        q01 = (
            trace.init_propensity
            if abs(1.0 - trace.init_alpha) < 1e-9
            else trace.other_propensity
        )
        rhs = q0a - q01
        conditions.append(LemmaCondition(alpha=a, lhs=lhs, rhs=rhs, held=lhs > rhs))
    return LemmaReport(
        matches=max_dev <= 1e-9,
        max_deviation=max_dev,
        conditions=tuple(conditions),
        rounds_per_alpha=counts,
        mean_loss_per_alpha=means,
    )
