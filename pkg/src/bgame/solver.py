"""Best-response solver for a single defender.

The defender minimizes its perceived loss over allocations of a fixed
budget across its owned edges, subject to a per-edge spreading floor. The
objective is convex (each edge's log-weight -(s*x - ln p0)^alpha is convex
in x, so path products, per-asset maxima, and weighted sums of path terms
are all log-convex). Work happens in log space on an explicit path table.

Pipeline: an annealed smoothed first-order phase (compiled kernel when
available, numpy fallback otherwise) followed by an SQP polish on small
path tables, then an independent KKT residual check that becomes the
returned certificate. ``smoothing=None`` selects a plain projected
subgradient mode with diminishing steps instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernel
from .behavior import (
    DefenderSpec,
    InvestmentProfile,
    PathWeights,
    perceived_loss,
    true_loss,
)
from .graph import PATH_CAP, AttackGraph, EdgeKey, GraphError, NodeId, cached_paths


@dataclass
class SolverConfig:
    """Solver knobs.

    tolerance is a relative KKT residual target for the returned
    certificate. max_iterations bounds the total first-order iterations
    across annealing stages. step_rule applies to the subgradient mode.
    smoothing: "auto" anneals a softmin temperature and polishes; a float
    fixes the temperature; None selects the exact subgradient mode.
    """

    tolerance: float = 1e-6
    max_iterations: int = 50_000
    step_rule: str = "diminishing"
    smoothing: str | float | None = "auto"
    polish: bool = True
    polish_path_limit: int = 400
    path_cap: int = PATH_CAP


@dataclass
class BestResponse:
    defender_id: str
    allocation: dict[EdgeKey, float]
    objective: float
    true_loss: float
    certificate: float
    iterations: int
    converged: bool
    method: str

    def spent(self) -> float:
        return sum(self.allocation.values())


@dataclass
class KktReport:
    residual: float
    budget_gap: float
    floor_violation: float
    n_active_paths: int
    tolerance: float

    @property
    def ok(self) -> bool:
        return (
            self.residual <= self.tolerance
            and self.budget_gap <= self.tolerance
            and self.floor_violation <= self.tolerance
        )


class SolverError(RuntimeError):
    """Raised when no iterate meets the tolerance; carries the best found."""

    def __init__(self, message: str, best: "BestResponse | None" = None):
        super().__init__(message)
        self.best = best


class ClosedFormError(ValueError):
    pass


# -- problem compilation --------------------------------------------------


@dataclass
class _PathProblem:
    inv_keys: list[EdgeKey]
    svec: np.ndarray
    dvec: np.ndarray
    pe_idx: np.ndarray
    pe_off: np.ndarray
    p_const: np.ndarray
    group_of_path: np.ndarray
    group_logw: np.ndarray
    z_total: float
    eta: float
    off_path_keys: list[EdgeKey]
    n_paths: int
    max_group: int


def _edge_h(edge, x: float, alpha: float) -> float:
    arg = edge.s * x - math.log(edge.p0)
    if arg < 0.0:
        arg = 0.0
    return arg**alpha


def _compile(
    graph: AttackGraph,
    defender: DefenderSpec,
    profile: InvestmentProfile,
    weights: PathWeights | None,
    config: SolverConfig,
) -> _PathProblem:
    for key in defender.edge_set:
        if not graph.has_edge(key):
            raise GraphError(f"defender {defender.id} owns unknown edge {key!r}")
    base = profile.edge_totals(exclude=defender.id)
    alpha = defender.alpha

    targets = sorted(defender.assets)
    pathsets = {}
    for m in targets:
        if m not in graph.critical_assets:
            raise GraphError(f"{m!r} is not a critical asset")
        if weights is not None:
            ps = weights.paths.get(m)
            if ps is None:
                raise GraphError(f"path weights missing target {m!r}")
            pathsets[m] = ps
        else:
            pathsets[m] = cached_paths(graph, m, cap=config.path_cap)

    # investable coordinates: owned edges on at least one relevant path
    on_path: set[EdgeKey] = set()
    for ps in pathsets.values():
        for elist in ps.edge_lists():
            on_path.update(elist)
    inv_keys = sorted(k for k in defender.edge_set if k in on_path)
    coord = {k: i for i, k in enumerate(inv_keys)}
    off_path_keys = sorted(k for k in defender.edge_set if k not in on_path)

    n = len(inv_keys)
    svec = np.empty(n)
    dvec = np.empty(n)
    for i, k in enumerate(inv_keys):
        e = graph.edge(k)
        svec[i] = e.s
        dvec[i] = e.s * (base.get(k, 0.0) + defender.eta) - math.log(e.p0)

    pe_idx: list[int] = []
    pe_off = [0]
    p_const: list[float] = []
    group_of_path: list[int] = []
    group_logw: list[float] = []

    for g, m in enumerate(targets):
        ps = pathsets[m]
        loss = graph.critical_assets[m]
        if weights is None:
            group_logw.append(math.log(loss))
            gid = len(group_logw) - 1
            members = [(j, None) for j in range(len(ps))]
        else:
            members = []
            wvec = weights.weights[m]
            for j in range(len(ps)):
                if wvec[j] > 0.0:
                    members.append((j, float(wvec[j])))
        for j, beta in members:
            path = ps.paths[j]
            const = 0.0
            count = 0
            for i in range(len(path) - 1):
                key = (path[i], path[i + 1])
                if key in coord:
                    pe_idx.append(coord[key])
                    count += 1
                else:
                    e = graph.edge(key)
                    const += _edge_h(e, base.get(key, 0.0), alpha)
            pe_off.append(pe_off[-1] + count)
            p_const.append(const)
            if weights is None:
                group_of_path.append(gid)
            else:
                group_of_path.append(len(group_logw))
                group_logw.append(math.log(loss * beta))

    counts = np.bincount(
        np.asarray(group_of_path, dtype=np.int64), minlength=len(group_logw)
    ) if group_of_path else np.zeros(0, dtype=np.int64)
    return _PathProblem(
        inv_keys=inv_keys,
        svec=svec,
        dvec=dvec,
        pe_idx=np.asarray(pe_idx, dtype=np.int32),
        pe_off=np.asarray(pe_off, dtype=np.int32),
        p_const=np.asarray(p_const, dtype=float),
        group_of_path=np.asarray(group_of_path, dtype=np.int32),
        group_logw=np.asarray(group_logw, dtype=float),
        z_total=defender.budget - defender.eta * len(defender.edge_set),
        eta=defender.eta,
        off_path_keys=off_path_keys,
        n_paths=len(p_const),
        max_group=int(counts.max()) if counts.size else 0,
    )


def _exponents(prob: _PathProblem, z: np.ndarray, alpha: float) -> np.ndarray:
    h = (prob.svec * z + prob.dvec) ** alpha
    seg = np.repeat(np.arange(prob.n_paths), np.diff(prob.pe_off))
    return prob.p_const + np.bincount(
        seg, weights=h[prob.pe_idx], minlength=prob.n_paths
    )


def _hprime(prob: _PathProblem, z: np.ndarray, alpha: float) -> np.ndarray:
    t = np.maximum(prob.svec * z + prob.dvec, 1e-12)
    return alpha * prob.svec * t ** (alpha - 1.0)


def _exact_value(prob: _PathProblem, z: np.ndarray, alpha: float) -> float:
    """Hard-max objective in currency units at the point z."""
    if prob.n_paths == 0:
        return 0.0
    gj = _exponents(prob, z, alpha)
    mx = np.full(len(prob.group_logw), -np.inf)
    np.maximum.at(mx, prob.group_of_path, -gj)
    vals = prob.group_logw + mx
    vals = vals[np.isfinite(vals)]
    if vals.size == 0:
        return 0.0
    top = vals.max()
    return float(math.exp(top) * np.sum(np.exp(vals - top)))


def _kkt_residual(
    prob: _PathProblem, z: np.ndarray, alpha: float, active_tol: float = 1e-7
) -> tuple[float, int]:
    """Relative first-order residual of the hard-max problem at z.

    Checks every feasible pairwise-transfer direction (raise one
    coordinate, lower another positive one): at an optimum no such
    direction has a negative directional derivative. Exact for the
    piecewise-smooth max: per group, the derivative is the max over
    active paths of the path-value derivative along the direction.
    """
    n = len(prob.inv_keys)
    if n == 0 or prob.n_paths == 0:
        return 0.0, 0
    gj = _exponents(prob, z, alpha)
    hp = _hprime(prob, z, alpha)
    f = _exact_value(prob, z, alpha)
    if f <= 0.0:
        return 0.0, 0

    n_groups = len(prob.group_logw)
    mn = np.full(n_groups, np.inf)
    np.minimum.at(mn, prob.group_of_path, gj)

    seg = np.repeat(np.arange(prob.n_paths), np.diff(prob.pe_off))
    # b[j, k] = -h'_k if coordinate k lies on path j else 0
    b = np.zeros((prob.n_paths, n))
    b[seg, prob.pe_idx] = -hp[prob.pe_idx]

    movable = np.nonzero(z > 1e-12)[0]
    if movable.size == 0:
        return 0.0, 0

    total = np.zeros((n, movable.size))
    n_active = 0
    for g in range(n_groups):
        sel = prob.group_of_path == g
        act = sel & (gj <= mn[g] + active_tol * (1.0 + abs(mn[g])))
        rows = np.nonzero(act)[0]
        if rows.size == 0:
            continue
        n_active += rows.size
        scale = math.exp(prob.group_logw[g] - mn[g] - math.log(f))
        # deriv[k, k'] = max over active j of b[j,k] - b[j,k'], the exact
        # one-sided derivative of this group's max term along +e_k, -e_k'
        bact = b[rows]
        total += scale * np.max(
            bact[:, :, None] - bact[:, None, movable], axis=0
        )
    # the directional derivative of the sum is the sum of per-group maxima;
    # optimality wants every feasible transfer direction non-improving
    worst = -float(total.min())
    return max(0.0, worst), n_active


def _first_order(
    prob: _PathProblem, alpha: float, config: SolverConfig
) -> tuple[np.ndarray, int, float]:
    n = len(prob.inv_keys)
    z = np.full(n, prob.z_total / n)
    if isinstance(config.smoothing, float):
        schedule = [config.smoothing]
    elif prob.max_group <= 1:
        schedule = [1.0]
    else:
        tau_min = max(config.tolerance / (4.0 * math.log(prob.max_group + 1.0)), 1e-8)
        schedule = [1.0]
        while schedule[-1] > tau_min:
            schedule.append(max(schedule[-1] * 0.2, tau_min))
    per_stage = max(200, config.max_iterations // max(len(schedule), 1))
    total_iters = 0
    resid = 0.0
    for tau in schedule:
        stage_tol = max(config.tolerance * 0.1, tau * 1e-3)
        z, _, iters, resid = kernel.fista_stage(
            z, prob.z_total, alpha, prob.svec, prob.dvec, prob.pe_idx,
            prob.pe_off, prob.p_const, prob.group_of_path, prob.group_logw,
            tau, per_stage, stage_tol,
        )
        z = np.asarray(z)
        total_iters += iters
        if total_iters >= config.max_iterations:
            break
    return z, total_iters, resid


def _subgradient(
    prob: _PathProblem, alpha: float, config: SolverConfig
) -> tuple[np.ndarray, int, float]:
    """Plain projected subgradient with diminishing steps (exact mode)."""
    n = len(prob.inv_keys)
    z = kernel.project_simplex(np.full(n, prob.z_total / n), prob.z_total)
    best = z.copy()
    best_f = np.inf
    scale = max(prob.z_total, 1.0)
    if config.step_rule == "fixed":
        steps = lambda t: 0.01 * scale
    else:
        steps = lambda t: 0.1 * scale / math.sqrt(t)
    it = 0
    for it in range(1, config.max_iterations + 1):
        f, g = kernel.objective_grad(
            z, alpha, prob.svec, prob.dvec, prob.pe_idx, prob.pe_off,
            prob.p_const, prob.group_of_path, prob.group_logw, 0.0,
        )
        if f < best_f:
            best_f = f
            best = z.copy()
        z = kernel.project_simplex(z - steps(it) * np.asarray(g), prob.z_total)
    gap = float(np.max(np.abs(best - kernel.project_simplex(
        best - np.asarray(kernel.objective_grad(
            best, alpha, prob.svec, prob.dvec, prob.pe_idx, prob.pe_off,
            prob.p_const, prob.group_of_path, prob.group_logw, 0.0,
        )[1]), prob.z_total))))
    return best, it, gap


def _polish(
    prob: _PathProblem, z0: np.ndarray, alpha: float, config: SolverConfig
) -> np.ndarray | None:
    try:
        from scipy.optimize import minimize
    except ImportError:  # pragma: no cover - scipy is a hard dep
        return None
    n = len(prob.inv_keys)
    n_groups = len(prob.group_logw)
    singleton = prob.max_group <= 1
    fscale = max(_exact_value(prob, z0, alpha), 1e-300)
    logscale = math.log(fscale)

    if singleton:
        def fun(u):
            g = _exponents(prob, u, alpha)
            vals = np.exp(prob.group_logw[prob.group_of_path] - g - logscale)
            hp = _hprime(prob, u, alpha)
            seg = np.repeat(np.arange(prob.n_paths), np.diff(prob.pe_off))
            grad = -np.bincount(
                prob.pe_idx, weights=vals[seg] * hp[prob.pe_idx], minlength=n
            )
            return float(vals.sum()), grad

        cons = [{
            "type": "eq",
            "fun": lambda u: np.array([u.sum() - prob.z_total]),
            "jac": lambda u: np.ones((1, n)),
        }]
        bounds = [(0.0, prob.z_total)] * n
        res = minimize(
            fun, z0, jac=True, method="SLSQP", bounds=bounds, constraints=cons,
            options={"maxiter": 400, "ftol": 1e-14},
        )
        if not np.all(np.isfinite(res.x)):
            return None
        return kernel.project_simplex(np.maximum(res.x, 0.0), prob.z_total)

    # epigraph form: u = [z, v]; minimize sum_g exp(logw_g + v_g - logscale)
    gj0 = _exponents(prob, z0, alpha)
    v0 = np.full(n_groups, -np.inf)
    np.maximum.at(v0, prob.group_of_path, -gj0)
    v0 = np.where(np.isfinite(v0), v0, 0.0)
    u0 = np.concatenate([z0, v0])
    seg = np.repeat(np.arange(prob.n_paths), np.diff(prob.pe_off))

    def fun(u):
        v = u[n:]
        vals = np.exp(prob.group_logw + v - logscale)
        grad = np.concatenate([np.zeros(n), vals])
        return float(vals.sum()), grad

    def cons_f(u):
        z, v = u[:n], u[n:]
        return v[prob.group_of_path] + _exponents(prob, z, alpha)

    def cons_j(u):
        z, v = u[:n], u[n:]
        hp = _hprime(prob, z, alpha)
        jac = np.zeros((prob.n_paths, n + n_groups))
        np.add.at(jac, (seg, prob.pe_idx), hp[prob.pe_idx])
        jac[np.arange(prob.n_paths), n + prob.group_of_path] = 1.0
        return jac

    cons = [
        {"type": "ineq", "fun": cons_f, "jac": cons_j},
        {
            "type": "eq",
            "fun": lambda u: np.array([u[:n].sum() - prob.z_total]),
            "jac": lambda u: np.concatenate([np.ones(n), np.zeros(n_groups)])[None, :],
        },
    ]
    bounds = [(0.0, prob.z_total)] * n + [(None, 0.0)] * n_groups
    res = minimize(
        fun, u0, jac=True, method="SLSQP", bounds=bounds, constraints=cons,
        options={"maxiter": 400, "ftol": 1e-14},
    )
    if not np.all(np.isfinite(res.x)):
        return None
    return kernel.project_simplex(np.maximum(res.x[:n], 0.0), prob.z_total)


def best_response(
    graph: AttackGraph,
    defender: DefenderSpec,
    profile: InvestmentProfile,
    config: SolverConfig | None = None,
    weights: PathWeights | None = None,
) -> BestResponse:
    """Minimize the defender's (possibly path-weighted) perceived loss.

    Other defenders' investments are read from ``profile``; the defender's
    own entry is ignored. Full budget is spent: the loss is non-increasing
    in every coordinate, so this is without loss of optimality.
    """
    config = config or SolverConfig()
    prob = _compile(graph, defender, profile, weights, config)
    alpha = defender.alpha
    n = len(prob.inv_keys)

    def finish(z: np.ndarray, iters: int, method: str) -> BestResponse:
        alloc = {k: prob.eta for k in prob.off_path_keys}
        for i, k in enumerate(prob.inv_keys):
            alloc[k] = prob.eta + float(z[i])
        leftover = defender.budget - sum(alloc.values())
        if leftover > 1e-9 and alloc:
            # no useful coordinate absorbed it (e.g. no paths): spread evenly
            bump = leftover / len(alloc)
            alloc = {k: v + bump for k, v in alloc.items()}
        candidate = profile.with_allocation(defender.id, alloc)
        objective = (
            perceived_loss(graph, defender, candidate)
            if weights is None
            else _exact_value(prob, z, alpha)
        )
        resid, n_active = (
            _kkt_residual(prob, z, alpha) if n else (0.0, 0)
        )
        return BestResponse(
            defender_id=defender.id,
            allocation=dict(sorted(alloc.items())),
            objective=objective,
            true_loss=true_loss(graph, defender, candidate),
            certificate=resid,
            iterations=iters,
            converged=resid <= config.tolerance,
            method=method,
        )

    if n == 0 or prob.z_total <= 1e-15 or prob.n_paths == 0:
        return finish(np.zeros(n), 0, "degenerate")

    if config.smoothing is None:
        z, iters, _ = _subgradient(prob, alpha, config)
        result = finish(z, iters, f"subgradient/{kernel.BACKEND}")
        return result

    z, iters, _ = _first_order(prob, alpha, config)
    method = f"fista/{kernel.BACKEND}"
    if config.polish and prob.n_paths <= config.polish_path_limit:
        z2 = _polish(prob, z, alpha, config)
        if z2 is not None and _exact_value(prob, z2, alpha) <= _exact_value(
            prob, z, alpha
        ) * (1.0 + 1e-9):
            z = z2
            method += "+slsqp"
    result = finish(z, iters, method)
    if not result.converged:
        raise SolverError(
            f"best response for {defender.id} stalled at residual "
            f"{result.certificate:.3e} > tolerance {config.tolerance:.1e}",
            best=result,
        )
    return result


def verify_kkt(
    graph: AttackGraph,
    defender: DefenderSpec,
    profile: InvestmentProfile,
    config: SolverConfig | None = None,
    weights: PathWeights | None = None,
) -> KktReport:
    """First-order optimality check of the defender's own allocation.

    Independent of the solver pipeline: rebuilds the path table and runs
    the pairwise-transfer test at the allocation recorded in ``profile``.
    """
    config = config or SolverConfig()
    prob = _compile(graph, defender, profile, weights, config)
    own = profile.for_defender(defender.id)
    z = np.array([own.get(k, 0.0) - prob.eta for k in prob.inv_keys])
    floor_violation = max(0.0, float(-z.min()) if z.size else 0.0)
    spent = sum(own.values())
    budget_gap = abs(spent - defender.budget)
    z = np.maximum(z, 0.0)
    resid, n_active = _kkt_residual(prob, z, defender.alpha)
    return KktReport(
        residual=resid,
        budget_gap=budget_gap / max(defender.budget, 1.0),
        floor_violation=floor_violation,
        n_active_paths=n_active,
        tolerance=config.tolerance,
    )


# -- closed form for the two-path diamond ---------------------------------


@dataclass
class ClosedForm:
    """Analytic optimum of the canonical two-path diamond instance."""

    alpha: float
    budget: float
    allocation: dict[EdgeKey, float]
    true_loss: float
    perceived_loss: float


def closed_form_example(
    alpha: float,
    budget: float,
    entry_s: float = 1.0,
    exit_s: float = 1.0,
    interior_s: float = 1.0,
    loss: float = 1.0,
) -> ClosedForm:
    """Optimal behavioral allocation on the two-path diamond.

    The diamond has one entry edge, two symmetric two-edge branches, and
    one exit edge, all with p0 = 1 (see catalog.two_path_diamond). With
    q = alpha/(1-alpha) the KKT system gives per-edge investments

        x_e = T * s_e**q            on the entry and exit edges
        x_i = T * 2**(-1/(1-alpha)) * s_i**q    on each interior edge

    with T scaled so the budget binds. Only symmetric branches are
    supported; alpha = 1 has no unique interior optimum (the rational
    defender concentrates everything on a minimum cut: any split of the
    budget between the entry and exit edges is optimal), so it raises.
    """
    from .catalog import DIAMOND_EDGES

    if not (0.0 < alpha <= 1.0):
        raise ClosedFormError("alpha must lie in (0, 1]")
    if alpha >= 1.0 - 1e-12:
        raise ClosedFormError(
            "no closed form at alpha = 1: the rational optimum degenerates to "
            "min-cut concentration (all budget on the {entry} or {exit} cut, "
            "in any split); use the solver or pick alpha < 1"
        )
    if budget <= 0.0:
        raise ClosedFormError("budget must be positive")
    a = min(alpha, 1.0 - 1e-6)
    q = a / (1.0 - a)
    half = 2.0 ** (-1.0 / (1.0 - a))
    denom = entry_s**q + exit_s**q + 4.0 * half * interior_s**q
    t_scale = budget / denom
    x_entry = t_scale * entry_s**q
    x_exit = t_scale * exit_s**q
    x_int = t_scale * half * interior_s**q

    entry, b1a, b1b, b2a, b2b, exit_ = DIAMOND_EDGES
    allocation = {
        entry: x_entry,
        b1a: x_int,
        b1b: x_int,
        b2a: x_int,
        b2b: x_int,
        exit_: x_exit,
    }
    path_true = entry_s * x_entry + 2.0 * interior_s * x_int + exit_s * x_exit
    path_perc = (
        (entry_s * x_entry) ** a
        + 2.0 * (interior_s * x_int) ** a
        + (exit_s * x_exit) ** a
    )
    return ClosedForm(
        alpha=alpha,
        budget=budget,
        allocation=allocation,
        true_loss=loss * math.exp(-path_true),
        perceived_loss=loss * math.exp(-path_perc),
    )
