"""Command-line front end: single-shot analyses, learning runs, sweeps.

Every command renders one Report: a provenance header (scenario, options,
seed) plus a flat row table, written as CSV (header as ``# key=value``
comment lines) or JSON. Output is byte-identical across repeated runs with
the same inputs; nothing time- or host-dependent goes into a report.
Errors leave a one-line JSON object on stderr and a nonzero exit code.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from . import __version__
from .adversary import AttackerModel
from .behavior import DefenderSpec, InvestmentProfile
from .catalog import BUILTIN_NAMES, FIXTURE_NAMES, CaseStudy, build_case_study
from .game import (
    gain_report,
    nash_equilibrium,
    price_of_anarchy,
    probability_of_successful_attack,
    social_optimum,
)
from .graph import GraphError, load_graph, min_cut_size, validate
from .learning import (
    DEFAULT_ALPHA_GRID,
    LEARNING_MODES,
    LearningError,
    run_learning,
)
from .solver import SolverError, best_response

ATTACKER_FLAGS = {
    "minmax": "min_max",
    "replay": "replay",
    "random": "randomizing",
    "adaptive": "adaptive",
}
SWEEP_AXES = (
    "budget",
    "alpha",
    "interdependency",
    "sensitivity_ratio",
    "budget_split",
    "rtu_count",
)
SCENARIO_VERSION = 1


class CliError(ValueError):
    pass


def worker_count(n_tasks: int) -> int:
    cap = os.environ.get("BGAME_THREADS")
    if cap is not None:
        try:
            cap_n = int(cap)
        except ValueError as exc:
            raise CliError(f"BGAME_THREADS must be an integer, got {cap!r}") from exc
        if cap_n < 1:
            raise CliError("BGAME_THREADS must be at least 1")
        return max(1, min(cap_n, n_tasks))
    return max(1, min(os.cpu_count() or 1, n_tasks))


# -- report model ----------------------------------------------------------


@dataclass
class Report:
    header: dict
    rows: list[dict] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(
            {"header": self.header, "rows": self.rows},
            indent=2,
            sort_keys=True,
            allow_nan=True,
        ) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        for key in sorted(self.header):
            val = self.header[key]
            if isinstance(val, (dict, list, tuple)):
                val = json.dumps(val, sort_keys=True)
            buf.write(f"# {key}={val}\n")
        columns: list[str] = []
        for row in self.rows:
            for k in row:
                if k not in columns:
                    columns.append(k)
        writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
        if columns:
            writer.writeheader()
        for row in self.rows:
            writer.writerow({k: _csv_cell(row.get(k)) for k in columns})
        return buf.getvalue()

    def write(self, fmt: str, out: str | None) -> None:
        text = self.to_json() if fmt == "json" else self.to_csv()
        if out is None:
            sys.stdout.write(text)
        else:
            with open(out, "w", encoding="utf-8") as fh:
                fh.write(text)


def _csv_cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (dict, list, tuple)):
        return json.dumps(v, sort_keys=True)
    return v


# -- scenario + graph resolution -------------------------------------------


def load_scenario(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise CliError("scenario file must hold a JSON object")
    version = data.get("version", SCENARIO_VERSION)
    if version != SCENARIO_VERSION:
        raise CliError(f"unsupported scenario version {version!r}")
    return data


def _parse_floats(text: str, flag: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip() != ""]
    except ValueError as exc:
        raise CliError(f"{flag} expects comma-separated numbers, got {text!r}") from exc


@dataclass
class Job:
    """Everything a command needs: the case study plus resolved knobs."""

    case: CaseStudy
    alphas: list[float]
    seed: int
    rounds: int
    attacker: AttackerModel
    mode: str
    scenario_name: str
    options: dict


def resolve_job(args) -> Job:
    scenario = load_scenario(args.scenario) if args.scenario else {}
    graph_ref = args.graph or scenario.get("graph")
    if not graph_ref:
        raise CliError("no graph given: pass --graph or a scenario with one")

    options = dict(scenario.get("options", {}))
    alphas = (
        _parse_floats(args.alpha, "--alpha")
        if args.alpha
        else [float(a) for a in scenario.get("alphas", [])]
    )
    budget = args.budget if args.budget is not None else scenario.get("budget")
    seed = args.seed if args.seed is not None else int(scenario.get("seed", 0))
    rounds = args.rounds if args.rounds is not None else int(scenario.get("rounds", 100))
    attacker_kind = args.attacker or scenario.get("attacker", "minmax")
    if attacker_kind not in ATTACKER_FLAGS:
        raise CliError(
            f"unknown attacker {attacker_kind!r}; choose from "
            f"{', '.join(sorted(ATTACKER_FLAGS))}"
        )
    mode = args.mode or scenario.get("mode", "none")

    if graph_ref in BUILTIN_NAMES or graph_ref in FIXTURE_NAMES:
        if budget is not None:
            options["budget"] = float(budget)
        if alphas:
            options["alpha"] = alphas[0]
        try:
            case = build_case_study(graph_ref, **options)
        except TypeError as exc:
            raise CliError(f"options not supported by {graph_ref!r}: {exc}") from exc
    else:
        if not os.path.exists(graph_ref):
            known = ", ".join(sorted(BUILTIN_NAMES) + sorted(FIXTURE_NAMES))
            raise CliError(
                f"unknown graph {graph_ref!r}: not a case study, a fixture "
                f"({known}), or a readable file"
            )
        graph = load_graph(graph_ref)
        one = DefenderSpec(
            id="d1",
            edge_set=frozenset(graph.edge_keys()),
            assets=frozenset(graph.critical_assets),
            budget=float(budget) if budget is not None else 10.0,
            alpha=alphas[0] if alphas else 1.0,
        )
        case = CaseStudy(
            name=os.path.basename(graph_ref),
            graph=graph,
            defenders=[one],
            description=f"loaded from {graph_ref}",
        )

    return Job(
        case=case,
        alphas=alphas or [1.0],
        seed=seed,
        rounds=rounds,
        attacker=AttackerModel(ATTACKER_FLAGS[attacker_kind], rng_seed=seed),
        mode=mode,
        scenario_name=args.scenario or "",
        options=options,
    )


def _base_header(cmd: str, job: Job) -> dict:
    return {
        "command": cmd,
        "graph": job.case.name,
        "options": job.options,
        "scenario": job.scenario_name,
        "seed": job.seed,
        "version": __version__,
    }


# -- commands ---------------------------------------------------------------


def cmd_validate(args) -> tuple[Report, int]:
    job = resolve_job(args)
    g = job.case.graph
    verdict = validate(g)
    rows = [
        {
            "status": "valid" if verdict.ok else "invalid",
            "nodes": len(g.nodes),
            "edges": len(g.edges),
            "critical_assets": len(g.critical_assets),
            "min_cut": min_cut_size(g) if verdict.ok else None,
            "detail": "",
        }
    ]
    for v in verdict.violations:
        rows.append({"status": "violation", "detail": f"{v.code}: {v.message}"})
    return Report(_base_header("validate", job), rows), 0 if verdict.ok else 2


def cmd_solve(args) -> tuple[Report, int]:
    job = resolve_job(args)
    case = job.case
    rows = []
    zero = InvestmentProfile.zero(case.defenders)
    for d in sorted(case.defenders, key=lambda d: d.id):
        br = best_response(case.graph, d, zero)
        for (src, dst), x in sorted(br.allocation.items()):
            rows.append(
                {
                    "defender": d.id,
                    "src": src,
                    "dst": dst,
                    "investment": x,
                    "objective": br.objective,
                    "true_loss": br.true_loss,
                }
            )
    return Report(_base_header("solve", job), rows), 0


def cmd_equilibrium(args) -> tuple[Report, int]:
    job = resolve_job(args)
    case = job.case
    eq = nash_equilibrium(case.graph, case.defenders)
    header = _base_header("equilibrium", job)
    header.update(
        {
            "converged": eq.converged,
            "sweeps": eq.sweeps,
            "total_true_loss": eq.total_true_loss,
            "attack_probability": probability_of_successful_attack(
                case.graph, eq.profile
            ),
        }
    )
    rows = []
    for d in sorted(case.defenders, key=lambda d: d.id):
        alloc = eq.profile.for_defender(d.id)
        for (src, dst), x in sorted(alloc.items()):
            rows.append(
                {
                    "defender": d.id,
                    "src": src,
                    "dst": dst,
                    "investment": x,
                    "true_loss": eq.true_losses[d.id],
                    "perceived_loss": eq.perceived_losses[d.id],
                }
            )
    return Report(header, rows), 0


def cmd_gains(args) -> tuple[Report, int]:
    job = resolve_job(args)
    grid = tuple(job.alphas) if args.alpha else DEFAULT_ALPHA_GRID
    rep = gain_report(job.case.graph, job.case.defenders, alpha_grid=grid)
    header = _base_header("gains", job)
    header.update(
        {
            "avg_gain": rep.avg_gain,
            "max_gain": rep.max_gain,
            "behavioral_band": list(rep.behavioral_band),
        }
    )
    rows = [
        {"alpha": a, "total_true_loss": rep.losses_by_alpha[a]}
        for a in sorted(rep.losses_by_alpha)
    ]
    return Report(header, rows), 0


def cmd_poa(args) -> tuple[Report, int]:
    job = resolve_job(args)
    res = price_of_anarchy(job.case.graph, job.case.defenders)
    rows = [
        {
            "equilibrium_loss": res.equilibrium.total_true_loss,
            "optimum_loss": res.optimum.total_true_loss,
            "poa": res.ratio,
            "equilibrium_converged": res.equilibrium.converged,
        }
    ]
    return Report(_base_header("poa", job), rows), 0


def cmd_learn(args) -> tuple[Report, int]:
    job = resolve_job(args)
    mode = job.mode if job.mode != "none" else "paths"
    if mode not in LEARNING_MODES:
        raise CliError(f"--mode must be one of none, {', '.join(LEARNING_MODES)}")
    header = _base_header("learn", job)
    header.update(
        {
            "mode": mode,
            "attacker": job.attacker.kind,
            "rounds": job.rounds,
            "c_max": {},
        }
    )
    rows = []
    zero = InvestmentProfile.zero(job.case.defenders)
    for d in sorted(job.case.defenders, key=lambda d: d.id):
        # Propensity learning needs the starting level on its grid, so the
        # grid is widened to cover whatever level the case study assigns.
        grid = tuple(sorted(set(DEFAULT_ALPHA_GRID) | {d.alpha}))
        trace = run_learning(
            job.case.graph,
            d,
            mode,
            rounds=job.rounds,
            attacker=job.attacker,
            profile=zero,
            alpha_grid=grid,
            seed=job.seed,
        )
        header["c_max"][d.id] = trace.c_max
        for r in trace.rounds:
            rows.append(
                {
                    "defender": d.id,
                    "round": r.round,
                    "alpha": r.alpha,
                    "loss_true": r.loss_true,
                    "loss_perceived": r.loss_perceived,
                    "R": r.reinforcement,
                    "p_rational": r.p_rational,
                    "realized": r.realized,
                }
            )
    return Report(header, rows), 0


def cmd_catalog(args) -> tuple[Report, int]:
    rows = []
    for name in BUILTIN_NAMES:
        case = build_case_study(name)
        g = case.graph
        rows.append(
            {
                "name": name,
                "nodes": len(g.nodes),
                "edges": len(g.edges),
                "min_cut": min_cut_size(g),
                "critical_assets": len(g.critical_assets),
                "defenders": len(case.defenders),
                "total_budget": case.total_budget,
                "description": case.description,
            }
        )
    header = {"command": "catalog", "version": __version__}
    return Report(header, rows), 0


# -- sweeps -----------------------------------------------------------------

_AXIS_DEFAULTS = {
    "interdependency": [float(v) for v in range(9)],
    "rtu_count": [3.0, 6.0, 9.0],
    "budget_split": [round(0.1 * k, 1) for k in range(1, 10)],
    "sensitivity_ratio": [0.25, 0.5, 1.0, 2.0, 4.0],
}


def _sweep_values(args) -> list[float]:
    if args.values:
        return _parse_floats(args.values, "--values")
    if args.axis in _AXIS_DEFAULTS:
        return list(_AXIS_DEFAULTS[args.axis])
    raise CliError(f"--values is required for the {args.axis} axis")


def _loss_at(case_builder, alpha: float) -> float:
    case = case_builder(alpha)
    return nash_equilibrium(case.graph, case.defenders).total_true_loss


def _sweep_row(args, job: Job, value: float, alphas: list[float]) -> dict:
    name = job.case.name
    axis = args.axis
    row: dict = {axis: value}

    def rebuild(alpha: float, **extra) -> CaseStudy:
        opts = dict(job.options)
        opts.update(extra)
        opts["alpha"] = alpha
        try:
            return build_case_study(name, **opts)
        except TypeError as exc:
            raise CliError(f"axis {axis!r} does not apply to {name!r}") from exc

    if axis == "budget":
        for a in alphas:
            row[f"loss@{a:g}"] = _loss_at(lambda al: rebuild(al, budget=value), a)
    elif axis == "alpha":
        row["total_true_loss"] = _loss_at(lambda al: rebuild(al), value)
    elif axis == "interdependency":
        for a in alphas:
            row[f"loss@{a:g}"] = _loss_at(
                lambda al: rebuild(al, interdependency_level=int(value)), a
            )
    elif axis == "rtu_count":
        for a in alphas:
            row[f"loss@{a:g}"] = _loss_at(
                lambda al: rebuild(al, rtu_count=int(value)), a
            )
    elif axis == "budget_split":
        if not (0.0 < value < 1.0):
            raise CliError("budget_split values must lie strictly between 0 and 1")
        base = rebuild(alphas[0])
        if len(base.defenders) != 2:
            raise CliError("budget_split needs a two-defender case study")
        total = base.total_budget
        for a in alphas:
            case = rebuild(a)
            d1, d2 = sorted(case.defenders, key=lambda d: d.id)
            split = [
                DefenderSpec(d1.id, d1.edge_set, d1.assets, total * value, d1.alpha, d1.eta),
                DefenderSpec(d2.id, d2.edge_set, d2.assets, total * (1 - value), d2.alpha, d2.eta),
            ]
            eq = nash_equilibrium(case.graph, split)
            row[f"loss@{a:g}"] = eq.total_true_loss
            if a == alphas[0]:
                row["social_loss"] = social_optimum(case.graph, split).total_true_loss
    elif axis == "sensitivity_ratio":
        if name != "diamond":
            raise CliError("sensitivity_ratio applies to the diamond fixture only")
        for a in alphas:
            opts = dict(job.options)
            opts["alpha"] = a
            opts["interior_s"] = value
            case = build_case_study("diamond", **opts)
            d = case.defenders[0]
            br = best_response(case.graph, d, InvestmentProfile.zero([d]))
            interior = [k for k in case.graph.edge_keys() if k[0] != "s" and k[1] != "t"]
            share = sum(br.allocation.get(k, 0.0) for k in interior) / d.budget
            row[f"loss@{a:g}"] = br.true_loss
            row[f"noncritical_share@{a:g}"] = share
    else:
        raise CliError(f"unknown sweep axis {axis!r}")
    return row


def cmd_sweep(args) -> tuple[Report, int]:
    job = resolve_job(args)
    if job.case.name not in BUILTIN_NAMES and job.case.name not in FIXTURE_NAMES:
        raise CliError("sweep supports builtin case studies and fixtures only")
    values = _sweep_values(args)
    if not values:
        raise CliError("empty sweep")
    alphas = job.alphas if args.alpha else [0.4, 1.0]
    header = _base_header("sweep", job)
    header.update({"axis": args.axis, "values": values, "alphas": alphas})
    with ThreadPoolExecutor(max_workers=worker_count(len(values))) as pool:
        futures = [
            pool.submit(_sweep_row, args, job, v, alphas) for v in values
        ]
        rows = [f.result() for f in futures]
    return Report(header, rows), 0


# -- entry point -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bgame",
        description="Security-investment games on attack graphs.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--graph", help="builtin name or graph JSON path")
        p.add_argument("--scenario", help="scenario JSON file")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=None, help="output path (default stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--alpha", default=None, help="comma-separated levels")
        p.add_argument("--budget", type=float, default=None)
        p.add_argument("--rounds", type=int, default=None)
        p.add_argument(
            "--attacker", choices=sorted(ATTACKER_FLAGS), default=None
        )
        p.add_argument(
            "--mode", choices=("none",) + LEARNING_MODES, default=None
        )

    handlers = {
        "validate": cmd_validate,
        "solve": cmd_solve,
        "equilibrium": cmd_equilibrium,
        "gains": cmd_gains,
        "poa": cmd_poa,
        "learn": cmd_learn,
        "sweep": cmd_sweep,
        "catalog": cmd_catalog,
    }
    for name in handlers:
        p = sub.add_parser(name)
        common(p)
        if name == "sweep":
            p.add_argument("--axis", choices=SWEEP_AXES, required=True)
            p.add_argument("--values", default=None, help="comma-separated axis values")
        p.set_defaults(handler=handlers[name])
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report, code = args.handler(args)
        report.write(args.format, args.out)
        return code
    except (CliError, GraphError, LearningError, ValueError, OSError) as exc:
        _emit_error(exc)
        return 2
    except SolverError as exc:
        _emit_error(exc)
        return 3


def _emit_error(exc: Exception) -> None:
    sys.stderr.write(
        json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n"
    )


if __name__ == "__main__":
    sys.exit(main())
