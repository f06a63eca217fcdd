"""Time best responses under the compiled kernel and the numpy fallback.

The kernel backend is chosen when the package is imported, so each backend
is measured in its own subprocess (BGAME_PURE=1 forces the fallback). The
parent merges the timings into one table with a speedup column.

Usage:
    python benchmarks/bench_solver.py [--repeat N] [--graphs a,b,c]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import time

DEFAULT_GRAPHS = "diamond,scada_external,scada_internal,voip,ieee300"


def measure(graphs: list[str], repeat: int) -> dict[str, float]:
    import bgame

    out: dict[str, float] = {"_backend_check": 0.0}
    for name in graphs:
        case = bgame.build_case_study(name)
        defender = sorted(case.defenders, key=lambda d: d.id)[0]
        profile = bgame.InvestmentProfile.zero(case.defenders)
        best = float("inf")
        for _ in range(repeat):
            t0 = time.perf_counter()
            bgame.best_response(case.graph, defender, profile)
            best = min(best, time.perf_counter() - t0)
        out[name] = best
    from bgame.kernel import BACKEND

    out["_backend_check"] = BACKEND
    return out


def run_worker(pure: bool, graphs: str, repeat: int) -> dict:
    env = dict(os.environ, BGAME_PURE="1" if pure else "0")
    proc = subprocess.run(
        [sys.executable, __file__, "--worker", "--graphs", graphs,
         "--repeat", str(repeat)],
        env=env,
        capture_output=True,
        text=True,
        check=True,
    )
    return json.loads(proc.stdout)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=5, help="best-of-N timing")
    ap.add_argument("--graphs", default=DEFAULT_GRAPHS)
    ap.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args()
    graphs = [g for g in args.graphs.split(",") if g]

    if args.worker:
        print(json.dumps(measure(graphs, args.repeat)))
        return 0

    fast = run_worker(False, args.graphs, args.repeat)
    pure = run_worker(True, args.graphs, args.repeat)
    if fast["_backend_check"] == pure["_backend_check"]:
        print(
            "warning: both runs used the "
            f"{pure['_backend_check']} backend (extension not built?)",
            file=sys.stderr,
        )

    width = max(len(g) for g in graphs)
    print(f"{'graph':<{width}}  {'compiled':>10}  {'fallback':>10}  {'speedup':>8}")
    for g in graphs:
        ratio = pure[g] / fast[g] if fast[g] > 0 else float("inf")
        print(f"{g:<{width}}  {fast[g]:>9.4f}s  {pure[g]:>9.4f}s  {ratio:>7.2f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
