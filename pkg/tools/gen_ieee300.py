"""Regenerate the shipped 300-bus grid data file.

The construction is deterministic (fixed RNG seed), so running this is
only needed after editing the synthesizer in bgame.catalog.
"""

from pathlib import Path

from bgame.catalog import _synth_ieee300
from bgame.graph import save_graph

if __name__ == "__main__":
    out = Path(__file__).resolve().parents[1] / "src" / "bgame" / "data" / "ieee300.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    graph = _synth_ieee300()
    save_graph(graph, out)
    print(f"wrote {out} ({len(graph.nodes)} nodes, {len(graph.edges)} edges)")
