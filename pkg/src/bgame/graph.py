"""Attack graph core: DAG model, validation, path enumeration, minimum cuts.

An attack graph is a directed acyclic graph whose nodes are system assets.
Each edge (i, j) carries a baseline compromise probability ``p0`` in (0, 1]
and an investment sensitivity ``s >= 1``. Attacks start at one or more
source nodes and aim at critical assets, each of which has a financial loss
attached. Everything downstream (losses, solvers, games) consumes this
module's types.
"""

from __future__ import annotations

import json
import math
import weakref
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

NodeId = str
EdgeKey = tuple[NodeId, NodeId]

#: Reserved node id for the virtual origin used to unify multiple sources.
ORIGIN: NodeId = "__origin__"

DEFAULT_P0 = 0.8
DEFAULT_SENSITIVITY = 1.0
DEFAULT_LOSS = 100.0

#: Refuse to enumerate more than this many paths for a single target.
PATH_CAP = 100_000


class GraphError(ValueError):
    """Raised for malformed graphs or queries on missing nodes/edges."""


class PathLimitError(GraphError):
    """Raised when path enumeration would exceed the configured cap."""

    def __init__(self, target: NodeId, cap: int, count: int):
        super().__init__(
            f"target {target!r} has {count} attack paths, above the cap of {cap}"
        )
        self.target = target
        self.cap = cap
        self.count = count


@dataclass(frozen=True)
class Edge:
    """Directed edge with baseline probability and investment sensitivity."""

    src: NodeId
    dst: NodeId
    p0: float = DEFAULT_P0
    s: float = DEFAULT_SENSITIVITY

    @property
    def key(self) -> EdgeKey:
        return (self.src, self.dst)


@dataclass(frozen=True)
class Violation:
    """One structural problem found by :func:`validate`."""

    code: str
    message: str
    subject: str = ""


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def codes(self) -> set[str]:
        return {v.code for v in self.violations}

    def __str__(self) -> str:
        if self.ok:
            body = "valid"
        else:
            body = "; ".join(f"{v.code}: {v.message}" for v in self.violations)
        if self.notes:
            body += " | notes: " + "; ".join(self.notes)
        return body


class AttackGraph:
    """Immutable-by-convention attack DAG with derived indexes.

    Parameters mirror the on-disk JSON format: node list, source list,
    edge list, and a mapping from critical asset id to its loss.
    """

    def __init__(
        self,
        nodes: Iterable[NodeId],
        edges: Iterable[Edge],
        sources: Iterable[NodeId],
        critical_assets: Mapping[NodeId, float],
    ):
        self.nodes: list[NodeId] = list(nodes)
        self.edges: list[Edge] = list(edges)
        self.sources: list[NodeId] = list(sources)
        self.critical_assets: dict[NodeId, float] = dict(critical_assets)

        self._node_set = set(self.nodes)
        self._edge_index: dict[EdgeKey, int] = {}
        for i, e in enumerate(self.edges):
            self._edge_index.setdefault(e.key, i)
        self._out: dict[NodeId, list[int]] = {n: [] for n in self.nodes}
        self._in: dict[NodeId, list[int]] = {n: [] for n in self.nodes}
        for i, e in enumerate(self.edges):
            if e.src in self._out and e.dst in self._in:
                self._out[e.src].append(i)
                self._in[e.dst].append(i)

    # -- basic queries -------------------------------------------------

    def has_node(self, n: NodeId) -> bool:
        return n in self._node_set

    def edge(self, key: EdgeKey) -> Edge:
        try:
            return self.edges[self._edge_index[key]]
        except KeyError:
            raise GraphError(f"no edge {key!r} in graph") from None

    def has_edge(self, key: EdgeKey) -> bool:
        return key in self._edge_index

    def edge_index(self, key: EdgeKey) -> int:
        try:
            return self._edge_index[key]
        except KeyError:
            raise GraphError(f"no edge {key!r} in graph") from None

    def out_edges(self, n: NodeId) -> list[Edge]:
        return [self.edges[i] for i in self._out.get(n, [])]

    def in_edges(self, n: NodeId) -> list[Edge]:
        return [self.edges[i] for i in self._in.get(n, [])]

    def edge_keys(self) -> list[EdgeKey]:
        return [e.key for e in self.edges]

    def __repr__(self) -> str:
        return (
            f"AttackGraph(nodes={len(self.nodes)}, edges={len(self.edges)}, "
            f"sources={self.sources}, criticals={len(self.critical_assets)})"
        )

    # -- structure -----------------------------------------------------

    def topological_order(self) -> list[NodeId]:
        """Kahn topological order; raises GraphError on a cycle."""
        indeg = {n: 0 for n in self.nodes}
        for e in self.edges:
            if e.dst in indeg:
                indeg[e.dst] += 1
        ready = sorted(n for n, d in indeg.items() if d == 0)
        order: list[NodeId] = []
        while ready:
            n = ready.pop()
            order.append(n)
            grew = False
            for e in self.out_edges(n):
                indeg[e.dst] -= 1
                if indeg[e.dst] == 0:
                    ready.append(e.dst)
                    grew = True
            if grew:
                ready.sort()
        if len(order) != len(self.nodes):
            raise GraphError("graph contains a cycle")
        return order

    def is_dag(self) -> bool:
        try:
            self.topological_order()
            return True
        except GraphError:
            return False

    def reachable_from_sources(self) -> set[NodeId]:
        seen = set()
        stack = [s for s in self.sources if s in self._node_set]
        while stack:
            n = stack.pop()
            if n in seen:
                continue
            seen.add(n)
            for e in self.out_edges(n):
                if e.dst not in seen:
                    stack.append(e.dst)
        return seen

    def reaches(self, targets: Iterable[NodeId]) -> set[NodeId]:
        """Nodes from which at least one of ``targets`` is reachable."""
        seen = set()
        stack = [t for t in targets if t in self._node_set]
        while stack:
            n = stack.pop()
            if n in seen:
                continue
            seen.add(n)
            for e in self.in_edges(n):
                if e.src not in seen:
                    stack.append(e.src)
        return seen

    def on_path_edges(self, targets: Iterable[NodeId] | None = None) -> list[EdgeKey]:
        """Edges lying on at least one source-to-target path."""
        targets = list(targets) if targets is not None else list(self.critical_assets)
        fwd = self.reachable_from_sources()
        bwd = self.reaches(targets)
        return [e.key for e in self.edges if e.src in fwd and e.dst in bwd]

    # -- serialization -------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "nodes": list(self.nodes),
            "sources": list(self.sources),
            "edges": [
                {"src": e.src, "dst": e.dst, "p0": e.p0, "s": e.s} for e in self.edges
            ],
            "critical_assets": dict(self.critical_assets),
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "AttackGraph":
        try:
            nodes = data["nodes"]
            sources = data["sources"]
            raw_edges = data["edges"]
            criticals = data["critical_assets"]
        except KeyError as exc:
            raise GraphError(f"graph document missing key {exc}") from None
        edges = [
            Edge(
                src=d["src"],
                dst=d["dst"],
                p0=float(d.get("p0", DEFAULT_P0)),
                s=float(d.get("s", DEFAULT_SENSITIVITY)),
            )
            for d in raw_edges
        ]
        return cls(
            nodes=nodes,
            edges=edges,
            sources=sources,
            critical_assets={str(k): float(v) for k, v in criticals.items()},
        )


def save_graph(graph: AttackGraph, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(graph.to_dict(), fh, indent=2, sort_keys=False)
        fh.write("\n")


def load_graph(path: str) -> AttackGraph:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    return AttackGraph.from_dict(data)


# -- validation ---------------------------------------------------------


def validate(graph: AttackGraph) -> ValidationReport:
    """Structural validation.

    Checks: node references, duplicate nodes, parallel edges, acyclicity,
    p0 in (0, 1], s >= 1, positive losses on known critical assets, at
    least one source, sources are nodes, no critical source, and no use of
    the reserved virtual-origin id. Unreachable critical assets are
    reported as notes (their loss contribution is zero, which is legal).
    """
    report = ValidationReport()
    add = report.violations.append

    seen_nodes: set[NodeId] = set()
    for n in graph.nodes:
        if n in seen_nodes:
            add(Violation("duplicate-node", f"node {n!r} listed twice", n))
        seen_nodes.add(n)
        if n.startswith("__"):
            add(Violation("reserved-node-id", f"node id {n!r} is reserved", n))

    seen_edges: set[EdgeKey] = set()
    for e in graph.edges:
        subj = f"{e.src}->{e.dst}"
        if e.src not in seen_nodes:
            add(Violation("unknown-node", f"edge source {e.src!r} not a node", subj))
        if e.dst not in seen_nodes:
            add(Violation("unknown-node", f"edge target {e.dst!r} not a node", subj))
        if e.key in seen_edges:
            add(Violation("parallel-edge", f"duplicate edge {subj}", subj))
        seen_edges.add(e.key)
        if e.src == e.dst:
            add(Violation("self-loop", f"self loop at {e.src!r}", subj))
        if not (0.0 < e.p0 <= 1.0):
            add(Violation("p0-range", f"p0={e.p0} outside (0, 1] on {subj}", subj))
        if not (e.s >= 1.0) or not math.isfinite(e.s):
            add(Violation("s-range", f"s={e.s} below 1 on {subj}", subj))

    if not graph.sources:
        add(Violation("no-sources", "graph declares no attack sources"))
    for s in graph.sources:
        if s not in seen_nodes:
            add(Violation("unknown-source", f"source {s!r} not a node", s))
        if s in graph.critical_assets:
            add(Violation("critical-source", f"source {s!r} is a critical asset", s))

    if not graph.critical_assets:
        add(Violation("no-critical-assets", "graph declares no critical assets"))
    for m, loss in graph.critical_assets.items():
        if m not in seen_nodes:
            add(Violation("unknown-critical", f"critical asset {m!r} not a node", m))
        if not (loss > 0.0) or not math.isfinite(loss):
            add(Violation("loss-range", f"loss {loss} not positive finite on {m!r}", m))

    has_cycle = False
    if not any(v.code == "unknown-node" for v in report.violations):
        if not graph.is_dag():
            has_cycle = True
            add(Violation("cycle", "graph is not acyclic"))

    if report.ok and not has_cycle:
        reachable = graph.reachable_from_sources()
        for m in graph.critical_assets:
            if m not in reachable:
                report.notes.append(f"critical asset {m!r} unreachable from sources")
    return report


def require_valid(graph: AttackGraph) -> None:
    report = validate(graph)
    if not report.ok:
        raise GraphError(f"invalid graph: {report}")


# -- virtual origin ------------------------------------------------------


def with_origin(graph: AttackGraph) -> tuple[AttackGraph, list[EdgeKey]]:
    """Return a copy with a single virtual origin feeding every source.

    The added edges carry p0 = 1 and s = 1, are not investable, and are
    excluded from cuts. If the graph already has exactly one source, it is
    returned unchanged with an empty added-edge list.
    """
    if len(graph.sources) == 1:
        return graph, []
    if ORIGIN in graph._node_set:
        raise GraphError(f"node id {ORIGIN!r} is reserved for the virtual origin")
    virtual = [Edge(ORIGIN, s, p0=1.0, s=1.0) for s in graph.sources]
    aug = AttackGraph(
        nodes=[ORIGIN] + list(graph.nodes),
        edges=virtual + list(graph.edges),
        sources=[ORIGIN],
        critical_assets=graph.critical_assets,
    )
    return aug, [e.key for e in virtual]


# -- path enumeration ----------------------------------------------------


@dataclass
class PathSet:
    """All simple attack paths to one target, in lexicographic node order.

    Paths are node-id tuples starting at a real source. On a DAG every
    path is simple, so this is the full path family.
    """

    target: NodeId
    paths: list[tuple[NodeId, ...]]

    def __len__(self) -> int:
        return len(self.paths)

    def __iter__(self) -> Iterator[tuple[NodeId, ...]]:
        return iter(self.paths)

    def edge_lists(self) -> list[list[EdgeKey]]:
        return [
            [(p[i], p[i + 1]) for i in range(len(p) - 1)] for p in self.paths
        ]


def count_paths(graph: AttackGraph, target: NodeId) -> int:
    """Number of source-to-target paths, by DP over a topological order."""
    if target not in graph._node_set:
        raise GraphError(f"unknown target {target!r}")
    counts = {n: 0 for n in graph.nodes}
    for s in graph.sources:
        counts[s] += 1
    for n in graph.topological_order():
        c = counts[n]
        if c == 0:
            continue
        for e in graph.out_edges(n):
            counts[e.dst] += c
    return counts[target]


_PATH_CACHE: "weakref.WeakKeyDictionary[AttackGraph, dict]" = (
    weakref.WeakKeyDictionary()
)


def cached_paths(graph: AttackGraph, target: NodeId, cap: int = PATH_CAP) -> PathSet:
    """enumerate_paths with a per-graph memo (graphs are immutable by use)."""
    per_graph = _PATH_CACHE.get(graph)
    if per_graph is None:
        per_graph = {}
        _PATH_CACHE[graph] = per_graph
    ps = per_graph.get(target)
    if ps is None:
        ps = enumerate_paths(graph, target, cap=cap)
        per_graph[target] = ps
    return ps


def enumerate_paths(
    graph: AttackGraph, target: NodeId, cap: int = PATH_CAP
) -> PathSet:
    """Enumerate every attack path to ``target``.

    Ordering is lexicographic on the node-id sequence, which makes path
    indexes stable across runs. Raises :class:`PathLimitError` when the
    count (computed first, cheaply) exceeds ``cap``.
    """
    n_paths = count_paths(graph, target)
    if n_paths > cap:
        raise PathLimitError(target, cap, n_paths)
    useful = graph.reaches([target])
    paths: list[tuple[NodeId, ...]] = []

    def walk(node: NodeId, acc: list[NodeId]) -> None:
        if node == target:
            paths.append(tuple(acc))
            return
        for e in sorted(graph.out_edges(node), key=lambda e: e.dst):
            if e.dst in useful:
                acc.append(e.dst)
                walk(e.dst, acc)
                acc.pop()

    for s in sorted(set(graph.sources)):
        if s in useful:
            walk(s, [s])
    paths.sort()
    return PathSet(target=target, paths=paths)


# -- minimum cuts --------------------------------------------------------


class _Dinic:
    """Max flow on a small integer-capacity graph (arc list w/ reverse arcs)."""

    def __init__(self, n: int):
        self.n = n
        self.head: list[list[int]] = [[] for _ in range(n)]
        self.to: list[int] = []
        self.cap: list[int] = []

    def add(self, u: int, v: int, c: int) -> int:
        i = len(self.to)
        self.to.append(v)
        self.cap.append(c)
        self.head[u].append(i)
        self.to.append(u)
        self.cap.append(0)
        self.head[v].append(i + 1)
        return i

    def maxflow(self, s: int, t: int) -> int:
        flow = 0
        while True:
            level = [-1] * self.n
            level[s] = 0
            queue = [s]
            for u in queue:
                for i in self.head[u]:
                    if self.cap[i] > 0 and level[self.to[i]] < 0:
                        level[self.to[i]] = level[u] + 1
                        queue.append(self.to[i])
            if level[t] < 0:
                return flow
            it = [0] * self.n

            def dfs(u: int, f: int) -> int:
                if u == t:
                    return f
                while it[u] < len(self.head[u]):
                    i = self.head[u][it[u]]
                    v = self.to[i]
                    if self.cap[i] > 0 and level[v] == level[u] + 1:
                        d = dfs(v, min(f, self.cap[i]))
                        if d > 0:
                            self.cap[i] -= d
                            self.cap[i ^ 1] += d
                            return d
                    it[u] += 1
                return 0

            while True:
                pushed = dfs(s, 1 << 30)
                if pushed == 0:
                    break
                flow += pushed


@dataclass
class MinCutResult:
    """All minimum-cardinality edge cuts between the sources and targets.

    ``cuts`` lists each minimum cut as a frozenset of edge keys;
    ``edge_union`` is the union of all of them (exact even when cut
    enumeration hits the cap and ``complete`` is False).
    """

    size: int
    cuts: list[frozenset[EdgeKey]]
    edge_union: frozenset[EdgeKey]
    complete: bool = True


def _cut_network(
    graph: AttackGraph, targets: Sequence[NodeId], skip: EdgeKey | None = None
) -> tuple[_Dinic, int, int, dict[int, EdgeKey]]:
    """Unit-capacity flow network: source side = attack sources, sink = targets."""
    idx = {n: i for i, n in enumerate(graph.nodes)}
    n = len(graph.nodes)
    s_node, t_node = n, n + 1
    net = _Dinic(n + 2)
    big = len(graph.edges) + 2
    arc_for_edge: dict[int, EdgeKey] = {}
    for e in graph.edges:
        if e.key == skip:
            continue
        arc = net.add(idx[e.src], idx[e.dst], 1)
        arc_for_edge[arc] = e.key
    for s in set(graph.sources):
        net.add(s_node, idx[s], big)
    for t in set(targets):
        net.add(idx[t], t_node, big)
    return net, s_node, t_node, arc_for_edge


def min_cut_size(graph: AttackGraph, targets: Sequence[NodeId] | None = None) -> int:
    """Size of a minimum edge cut separating the sources from ``targets``."""
    targets = list(targets) if targets is not None else list(graph.critical_assets)
    if not targets:
        return 0
    net, s, t, _ = _cut_network(graph, targets)
    return net.maxflow(s, t)


def min_cut_edge_union(
    graph: AttackGraph, targets: Sequence[NodeId] | None = None
) -> frozenset[EdgeKey]:
    """Union of all minimum cuts, via the edge-deletion membership test.

    An edge belongs to some minimum cut exactly when deleting it drops the
    max flow by one. Only saturated edges of one max flow are candidates,
    which keeps the number of flow recomputations small.
    """
    targets = list(targets) if targets is not None else list(graph.critical_assets)
    if not targets:
        return frozenset()
    net, s, t, arc_for_edge = _cut_network(graph, targets)
    base = net.maxflow(s, t)
    if base == 0:
        return frozenset()
    members = []
    for arc, key in arc_for_edge.items():
        if net.cap[arc] == 0:  # saturated in this max flow
            net2, s2, t2, _ = _cut_network(graph, targets, skip=key)
            if net2.maxflow(s2, t2) == base - 1:
                members.append(key)
    return frozenset(members)


def min_edge_cut(
    graph: AttackGraph,
    targets: Sequence[NodeId] | None = None,
    max_cuts: int = 10_000,
) -> MinCutResult:
    """Enumerate every minimum-cardinality edge cut.

    Uses the union membership test to find candidate edges, then searches
    subsets of candidates (depth = min cut size) with a flow feasibility
    check. ``complete`` turns False if more than ``max_cuts`` cuts exist.
    """
    targets = list(targets) if targets is not None else list(graph.critical_assets)
    size = min_cut_size(graph, targets)
    if size == 0:
        return MinCutResult(size=0, cuts=[frozenset()], edge_union=frozenset())
    union = min_cut_edge_union(graph, targets)
    candidates = sorted(union)

    cuts: list[frozenset[EdgeKey]] = []
    complete = True

    def disconnects(removed: set[EdgeKey]) -> bool:
        seen = set()
        stack = [s for s in graph.sources]
        tset = set(targets)
        while stack:
            u = stack.pop()
            if u in seen:
                continue
            if u in tset:
                return False
            seen.add(u)
            for e in graph.out_edges(u):
                if e.key not in removed and e.dst not in seen:
                    stack.append(e.dst)
        return True

    def residual_size(removed: set[EdgeKey]) -> int:
        idx = {n: i for i, n in enumerate(graph.nodes)}
        n = len(graph.nodes)
        net = _Dinic(n + 2)
        big = len(graph.edges) + 2
        for e in graph.edges:
            if e.key not in removed:
                net.add(idx[e.src], idx[e.dst], 1)
        for src in set(graph.sources):
            net.add(n, idx[src], big)
        for t_ in set(targets):
            net.add(idx[t_], n + 1, big)
        return net.maxflow(n, n + 1)

    def search(start: int, chosen: list[EdgeKey]) -> bool:
        nonlocal complete
        if len(cuts) > max_cuts:
            complete = False
            return False
        need = size - len(chosen)
        if need == 0:
            if disconnects(set(chosen)):
                cuts.append(frozenset(chosen))
            return True
        for i in range(start, len(candidates)):
            if len(candidates) - i < need:
                break
            # prune: after removing chosen + candidate, remaining flow must
            # still be exactly the number of edges we may still remove
            chosen.append(candidates[i])
            if residual_size(set(chosen)) == size - len(chosen):
                if not search(i + 1, chosen):
                    chosen.pop()
                    return False
            chosen.pop()
        return True

    search(0, [])
    cuts.sort(key=lambda c: sorted(c))
    if len(cuts) > max_cuts:
        cuts = cuts[:max_cuts]
        complete = False
    return MinCutResult(size=size, cuts=cuts, edge_union=union, complete=complete)
