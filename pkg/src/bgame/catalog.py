"""Built-in attack graphs: small fixtures and six case-study systems.

Case studies: two SCADA variants (external attacker, and external plus
insider footholds), a distributed-energy site (der1), an e-commerce
platform, a VoIP deployment, and a synthesized 300-bus transmission grid.
Node/edge/critical counts for each are pinned by tests; the grid is
generated deterministically (tools/gen_ieee300.py rewrites the shipped
data file) because the real branch data is directed-cycle-ridden and not
available here.

Unless a builder says otherwise, edges default to p0 = 0.8 and s = 1, and
critical assets carry a loss of 100.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .behavior import DefenderSpec
from .graph import DEFAULT_LOSS, AttackGraph, Edge, EdgeKey, NodeId

# -- small fixtures -------------------------------------------------------

DIAMOND_NODES = ("s", "a", "b", "c", "d", "t")
#: entry, branch-1 pair, branch-2 pair, exit
DIAMOND_EDGES: tuple[EdgeKey, ...] = (
    ("s", "a"),
    ("a", "b"),
    ("b", "d"),
    ("a", "c"),
    ("c", "d"),
    ("d", "t"),
)


def two_path_diamond(
    p0: float = 1.0,
    entry_s: float = 1.0,
    exit_s: float = 1.0,
    interior_s: float = 1.0,
    loss: float = 1.0,
) -> AttackGraph:
    """Single entry edge, two 2-edge branches, single exit edge to the target."""
    (s, a), (a2, b), (b2, d), (a3, c), (c2, d2), (d3, t) = DIAMOND_EDGES
    sens = {
        ("s", "a"): entry_s,
        ("a", "b"): interior_s,
        ("b", "d"): interior_s,
        ("a", "c"): interior_s,
        ("c", "d"): interior_s,
        ("d", "t"): exit_s,
    }
    edges = [Edge(u, v, p0=p0, s=sens[(u, v)]) for u, v in DIAMOND_EDGES]
    return AttackGraph(
        nodes=list(DIAMOND_NODES),
        edges=edges,
        sources=["s"],
        critical_assets={"t": loss},
    )


def diamond_defender(
    budget: float, alpha: float = 1.0, eta: float = 0.0
) -> DefenderSpec:
    return DefenderSpec(
        id="d1",
        edge_set=frozenset(DIAMOND_EDGES),
        assets=frozenset({"t"}),
        budget=budget,
        alpha=alpha,
        eta=eta,
    )


def crossed_diamond(p0: float = 1.0, loss: float = 1.0) -> AttackGraph:
    """Diamond with a cross edge between the branches: three attack paths."""
    keys = [("s", "a"), ("a", "b"), ("a", "c"), ("b", "c"), ("b", "d"),
            ("c", "d"), ("d", "t")]
    return AttackGraph(
        nodes=list(DIAMOND_NODES),
        edges=[Edge(u, v, p0=p0, s=1.0) for u, v in keys],
        sources=["s"],
        critical_assets={"t": loss},
    )


def shared_edge_pair(
    budget: float = 5.0, alpha: float = 0.8
) -> tuple[AttackGraph, list[DefenderSpec]]:
    """Two defenders with private targets plus one shared edge and asset.

    Both defenders may invest on the shared edge, so each one's best
    response depends on the other's allocation; per-defender problems are
    strictly convex, which makes best responses unique.
    """
    graph = AttackGraph(
        nodes=["vs", "t1", "t2", "c"],
        edges=[
            Edge("vs", "t1", p0=1.0, s=1.0),
            Edge("vs", "t2", p0=1.0, s=1.0),
            Edge("vs", "c", p0=1.0, s=1.0),
        ],
        sources=["vs"],
        critical_assets={"t1": 100.0, "t2": 100.0, "c": 100.0},
    )
    d1 = DefenderSpec(
        id="d1",
        edge_set=frozenset({("vs", "t1"), ("vs", "c")}),
        assets=frozenset({"t1", "c"}),
        budget=budget,
        alpha=alpha,
    )
    d2 = DefenderSpec(
        id="d2",
        edge_set=frozenset({("vs", "t2"), ("vs", "c")}),
        assets=frozenset({"t2", "c"}),
        budget=budget,
        alpha=alpha,
    )
    return graph, [d1, d2]


def split_chain_pair(
    total_budget: float = 4.0,
    split: tuple[float, float] = (0.5, 0.5),
    alpha: float = 1.0,
) -> tuple[AttackGraph, list[DefenderSpec]]:
    """Two disjoint source-chain-target lanes, one defender per lane.

    Fully decoupled: with a symmetric split the equilibrium total loss
    equals the pooled-budget planner optimum exactly.
    """
    graph = AttackGraph(
        nodes=["s1", "a1", "t1", "s2", "a2", "t2"],
        edges=[
            Edge("s1", "a1", p0=1.0, s=1.0),
            Edge("a1", "t1", p0=1.0, s=1.0),
            Edge("s2", "a2", p0=1.0, s=1.0),
            Edge("a2", "t2", p0=1.0, s=1.0),
        ],
        sources=["s1", "s2"],
        critical_assets={"t1": 100.0, "t2": 100.0},
    )
    defenders = [
        DefenderSpec(
            id="d1",
            edge_set=frozenset({("s1", "a1"), ("a1", "t1")}),
            assets=frozenset({"t1"}),
            budget=total_budget * split[0],
            alpha=alpha,
        ),
        DefenderSpec(
            id="d2",
            edge_set=frozenset({("s2", "a2"), ("a2", "t2")}),
            assets=frozenset({"t2"}),
            budget=total_budget * split[1],
            alpha=alpha,
        ),
    ]
    return graph, defenders


# -- case studies ---------------------------------------------------------


@dataclass
class CaseStudy:
    name: str
    graph: AttackGraph
    defenders: list[DefenderSpec]
    description: str = ""
    options: dict = field(default_factory=dict)

    @property
    def total_budget(self) -> float:
        return sum(d.budget for d in self.defenders)


def _scada(
    internal: bool,
    rtu_count: int = 3,
    interdependency_level: int = 0,
    budget: float = 50.0,
    alpha: float = 1.0,
    eta: float = 0.0,
) -> CaseStudy:
    if rtu_count < 3:
        raise ValueError("rtu_count must be at least 3")
    if not (0 <= interdependency_level <= 8):
        raise ValueError("interdependency_level must lie in 0..8")
    rtus1 = [f"RTU1_{i}" for i in range(1, rtu_count + 1)]
    rtus2 = [f"RTU2_{i}" for i in range(1, rtu_count + 1)]
    nodes = ["S", "Corp", "Vendor", "DMZ1", "Control1", *rtus1,
             "DMZ2", "Control2", *rtus2]

    edges = [
        Edge("S", "Corp", p0=0.8),
        Edge("S", "Vendor", p0=0.9),
        Edge("Corp", "Vendor", p0=0.8),
        Edge("Corp", "DMZ1", p0=0.75),
        Edge("Vendor", "DMZ1", p0=0.8),
        Edge("Corp", "DMZ2", p0=0.75),
        Edge("Vendor", "DMZ2", p0=0.8),
        Edge("Vendor", "Control1", p0=0.78),
        Edge("Corp", "Control1", p0=0.8),
        Edge("Vendor", "Control2", p0=0.78),
        Edge("Corp", "Control2", p0=0.8),
        Edge("DMZ2", "Control2", p0=0.8),
    ]
    # RTU wiring repeats in blocks of three: the first unit of each block is
    # dual-homed (control network plus a DMZ maintenance link), the other two
    # hang off the control network alone.
    for ctl, dmz, rtus in (("Control1", "DMZ1", rtus1),
                           ("Control2", "DMZ2", rtus2)):
        for j, rtu in enumerate(rtus):
            edges.append(Edge(ctl, rtu, p0=1.0 if j % 3 < 2 else 0.8))
            if j % 3 == 0:
                edges.append(Edge(dmz, rtu, p0=0.8))

    if internal:
        edges += [
            Edge("S", "DMZ1", p0=0.8),
            Edge("S", "DMZ2", p0=0.8),
            Edge("S", "Control1", p0=0.8),
            Edge("S", "Control2", p0=0.8),
            Edge("S", rtus1[0], p0=0.8),
            Edge("S", rtus2[0], p0=0.8),
        ]

    cross = [
        ("DMZ1", "DMZ2"),
        ("Control1", "Control2"),
        ("Control1", "RTU2_1"),
        ("Control1", "RTU2_2"),
        ("Control1", "RTU2_3"),
        ("Control2", "RTU1_1"),
        ("Control2", "RTU1_2"),
        ("Control2", "RTU1_3"),
    ]
    for u, v in cross[:interdependency_level]:
        edges.append(Edge(u, v, p0=0.8))

    # Six critical assets at the default size: operator 1 guards her control
    # unit, her DMZ, and the first two RTUs of each block; operator 2 guards
    # the corporate network plus the dual-homed RTU of each block.
    crit1 = ["Control1", "DMZ1"] + [r for j, r in enumerate(rtus1) if j % 3 < 2]
    crit2 = ["Corp"] + [r for j, r in enumerate(rtus2) if j % 3 == 0]
    criticals = {m: DEFAULT_LOSS for m in crit1 + crit2}
    graph = AttackGraph(nodes, edges, sources=["S"], critical_assets=criticals)

    sub1 = {"DMZ1", "Control1", *rtus1}
    sub2 = {"DMZ2", "Control2", *rtus2}
    own1 = frozenset(e.key for e in edges if e.dst in sub1)
    own2 = frozenset(e.key for e in edges if e.dst in sub2)
    defenders = [
        DefenderSpec("d1", own1, frozenset(crit1), budget / 2, alpha, eta),
        DefenderSpec("d2", own2, frozenset(crit2), budget / 2, alpha, eta),
    ]
    name = "scada_internal" if internal else "scada_external"
    return CaseStudy(
        name=name,
        graph=graph,
        defenders=defenders,
        description=(
            "Two-subnetwork SCADA system, one defender per subnetwork. The "
            "corporate and vendor networks sit upstream of both subnetworks; "
            "their own inbound links are shared infrastructure owned by "
            "neither defender (the pooled planner may still invest on them)."
            + (" Includes insider footholds." if internal else "")
        ),
        options={
            "rtu_count": rtu_count,
            "interdependency_level": interdependency_level,
        },
    )


def _der1(budget: float = 30.0, alpha: float = 1.0, eta: float = 0.0) -> CaseStudy:
    side_a = [
        Edge("w9", "w7", p0=0.71), Edge("w9", "w8", p0=0.61),
        Edge("w7", "w6", p0=0.82), Edge("w8", "w6", p0=0.82),
        Edge("w7", "w5"), Edge("w6", "w5", p0=0.88),
        Edge("w5", "w4"), Edge("w5", "w3"),
        Edge("w4", "w2"), Edge("w3", "w2"), Edge("w2", "w1"),
    ]
    side_b = [
        Edge("w18", "w16", p0=0.71), Edge("w18", "w17", p0=0.61),
        Edge("w16", "w15", p0=0.82), Edge("w17", "w15", p0=0.82),
        Edge("w16", "w14"), Edge("w15", "w14", p0=0.88),
        Edge("w14", "w13"), Edge("w14", "w12"),
        Edge("w13", "w11"), Edge("w12", "w11"), Edge("w11", "w10"),
    ]
    shared = [
        Edge("S", "w19"), Edge("S", "w20"),
        Edge("w19", "w21"), Edge("w20", "w21"),
        Edge("w19", "w9"), Edge("w20", "w9"), Edge("w21", "w9"),
        Edge("w19", "w18"), Edge("w20", "w18"), Edge("w21", "w18"),
    ]
    nodes = ["S"] + [f"w{i}" for i in range(1, 22)]
    graph = AttackGraph(
        nodes,
        side_a + side_b + shared,
        sources=["S"],
        critical_assets={"w1": DEFAULT_LOSS, "w10": DEFAULT_LOSS},
    )
    set_a = {f"w{i}" for i in range(1, 10)}
    set_b = {f"w{i}" for i in range(10, 19)}
    own1 = frozenset(e.key for e in graph.edges if e.dst in set_a)
    own2 = frozenset(e.key for e in graph.edges if e.dst in set_b)
    defenders = [
        DefenderSpec("d1", own1, frozenset({"w1"}), budget / 2, alpha, eta),
        DefenderSpec("d2", own2, frozenset({"w10"}), budget / 2, alpha, eta),
    ]
    return CaseStudy(
        name="der1",
        graph=graph,
        defenders=defenders,
        description=(
            "Distributed-energy site: two mirrored device chains (PV and EV "
            "charging controllers as the critical assets) reached through a "
            "shared corporate/vendor/workstation layer owned by neither "
            "defender."
        ),
    )


def _ecommerce(budget: float = 20.0, alpha: float = 1.0, eta: float = 0.0) -> CaseStudy:
    keys = [
        ("S", "lb"),
        ("lb", "cdn"), ("lb", "web1"), ("lb", "web2"), ("lb", "web3"),
        ("web1", "api1"), ("web2", "api1"), ("web2", "api2"), ("web3", "api2"),
        ("api1", "cache"), ("api2", "cache"), ("api1", "auth"), ("api2", "auth"),
        ("api1", "queue"), ("api2", "queue"),
        ("auth", "db1"), ("cache", "db1"), ("auth", "db2"), ("cache", "db2"),
        ("queue", "pay"), ("auth", "admin"), ("admin", "pay"),
        ("db1", "backup"), ("db2", "backup"),
        ("queue", "logs"), ("api2", "search"),
    ]
    nodes = ["S", "lb", "cdn", "web1", "web2", "web3", "api1", "api2",
             "cache", "auth", "queue", "search", "logs", "admin",
             "db1", "db2", "pay", "backup"]
    criticals = {m: DEFAULT_LOSS for m in ("db1", "db2", "pay", "backup")}
    graph = AttackGraph(
        nodes, [Edge(u, v) for u, v in keys], sources=["S"], critical_assets=criticals
    )
    defenders = [
        DefenderSpec(
            "d1", frozenset(graph.edge_keys()), frozenset(criticals), budget, alpha, eta
        )
    ]
    return CaseStudy(
        name="ecommerce",
        graph=graph,
        defenders=defenders,
        description=(
            "Single-organization web shop behind one load-balancer ingress "
            "(the unique minimum cut); databases, payments, and backups are "
            "the critical assets."
        ),
    )


def _voip(budget: float = 20.0, alpha: float = 1.0, eta: float = 0.0) -> CaseStudy:
    keys = [
        ("S", "sbc"), ("S", "mail"),
        ("sbc", "proxy1"), ("sbc", "proxy2"), ("sbc", "turn"),
        ("mail", "mgmt"), ("mail", "dhcp"),
        ("proxy1", "reg"), ("proxy2", "reg"),
        ("proxy1", "pbx1"), ("proxy2", "pbx2"), ("reg", "pbx1"), ("reg", "pbx2"),
        ("mgmt", "tftp"), ("dhcp", "tftp"),
        ("tftp", "phones1"), ("tftp", "phones2"),
        ("phones1", "pbx1"), ("phones2", "pbx2"),
        ("turn", "mediagw"), ("pbx1", "mediagw"), ("pbx2", "mediagw"),
        ("pbx1", "vm"), ("vm", "rec"),
        ("pbx1", "billing"), ("billing", "cdrdb"), ("pbx2", "cdrdb"),
        ("mgmt", "ids"),
    ]
    nodes = ["S", "sbc", "mail", "turn", "proxy1", "proxy2", "reg", "mgmt",
             "dhcp", "tftp", "phones1", "phones2", "ids", "pbx1", "pbx2",
             "vm", "mediagw", "rec", "billing", "cdrdb"]
    criticals = {m: DEFAULT_LOSS for m in ("pbx1", "pbx2", "mediagw", "cdrdb")}
    graph = AttackGraph(
        nodes, [Edge(u, v) for u, v in keys], sources=["S"], critical_assets=criticals
    )
    defenders = [
        DefenderSpec(
            "d1", frozenset(graph.edge_keys()), frozenset(criticals), budget, alpha, eta
        )
    ]
    return CaseStudy(
        name="voip",
        graph=graph,
        defenders=defenders,
        description=(
            "Enterprise VoIP deployment with a session-border and a mail "
            "entry (two-edge minimum cut); call managers, the media gateway, "
            "and the call-record store are critical."
        ),
    )


# -- synthesized 300-bus grid ----------------------------------------------

_IEEE300_SEED = 20240300


def _synth_ieee300() -> AttackGraph:
    """Deterministic 300-node transmission-grid attack DAG.

    Three regions (159/78/63 buses) with entry buses b39, b245, b272.
    69 generator buses are the critical assets; losses scale with feed
    redundancy, like capacities. The core is layered entry -> hub ->
    mid -> generator with one hub and one mid per generator-feed edge, so
    the 98 feed edges form a global minimum cut: they sever every path,
    and the distinct hub/mid chains give 98 edge-disjoint paths. A
    same-region hub-to-mid mesh overlay (at most five extra feeds per
    mid) and load pockets below the generators supply the remaining
    branches without touching the cut.
    """
    rng = np.random.default_rng(_IEEE300_SEED)
    ids = [f"b{i}" for i in range(1, 301)]
    r1 = ids[:159]
    r2 = ids[159:237]
    r3 = ids[237:]
    e1, e2, e3 = "b39", "b245", "b272"

    r1_rest = [n for n in r1 if n != e1]
    r3_rest = [n for n in r3 if n not in (e2, e3)]

    r1_hubs, r1_mids = r1_rest[:52], r1_rest[52:104]
    r1_gens, r1_loads = r1_rest[104:141], r1_rest[141:]
    r2_hubs, r2_mids = r2[:24], r2[24:48]
    r2_gens, r2_loads = r2[48:65], r2[65:]
    r3_hubs, r3_mids = r3_rest[:22], r3_rest[22:44]
    r3_gens, r3_loads = r3_rest[44:59], r3_rest[59:]
    assert len(r1_gens) == 37 and len(r2_gens) == 17 and len(r3_gens) == 15
    assert len(r1_loads) == 17 and len(r2_loads) == 13 and len(r3_loads) == 2

    edges: list[Edge] = []
    edges += [Edge(e1, h, p0=0.85) for h in r1_hubs]
    entries = (e1, e2, e3)
    edges += [Edge(entries[i % 3], h, p0=0.85) for i, h in enumerate(r2_hubs)]
    edges += [Edge(e2, h, p0=0.85) for h in r3_hubs[:11]]
    edges += [Edge(e3, h, p0=0.85) for h in r3_hubs[11:]]

    hubs = r1_hubs + r2_hubs + r3_hubs
    mids = r1_mids + r2_mids + r3_mids
    edges += [Edge(h, m, p0=0.8) for h, m in zip(hubs, mids)]

    def feed(gens, two_parent_count, mid_pool):
        # one distinct mid per generator-feed edge keeps the 98 paths disjoint
        k = 0
        indeg = {}
        for i, g in enumerate(gens):
            parents = 2 if i < two_parent_count else 1
            indeg[g] = parents
            for _ in range(parents):
                edges.append(Edge(mid_pool[k], g, p0=0.9))
                k += 1
        assert k == len(mid_pool)
        return indeg

    indegrees = feed(r1_gens, 15, r1_mids)
    indegrees |= feed(r2_gens, 7, r2_mids)
    indegrees |= feed(r3_gens, 7, r3_mids)

    # mesh overlay: extra same-region hub-to-mid feeds (so each region's
    # attack paths stay within edges that region's defender owns),
    # skipping each mid's own hub
    own_hub = dict(zip(mids, hubs))
    region_mesh = [
        (r1_hubs, r1_mids, 175),
        (r2_hubs, r2_mids, 81),
        (r3_hubs, r3_mids, 74),
    ]
    for hub_pool, mid_pool, quota in region_mesh:
        pairs = [(h, m) for m in mid_pool for h in hub_pool if h != own_hub[m]]
        order = rng.permutation(len(pairs))
        mesh_load: dict[str, int] = {}
        taken = 0
        for idx in order:
            h, m = pairs[int(idx)]
            if mesh_load.get(m, 0) >= 5:
                continue
            edges.append(Edge(h, m, p0=float(np.round(rng.uniform(0.7, 0.9), 3))))
            mesh_load[m] = mesh_load.get(m, 0) + 1
            taken += 1
            if taken == quota:
                break
        assert taken == quota

    # load pockets strictly below the generator core: not on attack paths
    def decorate(loads, upstream, per_load):
        placed: list[str] = []
        for ld, want in zip(loads, per_load):
            pool = upstream + placed
            parents = rng.choice(len(pool), size=min(want, len(pool)), replace=False)
            for j in sorted(int(p) for p in parents):
                edges.append(
                    Edge(pool[j], ld, p0=float(np.round(rng.uniform(0.6, 0.95), 3)))
                )
            placed.append(ld)

    n_loads = len(r1_loads) + len(r2_loads) + len(r3_loads)
    budget_deco = 822 - len(edges)
    per_load = [budget_deco // n_loads + (1 if i < budget_deco % n_loads else 0)
                for i in range(n_loads)]
    decorate(r1_loads, r1_hubs + r1_mids + r1_gens, per_load[: len(r1_loads)])
    decorate(r2_loads, r2_hubs + r2_mids + r2_gens,
             per_load[len(r1_loads) : len(r1_loads) + len(r2_loads)])
    decorate(r3_loads, r3_hubs + r3_mids + r3_gens, per_load[-len(r3_loads) :])

    losses = {
        g: float(indegrees[g] * np.round(rng.uniform(475.0, 500.0), 1))
        for g in r1_gens + r2_gens + r3_gens
    }
    return AttackGraph(
        nodes=ids, edges=edges, sources=[e1, e2, e3], critical_assets=losses
    )


def _ieee300(
    budget: float = 200.0, alpha: float = 1.0, eta: float = 0.0
) -> CaseStudy:
    try:
        text = resources.files("bgame").joinpath("data/ieee300.json").read_text()
        graph = AttackGraph.from_dict(json.loads(text))
    except FileNotFoundError:
        graph = _synth_ieee300()
    regions = {
        "r1": {f"b{i}" for i in range(1, 160)},
        "r2": {f"b{i}" for i in range(160, 238)},
        "r3": {f"b{i}" for i in range(238, 301)},
    }
    budgets = {"r1": budget * 0.35, "r2": budget * 0.325, "r3": budget * 0.325}
    defenders = []
    for rid, members in regions.items():
        own = frozenset(e.key for e in graph.edges if e.dst in members)
        assets = frozenset(m for m in graph.critical_assets if m in members)
        defenders.append(
            DefenderSpec(rid, own, assets, budgets[rid], alpha, eta)
        )
    return CaseStudy(
        name="ieee300",
        graph=graph,
        defenders=defenders,
        description=(
            "Synthesized 300-bus transmission grid in three regions; the 69 "
            "generator buses are critical with capacity-scaled losses. "
            "Regenerate the data file with tools/gen_ieee300.py."
        ),
    )


BUILTIN_NAMES = (
    "scada_external",
    "scada_internal",
    "der1",
    "ecommerce",
    "voip",
    "ieee300",
)

FIXTURE_NAMES = ("diamond", "crossed_diamond", "shared_edge_pair", "split_chain_pair")


def build_case_study(name: str, **options) -> CaseStudy:
    """Build a builtin by name. SCADA variants accept rtu_count and
    interdependency_level; every builder accepts budget, alpha, and eta."""
    builders = {
        "scada_external": lambda **kw: _scada(False, **kw),
        "scada_internal": lambda **kw: _scada(True, **kw),
        "der1": _der1,
        "ecommerce": _ecommerce,
        "voip": _voip,
        "ieee300": _ieee300,
    }
    if name in builders:
        return builders[name](**options)
    if name == "diamond":
        budget = options.pop("budget", 10.0)
        alpha = options.pop("alpha", 0.5)
        eta = options.pop("eta", 0.0)
        graph = two_path_diamond(**options)
        return CaseStudy(
            name="diamond",
            graph=graph,
            defenders=[diamond_defender(budget, alpha, eta)],
            description="Two-path diamond fixture with unit baseline probabilities.",
        )
    if name == "crossed_diamond":
        budget = options.pop("budget", 10.0)
        alpha = options.pop("alpha", 0.5)
        graph = crossed_diamond(**options)
        return CaseStudy(
            name="crossed_diamond",
            graph=graph,
            defenders=[
                DefenderSpec(
                    "d1",
                    frozenset(graph.edge_keys()),
                    frozenset({"t"}),
                    budget,
                    alpha,
                )
            ],
            description="Three-path crossed diamond fixture.",
        )
    if name == "shared_edge_pair":
        graph, defenders = shared_edge_pair(**options)
        return CaseStudy(
            name="shared_edge_pair",
            graph=graph,
            defenders=defenders,
            description="Two defenders sharing one edge and one asset.",
        )
    if name == "split_chain_pair":
        graph, defenders = split_chain_pair(**options)
        return CaseStudy(
            name="split_chain_pair",
            graph=graph,
            defenders=defenders,
            description="Two decoupled chains, one defender each.",
        )
    raise KeyError(
        f"unknown case study {name!r}; builtins: {', '.join(BUILTIN_NAMES)}; "
        f"fixtures: {', '.join(FIXTURE_NAMES)}"
    )
