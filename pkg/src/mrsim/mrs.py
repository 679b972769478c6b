"""Multi-resolution Reeb space: a chain of JCNs at dyadic levels 0..N-1.

Only the finest JCN is built from the mesh. Each coarser one is obtained by
merging bins pairwise and grouping adjacent nodes that fall into the same
merged bin, so every coarse node has a well-defined set of children.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .field import MultiFieldDataset
from .jcn import JcnGraph, assemble_graph, build_jcn


class InvariantError(RuntimeError):
    """An internal structural invariant did not hold."""


@dataclass(frozen=True, eq=False)
class MrsStructure:
    jcns: tuple[JcnGraph, ...]
    # parent_maps[k] maps level-k node ids to level-(k-1) ids; entry 0 is empty.
    parent_maps: tuple[tuple[int, ...], ...]
    mode: str = "fragment"
    scheme: str = "floor"

    @property
    def n_levels(self) -> int:
        return len(self.jcns)

    def parent(self, level: int, node: int) -> int:
        return self.parent_maps[level][node]

    def truncated(self, n_levels: int) -> "MrsStructure":
        """The first ``n_levels`` levels.

        Coarsening is exact, so this equals an MRS built directly with
        ``n_levels`` levels.
        """
        if not 1 <= n_levels <= self.n_levels:
            raise ValueError(f"cannot truncate {self.n_levels} levels to {n_levels}")
        return MrsStructure(self.jcns[:n_levels], self.parent_maps[:n_levels], self.mode, self.scheme)

    def to_dict(self) -> dict:
        parents = [
            {"level": k, "child": c, "parent": p}
            for k in range(1, self.n_levels)
            for c, p in enumerate(self.parent_maps[k])
        ]
        return {"levels": [j.to_dict() for j in self.jcns], "parents": parents}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)


def create_coarser_reeb_space(fine: JcnGraph) -> tuple[JcnGraph, tuple[int, ...]]:
    """One coarsening step: level k to level k-1.

    Fine nodes whose bins halve to the same merged bin box and that are
    joined by fine edges inside that box form one coarse node. Coarse edges
    join coarse nodes whose children were adjacent and whose merged bins
    differ. Returns the coarse graph and the child -> parent id map.
    """
    if fine.level < 1:
        raise ValueError("level-0 JCN has no coarser resolution")
    quant = fine.quantization.coarser()
    merged = [tuple(b // 2 for b in n.bin_tuple) for n in fine.nodes]
    # Pairs of fine nodes inside the same merged box are unioned; every other
    # fine edge becomes a candidate coarse edge.
    internal = [(a, b) for a, b in fine.edges if merged[a] == merged[b]]
    boundary = [(a, b) for a, b in fine.edges if merged[a] != merged[b]]
    coarse, parent_of = assemble_graph(
        fine.level - 1,
        quant,
        fine.total_measure,
        merged,
        [n.measure for n in fine.nodes],
        [n.anchor for n in fine.nodes],
        [n.fragment_ids for n in fine.nodes],
        internal,
        boundary,
    )
    return coarse, tuple(int(p) for p in parent_of)


def build_mrs(
    dataset: MultiFieldDataset,
    n_levels: int,
    mode: str = "fragment",
    scheme: str = "floor",
) -> MrsStructure:
    """Build the finest JCN at level ``n_levels - 1`` and coarsen down to level 0."""
    if n_levels < 1:
        raise ValueError(f"n_levels must be >= 1, got {n_levels}")
    jcns = [build_jcn(dataset, n_levels - 1, mode, scheme)]
    maps: list[tuple[int, ...]] = []
    while jcns[-1].level > 0:
        coarse, parents = create_coarser_reeb_space(jcns[-1])
        maps.append(parents)
        jcns.append(coarse)
    jcns.reverse()
    maps.reverse()
    return MrsStructure(tuple(jcns), ((),) + tuple(maps), mode, scheme)


def jcn_isomorphic(a: JcnGraph, b: JcnGraph, rel_tol: float = 1e-9) -> list[str]:
    """Differences between two JCNs of the same level; empty when isomorphic.

    Nodes correspond through their (bin tuple, anchor simplex) key, which is
    unique per node, so the check is exact rather than a graph search.
    """
    problems = []
    ka = {n.sort_key: n for n in a.nodes}
    kb = {n.sort_key: n for n in b.nodes}
    if set(ka) != set(kb):
        missing = sorted(set(ka) ^ set(kb))[:5]
        return [f"node sets differ (e.g. {missing})"]
    for key, na in ka.items():
        nb = kb[key]
        if not math.isclose(na.attrs.volume, nb.attrs.volume, rel_tol=rel_tol, abs_tol=1e-15):
            problems.append(f"volume differs at {key}: {na.attrs.volume} vs {nb.attrs.volume}")
    ea = {tuple(sorted((a.nodes[x].sort_key, a.nodes[y].sort_key))) for x, y in a.edges}
    eb = {tuple(sorted((b.nodes[x].sort_key, b.nodes[y].sort_key))) for x, y in b.edges}
    if ea != eb:
        problems.append(f"edge relations differ ({len(ea ^ eb)} edges)")
    return problems


@dataclass
class NestingReport:
    checks: dict[str, bool] = field(default_factory=dict)
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def record(self, name: str, problems: list[str]) -> None:
        self.checks[name] = self.checks.get(name, True) and not problems
        self.failures.extend(f"{name}: {p}" for p in problems)


def verify_nesting(
    mrs: MrsStructure,
    dataset: MultiFieldDataset | None = None,
    rel_tol: float = 1e-9,
) -> NestingReport:
    """Check parent maps, bin halving, volume aggregation and, when the
    dataset is given, that every coarsened level equals a direct build."""
    report = NestingReport()
    for k in range(mrs.n_levels):
        jcn = mrs.jcns[k]
        total = math.fsum(n.attrs.volume for n in jcn.nodes)
        report.record(
            "volume_sum",
            [] if math.isclose(total, 1.0, rel_tol=rel_tol) else [f"level {k}: sum {total!r}"],
        )
        if k == 0:
            continue
        coarse = mrs.jcns[k - 1]
        pmap = mrs.parent_maps[k]
        problems = []
        if len(pmap) != len(jcn.nodes):
            problems.append(f"level {k}: {len(pmap)} parents for {len(jcn.nodes)} nodes")
        bad = [c for c, p in enumerate(pmap) if not 0 <= p < len(coarse.nodes)]
        if bad:
            problems.append(f"level {k}: parent ids out of range for children {bad[:5]}")
        report.record("totality", problems)
        if problems:
            continue
        orphans = sorted(set(range(len(coarse.nodes))) - set(pmap))
        report.record(
            "surjectivity", [f"level {k - 1}: childless nodes {orphans[:5]}"] if orphans else []
        )
        halving = [
            c
            for c, p in enumerate(pmap)
            if coarse.nodes[p].bin_tuple != tuple(b // 2 for b in jcn.nodes[c].bin_tuple)
        ]
        report.record("bin_halving", [f"level {k}: children {halving[:5]}"] if halving else [])
        sums = np.zeros(len(coarse.nodes))
        for c, p in enumerate(pmap):
            sums[p] += jcn.nodes[c].attrs.volume
        agg = [
            p
            for p, node in enumerate(coarse.nodes)
            if not math.isclose(node.attrs.volume, sums[p], rel_tol=rel_tol, abs_tol=1e-15)
        ]
        report.record("volume_aggregation", [f"level {k - 1}: parents {agg[:5]}"] if agg else [])
    if dataset is not None:
        for k in range(mrs.n_levels):
            direct = build_jcn(dataset, k, mrs.mode, mrs.scheme)
            report.record(
                "coarsen_vs_direct",
                [f"level {k}: {p}" for p in jcn_isomorphic(mrs.jcns[k], direct, rel_tol)],
            )
    return report
