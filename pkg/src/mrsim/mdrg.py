"""Multi-dimensional Reeb graph over a JCN, plus branch decomposition.

Layer 0 is the quantized Reeb graph of the first field over the whole JCN.
Every node of a layer-i graph is a connected set of JCN nodes sharing one
bin of field i; restricting to that set and quotienting by field i+1 gives
the layer-(i+1) graphs. The last layer's nodes are single JCN nodes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import networkx as nx

from .jcn import JcnGraph


@dataclass(frozen=True)
class ReebGraphQ:
    dim: int
    nodes: tuple[frozenset[int], ...]  # JCN node ids per Reeb node
    bins: tuple[int, ...]  # active-field bin per Reeb node
    edges: tuple[tuple[int, int], ...]

    def degree(self) -> list[int]:
        deg = [0] * len(self.nodes)
        for a, b in self.edges:
            deg[a] += 1
            deg[b] += 1
        return deg


def quotient_reeb_graph(jcn_nodes, jcn: JcnGraph, dim: int) -> ReebGraphQ:
    """Quotient a set of JCN nodes by equal bin of field ``dim``.

    Two nodes of the set are identified when a chain of JCN edges inside the
    set connects them without changing the ``dim`` bin.
    """
    members = sorted(set(jcn_nodes))
    if not members:
        raise ValueError("empty JCN node set")
    if not 0 <= dim < jcn.n_fields:
        raise ValueError(f"dim {dim} out of range for {jcn.n_fields} fields")
    inside = set(members)
    bin_of = {m: jcn.nodes[m].bin_tuple[dim] for m in members}
    g = nx.Graph()
    g.add_nodes_from(members)
    crossing = []
    for a in members:
        for b in jcn.neighbors[a]:
            if b <= a or b not in inside:
                continue
            if bin_of[a] == bin_of[b]:
                g.add_edge(a, b)
            else:
                crossing.append((a, b))
    classes = sorted(
        (frozenset(c) for c in nx.connected_components(g)),
        key=lambda c: (bin_of[min(c)], min(c)),
    )
    cls_of = {m: i for i, c in enumerate(classes) for m in c}
    edges = sorted({tuple(sorted((cls_of[a], cls_of[b]))) for a, b in crossing})
    return ReebGraphQ(
        dim,
        tuple(classes),
        tuple(bin_of[min(c)] for c in classes),
        tuple(edges),
    )


def branch_decompose(rg: ReebGraphQ) -> list[int]:
    """Branch id per Reeb node.

    Branches are the connected runs of nodes with degree <= 2. A junction
    (degree >= 3) joins the branch of its lowest-bin regular neighbour, or
    forms its own branch when all its neighbours are junctions. A cycle
    without junctions is a single branch. Ids are ordered by
    (lowest bin, smallest member JCN id).
    """
    n = len(rg.nodes)
    deg = rg.degree()
    adj: list[list[int]] = [[] for _ in range(n)]
    for a, b in rg.edges:
        adj[a].append(b)
        adj[b].append(a)
    regular = nx.Graph()
    regular.add_nodes_from(i for i in range(n) if deg[i] <= 2)
    regular.add_edges_from((a, b) for a, b in rg.edges if deg[a] <= 2 and deg[b] <= 2)
    group = {}
    for g, comp in enumerate(nx.connected_components(regular)):
        for i in comp:
            group[i] = g
    n_groups = len(set(group.values()))
    for i in range(n):
        if deg[i] <= 2:
            continue
        low = [j for j in adj[i] if deg[j] <= 2]
        if low:
            j = min(low, key=lambda j: (rg.bins[j], min(rg.nodes[j])))
            group[i] = group[j]
        else:
            group[i] = n_groups
            n_groups += 1
    keys = {}
    for i in range(n):
        key = (rg.bins[i], min(rg.nodes[i]))
        g = group[i]
        keys[g] = min(keys.get(g, key), key)
    order = {g: r for r, g in enumerate(sorted(keys, key=keys.get))}
    return [order[group[i]] for i in range(n)]


@dataclass(frozen=True)
class MdrgNode:
    dim: int
    members: frozenset[int]
    branch: int  # global branch id within its dimension
    children: tuple["MdrgNode", ...]


@dataclass(frozen=True)
class Mdrg:
    n_dims: int
    roots: tuple[MdrgNode, ...]  # layer-0 Reeb nodes
    layers: tuple[tuple[ReebGraphQ, ...], ...]
    # branch_of[d][jcn_id] -> global branch id of the node containing it at dimension d
    branch_of: tuple[dict[int, int], ...]

    def branch_members(self, dim: int) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {}
        for node, br in sorted(self.branch_of[dim].items()):
            out.setdefault(br, []).append(node)
        return out

    def to_dict(self) -> dict:
        def enc(node: MdrgNode, nid: int) -> dict:
            return {
                "id": nid,
                "members": sorted(node.members),
                "branch": node.branch,
                "children": [enc(c, i) for i, c in enumerate(node.children)],
            }

        return {"dim": 0, "nodes": [enc(r, i) for i, r in enumerate(self.roots)]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)


def build_mdrg(jcn: JcnGraph) -> Mdrg:
    n = jcn.n_fields
    layers: list[list[ReebGraphQ]] = [[] for _ in range(n)]
    branch_of: list[dict[int, int]] = [{} for _ in range(n)]
    offsets = [0] * n

    def expand(members, dim: int) -> tuple[MdrgNode, ...]:
        rg = quotient_reeb_graph(members, jcn, dim)
        layers[dim].append(rg)
        local = branch_decompose(rg)
        base = offsets[dim]
        offsets[dim] += max(local) + 1
        out = []
        for cls, br in zip(rg.nodes, local):
            for m in cls:
                branch_of[dim][m] = base + br
            kids = expand(cls, dim + 1) if dim + 1 < n else ()
            out.append(MdrgNode(dim, cls, base + br, kids))
        return tuple(out)

    roots = expand(range(len(jcn.nodes)), 0) if jcn.nodes else ()
    return Mdrg(n, roots, tuple(tuple(l) for l in layers), tuple(branch_of))
