"""Joint Contour Net construction.

Every simplex is cut into convex fragments along the quantization cuts of
each field. Fragments in the same bin that share a facet are merged into
joint contours (the graph nodes); fragments in different bins that share a
facet put an edge between their nodes.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .field import MultiFieldDataset, Quantization, make_quantization
from .geometry import PLANE_EPS, affine_measure, hull_reduce, on_planes, split

# Fragments and shared facets below this fraction of the simplex measure are
# numerical slivers and are ignored.
SLIVER = 1e-12


@dataclass(frozen=True, eq=False)
class Fragment:
    parent_simplex: int
    index: int  # position among the parent simplex's fragments
    bary: np.ndarray  # vertices, barycentric in the parent simplex
    polytope: np.ndarray  # vertices, world coordinates
    bin_tuple: tuple[int, ...]
    measure: float


@dataclass(frozen=True)
class NodeAttrs:
    volume: float
    range_measure: float
    component_count: int
    degree: int


@dataclass(frozen=True)
class JcnNode:
    id: int
    bin_tuple: tuple[int, ...]
    fragment_ids: tuple[int, ...]
    measure: float
    anchor: int  # smallest simplex index touched; unique per bin tuple
    level: int
    attrs: NodeAttrs | None = None

    @property
    def sort_key(self):
        return (self.bin_tuple, self.anchor)


@dataclass(frozen=True, eq=False)
class JcnGraph:
    level: int
    nodes: tuple[JcnNode, ...]
    edges: tuple[tuple[int, int], ...]
    total_measure: float
    quantization: Quantization

    @property
    def n_fields(self) -> int:
        return self.quantization.n_fields

    def __len__(self):
        return len(self.nodes)

    @cached_property
    def neighbors(self) -> tuple[tuple[int, ...], ...]:
        adj: list[list[int]] = [[] for _ in self.nodes]
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        return tuple(tuple(sorted(x)) for x in adj)

    @cached_property
    def bins(self) -> np.ndarray:
        return np.array([n.bin_tuple for n in self.nodes], dtype=np.int64).reshape(
            len(self.nodes), self.n_fields
        )

    def volumes(self) -> np.ndarray:
        return np.array([n.attrs.volume for n in self.nodes])

    def to_dict(self) -> dict:
        return {
            "level": self.level,
            "nodes": [
                {
                    "id": n.id,
                    "bin": list(n.bin_tuple),
                    "volume": n.attrs.volume,
                    "range_measure": n.attrs.range_measure,
                    "b0": n.attrs.component_count,
                    "degree": n.attrs.degree,
                }
                for n in self.nodes
            ],
            "edges": [list(e) for e in self.edges],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    def to_dot(self) -> str:
        lines = [f"graph jcn_{self.level} {{"]
        for n in self.nodes:
            label = ",".join(str(b) for b in n.bin_tuple)
            lines.append(f'  n{n.id} [label="({label})"];')
        lines += [f"  n{a} -- n{b};" for a, b in self.edges]
        lines.append("}")
        return "\n".join(lines) + "\n"


def _plane_eps(quant: Quantization) -> np.ndarray:
    width = np.array(quant.hi) - np.array(quant.lo)
    return PLANE_EPS * np.where(width > 0, width, 1.0)


def fragment_simplex(
    simplex: int,
    dataset: MultiFieldDataset,
    quant: Quantization,
) -> list[Fragment]:
    """Cut one simplex into convex cells of constant bin tuple.

    The simplex is clipped field by field at every cut crossing its value
    range. Cells are returned sorted by bin tuple; slivers are dropped.
    """
    mesh = dataset.mesh
    idx = mesh.simplices[simplex]
    fvals = dataset.samples[idx]
    coords = mesh.vertices[idx]
    d1 = len(idx)
    eps = _plane_eps(quant)
    floor = SLIVER * mesh.simplex_measure[simplex]

    pieces: list[tuple[np.ndarray, tuple[int, ...], float]] = [
        (np.eye(d1), (), float(mesh.simplex_measure[simplex]))
    ]
    for i in range(dataset.n_fields):
        cuts = quant.interior[i]
        out = []
        for lam, bins, meas in pieces:
            v = lam @ fvals[:, i]
            first = int(np.searchsorted(cuts, v.min() - eps[i], side="left"))
            last = int(np.searchsorted(cuts, v.max() + eps[i], side="right"))
            b = first
            rest = lam
            for j in range(first, last):
                lower, upper = split(rest, rest @ fvals[:, i], cuts[j], eps[i])
                if lower is not None and upper is None:
                    break
                if lower is not None:
                    lower, m = hull_reduce(lower, coords)
                    if m > floor:
                        out.append((lower, bins + (b,), m))
                    rest, meas = hull_reduce(upper, coords)
                    if meas <= floor:
                        rest = None
                        break
                else:
                    rest = upper
                b += 1
            if rest is not None and meas > floor:
                out.append((rest, bins + (b,), meas))
        pieces = out

    pieces.sort(key=lambda p: p[1])
    return [
        Fragment(simplex, k, lam, lam @ coords, bins, meas)
        for k, (lam, bins, meas) in enumerate(pieces)
    ]


def _vertex_fragments(dataset: MultiFieldDataset, quant: Quantization):
    mesh = dataset.mesh
    centroid_vals = dataset.samples[mesh.simplices].mean(axis=1)
    bins = quant.bin_of(centroid_vals)
    d1 = mesh.simplices.shape[1]
    lam = np.eye(d1)
    return [
        Fragment(s, 0, lam, mesh.vertices[mesh.simplices[s]], tuple(int(b) for b in bins[s]),
                 float(mesh.simplex_measure[s]))
        for s in range(mesh.n_simplices)
    ]


def fragment_mesh(dataset: MultiFieldDataset, quant: Quantization, mode: str = "fragment") -> list[Fragment]:
    if mode == "vertex":
        return _vertex_fragments(dataset, quant)
    if mode != "fragment":
        raise ValueError(f"unknown mode {mode!r}")
    frags = []
    for s in range(dataset.mesh.n_simplices):
        frags.extend(fragment_simplex(s, dataset, quant))
    return frags


def _cut_between(quant: Quantization, a: tuple[int, ...], b: tuple[int, ...]) -> dict[int, float] | None:
    """Cut planes separating two bin tuples, or None when they cannot touch."""
    cuts = {}
    for i, (x, y) in enumerate(zip(a, b)):
        if x == y:
            continue
        if abs(x - y) != 1:
            return None
        cuts[i] = float(quant.interior[i][max(x, y) - 1])
    return cuts


def fragment_adjacency(
    dataset: MultiFieldDataset,
    quant: Quantization,
    frags: list[Fragment],
    mode: str = "fragment",
):
    """Facet-adjacent fragment pairs, as (same_bin_pairs, cross_bin_pairs)."""
    mesh = dataset.mesh
    d = mesh.dim
    eps = _plane_eps(quant)
    by_simplex: dict[int, list[int]] = {}
    for g, f in enumerate(frags):
        by_simplex.setdefault(f.parent_simplex, []).append(g)

    same: list[tuple[int, int]] = []
    cross: list[tuple[int, int]] = []

    def shared(f: Fragment, lam: np.ndarray, other_bins) -> bool:
        cuts = _cut_between(quant, f.bin_tuple, other_bins)
        if cuts is None:
            return False
        fvals = dataset.samples[mesh.simplices[f.parent_simplex]]
        pts = on_planes(lam, lam @ fvals, cuts, eps)
        coords = mesh.vertices[mesh.simplices[f.parent_simplex]]
        thr = SLIVER * mesh.simplex_measure[f.parent_simplex]
        return affine_measure(pts @ coords, d - 1) > thr

    if mode == "fragment":
        for s in sorted(by_simplex):
            members = by_simplex[s]
            for x in range(len(members)):
                for y in range(x + 1, len(members)):
                    fa, fb = frags[members[x]], frags[members[y]]
                    if shared(fa, fa.bary, fb.bin_tuple):
                        cross.append((members[x], members[y]))

    trace_cache: dict[tuple[int, int], np.ndarray | None] = {}

    def trace(g: int, j: int):
        key = (g, j)
        if key not in trace_cache:
            f = frags[g]
            lam = f.bary[f.bary[:, j] <= 1e-12]
            coords = mesh.vertices[mesh.simplices[f.parent_simplex]]
            thr = SLIVER * mesh.simplex_measure[f.parent_simplex]
            trace_cache[key] = lam if affine_measure(lam @ coords, d - 1) > thr else None
        return trace_cache[key]

    for s1, j1, s2, j2 in mesh.interior_facets.tolist():
        left = [g for g in by_simplex.get(s1, ()) if trace(g, j1) is not None]
        right = [g for g in by_simplex.get(s2, ()) if trace(g, j2) is not None]
        for a in left:
            for b in right:
                fa, fb = frags[a], frags[b]
                if fa.bin_tuple == fb.bin_tuple:
                    same.append((a, b))
                elif mode == "vertex" or shared(fa, trace(a, j1), fb.bin_tuple):
                    cross.append((a, b))
    return same, cross


def compute_attributes(jcn: JcnGraph, dataset: MultiFieldDataset | None = None) -> JcnGraph:
    """Populate volume, range measure, component count and degree of every node."""
    total = dataset.mesh.total_measure if dataset is not None else jcn.total_measure
    counts = Counter(n.bin_tuple for n in jcn.nodes)
    degree = [len(nb) for nb in jcn.neighbors]
    nodes = tuple(
        replace(
            n,
            attrs=NodeAttrs(
                volume=n.measure / total,
                range_measure=jcn.quantization.range_measure(n.bin_tuple),
                component_count=counts[n.bin_tuple],
                degree=degree[n.id],
            ),
        )
        for n in jcn.nodes
    )
    return replace(jcn, nodes=nodes)


def assemble_graph(
    level: int,
    quant: Quantization,
    total_measure: float,
    bins: list[tuple[int, ...]],
    measures: list[float],
    anchors: list[int],
    members: list[tuple[int, ...]],
    merge_pairs,
    edge_pairs,
) -> tuple[JcnGraph, np.ndarray]:
    """Union elements joined by ``merge_pairs`` into nodes and connect them.

    Returns the attributed graph and, per input element, its node id. Node ids
    follow the order of (bin tuple, smallest anchor).
    """
    n_el = len(bins)
    pairs = np.array(merge_pairs, dtype=np.int64).reshape(-1, 2)
    adj = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n_el, n_el))
    _, comp = connected_components(adj, directed=False)

    groups: dict[int, list[int]] = {}
    for e, c in enumerate(comp.tolist()):
        groups.setdefault(c, []).append(e)
    raw = []
    for els in groups.values():
        b = bins[els[0]]
        assert all(bins[e] == b for e in els)
        raw.append((b, min(anchors[e] for e in els), els))
    raw.sort(key=lambda r: (r[0], r[1]))

    node_of = np.empty(n_el, dtype=np.int64)
    nodes = []
    for nid, (b, anchor, els) in enumerate(raw):
        node_of[els] = nid
        frag_ids = tuple(sorted(f for e in els for f in members[e]))
        meas = float(np.sum(np.sort([measures[e] for e in els])))
        nodes.append(JcnNode(nid, b, frag_ids, meas, anchor, level))

    edges = set()
    for a, b in edge_pairs:
        na, nb = int(node_of[a]), int(node_of[b])
        if na != nb and bins[a] != bins[b]:
            edges.add((min(na, nb), max(na, nb)))
    graph = JcnGraph(level, tuple(nodes), tuple(sorted(edges)), total_measure, quant)
    return compute_attributes(graph), node_of


def build_jcn(
    dataset: MultiFieldDataset,
    level: int,
    mode: str = "fragment",
    scheme: str = "floor",
) -> JcnGraph:
    """Joint Contour Net of ``dataset`` at quantization level ``level``.

    ``mode="vertex"`` skips the clipping and bins whole simplices by their
    centroid value; it is faster and only approximate.
    """
    if level < 0:
        raise ValueError(f"level must be >= 0, got {level}")
    quant = make_quantization(dataset, level, scheme)
    frags = fragment_mesh(dataset, quant, mode)
    same, cross = fragment_adjacency(dataset, quant, frags, mode)
    graph, _ = assemble_graph(
        level,
        quant,
        dataset.mesh.total_measure,
        [f.bin_tuple for f in frags],
        [f.measure for f in frags],
        [f.parent_simplex for f in frags],
        [(g,) for g in range(len(frags))],
        same,
        cross,
    )
    return graph
