"""Coarse-to-fine greedy matching of nodes between two MRSs.

At each level the nodes of the first MRS are visited in order of decreasing
volume. A node ``m`` may be paired with a node ``n`` of the second MRS when

(i)   neither is already paired,
(ii)  both have the same bin tuple,
(iii) their parents are paired with each other (not required at level 0),
(iv)  their branch labels agree in every dimension.

Among admissible candidates the one with the highest node similarity wins.
Once a pair is accepted, every node on the same MDRG branch (per dimension)
inherits the pair's label, which is what rule (iv) later checks.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field

from .mdrg import Mdrg, build_mdrg
from .mrs import MrsStructure
from .similarity import SimilarityReport, Weights, level_similarity, mrs_similarity, node_similarity


@dataclass(frozen=True)
class MatchPair:
    level: int
    node_f: int
    node_g: int
    phi: float


@dataclass
class MatchContext:
    mrs_f: MrsStructure
    mrs_g: MrsStructure
    weights: Weights = field(default_factory=Weights)
    level: int = 0
    mdrg_f: Mdrg | None = None
    mdrg_g: Mdrg | None = None
    labels_f: dict[int, list[int | None]] = field(default_factory=dict)
    labels_g: dict[int, list[int | None]] = field(default_factory=dict)
    next_label: list[int] = field(default_factory=list)
    # matched[k] maps f-node -> g-node at level k; matched_g the reverse
    matched: list[dict[int, int]] = field(default_factory=list)
    matched_g: list[dict[int, int]] = field(default_factory=list)

    def start_level(self, k: int) -> None:
        self.level = k
        jf, jg = self.mrs_f.jcns[k], self.mrs_g.jcns[k]
        self.mdrg_f = build_mdrg(jf)
        self.mdrg_g = build_mdrg(jg)
        n = jf.n_fields
        self.labels_f = {m.id: [None] * n for m in jf.nodes}
        self.labels_g = {m.id: [None] * n for m in jg.nodes}
        self.next_label = [0] * n
        self.matched.append({})
        self.matched_g.append({})


def check_rules(m: int, n: int, ctx: MatchContext) -> bool:
    k = ctx.level
    node_m = ctx.mrs_f.jcns[k].nodes[m]
    node_n = ctx.mrs_g.jcns[k].nodes[n]
    if m in ctx.matched[k] or n in ctx.matched_g[k]:
        return False
    if node_m.bin_tuple != node_n.bin_tuple:
        return False
    if k > 0:
        pm = ctx.mrs_f.parent(k, m)
        if ctx.matched[k - 1].get(pm) != ctx.mrs_g.parent(k, n):
            return False
    return ctx.labels_f[m] == ctx.labels_g[n]


def propagate_labels(pair: MatchPair, ctx: MatchContext) -> None:
    """Spread each dimension's label over the pair's MDRG branches.

    Slots are only ever filled, never overwritten.
    """
    for d in range(len(ctx.next_label)):
        lf = ctx.labels_f[pair.node_f][d]
        lg = ctx.labels_g[pair.node_g][d]
        if lf is not None and lg is not None:
            continue
        if lf is None and lg is None:
            label = ctx.next_label[d]
            ctx.next_label[d] += 1
        else:
            label = lf if lf is not None else lg
        for labels, mdrg, node in (
            (ctx.labels_f, ctx.mdrg_f, pair.node_f),
            (ctx.labels_g, ctx.mdrg_g, pair.node_g),
        ):
            branch = mdrg.branch_of[d][node]
            for other, br in mdrg.branch_of[d].items():
                if br == branch and labels[other][d] is None:
                    labels[other][d] = label


def create_matching_pairs(
    mrs_f: MrsStructure,
    mrs_g: MrsStructure,
    weights: Weights = Weights(),
) -> list[MatchPair]:
    if mrs_f.n_levels != mrs_g.n_levels:
        raise ValueError(
            f"MRSs must have the same number of levels ({mrs_f.n_levels} != {mrs_g.n_levels})"
        )
    if mrs_f.jcns[0].n_fields != mrs_g.jcns[0].n_fields:
        raise ValueError("MRSs are built over different numbers of fields")
    ctx = MatchContext(mrs_f, mrs_g, weights)
    pairs: list[MatchPair] = []
    for k in range(mrs_f.n_levels):
        ctx.start_level(k)
        jf, jg = mrs_f.jcns[k], mrs_g.jcns[k]
        # candidates share bin tuple and (above level 0) parent
        index: dict[tuple, list[int]] = {}
        for n in jg.nodes:
            parent = mrs_g.parent(k, n.id) if k else None
            index.setdefault((n.bin_tuple, parent), []).append(n.id)
        queue = [(-m.attrs.volume, m.id) for m in jf.nodes]
        heapq.heapify(queue)
        while queue:
            _, m = heapq.heappop(queue)
            node_m = jf.nodes[m]
            if k:
                parent = ctx.matched[k - 1].get(mrs_f.parent(k, m))
                if parent is None:
                    continue
            else:
                parent = None
            best, best_phi = None, -1.0
            for n in index.get((node_m.bin_tuple, parent), ()):
                if not check_rules(m, n, ctx):
                    continue
                phi = node_similarity(node_m.attrs, jg.nodes[n].attrs, weights)
                if phi > best_phi:
                    best, best_phi = n, phi
            if best is None:
                continue
            pair = MatchPair(k, m, best, best_phi)
            pairs.append(pair)
            ctx.matched[k][m] = best
            ctx.matched_g[k][best] = m
            propagate_labels(pair, ctx)
    return pairs


def similarity_report(
    mrs_f: MrsStructure,
    mrs_g: MrsStructure,
    pairs: list[MatchPair],
    weights: Weights = Weights(),
) -> SimilarityReport:
    scores, counts, table = [], [], []
    for k in range(mrs_f.n_levels):
        jf, jg = mrs_f.jcns[k], mrs_g.jcns[k]
        at_k = [p for p in pairs if p.level == k]
        scores.append(
            level_similarity((jf.nodes[p.node_f].attrs, jg.nodes[p.node_g].attrs, p.phi) for p in at_k)
        )
        counts.append(len(at_k))
        table += [{"level": k, "f_node": p.node_f, "g_node": p.node_g, "phi": p.phi} for p in at_k]
    return SimilarityReport(weights, scores, counts, mrs_similarity(scores), table)


def compare(
    mrs_f: MrsStructure,
    mrs_g: MrsStructure,
    weights: Weights = Weights(),
    symmetrize: bool = False,
) -> SimilarityReport:
    """Match and score; ``symmetrize`` averages the scores of both directions."""
    report = similarity_report(mrs_f, mrs_g, create_matching_pairs(mrs_f, mrs_g, weights), weights)
    if symmetrize:
        back = similarity_report(mrs_g, mrs_f, create_matching_pairs(mrs_g, mrs_f, weights), weights)
        report.level_scores = [(a + b) / 2 for a, b in zip(report.level_scores, back.level_scores)]
        report.phi_bar = (report.phi_bar + back.phi_bar) / 2
    return report


def mpair_json(report: SimilarityReport) -> str:
    return json.dumps(report.pairs, indent=1)
