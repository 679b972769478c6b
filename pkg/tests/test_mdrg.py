import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from mrsim.field import Quantization
from mrsim.jcn import JcnGraph, JcnNode, build_jcn, compute_attributes
from mrsim.mdrg import ReebGraphQ, branch_decompose, build_mdrg, quotient_reeb_graph
from mrsim.synthetic import random_smooth, ring_height


def toy_jcn(bins, edges, level=2):
    n = len(bins[0])
    quant = Quantization(level, (0.0,) * n, (1.0,) * n)
    nodes = tuple(JcnNode(i, tuple(b), (i,), 1.0, i, level) for i, b in enumerate(bins))
    return compute_attributes(JcnGraph(level, nodes, tuple(edges), float(len(bins)), quant))


def toy_reeb(bins, edges):
    return ReebGraphQ(0, tuple(frozenset({i}) for i in range(len(bins))), tuple(bins), tuple(edges))


def test_branch_path():
    rg = toy_reeb([0, 1, 2, 3], [(0, 1), (1, 2), (2, 3)])
    assert branch_decompose(rg) == [0, 0, 0, 0]


def test_branch_y_shape():
    # centre 0, arms 1-2, 3-4, 5-6
    rg = toy_reeb([1, 0, 0, 2, 3, 2, 3], [(0, 1), (1, 2), (0, 3), (3, 4), (0, 5), (5, 6)])
    br = branch_decompose(rg)
    assert len(set(br)) == 3
    assert br[1] == br[2] and br[3] == br[4] and br[5] == br[6]
    # the junction joins its lowest-bin regular neighbour's arm
    assert br[0] == br[1]


def test_branch_cycle():
    rg = toy_reeb([0, 1, 2, 1], [(0, 1), (1, 2), (2, 3), (0, 3)])
    assert branch_decompose(rg) == [0, 0, 0, 0]


def test_branch_junctions_only():
    # two adjacent degree-3 nodes whose other neighbours are leaves
    rg = toy_reeb([1, 2, 0, 0, 3, 3], [(0, 1), (0, 2), (0, 3), (1, 4), (1, 5)])
    br = branch_decompose(rg)
    assert br[0] in (br[2], br[3])
    assert br[1] in (br[4], br[5])
    assert sorted(set(br)) == list(range(len(set(br))))


def test_quotient_single_node():
    jcn = toy_jcn([(0, 0)], [])
    rg = quotient_reeb_graph([0], jcn, 0)
    assert rg.nodes == (frozenset({0}),) and rg.edges == ()


def test_quotient_increasing_path_unchanged():
    jcn = toy_jcn([(0, 0), (1, 0), (2, 1), (3, 1)], [(0, 1), (1, 2), (2, 3)])
    rg = quotient_reeb_graph(range(4), jcn, 0)
    assert rg.nodes == tuple(frozenset({i}) for i in range(4))
    assert rg.edges == ((0, 1), (1, 2), (2, 3))


def test_quotient_constant_dim_gives_components():
    jcn = toy_jcn([(1, 0), (1, 1), (1, 2), (1, 0)], [(0, 1), (1, 2)])
    rg = quotient_reeb_graph(range(4), jcn, 0)
    assert sorted(map(sorted, rg.nodes)) == [[0, 1, 2], [3]]
    assert rg.edges == ()


def test_scalar_mdrg_is_reeb_graph():
    ds = random_smooth(n_fields=1, seed=4)
    jcn = build_jcn(ds, 3)
    mdrg = build_mdrg(jcn)
    assert mdrg.n_dims == 1
    assert len(mdrg.layers[0]) == 1
    rg = mdrg.layers[0][0]
    assert sorted(min(c) for c in rg.nodes) == list(range(len(jcn.nodes)))
    assert {tuple(sorted((min(rg.nodes[a]), min(rg.nodes[b])))) for a, b in rg.edges} == set(jcn.edges)


def test_constant_first_field(make_dataset):
    x = np.linspace(0, 1, 6)
    ds = make_dataset((6, 6), np.zeros(36), np.repeat(x, 6))
    jcn = build_jcn(ds, 2)
    mdrg = build_mdrg(jcn)
    assert len(mdrg.roots) == 1
    assert mdrg.roots[0].members == frozenset(range(len(jcn.nodes)))
    sub = mdrg.layers[1][0]
    assert len(sub.nodes) == len(jcn.nodes) == 4
    assert len(sub.edges) == 3


def _walk(node, out):
    out.append(node)
    for c in node.children:
        assert c.members <= node.members
        _walk(c, out)


def _check_hierarchy(jcn):
    mdrg = build_mdrg(jcn)
    everything = set(range(len(jcn.nodes)))
    nodes = []
    for r in mdrg.roots:
        _walk(r, nodes)
    for d in range(jcn.n_fields):
        layer = [n for n in nodes if n.dim == d]
        seen = [m for n in layer for m in n.members]
        assert sorted(seen) == sorted(everything)
        assert set(mdrg.branch_of[d]) == everything
    leaves = [n for n in nodes if n.dim == jcn.n_fields - 1]
    assert all(len(n.members) == 1 for n in leaves)
    for rgs in mdrg.layers:
        for rg in rgs:
            for a, b in rg.edges:
                assert rg.bins[a] != rg.bins[b]


@given(seed=st.integers(0, 10_000), k=st.integers(0, 3))
def test_hierarchy_properties(seed, k):
    _check_hierarchy(build_jcn(random_smooth(dims=(6, 6), seed=seed), k))


def test_ring_height_hierarchy():
    jcn = build_jcn(ring_height(), 1)
    _check_hierarchy(jcn)
    mdrg = build_mdrg(jcn)
    # the ring field has two bins: near the circle and away from it
    assert sorted(mdrg.layers[0][0].bins) == [0, 1, 1]
    data = mdrg.to_dict()
    assert data["dim"] == 0 and len(data["nodes"]) == 3
