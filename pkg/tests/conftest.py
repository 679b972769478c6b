import numpy as np
import pytest
from hypothesis import settings

from mrsim.field import GridSpec, MultiFieldDataset
from mrsim.matching import MatchContext, check_rules, propagate_labels

settings.register_profile("default", deadline=None, max_examples=30)
settings.load_profile("default")


def grid_dataset(dims, *fields):
    """Dataset on a unit-spaced grid from per-field value arrays in C order."""
    return MultiFieldDataset(GridSpec(tuple(dims)), np.column_stack([np.ravel(f) for f in fields]))


@pytest.fixture
def make_dataset():
    return grid_dataset


def replay(mrs_f, mrs_g, pairs):
    """Re-check every pair against rules (i)-(iv) in emission order."""
    ctx = MatchContext(mrs_f, mrs_g)
    level = -1
    for p in pairs:
        if p.level != level:
            assert p.level == level + 1
            level = p.level
            ctx.start_level(level)
        m = mrs_f.jcns[level].nodes[p.node_f]
        n = mrs_g.jcns[level].nodes[p.node_g]
        assert m.bin_tuple == n.bin_tuple
        if level:
            pf, pg = mrs_f.parent(level, p.node_f), mrs_g.parent(level, p.node_g)
            assert ctx.matched[level - 1][pf] == pg
        assert check_rules(p.node_f, p.node_g, ctx)
        ctx.matched[level][p.node_f] = p.node_g
        ctx.matched_g[level][p.node_g] = p.node_f
        propagate_labels(p, ctx)
    for k in range(len(ctx.matched)):
        assert len(set(ctx.matched[k].values())) == len(ctx.matched[k])
