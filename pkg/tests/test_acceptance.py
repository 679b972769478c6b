"""Acceptance criteria 1-9, each printing one PASS/FAIL line."""

import math
import time

import pytest

from mrsim.cli import main
from mrsim.jcn import build_jcn
from mrsim.matching import compare, create_matching_pairs
from mrsim.mrs import build_mrs, create_coarser_reeb_space, jcn_isomorphic, verify_nesting
from mrsim.oracle import jcn_component_counts, rasterized_component_oracle, well_resolved
from mrsim.similarity import PRESETS
from mrsim.synthetic import (
    double_torus_height,
    near_separable,
    random_smooth,
    ring_height,
    splitting_blobs,
)

from conftest import replay


@pytest.fixture
def verdict(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {n}: {'PASS' if ok else 'FAIL'} ({detail})")
        assert ok, detail

    return emit


def test_criterion_1_self_similarity(verdict):
    t0 = time.perf_counter()
    worst = 0.0
    for seed in range(10):
        mrs = build_mrs(random_smooth(dims=(8, 8), seed=seed), 3)
        worst = max(worst, abs(compare(mrs, mrs).phi_bar - 1.0))
    dt = time.perf_counter() - t0
    verdict(1, worst <= 1e-9 and dt < 10, f"max |phi_bar - 1| = {worst:.2e}, {dt:.1f} s")


def test_criterion_2_bounds(verdict):
    values = []
    for a in range(6):
        mf = build_mrs(random_smooth(dims=(8, 8), seed=a), 3)
        for b in range(6):
            mg = build_mrs(random_smooth(dims=(8, 8), seed=100 + b), 3)
            for w in PRESETS.values():
                for sym in (False, True):
                    r = compare(mf, mg, w, sym)
                    values += [p["phi"] for p in r.pairs] + r.level_scores + [r.phi_bar]
    series = [build_mrs(d, 3) for d in splitting_blobs(seed=0)]
    for a, b in zip(series, series[1:]):
        r = compare(a, b)
        values += [p["phi"] for p in r.pairs] + r.level_scores + [r.phi_bar]
    lo, hi = min(values), max(values)
    verdict(2, lo >= -1e-12 and hi <= 1 + 1e-12, f"{len(values)} scores in [{lo:.3g}, {hi:.12g}]")


def test_criterion_3_coarsening(verdict):
    t0 = time.perf_counter()
    problems = []
    for seed in range(10):
        ds = random_smooth(dims=(8, 8), seed=seed)
        direct = [build_jcn(ds, k) for k in range(4)]
        for k in (1, 2, 3):
            coarse, _ = create_coarser_reeb_space(direct[k])
            problems += [f"seed {seed} k {k}: {p}" for p in jcn_isomorphic(coarse, direct[k - 1], 1e-9)]
    dt = time.perf_counter() - t0
    verdict(3, not problems and dt < 30, f"{len(problems)} mismatches, {dt:.1f} s")


def test_criterion_4_volume_conservation(verdict):
    datasets = [random_smooth(dims=(8, 8), seed=s) for s in range(10)]
    datasets += [ring_height(), double_torus_height(), random_smooth(dims=(5, 5, 5), seed=1)]
    datasets += splitting_blobs(seed=1)
    bad = []
    for i, ds in enumerate(datasets):
        for mode in ("fragment", "vertex"):
            report = verify_nesting(build_mrs(ds, 4, mode))
            if not (report.checks["volume_sum"] and report.checks["volume_aggregation"]):
                bad.append((i, mode, report.failures[:2]))
    verdict(4, not bad, f"{2 * len(datasets)} MRSs, failures {bad}")


def test_criterion_5_oracle(verdict):
    levels = range(3)
    seeds = [s for s in range(200) if well_resolved(near_separable(seed=s), levels, per_axis=8)][:10]
    mismatch = []
    for s in seeds:
        ds = near_separable(seed=s)
        for k in levels:
            jcn = build_jcn(ds, k)
            oracle = rasterized_component_oracle(ds, k, samples_per_cell=64)
            b0 = {n.bin_tuple: n.attrs.component_count for n in jcn.nodes}
            if jcn_component_counts(jcn) != oracle or b0 != oracle or len(jcn.nodes) != sum(oracle.values()):
                mismatch.append((s, k))
    ok = len(seeds) == 10 and not mismatch
    verdict(5, ok, f"seeds {seeds}, levels 0-2, mismatches {mismatch}")


def test_criterion_6_scalar(verdict):
    ds = double_torus_height()
    got, want = [], []
    for k in range(4):
        got.append(len(build_jcn(ds, k).nodes))
        want.append(sum(rasterized_component_oracle(ds, k).values()))
    verdict(6, got == want, f"JCN nodes {got}, flood fill {want}")


def test_criterion_7_matching(verdict):
    bad = []
    cases = [random_smooth(dims=(8, 8), seed=s) for s in range(5)] + [ring_height(), double_torus_height()]
    for i, ds in enumerate(cases):
        mrs = build_mrs(ds, 3)
        pairs = create_matching_pairs(mrs, mrs)
        for k, jcn in enumerate(mrs.jcns):
            if sum(p.level == k for p in pairs) != len(jcn.nodes):
                bad.append((i, k))
        try:
            replay(mrs, mrs, pairs)
        except AssertionError:
            bad.append((i, "rules"))
    verdict(7, not bad, f"{len(cases)} datasets, problems {bad}")


def test_criterion_8_scission(verdict):
    t0 = time.perf_counter()
    found = []
    for seed in range(5):
        mrss = [build_mrs(d, 3) for d in splitting_blobs(n_steps=10, split_step=6, seed=seed)]
        scores = [compare(a, b).phi_bar for a, b in zip(mrss, mrss[1:])]
        found.append(min(range(len(scores)), key=scores.__getitem__))
    dt = time.perf_counter() - t0
    verdict(8, found == [5] * 5 and dt < 120, f"argmin per seed {found}, expected 5, {dt:.1f} s")


def test_criterion_9_determinism(verdict, tmp_path):
    series = tmp_path / "series"
    assert main(["gen-synthetic", "splitting-blobs", "--out", str(series)]) == 0
    files = sorted(str(p) for p in series.glob("*.mrsf"))
    outputs = []
    for run in ("a", "b"):
        out = tmp_path / run
        assert main(["timeseries", *files, "--levels", "1,2,3", "--out", str(out)]) == 0
        outputs.append((out / "timeseries.csv").read_bytes())
    verdict(9, outputs[0] == outputs[1], f"{len(outputs[0])} bytes per run")
