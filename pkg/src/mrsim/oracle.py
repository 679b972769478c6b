"""Brute-force component counting on a dense sample lattice.

This is deliberately independent of the clipping code: it re-implements the
piecewise-linear interpolation on the Freudenthal split, bins every sample
with the closed-form floor rule and flood-fills each bin with
:func:`scipy.ndimage.label`.
"""

from __future__ import annotations

from collections import Counter

import numpy as np
from scipy import ndimage

from .field import MultiFieldDataset, make_quantization


def sample_lattice(dataset: MultiFieldDataset, per_axis: int) -> np.ndarray:
    """PL field values at cell-centred sub-samples, shape ``lattice + (n,)``.

    Each grid cell contributes ``per_axis**d`` samples at offsets
    ``(i + 0.5) / per_axis`` along every axis.
    """
    grid = dataset.grid
    d = grid.ndim
    dims = np.array(grid.dims)
    axes = [
        (np.arange((n - 1) * per_axis) + 0.5) / per_axis for n in grid.dims
    ]
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    shape = pts.shape[:-1]
    pts = pts.reshape(-1, d)
    cell = np.minimum(np.floor(pts).astype(np.int64), dims - 2)
    t = pts - cell
    order = np.argsort(-t, axis=1, kind="stable")
    ts = np.take_along_axis(t, order, axis=1)
    lam = np.empty((len(pts), d + 1))
    lam[:, 0] = 1.0 - ts[:, 0]
    lam[:, 1:d] = ts[:, :-1] - ts[:, 1:]
    lam[:, d] = ts[:, -1]
    corner = cell.copy()
    values = lam[:, :1] * dataset.samples[np.ravel_multi_index(corner.T, dims)]
    rows = np.arange(len(pts))
    for j in range(d):
        corner[rows, order[:, j]] += 1
        values += lam[:, j + 1 : j + 2] * dataset.samples[np.ravel_multi_index(corner.T, dims)]
    return values.reshape(shape + (dataset.n_fields,))


def rasterized_component_oracle(
    dataset: MultiFieldDataset,
    level: int,
    samples_per_cell: int | None = None,
) -> dict[tuple[int, ...], int]:
    """Number of connected components of every occupied joint bin.

    ``samples_per_cell`` must be at least ``8**d``; the lattice uses the
    smallest per-axis count reaching it.
    """
    d = dataset.grid.ndim
    if samples_per_cell is None:
        samples_per_cell = 8**d
    if samples_per_cell < 8**d:
        raise ValueError(f"need at least {8**d} samples per cell, got {samples_per_cell}")
    per_axis = int(np.ceil(samples_per_cell ** (1.0 / d) - 1e-9))
    values = sample_lattice(dataset, per_axis)
    q = 2**level
    lo = dataset.range_box[:, 0]
    width = dataset.range_box[:, 1] - lo
    safe = np.where(width > 0, width, 1.0)
    bins = np.floor((values - lo) / safe * q).astype(np.int64)
    bins = np.clip(bins, 0, q - 1)
    bins[..., width == 0] = 0

    radix = np.array([q**i for i in range(dataset.n_fields)], dtype=np.int64)
    code = bins @ radix
    # Full (diagonal) connectivity: thin wedge tips of a region otherwise
    # break off into isolated samples.
    structure = ndimage.generate_binary_structure(d, d)
    out = {}
    for c in np.unique(code):
        _, count = ndimage.label(code == c, structure=structure)
        key = tuple(int(c) // q**i % q for i in range(dataset.n_fields))
        out[key] = int(count)
    return out


def jcn_component_counts(jcn) -> dict[tuple[int, ...], int]:
    """Same summary taken from a built JCN, for comparison with the oracle."""
    return dict(sorted(Counter(n.bin_tuple for n in jcn.nodes).items()))


def simplex_gradients(dataset: MultiFieldDataset) -> np.ndarray:
    """Gradient of every field on every simplex, shape ``(simplices, d, n)``."""
    mesh = dataset.mesh
    x = mesh.vertices[mesh.simplices]
    f = dataset.samples[mesh.simplices]
    return np.linalg.solve(x[:, 1:] - x[:, :1], f[:, 1:] - f[:, :1])


def critical_vertices(dataset: MultiFieldDataset, field: int) -> np.ndarray:
    """Vertices whose lower or upper link is empty or disconnected."""
    f = dataset.samples[:, field]
    simplices = dataset.mesh.simplices
    n = len(f)
    nbrs = [set() for _ in range(n)]
    link_edges = [set() for _ in range(n)]
    for s in simplices:
        for v in s:
            others = [int(u) for u in s if u != v]
            nbrs[v].update(others)
            link_edges[v].update((a, b) for a in others for b in others if a < b)
    out = []
    for v in range(n):
        for side in (f < f[v], f > f[v]):
            keep = [u for u in nbrs[v] if side[u]]
            if not keep:
                out.append(v)
                break
            parent = {u: u for u in keep}

            def find(u):
                while parent[u] != u:
                    parent[u] = parent[parent[u]]
                    u = parent[u]
                return u

            for a, b in link_edges[v]:
                if a in parent and b in parent:
                    parent[find(a)] = find(b)
            if len({find(u) for u in keep}) != 1:
                out.append(v)
                break
    return np.array(out, dtype=np.int64)


def well_resolved(
    dataset: MultiFieldDataset,
    levels,
    per_axis: int = 8,
    cells: float = 2.0,
    min_sin: float = 0.3,
) -> bool:
    """Whether the lattice oracle can be trusted on ``dataset`` at ``levels``.

    Every critical vertex must lie at least ``cells`` lattice cells (of width
    ``1 / per_axis`` grid cells, scaled by the local gradient) away from every
    cut of its field, and in 2D, wherever cuts of two fields cross the same
    triangle, their level sets must cross with ``|sin| >= min_sin``.
    """
    grads = simplex_gradients(dataset)
    gnorm = np.linalg.norm(grads, axis=1)
    vmax = np.zeros(dataset.samples.shape)
    for j in range(dataset.mesh.simplices.shape[1]):
        np.maximum.at(vmax, dataset.mesh.simplices[:, j], gnorm)
    h = 1.0 / per_axis
    crit = [critical_vertices(dataset, i) for i in range(dataset.n_fields)]
    f = dataset.samples[dataset.mesh.simplices]
    for level in levels:
        quant = make_quantization(dataset, level)
        crossed = []
        for i in range(dataset.n_fields):
            cuts = quant.interior[i]
            lo, hi = f[:, :, i].min(1), f[:, :, i].max(1)
            crossed.append(np.searchsorted(cuts, hi, "left") > np.searchsorted(cuts, lo, "right"))
            if len(cuts) == 0:
                continue
            c = crit[i]
            dist = np.abs(dataset.samples[c, i, None] - cuts[None, :]).min(axis=1)
            if np.any(dist < cells * h * vmax[c, i]):
                return False
        if dataset.grid.ndim != 2:
            continue
        for i in range(dataset.n_fields):
            for j in range(i + 1, dataset.n_fields):
                both = crossed[i] & crossed[j]
                gi, gj = grads[both, :, i], grads[both, :, j]
                cross = np.abs(gi[:, 0] * gj[:, 1] - gi[:, 1] * gj[:, 0])
                norm = np.linalg.norm(gi, axis=1) * np.linalg.norm(gj, axis=1)
                if np.any(cross < min_sin * norm):
                    return False
    return True
