"""Seeded synthetic multi-field datasets used by the tests, scripts and CLI."""

from __future__ import annotations

import numpy as np

from .field import GridSpec, MultiFieldDataset

FAMILIES = ("double-torus-height", "ring-height", "splitting-blobs", "random-smooth")


def _unit_coords(dims) -> tuple[GridSpec, np.ndarray]:
    """Grid with unit spacing plus vertex coordinates rescaled to [-1, 1]^d."""
    grid = GridSpec(tuple(dims))
    x = grid.coordinates() / (np.array(dims) - 1) * 2.0 - 1.0
    return grid, x


def _gauss(x: np.ndarray, centre, sigma: float) -> np.ndarray:
    r2 = np.sum((x - np.asarray(centre)) ** 2, axis=1)
    return np.exp(-r2 / (2.0 * sigma**2))


def keep_off_breakpoints(samples: np.ndarray, max_level: int, margin: float) -> np.ndarray:
    """Push vertex values at least ``margin`` finest-bin widths away from every cut.

    Cuts at ``max_level`` include every coarser level's cuts, so one pass
    covers all levels. Field minima and maxima are left alone, which keeps the
    range box (and therefore the cuts) unchanged.
    """
    out = samples.copy()
    q = 2**max_level
    for i in range(out.shape[1]):
        lo, hi = out[:, i].min(), out[:, i].max()
        if hi == lo:
            continue
        w = (hi - lo) / q
        cuts = lo + np.arange(1, q) * w
        v = out[:, i]
        interior = (v > lo) & (v < hi)
        near = np.abs(v[:, None] - cuts[None, :])
        j = near.argmin(axis=1)
        close = interior & (near[np.arange(len(v)), j] < margin * w)
        side = np.where(v >= cuts[j], 1.0, -1.0)
        v[close] = cuts[j][close] + side[close] * margin * w
    return out


def random_smooth(
    dims=(8, 8),
    n_fields: int = 2,
    seed: int = 0,
    n_bumps: int = 3,
    margin: float | None = None,
    max_level: int = 3,
) -> MultiFieldDataset:
    """Sum of random Gaussian bumps plus a random linear trend per field."""
    rng = np.random.default_rng(seed)
    grid, x = _unit_coords(dims)
    d = grid.ndim
    cols = []
    for _ in range(n_fields):
        f = x @ rng.normal(scale=0.3, size=d)
        for _ in range(n_bumps):
            centre = rng.uniform(-0.8, 0.8, size=d)
            f += rng.normal() * _gauss(x, centre, rng.uniform(0.25, 0.6))
        cols.append(f)
    samples = np.column_stack(cols)
    if margin is not None:
        samples = keep_off_breakpoints(samples, max_level, margin)
    return MultiFieldDataset(grid, samples)


def ring_height(dims=(16, 16), radius: float = 0.5) -> MultiFieldDataset:
    """Bivariate (ring, height) field.

    The ring field is the distance to a circle of the given radius, capped
    at the unit circle; the height field is the second coordinate. At two
    bins per field it yields six joint contours: inner disc, ring band and
    outer region, each cut in half by height.
    """
    grid, x = _unit_coords(dims)
    r = np.minimum(np.linalg.norm(x, axis=1), 1.0)
    ring = np.abs(r - radius)
    height = x[:, 1]
    return MultiFieldDataset(grid, np.column_stack([ring, height]))


def double_torus_height(dims=(24, 24)) -> MultiFieldDataset:
    """Scalar height-like field with two legs (minima) and two holes (maxima).

    A planar stand-in for the height function of a standing double torus:
    the vertical coordinate with two dips at the bottom and two bumps in the
    body, giving a contour tree that branches at several resolutions.
    """
    grid, x = _unit_coords(dims)
    h = x[:, 1].copy()
    h -= 0.7 * _gauss(x, (-0.45, -0.65), 0.18)
    h -= 0.7 * _gauss(x, (0.45, -0.65), 0.18)
    h += 0.6 * _gauss(x, (-0.4, 0.25), 0.16)
    h += 0.6 * _gauss(x, (0.4, 0.25), 0.16)
    return MultiFieldDataset(grid, h[:, None])


def blobs(dims=(16, 16), centres=((0.0, 0.0),), sigma: float = 0.22, n_fields: int = 2) -> MultiFieldDataset:
    """Gaussian blobs; the second field uses a 20% wider kernel."""
    grid, x = _unit_coords(dims)
    cols = []
    for i in range(n_fields):
        s = sigma * (1.0 + 0.2 * i)
        cols.append(sum(_gauss(x, c, s) for c in centres))
    return MultiFieldDataset(grid, np.column_stack(cols))


def splitting_blobs(
    n_steps: int = 10,
    split_step: int = 6,
    dims=(16, 16),
    seed: int = 0,
) -> list[MultiFieldDataset]:
    """Time series of one bivariate blob that splits in two at ``split_step``.

    Before the split the two density lobes overlap enough to form one
    component; from ``split_step`` on they are separated and keep drifting
    apart. Seeds jitter amplitudes, widths and the split axis slightly.
    """
    if not 0 < split_step < n_steps:
        raise ValueError(f"split_step must lie in 1..{n_steps - 1}, got {split_step}")
    rng = np.random.default_rng(seed)
    grid, x = _unit_coords(dims)
    sigma = 0.22 * (1.0 + rng.uniform(-0.05, 0.05))
    tilt = rng.uniform(-0.15, 0.15)
    axis = np.array([np.cos(tilt), np.sin(tilt)] + [0.0] * (grid.ndim - 2))
    amp = 1.0 + rng.uniform(-0.05, 0.05, size=2)
    out = []
    for t in range(n_steps):
        if t < split_step:
            sep = 0.10 + 0.02 * t
        else:
            sep = 0.95 + 0.03 * (t - split_step)
        c1, c2 = -0.5 * sep * axis, 0.5 * sep * axis
        cols = []
        for i in range(2):
            s = sigma * (1.0 + 0.2 * i)
            cols.append(amp[0] * _gauss(x, c1, s) + amp[1] * _gauss(x, c2, s))
        out.append(MultiFieldDataset(grid, np.column_stack(cols)))
    return out


def near_separable(dims=(8, 8), seed: int = 0) -> MultiFieldDataset:
    """Bivariate field where field i varies mainly along axis i.

    The level sets of the two fields cross at steep angles, so joint contours
    have no thin wedges and a sample lattice resolves them reliably.
    """
    rng = np.random.default_rng(seed)
    grid, x = _unit_coords(dims)
    if grid.ndim != 2:
        raise ValueError("near_separable is two-dimensional")
    cols = []
    for i in range(2):
        a, o = x[:, i], x[:, 1 - i]
        f = 0.5 * a * rng.choice([-1.0, 1.0])
        for _ in range(2):
            c = rng.uniform(-0.7, 0.7)
            f = f + rng.normal(0.0, 0.8) * np.exp(-((a - c) ** 2) / (2 * rng.uniform(0.2, 0.4) ** 2))
        f = f + 0.15 * rng.normal() * np.exp(-((o - rng.uniform(-0.5, 0.5)) ** 2) / 0.3)
        cols.append(f)
    return MultiFieldDataset(grid, np.column_stack(cols))
