"""Convex polytopes inside one simplex, clipped by level sets of linear fields.

A polytope is stored by its vertices in barycentric coordinates of the parent
simplex (shape ``(m, d + 1)``). Field values and world coordinates are then
plain matrix products, and because every field is affine on the simplex the
clipped vertices stay exact up to rounding.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial import ConvexHull, QhullError

# Relative tolerance for "lies on the cut plane", scaled by the field's range.
PLANE_EPS = 1e-12


def affine_measure(points: np.ndarray, dim: int) -> float:
    """``dim``-dimensional measure of the convex hull of ``points``.

    ``points`` may live in a higher-dimensional space; the hull is measured in
    its own affine span and is 0 when that span is lower-dimensional.
    """
    points = np.asarray(points, dtype=np.float64)
    if len(points) < dim + 1:
        return 0.0
    centred = points - points.mean(axis=0)
    scale = np.abs(centred).max()
    if scale == 0.0:
        return 0.0
    if dim < points.shape[1]:
        _, s, vt = np.linalg.svd(centred, full_matrices=False)
        if s[dim - 1] <= 1e-10 * s[0]:
            return 0.0
        centred = centred @ vt[:dim].T
    if dim == 1:
        return float(centred[:, 0].max() - centred[:, 0].min())
    try:
        return float(ConvexHull(centred).volume)
    except QhullError:
        return 0.0


def hull_reduce(lam: np.ndarray, coords: np.ndarray) -> tuple[np.ndarray, float]:
    """Keep only the extreme points of a full-dimensional cell; returns (lam, measure)."""
    x = lam @ coords
    try:
        hull = ConvexHull(x)
    except QhullError:
        return lam[:0], 0.0
    return lam[np.sort(hull.vertices)], float(hull.volume)


def split(lam: np.ndarray, values: np.ndarray, cut: float, eps: float):
    """Split a convex cell by the plane ``value == cut``.

    Returns ``(lower, upper)`` vertex sets; either may be ``None``. Points within
    ``eps`` of the plane belong to both halves. A cell lying entirely on the
    plane goes to the upper half (half-open bins).
    """
    below = values < cut - eps
    above = values > cut + eps
    if not above.any():
        return (lam, None) if below.any() else (None, lam)
    if not below.any():
        return None, lam
    on = ~(below | above)
    iu, iv = np.nonzero(below[:, None] & above[None, :])
    t = (cut - values[iu]) / (values[iv] - values[iu])
    cross = lam[iu] + t[:, None] * (lam[iv] - lam[iu])
    lower = np.concatenate([lam[below | on], cross])
    upper = np.concatenate([lam[above | on], cross])
    return lower, upper


def on_planes(lam: np.ndarray, values: np.ndarray, cuts: dict[int, float], eps: np.ndarray) -> np.ndarray:
    """Rows of ``lam`` lying on every plane ``field i == cuts[i]``."""
    mask = np.ones(len(lam), dtype=bool)
    for i, c in cuts.items():
        mask &= np.abs(values[:, i] - c) <= eps[i]
    return lam[mask]
