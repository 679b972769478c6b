"""Gridded multi-field data, Freudenthal triangulation and dyadic quantization."""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

HEADER_RE = re.compile(
    r"^MRSFIELD v1 dims=(?P<dims>\d+(?:,\d+){1,2}) fields=(?P<n>\d+) "
    r"dtype=f64 order=row-major$"
)


class DatasetError(ValueError):
    """Raised when a dataset file cannot be parsed or fails validation."""


@dataclass(frozen=True)
class GridSpec:
    dims: tuple[int, ...]
    spacing: tuple[float, ...] = ()
    origin: tuple[float, ...] = ()

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) not in (2, 3):
            raise ValueError(f"grid must have 2 or 3 axes, got {len(dims)}")
        if any(d < 2 for d in dims):
            raise ValueError(f"every grid dim must be >= 2, got {dims}")
        spacing = tuple(float(s) for s in self.spacing) or (1.0,) * len(dims)
        origin = tuple(float(o) for o in self.origin) or (0.0,) * len(dims)
        if len(spacing) != len(dims) or len(origin) != len(dims):
            raise ValueError("spacing and origin must match the number of axes")
        if any(not s > 0 for s in spacing):
            raise ValueError(f"every spacing must be > 0, got {spacing}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "spacing", spacing)
        object.__setattr__(self, "origin", origin)

    @property
    def ndim(self) -> int:
        return len(self.dims)

    @property
    def n_vertices(self) -> int:
        return math.prod(self.dims)

    @property
    def domain_measure(self) -> float:
        return math.prod((d - 1) * s for d, s in zip(self.dims, self.spacing))

    def coordinates(self) -> np.ndarray:
        """World coordinates of every vertex, row-major, shape (V, d)."""
        axes = [o + s * np.arange(d) for d, s, o in zip(self.dims, self.spacing, self.origin)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)


@dataclass(frozen=True, eq=False)
class SimplicialMesh:
    """Freudenthal triangulation of a structured grid.

    ``simplices`` holds ``d + 1`` vertex indices per row; ``simplex_measure``
    is the area (d=2) or volume (d=3) of each simplex.
    """

    vertices: np.ndarray
    simplices: np.ndarray
    simplex_measure: np.ndarray

    @property
    def dim(self) -> int:
        return self.simplices.shape[1] - 1

    @property
    def n_simplices(self) -> int:
        return self.simplices.shape[0]

    @property
    def total_measure(self) -> float:
        return float(math.fsum(self.simplex_measure))

    @cached_property
    def interior_facets(self) -> np.ndarray:
        """Rows ``(s1, j1, s2, j2)``: simplex s1's facet opposite local vertex j1
        coincides with simplex s2's facet opposite j2. Sorted, s1 < s2."""
        d1 = self.simplices.shape[1]
        rows = []
        for j in range(d1):
            keep = [c for c in range(d1) if c != j]
            facets = np.sort(self.simplices[:, keep], axis=1)
            ids = np.arange(self.n_simplices)
            rows.append(np.column_stack([facets, ids, np.full_like(ids, j)]))
        table = np.concatenate(rows)
        nf = d1 - 1
        order = np.lexsort(tuple(table[:, c] for c in reversed(range(nf + 1))))
        table = table[order]
        same = np.all(table[1:, :nf] == table[:-1, :nf], axis=1)
        idx = np.nonzero(same)[0]
        a, b = table[idx], table[idx + 1]
        out = np.column_stack([a[:, nf], a[:, nf + 1], b[:, nf], b[:, nf + 1]])
        swap = out[:, 0] > out[:, 2]
        out[swap] = out[swap][:, [2, 3, 0, 1]]
        return out[np.lexsort((out[:, 2], out[:, 0]))]


@dataclass(frozen=True, eq=False)
class MultiFieldDataset:
    grid: GridSpec
    samples: np.ndarray  # shape (V, n), row-major vertex order
    mesh: SimplicialMesh = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim == 1:
            samples = samples[:, None]
        if samples.shape[0] != self.grid.n_vertices:
            raise DatasetError(
                f"sample count mismatch: grid has {self.grid.n_vertices} vertices, "
                f"got {samples.shape[0]} rows"
            )
        if samples.shape[1] < 1:
            raise DatasetError("dataset needs at least one field")
        bad = np.argwhere(~np.isfinite(samples))
        if len(bad):
            v, i = bad[0]
            raise DatasetError(f"non-finite value at vertex {v}, field {i}")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        if self.mesh is None:
            object.__setattr__(self, "mesh", triangulate(self.grid))

    @property
    def n_fields(self) -> int:
        return self.samples.shape[1]

    @cached_property
    def range_box(self) -> np.ndarray:
        """Per-field ``[min, max]``, shape (n, 2)."""
        return np.column_stack([self.samples.min(axis=0), self.samples.max(axis=0)])


def triangulate(grid: GridSpec) -> SimplicialMesh:
    """Freudenthal (Kuhn) split: d! simplices per cell, all sharing the main diagonal.

    Each simplex walks from the cell's lowest corner to its highest one,
    adding one unit step per axis in the order of a permutation.
    """
    d = grid.ndim
    dims = np.array(grid.dims)
    cells = np.stack(
        np.meshgrid(*[np.arange(n - 1) for n in dims], indexing="ij"), axis=-1
    ).reshape(-1, d)
    perms = list(itertools.permutations(range(d)))
    simplices = np.empty((len(cells), len(perms), d + 1), dtype=np.int64)
    for p, perm in enumerate(perms):
        corner = cells.copy()
        simplices[:, p, 0] = np.ravel_multi_index(corner.T, dims)
        for step, axis in enumerate(perm, start=1):
            corner[:, axis] += 1
            simplices[:, p, step] = np.ravel_multi_index(corner.T, dims)
    simplices = simplices.reshape(-1, d + 1)
    verts = grid.coordinates()
    edges = verts[simplices[:, 1:]] - verts[simplices[:, :1]]
    measure = np.abs(np.linalg.det(edges)) / math.factorial(d)
    return SimplicialMesh(verts, simplices, measure)


def evaluate(dataset: MultiFieldDataset, simplex: int, bary) -> np.ndarray:
    """PL interpolation: the convex combination of the simplex's vertex samples."""
    bary = np.asarray(bary, dtype=np.float64)
    d1 = dataset.mesh.simplices.shape[1]
    if bary.shape != (d1,):
        raise ValueError(f"expected {d1} barycentric coordinates, got shape {bary.shape}")
    if np.any(bary < -1e-12) or abs(bary.sum() - 1.0) > 1e-12:
        raise ValueError(f"barycentric coordinates {bary.tolist()} lie outside the simplex")
    return bary @ dataset.samples[dataset.mesh.simplices[simplex]]


@dataclass(frozen=True)
class Quantization:
    """Nested dyadic binning of every field's range at one level.

    With ``scheme="floor"`` field i is cut into ``2**level`` equal bins whose
    edges are ``lo + j * (hi - lo) / 2**level``. Bins are half-open except the
    last one, so a value on an edge belongs to the upper bin. ``scheme="round"``
    reproduces nearest-integer quantization (bins centred on the edges); it is
    not nested across levels and exists only to demonstrate that.
    """

    level: int
    lo: tuple[float, ...]
    hi: tuple[float, ...]
    scheme: str = "floor"

    def __post_init__(self):
        if self.level < 0:
            raise ValueError(f"quantization level must be >= 0, got {self.level}")
        if self.scheme not in ("floor", "round"):
            raise ValueError(f"unknown binning scheme {self.scheme!r}")

    @property
    def n_fields(self) -> int:
        return len(self.lo)

    @property
    def q(self) -> int:
        return 2**self.level

    @property
    def degenerate(self) -> tuple[bool, ...]:
        return tuple(lo == hi for lo, hi in zip(self.lo, self.hi))

    @cached_property
    def breakpoints(self) -> tuple[np.ndarray, ...]:
        """Full edge list ``x_0 .. x_q`` per field (a single value if degenerate)."""
        out = []
        for lo, hi in zip(self.lo, self.hi):
            if lo == hi:
                out.append(np.array([lo]))
                continue
            j = np.arange(self.q + 1, dtype=np.float64)
            out.append(lo + j * ((hi - lo) / self.q))
        return tuple(out)

    @cached_property
    def interior(self) -> tuple[np.ndarray, ...]:
        """Cut values per field; a value's bin is the number of cuts <= it."""
        out = []
        for lo, hi, edges in zip(self.lo, self.hi, self.breakpoints):
            if lo == hi:
                out.append(np.empty(0))
            elif self.scheme == "floor":
                out.append(edges[1:-1])
            else:
                j = np.arange(self.q, dtype=np.float64) + 0.5
                out.append(lo + j * ((hi - lo) / self.q))
        return tuple(out)

    def n_bins(self, i: int) -> int:
        return len(self.interior[i]) + 1

    def bin_of(self, values) -> np.ndarray:
        """Bin tuple(s) of value n-tuple(s); works on shape (n,) or (m, n)."""
        values = np.asarray(values, dtype=np.float64)
        cols = [
            np.searchsorted(self.interior[i], values[..., i], side="right")
            for i in range(self.n_fields)
        ]
        return np.stack(cols, axis=-1)

    def bin_edges(self, i: int, j: int) -> tuple[float, float]:
        cuts = self.interior[i]
        lo = self.lo[i] if j == 0 else cuts[j - 1]
        hi = self.hi[i] if j == len(cuts) else cuts[j]
        return float(lo), float(hi)

    def range_measure(self, bin_tuple) -> float:
        """Measure of the bin box over the measure of the range box.

        Bins have uniform width, so this is ``2**-k`` per non-constant field;
        constant fields contribute a factor of 1.
        """
        if len(bin_tuple) != self.n_fields:
            raise ValueError(f"bin tuple {bin_tuple} has wrong length")
        return 0.5 ** (self.level * sum(not d for d in self.degenerate))

    def coarser(self) -> "Quantization":
        if self.level == 0:
            raise ValueError("level 0 has no coarser quantization")
        return Quantization(self.level - 1, self.lo, self.hi, self.scheme)


def make_quantization(dataset: MultiFieldDataset, level: int, scheme: str = "floor") -> Quantization:
    box = dataset.range_box
    return Quantization(level, tuple(box[:, 0].tolist()), tuple(box[:, 1].tolist()), scheme)


def _parse_dims(text: str) -> tuple[int, ...]:
    return tuple(int(t) for t in text.split(","))


def load_dataset(
    path,
    format: str | None = None,
    dims=None,
    spacing=(),
    origin=(),
) -> MultiFieldDataset:
    """Read a dataset in the ``header+binary`` or ``csv`` format.

    The format is inferred from the extension when not given (``.csv`` means
    csv). CSV files carry their grid shape in a ``# dims=8,8`` comment line
    unless ``dims`` is passed explicitly.
    """
    path = Path(path)
    if format is None:
        format = "csv" if path.suffix.lower() == ".csv" else "header+binary"
    if not path.exists():
        raise DatasetError(f"{path}: no such file")
    if format == "header+binary":
        raw = path.read_bytes()
        nl = raw.find(b"\n")
        if nl < 0:
            raise DatasetError(f"{path}: missing header line")
        try:
            header = raw[:nl].decode("utf-8").strip()
        except UnicodeDecodeError as exc:
            raise DatasetError(f"{path}: header is not UTF-8") from exc
        m = HEADER_RE.match(header)
        if m is None:
            raise DatasetError(f"{path}: malformed header {header!r}")
        grid_dims = _parse_dims(m["dims"])
        n = int(m["n"])
        payload = raw[nl + 1 :]
        expected = math.prod(grid_dims) * n * 8
        if len(payload) != expected:
            raise DatasetError(
                f"{path}: sample count mismatch: expected {expected // 8} doubles, "
                f"got {len(payload) / 8:g}"
            )
        samples = np.frombuffer(payload, dtype="<f8").reshape(-1, n).copy()
    elif format == "csv":
        grid_dims = tuple(dims) if dims is not None else None
        rows = []
        with path.open(encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                if line.startswith("#"):
                    m = re.search(r"dims=(\d+(?:,\d+){1,2})", line)
                    if m and grid_dims is None:
                        grid_dims = _parse_dims(m[1])
                    continue
                try:
                    rows.append([float(t) for t in line.split(",")])
                except ValueError as exc:
                    raise DatasetError(f"{path}:{lineno}: {exc}") from exc
        if grid_dims is None:
            raise DatasetError(f"{path}: csv needs a '# dims=...' line or explicit dims")
        if len({len(r) for r in rows}) > 1:
            raise DatasetError(f"{path}: rows have differing field counts")
        samples = np.array(rows, dtype=np.float64)
    else:
        raise DatasetError(f"unknown format {format!r}")
    try:
        grid = GridSpec(grid_dims, spacing, origin)
    except ValueError as exc:
        raise DatasetError(f"{path}: {exc}") from exc
    try:
        return MultiFieldDataset(grid, samples)
    except DatasetError as exc:
        raise DatasetError(f"{path}: {exc}") from exc


def save_dataset(dataset: MultiFieldDataset, path, format: str = "header+binary") -> None:
    path = Path(path)
    dims = ",".join(str(d) for d in dataset.grid.dims)
    if format == "header+binary":
        header = f"MRSFIELD v1 dims={dims} fields={dataset.n_fields} dtype=f64 order=row-major\n"
        path.write_bytes(header.encode("utf-8") + dataset.samples.astype("<f8").tobytes())
    elif format == "csv":
        with path.open("w", encoding="utf-8") as fh:
            fh.write(f"# dims={dims}\n")
            for row in dataset.samples:
                fh.write(",".join(repr(float(v)) for v in row) + "\n")
    else:
        raise ValueError(f"unknown format {format!r}")
