"""Discrete domains with closed-form boundary distance.

Three shapes are supported, chosen so that the distance to the boundary
delta(x) = dist(x, boundary) is exact:

* ``interval``  -- (a, b) in 1D,
* ``rectangle`` -- (0, Lx) x (0, Ly), tensor grid (corners make it merely
  Lipschitz; rectangle runs are heuristic),
* ``disk``      -- radius R, discretized by its radial reduction: nodes live
  on one spoke r in [0, R] and operators act on radially symmetric
  functions (the center r = 0 is an interior node with a symmetry stencil).

Boundary-graded meshes apply the map s -> s**(1 + strength) measured from
each boundary: symmetrically from both endpoints for intervals, from the
rim inward for disks, per axis for rectangles.  Node ordering is
lexicographic by axis so CSV output is reproducible.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainGeometryError, GridMismatchError, ResolutionError

INTERVAL = "interval"
RECTANGLE = "rectangle"
DISK = "disk"

_KINDS = (INTERVAL, RECTANGLE, DISK)


@dataclass(frozen=True)
class Domain:
    """Geometric domain description.

    extents: interval endpoints (a, b); rectangle side lengths (Lx, Ly);
    disk radius (R,).
    """

    kind: str
    extents: tuple[float, ...]

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise DomainGeometryError(f"unknown domain kind {self.kind!r}")
        ext = tuple(float(e) for e in self.extents)
        object.__setattr__(self, "extents", ext)
        if self.kind == INTERVAL:
            if len(ext) != 2 or not ext[1] > ext[0]:
                raise DomainGeometryError("interval needs endpoints a < b")
        elif self.kind == RECTANGLE:
            if len(ext) != 2 or min(ext) <= 0:
                raise DomainGeometryError("rectangle needs positive side lengths")
        else:
            if len(ext) != 1 or ext[0] <= 0:
                raise DomainGeometryError("disk needs a positive radius")

    @property
    def dim(self) -> int:
        return 1 if self.kind == INTERVAL else 2

    @property
    def diameter(self) -> float:
        if self.kind == INTERVAL:
            return self.extents[1] - self.extents[0]
        if self.kind == RECTANGLE:
            return float(np.hypot(*self.extents))
        return 2.0 * self.extents[0]


def interval(a: float = 0.0, b: float = 1.0) -> Domain:
    return Domain(INTERVAL, (a, b))


def rectangle(lx: float, ly: float) -> Domain:
    return Domain(RECTANGLE, (lx, ly))


def disk(radius: float = 1.0) -> Domain:
    return Domain(DISK, (radius,))


def distance_to_boundary(domain: Domain, point) -> float:
    """Exact Euclidean distance from ``point`` to the domain boundary.

    Raises DomainGeometryError when the point lies outside the closure.
    """
    p = np.atleast_1d(np.asarray(point, dtype=float))
    tol = 1e-12 * (1.0 + domain.diameter)
    if domain.kind == INTERVAL:
        a, b = domain.extents
        (x,) = p
        if x < a - tol or x > b + tol:
            raise DomainGeometryError(f"point {x} outside interval [{a}, {b}]")
        return float(min(x - a, b - x))
    if domain.kind == RECTANGLE:
        lx, ly = domain.extents
        x, y = p
        if not (-tol <= x <= lx + tol and -tol <= y <= ly + tol):
            raise DomainGeometryError(f"point {point} outside rectangle")
        return float(min(x, lx - x, y, ly - y))
    (radius,) = domain.extents
    r = float(np.hypot(*p)) if p.size == 2 else abs(float(p[0]))
    if r > radius + tol:
        raise DomainGeometryError(f"point {point} outside disk of radius {radius}")
    return float(radius - r)


def graded_unit_nodes(n: int, strength: float) -> np.ndarray:
    """Graded nodes on [0, 1], clustered at both endpoints.

    The documented map: for uniform s in [0, 1/2], g(s) = (2 s)**(1+strength)/2,
    mirrored on [1/2, 1].  strength = 0 reproduces the uniform grid.
    """
    s = np.linspace(0.0, 1.0, n)
    k = 1.0 + strength
    out = np.where(s <= 0.5, 0.5 * (2.0 * s) ** k, 1.0 - 0.5 * (2.0 * (1.0 - s)) ** k)
    out[0], out[-1] = 0.0, 1.0
    return out


def graded_boundary_layer(n: int, strength: float) -> np.ndarray:
    """One-sided graded nodes on [0, 1], clustered at 1 (the boundary end)."""
    s = np.linspace(0.0, 1.0, n)
    return 1.0 - (1.0 - s) ** (1.0 + strength)


@dataclass(frozen=True)
class Grid:
    """Immutable discrete domain.

    nodes are (N, dim) coordinates in lexicographic axis order, delta holds
    the exact boundary distance per node and vanishes exactly on boundary
    nodes.  ``axes`` stores the per-axis coordinate lines: (xs,) for the
    interval, (xs, ys) for the rectangle, (rs,) for the disk spoke.
    """

    domain: Domain
    nodes: np.ndarray
    interior_mask: np.ndarray
    delta: np.ndarray
    axes: tuple[np.ndarray, ...]
    grading: str = "uniform"
    strength: float = 0.0

    def __post_init__(self):
        self.nodes.setflags(write=False)
        self.interior_mask.setflags(write=False)
        self.delta.setflags(write=False)
        for ax in self.axes:
            ax.setflags(write=False)

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def kind(self) -> str:
        return self.domain.kind

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(ax) for ax in self.axes)

    @property
    def interior_indices(self) -> np.ndarray:
        return np.flatnonzero(self.interior_mask)

    @property
    def line_coordinates(self) -> np.ndarray:
        """1D coordinate line for interval and disk grids."""
        if self.kind == RECTANGLE:
            raise GridMismatchError("rectangle grid has no single coordinate line")
        return self.axes[0]

    def boundary_cell_width(self) -> float:
        """Width of the smallest boundary-adjacent cell."""
        if self.kind == RECTANGLE:
            return min(float(np.diff(ax).min()) for ax in self.axes)
        xs = self.axes[0]
        if self.kind == INTERVAL:
            return float(min(xs[1] - xs[0], xs[-1] - xs[-2]))
        return float(xs[-1] - xs[-2])


def build_grid(domain: Domain, n: int, grading: str = "uniform",
               strength: float = 1.0) -> Grid:
    """Build a grid with ``n`` nodes per axis.

    grading is "uniform" or "boundary_graded"; the grading strength must lie
    in [0, 4] and concentrates nodes so the smallest boundary cell is
    O(h**(1+strength)).
    """
    n = int(n)
    if n < 8:
        raise ResolutionError(f"need n >= 8 nodes per axis, got {n}")
    if grading not in ("uniform", "boundary_graded"):
        raise DomainGeometryError(f"unknown grading {grading!r}")
    if grading == "uniform":
        strength = 0.0
    if not 0.0 <= strength <= 4.0:
        raise DomainGeometryError("grading strength must lie in [0, 4]")

    if domain.kind == INTERVAL:
        a, b = domain.extents
        xs = a + (b - a) * graded_unit_nodes(n, strength)
        nodes = xs[:, None].copy()
        delta = np.minimum(xs - a, b - xs)
        delta[0] = delta[-1] = 0.0
        mask = np.ones(n, dtype=bool)
        mask[0] = mask[-1] = False
        return Grid(domain, nodes, mask, delta, (xs,), grading, strength)

    if domain.kind == DISK:
        (radius,) = domain.extents
        rs = radius * graded_boundary_layer(n, strength)
        nodes = np.column_stack([rs, np.zeros(n)])
        delta = radius - rs
        delta[-1] = 0.0
        mask = np.ones(n, dtype=bool)
        mask[-1] = False
        return Grid(domain, nodes, mask, delta, (rs,), grading, strength)

    lx, ly = domain.extents
    xs = lx * graded_unit_nodes(n, strength)
    ys = ly * graded_unit_nodes(n, strength)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    nodes = np.column_stack([gx.ravel(), gy.ravel()])
    delta = np.minimum.reduce([gx.ravel(), lx - gx.ravel(),
                               gy.ravel(), ly - gy.ravel()])
    on_edge = ((gx == xs[0]) | (gx == xs[-1]) | (gy == ys[0]) | (gy == ys[-1]))
    mask = ~on_edge.ravel()
    delta[~mask] = 0.0
    return Grid(domain, nodes, mask, delta, (xs, ys), grading, strength)


@dataclass
class GridFunction:
    """Nodal real values on a grid."""

    grid: Grid
    values: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.values is None:
            self.values = np.zeros(self.grid.n_nodes)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n_nodes,):
            raise GridMismatchError(
                f"value count {self.values.shape} != node count {self.grid.n_nodes}")

    def copy(self) -> "GridFunction":
        return GridFunction(self.grid, self.values.copy())

    def interior(self) -> np.ndarray:
        return self.values[self.grid.interior_mask]

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.values)))

    def to_csv(self, path) -> None:
        """One row per node: coordinates, delta, interior flag, value."""
        g = self.grid
        coord_names = ["x"] if g.domain.dim == 1 or g.kind == DISK else ["x", "y"]
        if g.kind == DISK:
            coord_names = ["r"]
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(coord_names + ["delta", "interior", "value"])
            for i in range(g.n_nodes):
                coords = [repr(c) for c in np.atleast_1d(g.nodes[i])[: len(coord_names)]]
                writer.writerow(coords + [repr(g.delta[i]),
                                          int(g.interior_mask[i]),
                                          repr(self.values[i])])


def grid_function_from_csv(grid: Grid, path) -> GridFunction:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    if len(body) != grid.n_nodes:
        raise GridMismatchError("CSV row count does not match grid")
    col = header.index("value")
    return GridFunction(grid, np.array([float(r[col]) for r in body]))


def same_grid(a: GridFunction, b: GridFunction) -> None:
    if a.grid is not b.grid and (a.grid.n_nodes != b.grid.n_nodes
                                 or not np.array_equal(a.grid.nodes, b.grid.nodes)):
        raise GridMismatchError("grid functions live on different grids")
