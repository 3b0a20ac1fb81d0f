"""Voxel-style interior model: every grid cell may hold one axis-aligned cuboid.

The room is described by two height matrices (bottom and top of the cuboid in
each cell).  Occlusion between a transmitter and a receiver is the number of
distinct cuboids hit by the straight segment joining them, found with the slab
method.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence

import numpy as np


class Point3(NamedTuple):
    x: float
    y: float
    z: float


@dataclass(frozen=True)
class GridSpec:
    n_x: int
    n_y: int
    cell_size: float
    origin_x: float = 0.0
    origin_y: float = 0.0

    def __post_init__(self):
        if self.cell_size <= 0:
            raise ValueError(f"cell_size must be positive, got {self.cell_size}")
        if self.n_x < 1 or self.n_y < 1:
            raise ValueError(f"grid needs at least one cell, got {self.n_x}x{self.n_y}")

    @property
    def extent(self) -> tuple[float, float]:
        return self.n_x * self.cell_size, self.n_y * self.cell_size

    @property
    def x_max(self) -> float:
        return self.origin_x + self.n_x * self.cell_size

    @property
    def y_max(self) -> float:
        return self.origin_y + self.n_y * self.cell_size

    def cell_center(self, ix: int, iy: int) -> tuple[float, float]:
        return (
            self.origin_x + (ix + 0.5) * self.cell_size,
            self.origin_y + (iy + 0.5) * self.cell_size,
        )

    def centers(self) -> tuple[np.ndarray, np.ndarray]:
        """Cell-center coordinate arrays, each shaped (n_x, n_y)."""
        xs = self.origin_x + (np.arange(self.n_x) + 0.5) * self.cell_size
        ys = self.origin_y + (np.arange(self.n_y) + 0.5) * self.cell_size
        return np.meshgrid(xs, ys, indexing="ij")

    def contains(self, x: float, y: float) -> bool:
        return self.origin_x <= x <= self.x_max and self.origin_y <= y <= self.y_max

    def cell_of(self, x: float, y: float) -> tuple[int, int]:
        # points on the far wall belong to the last cell
        ix = int(np.floor((x - self.origin_x) / self.cell_size))
        iy = int(np.floor((y - self.origin_y) / self.cell_size))
        return min(max(ix, 0), self.n_x - 1), min(max(iy, 0), self.n_y - 1)


class OcclusionReport(NamedTuple):
    n_obstacles: int
    is_los: bool


@dataclass(eq=False)
class InteriorLayout:
    grid: GridSpec
    z_bottom: np.ndarray
    z_top: np.ndarray

    def __post_init__(self):
        shape = (self.grid.n_x, self.grid.n_y)
        self.z_bottom = np.asarray(self.z_bottom, dtype=float)
        self.z_top = np.asarray(self.z_top, dtype=float)
        if self.z_bottom.shape != shape or self.z_top.shape != shape:
            raise ValueError(
                f"height matrices must be {shape}, got {self.z_bottom.shape} and {self.z_top.shape}"
            )
        if np.any(self.z_bottom > self.z_top):
            raise ValueError("z_bottom exceeds z_top in at least one cell")

    @cached_property
    def occupied(self) -> np.ndarray:
        return self.z_top > self.z_bottom

    @cached_property
    def boxes(self) -> tuple[np.ndarray, np.ndarray]:
        """(mins, maxs) arrays of shape (k, 3) for the k nonempty cells, in row-major cell order."""
        ix, iy = np.nonzero(self.occupied)
        g = self.grid
        x0 = g.origin_x + ix * g.cell_size
        y0 = g.origin_y + iy * g.cell_size
        mins = np.column_stack([x0, y0, self.z_bottom[ix, iy]])
        maxs = np.column_stack([x0 + g.cell_size, y0 + g.cell_size, self.z_top[ix, iy]])
        return mins, maxs

    def same_as(self, other: "InteriorLayout") -> bool:
        return (
            self.grid == other.grid
            and np.array_equal(self.z_bottom, other.z_bottom)
            and np.array_equal(self.z_top, other.z_top)
        )


def build_layout(grid: GridSpec, obstacles: Iterable[Sequence[float]]) -> InteriorLayout:
    """Fill cells from ``(cell_x, cell_y, z_bot, z_top)`` entries; later entries win."""
    z_bottom = np.zeros((grid.n_x, grid.n_y))
    z_top = np.zeros((grid.n_x, grid.n_y))
    for k, entry in enumerate(obstacles):
        if len(entry) != 4:
            raise ValueError(f"obstacle #{k} {tuple(entry)!r}: expected (cell_x, cell_y, z_bot, z_top)")
        cx, cy, zb, zt = entry
        if int(cx) != cx or int(cy) != cy:
            raise ValueError(f"obstacle #{k} {tuple(entry)!r}: cell indices must be integers")
        cx, cy = int(cx), int(cy)
        if not (0 <= cx < grid.n_x and 0 <= cy < grid.n_y):
            raise ValueError(
                f"obstacle #{k} {tuple(entry)!r}: cell ({cx}, {cy}) outside {grid.n_x}x{grid.n_y} grid"
            )
        if zb > zt:
            raise ValueError(f"obstacle #{k} {tuple(entry)!r}: z_bot {zb} > z_top {zt}")
        z_bottom[cx, cy] = zb
        z_top[cx, cy] = zt
    return InteriorLayout(grid, z_bottom, z_top)


def cell_blocked(layout: InteriorLayout, cell_x: int, cell_y: int, robot_height: float) -> bool:
    g = layout.grid
    if not (0 <= cell_x < g.n_x and 0 <= cell_y < g.n_y):
        raise IndexError(f"cell ({cell_x}, {cell_y}) outside {g.n_x}x{g.n_y} grid")
    if robot_height <= 0:
        raise ValueError("robot_height must be positive")
    zb = layout.z_bottom[cell_x, cell_y]
    zt = layout.z_top[cell_x, cell_y]
    return bool(zb < robot_height and zt > 0 and zt > zb)


def blocked_mask(layout: InteriorLayout, robot_height: float) -> np.ndarray:
    """Vectorised :func:`cell_blocked` over the whole grid."""
    zb, zt = layout.z_bottom, layout.z_top
    return (zb < robot_height) & (zt > 0) & (zt > zb)


def _canonical(a, b):
    # fixed endpoint order makes the result exactly symmetric in (a, b)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if tuple(b) < tuple(a):
        a, b = b, a
    return a, b


def segment_box_hits(a, b, mins: np.ndarray, maxs: np.ndarray) -> np.ndarray:
    """Closed segment a-b against k closed boxes, slab method. Returns bool array (k,)."""
    a, b = _canonical(a, b)
    mins = np.atleast_2d(mins)
    maxs = np.atleast_2d(maxs)
    d = b - a
    t_enter = np.zeros(len(mins))
    t_exit = np.ones(len(mins))
    hit = np.ones(len(mins), dtype=bool)
    for axis in range(3):
        lo = mins[:, axis]
        hi = maxs[:, axis]
        if d[axis] == 0.0:
            hit &= (lo <= a[axis]) & (a[axis] <= hi)
            continue
        with np.errstate(over="ignore"):  # subnormal d gives +-inf, which the min/max handle
            t0 = (lo - a[axis]) / d[axis]
            t1 = (hi - a[axis]) / d[axis]
        t_enter = np.maximum(t_enter, np.minimum(t0, t1))
        t_exit = np.minimum(t_exit, np.maximum(t0, t1))
    return hit & (t_enter <= t_exit)


def segment_intersects_cuboid(a, b, box_min, box_max) -> bool:
    if np.any(np.asarray(box_min, dtype=float) > np.asarray(box_max, dtype=float)):
        raise ValueError("box_min must not exceed box_max")
    return bool(segment_box_hits(a, b, np.asarray(box_min, float), np.asarray(box_max, float))[0])


def count_occlusions(layout: InteriorLayout, tx, rx) -> OcclusionReport:
    """Number of distinct nonempty cells whose cuboid the tx-rx segment touches."""
    mins, maxs = layout.boxes
    if len(mins) == 0:
        return OcclusionReport(0, True)
    a, b = _canonical(tx, rx)
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    # cheap bounding-box reject before the slab test
    near = np.all((mins <= hi) & (maxs >= lo), axis=1)
    if not near.any():
        return OcclusionReport(0, True)
    n = int(np.count_nonzero(segment_box_hits(a, b, mins[near], maxs[near])))
    return OcclusionReport(n, n == 0)


def export_matrix_csv(matrix: np.ndarray, path) -> None:
    """Row-major CSV with six decimals; one file row per grid row (fixed y)."""
    np.savetxt(path, np.asarray(matrix).T, delimiter=",", fmt="%.6f")
