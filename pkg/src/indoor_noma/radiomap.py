"""Per-transmitter received-power maps, the SINR map built from them, and CSV I/O."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .layout import GridSpec, InteriorLayout, Point3, count_occlusions
from .propagation import PropagationParams, path_loss
from .units import dbm_to_mw, mw_to_dbm

# SINR value reported for points outside the room (0 dB is a legal SINR)
OUTSIDE_SENTINEL_DB = -999.0


@dataclass(frozen=True)
class ApConfig:
    id: str
    position: Point3
    tx_power_dbm: float
    params: PropagationParams = field(default_factory=PropagationParams)
    role: str = "serving"  # "serving" | "interferer"

    def __post_init__(self):
        if self.role not in ("serving", "interferer"):
            raise ValueError(f"AP {self.id}: role must be serving or interferer, got {self.role!r}")
        if not math.isfinite(self.tx_power_dbm):
            raise ValueError(f"AP {self.id}: tx_power_dbm must be finite")


@dataclass(eq=False)
class GridMap:
    grid: GridSpec
    rx_height: float
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n_x, self.grid.n_y):
            raise ValueError(
                f"map values must be {(self.grid.n_x, self.grid.n_y)}, got {self.values.shape}"
            )

    def at(self, x: float, y: float) -> float:
        if not self.grid.contains(x, y):
            return OUTSIDE_SENTINEL_DB
        return float(self.values[self.grid.cell_of(x, y)])


class PowerMap(GridMap):
    """Received power in dBm sampled at each cell center."""


class SinrMap(GridMap):
    """SINR in dB per cell."""


def build_power_map(layout: InteriorLayout, ap: ApConfig, rx_height: float) -> PowerMap:
    if rx_height < 0:
        raise ValueError("rx_height must be nonnegative")
    pos = np.asarray(ap.position, dtype=float)
    if not np.all(np.isfinite(pos)):
        raise ValueError(f"AP {ap.id}: position must be finite, got {tuple(ap.position)}")
    cx, cy = layout.grid.centers()
    dist = np.sqrt((pos[2] - rx_height) ** 2 + (cx - pos[0]) ** 2 + (cy - pos[1]) ** 2)
    loss = path_loss(dist, occlusion_counts(layout, ap, rx_height), ap.params)
    return PowerMap(layout.grid, rx_height, ap.tx_power_dbm - loss)


def occlusion_counts(layout: InteriorLayout, ap: ApConfig, rx_height: float) -> np.ndarray:
    grid = layout.grid
    out = np.zeros((grid.n_x, grid.n_y), dtype=int)
    for ix in range(grid.n_x):
        for iy in range(grid.n_y):
            x, y = grid.cell_center(ix, iy)
            out[ix, iy] = count_occlusions(layout, ap.position, (x, y, rx_height)).n_obstacles
    return out


def build_sinr_map(serving: PowerMap, interferers: list[PowerMap], noise_dbm: float) -> SinrMap:
    for k, m in enumerate(interferers):
        if m.grid != serving.grid:
            raise ValueError(f"interferer map #{k} grid {m.grid} differs from serving grid {serving.grid}")
    if not interferers:
        return SinrMap(serving.grid, serving.rx_height, serving.values - noise_dbm)
    denom = np.full(serving.values.shape, float(dbm_to_mw(noise_dbm)))
    for m in interferers:
        denom = denom + dbm_to_mw(m.values)
    sinr = serving.values - mw_to_dbm(denom)
    return SinrMap(serving.grid, serving.rx_height, sinr)


class MapFormatError(ValueError):
    pass


def _header(m: GridMap) -> str:
    g = m.grid
    return f"# grid {g.n_x} {g.n_y} {g.cell_size!r} {g.origin_x!r} {g.origin_y!r} {m.rx_height!r}"


def export_map(m: GridMap, path) -> None:
    """Header line, then n_y rows of n_x comma-separated values (6 decimals)."""
    lines = [_header(m)]
    for iy in range(m.grid.n_y):
        lines.append(",".join(f"{v:.6f}" for v in m.values[:, iy]))
    Path(path).write_text("\n".join(lines) + "\n")


def import_map(path, kind: type[GridMap] = PowerMap, expected_grid: GridSpec | None = None) -> GridMap:
    text = Path(path).read_text().splitlines()
    if not text:
        raise MapFormatError(f"{path}: line 1: empty file")
    parts = text[0].split()
    if len(parts) != 8 or parts[:2] != ["#", "grid"]:
        raise MapFormatError(
            f"{path}: line 1: expected '# grid n_x n_y cell_size origin_x origin_y rx_height'"
        )
    try:
        n_x, n_y = int(parts[2]), int(parts[3])
        cell, ox, oy, rx_h = (float(p) for p in parts[4:])
        grid = GridSpec(n_x, n_y, cell, ox, oy)
    except ValueError as exc:
        raise MapFormatError(f"{path}: line 1: bad grid header ({exc})") from None
    if expected_grid is not None and grid != expected_grid:
        raise MapFormatError(f"{path}: line 1: grid {grid} does not match expected {expected_grid}")
    rows = text[1:]
    while rows and not rows[-1].strip():
        rows.pop()
    if len(rows) != n_y:
        raise MapFormatError(f"{path}: line {len(rows) + 2}: expected {n_y} data rows, found {len(rows)}")
    values = np.empty((n_x, n_y))
    for iy, line in enumerate(rows):
        lineno = iy + 2
        cells = line.split(",")
        if len(cells) != n_x:
            raise MapFormatError(f"{path}: line {lineno}: expected {n_x} values, found {len(cells)}")
        try:
            values[:, iy] = [float(c) for c in cells]
        except ValueError as exc:
            raise MapFormatError(f"{path}: line {lineno}: {exc}") from None
    return kind(grid, rx_h, values)
