"""Scenario files: room layout, APs, robots, link parameters, learner overrides.

Scenarios are YAML documents::

    name: desk
    grid: {n_x: 20, n_y: 12, cell_size: 0.5}
    obstacles:                      # cell-index cuboids, later entries win
      - {cell: [3, 4], z: [0, 1.0]}
      - {cells: [[9, 0], [9, 7]], z: [0, 2.5]}   # inclusive rectangle
    aps:
      - {id: ap, role: serving, position: [2, 3, 2], tx_power_dbm: 20}
      - {id: intf, role: interferer, position: [11, 1, 2], tx_power_dbm: 10,
         freq_mhz: 2000, dist_power_coeff: 25.5, floor_loss_base: 15, floor_loss_step: 4}
    irs:
      - {start: [1.0, 1.0], destination: [9.0, 1.0]}
    link: {bandwidth_hz: 15000, demand_bps: 60000, ...}
    learner: {phase1_episodes: 200, ...}

``link`` keys default to the values in :data:`LINK_DEFAULTS`.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
import yaml
from scipy import ndimage

from .layout import GridSpec, InteriorLayout, Point3, blocked_mask, build_layout
from .propagation import PropagationParams
from .radiomap import ApConfig
from .units import dbm_to_mw, noise_power_dbm

LINK_DEFAULTS = {
    "bandwidth_hz": 15_000.0,
    "demand_bps": 60_000.0,
    "noise_density_dbm_hz": -100.0,
    "cluster_power_budget_dbm": 20.0,
    "lambda": 1.0,
    "t_total": 1000,
    "v_max": 1.0,
    "slot_seconds": 1.0,
    "arrival_radius": 0.5,
    "ir_antenna_height": 1.5,
    "ma_mode": "noma",
}

BUNDLED = {"desk": "desk.yaml", "paper-room": "paper_room.yaml"}


class ScenarioError(ValueError):
    pass


@dataclass(eq=False)
class Scenario:
    name: str
    layout: InteriorLayout
    aps: list[ApConfig]
    ir_starts: list[Point3]
    ir_destinations: list[Point3]
    demand_bps: float = 60_000.0
    cluster_power_budget_dbm: float = 20.0
    v_max: float = 1.0
    lam: float = 1.0
    t_total: int = 1000
    ma_mode: str = "noma"
    arrival_radius: float = 0.5
    ir_antenna_height: float = 1.5
    slot_seconds: float = 1.0
    bandwidth_hz: float = 15_000.0
    noise_density_dbm_hz: float = -100.0
    learner: dict = field(default_factory=dict)
    source_digest: str = ""

    @property
    def num_irs(self) -> int:
        return len(self.ir_starts)

    @property
    def grid(self) -> GridSpec:
        return self.layout.grid

    @property
    def serving_ap(self) -> ApConfig:
        return next(ap for ap in self.aps if ap.role == "serving")

    @property
    def interferers(self) -> list[ApConfig]:
        return [ap for ap in self.aps if ap.role == "interferer"]

    @property
    def noise_dbm(self) -> float:
        return noise_power_dbm(self.noise_density_dbm_hz, self.bandwidth_hz)

    @property
    def budget_mw(self) -> float:
        return float(dbm_to_mw(self.cluster_power_budget_dbm))

    @property
    def room_diagonal(self) -> float:
        w, h = self.grid.extent
        return float(np.hypot(w, h))

    def validate(self) -> None:
        serving = [ap for ap in self.aps if ap.role == "serving"]
        if len(serving) != 1:
            raise ScenarioError(f"scenario needs exactly one serving AP, found {len(serving)}")
        if self.num_irs < 1 or len(self.ir_destinations) != self.num_irs:
            raise ScenarioError("each IR needs one start and one destination")
        if self.ma_mode not in ("noma", "oma"):
            raise ScenarioError(f"ma_mode must be noma or oma, got {self.ma_mode!r}")
        for name, val in [("v_max", self.v_max), ("slot_seconds", self.slot_seconds),
                          ("bandwidth_hz", self.bandwidth_hz), ("ir_antenna_height", self.ir_antenna_height),
                          ("arrival_radius", self.arrival_radius), ("t_total", self.t_total)]:
            if not val > 0:
                raise ScenarioError(f"{name} must be positive, got {val}")
        free = ~blocked_mask(self.layout, self.ir_antenna_height)
        labels, _ = ndimage.label(free)  # 4-connected components
        g = self.grid
        for u, (s, d) in enumerate(zip(self.ir_starts, self.ir_destinations)):
            for what, p in (("start", s), ("destination", d)):
                if not g.contains(p.x, p.y):
                    raise ScenarioError(f"IR {u} {what} ({p.x}, {p.y}) lies outside the room")
                if not free[g.cell_of(p.x, p.y)]:
                    raise ScenarioError(f"IR {u} {what} ({p.x}, {p.y}) lies in a blocked cell")
            if labels[g.cell_of(s.x, s.y)] != labels[g.cell_of(d.x, d.y)]:
                raise ScenarioError(f"IR {u}: no obstacle-free path from start to destination")


def _expand_obstacles(entries) -> list[tuple]:
    out = []
    for k, e in enumerate(entries or []):
        try:
            zb, zt = e["z"]
            if "cell" in e:
                cx, cy = e["cell"]
                out.append((cx, cy, zb, zt))
            else:
                (x0, y0), (x1, y1) = e["cells"]
                for cx in range(min(x0, x1), max(x0, x1) + 1):
                    for cy in range(min(y0, y1), max(y0, y1) + 1):
                        out.append((cx, cy, zb, zt))
        except (KeyError, TypeError, ValueError) as exc:
            raise ScenarioError(f"obstacles[{k}] malformed ({exc!r}): {e!r}") from None
    return out


def _ap_from_dict(k: int, d: dict) -> ApConfig:
    try:
        params = PropagationParams(
            freq_mhz=float(d.get("freq_mhz", 2000.0)),
            dist_power_coeff=float(d.get("dist_power_coeff", 25.5)),
            floor_loss_base=float(d.get("floor_loss_base", 15.0)),
            floor_loss_step=float(d.get("floor_loss_step", 4.0)),
        )
        x, y, z = (float(v) for v in d["position"])
        return ApConfig(str(d.get("id", f"ap{k}")), Point3(x, y, z), float(d["tx_power_dbm"]),
                        params, d.get("role", "serving"))
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"aps[{k}] malformed ({exc!r})") from None


def scenario_from_dict(doc: dict, digest: str = "") -> Scenario:
    if not isinstance(doc, dict):
        raise ScenarioError("scenario document must be a mapping")
    try:
        g = doc["grid"]
        grid = GridSpec(int(g["n_x"]), int(g["n_y"]), float(g["cell_size"]),
                        float(g.get("origin_x", 0.0)), float(g.get("origin_y", 0.0)))
        layout = build_layout(grid, _expand_obstacles(doc.get("obstacles")))
    except ScenarioError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"grid/obstacles invalid: {exc}") from None
    aps = [_ap_from_dict(k, d) for k, d in enumerate(doc.get("aps") or [])]
    link = {**LINK_DEFAULTS, **(doc.get("link") or {})}
    unknown = set(link) - set(LINK_DEFAULTS)
    if unknown:
        raise ScenarioError(f"unknown link keys: {sorted(unknown)}")
    starts, dests = [], []
    for k, ir in enumerate(doc.get("irs") or []):
        try:
            sx, sy = (float(v) for v in ir["start"])
            dx, dy = (float(v) for v in ir["destination"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ScenarioError(f"irs[{k}] malformed ({exc!r})") from None
        starts.append(Point3(sx, sy, 0.0))
        dests.append(Point3(dx, dy, 0.0))
    sc = Scenario(
        name=str(doc.get("name", "scenario")),
        layout=layout,
        aps=aps,
        ir_starts=starts,
        ir_destinations=dests,
        demand_bps=float(link["demand_bps"]),
        cluster_power_budget_dbm=float(link["cluster_power_budget_dbm"]),
        v_max=float(link["v_max"]),
        lam=float(link["lambda"]),
        t_total=int(link["t_total"]),
        ma_mode=str(link["ma_mode"]),
        arrival_radius=float(link["arrival_radius"]),
        ir_antenna_height=float(link["ir_antenna_height"]),
        slot_seconds=float(link["slot_seconds"]),
        bandwidth_hz=float(link["bandwidth_hz"]),
        noise_density_dbm_hz=float(link["noise_density_dbm_hz"]),
        learner=dict(doc.get("learner") or {}),
        source_digest=digest,
    )
    sc.validate()
    return sc


def resolve_path(name_or_path) -> Path:
    """A bundled scenario name ("desk", "paper-room") or a filesystem path."""
    if str(name_or_path) in BUNDLED:
        return Path(str(resources.files("indoor_noma") / "scenarios" / BUNDLED[str(name_or_path)]))
    return Path(name_or_path)


def load_scenario(name_or_path) -> Scenario:
    path = resolve_path(name_or_path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {name_or_path}: {exc.strerror}") from None
    try:
        doc = yaml.safe_load(raw)
    except yaml.YAMLError as exc:
        raise ScenarioError(f"{path}: YAML error: {exc}") from None
    return scenario_from_dict(doc, hashlib.sha256(raw).hexdigest())
