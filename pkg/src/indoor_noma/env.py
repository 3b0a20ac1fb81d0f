"""Episodic robot navigation + downlink power allocation environment.

One step is one time slot.  The agent moves every robot (IR) that has not yet
arrived and splits the serving AP's power budget among them; the NOMA (or OMA)
link is then evaluated at the new positions and the slot is scored.

Reward modes (``phase``):

* ``1``: destination training, ``R_c + R_i`` per active IR plus bonuses
* ``2``: MQI training, ``R_c - lambda * outage`` per active IR plus bonuses
* ``"combined"``: ``R_c + R_i - lambda * outage`` (single-phase DDPG baseline)

An IR is *active* in a slot if it had not arrived before the slot started.
Mission time and outage slots are accumulated over active slots only, so the
phase-2 episode return equals ``MQI - t_total + bonuses``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .layout import blocked_mask
from .noma import IrLinkState, PowerAllocation, mqi, noma_link, oma_rates
from .propagation import FadingModel, sample_fading
from .radiomap import PowerMap, build_power_map
from .scenario import Scenario
from .units import dbm_to_mw

R_TIME = -1.0
R_ARRIVE = 10.0
R_SUCCESS = 200.0

# observation gain scaling: (dBm + GAIN_OFFSET) / GAIN_SPAN
GAIN_OFFSET = 100.0
GAIN_SPAN = 70.0


@dataclass(frozen=True)
class EnvState:
    positions: np.ndarray  # (U, 2) meters
    arrived: np.ndarray  # (U,) bool
    gains_dbm: np.ndarray  # (U,) received serving power at each IR
    elapsed: int
    outage_slots: np.ndarray  # (U,) slots in outage while active
    mission_slots: np.ndarray  # (U,) slots spent before arriving


@dataclass(frozen=True)
class EnvAction:
    motion: np.ndarray  # (U, 2) requested displacement in meters
    power_frac: np.ndarray  # (U,) raw power fractions in [0, 1]

    @classmethod
    def from_raw(cls, raw, scenario: Scenario) -> "EnvAction":
        """Map a learner action in [-1, 1]^(3U), laid out (dx, dy, p) per IR."""
        raw = np.asarray(raw, dtype=float).reshape(scenario.num_irs, 3)
        step = scenario.v_max * scenario.slot_seconds
        return cls(raw[:, :2] * step, np.clip((raw[:, 2] + 1.0) / 2.0, 0.0, 1.0))


@dataclass
class StepOutcome:
    reward: float
    state: EnvState
    done: bool
    info: dict


def allocate_power(power_frac, budget_mw: float, active=None) -> np.ndarray:
    """P_u = budget * a_u / max(1, sum a); inactive IRs get nothing."""
    a = np.clip(np.asarray(power_frac, dtype=float), 0.0, 1.0)
    if active is not None:
        a = np.where(active, a, 0.0)
    p = budget_mw * a / max(1.0, float(a.sum()))
    while p.sum() > budget_mw:  # float rounding; at most a few ulps
        p = np.nextafter(p, 0.0)
    return p


def reward_phase1(distances, d_max: float, active, new_arrivals, all_arrived: bool) -> float:
    d = np.asarray(distances, dtype=float)
    active = np.asarray(active, dtype=bool)
    inducing = 1.0 - d / d_max
    r = float(np.sum(np.where(active, R_TIME + inducing, 0.0)))
    return r + R_ARRIVE * int(np.count_nonzero(new_arrivals)) + (R_SUCCESS if all_arrived else 0.0)


def reward_phase2(outage, active, new_arrivals, all_arrived: bool, lam: float) -> float:
    active = np.asarray(active, dtype=bool)
    out = np.asarray(outage, dtype=bool) & active
    r = R_TIME * int(np.count_nonzero(active)) - lam * int(np.count_nonzero(out))
    return r + R_ARRIVE * int(np.count_nonzero(new_arrivals)) + (R_SUCCESS if all_arrived else 0.0)


class IndoorRobotEnv:
    def __init__(self, scenario: Scenario, channel_source: str = "radio_map", ma_mode: str | None = None,
                 maps: dict[str, PowerMap] | None = None):
        if channel_source not in ("radio_map", "sampled"):
            raise ValueError(f"channel_source must be radio_map or sampled, got {channel_source!r}")
        self.scenario = scenario
        self.channel_source = channel_source
        self.ma_mode = ma_mode or scenario.ma_mode
        if self.ma_mode not in ("noma", "oma"):
            raise ValueError(f"ma_mode must be noma or oma, got {self.ma_mode!r}")
        self.maps = maps if maps is not None else build_maps(scenario)
        self.grid = scenario.grid
        self.blocked = blocked_mask(scenario.layout, scenario.ir_antenna_height)
        self.noise_mw = float(dbm_to_mw(scenario.noise_dbm))
        self.fading = FadingModel("sampled" if channel_source == "sampled" else "expected")
        self.dests = np.array([(p.x, p.y) for p in scenario.ir_destinations])
        self.d_max = scenario.room_diagonal
        self.rng = np.random.default_rng(0)
        self.state: EnvState | None = None
        self._serving = scenario.serving_ap
        self._interferers = scenario.interferers

    @property
    def obs_dim(self) -> int:
        return 3 * self.scenario.num_irs

    @property
    def act_dim(self) -> int:
        return 3 * self.scenario.num_irs

    # -- channel --------------------------------------------------------
    def _cells(self, positions):
        return [self.grid.cell_of(x, y) for x, y in positions]

    def _channel(self, positions):
        """Per-IR (serving rx dBm, interference mW), with fading if sampled."""
        cells = self._cells(positions)
        u = len(cells)
        serv = np.array([self.maps[self._serving.id].values[c] for c in cells])
        interf = np.zeros(u)
        if self.fading.mode == "sampled":
            serv = serv + 10.0 * np.log10(sample_fading(self.fading, self.rng, size=u))
        for ap in self._interferers:
            p = np.array([self.maps[ap.id].values[c] for c in cells])
            if self.fading.mode == "sampled":
                p = p + 10.0 * np.log10(sample_fading(self.fading, self.rng, size=u))
            interf += dbm_to_mw(p)
        return serv, interf

    # -- episode --------------------------------------------------------
    def reset(self, seed: int | None = None) -> EnvState:
        self.rng = np.random.default_rng(seed)
        u = self.scenario.num_irs
        pos = np.array([(p.x, p.y) for p in self.scenario.ir_starts])
        gains, _ = self._channel(pos)
        self.state = EnvState(pos, np.zeros(u, dtype=bool), gains, 0,
                              np.zeros(u, dtype=int), np.zeros(u, dtype=int))
        return self.state

    def _move_axis(self, x, y, delta, axis):
        """Slide along one axis; cancel the move if it leaves the room or crosses a blocked cell."""
        g = self.grid
        if delta == 0.0:
            return x, y
        nx, ny = (x + delta, y) if axis == 0 else (x, y + delta)
        if not g.contains(nx, ny):
            return x, y
        (cx0, cy0), (cx1, cy1) = g.cell_of(x, y), g.cell_of(nx, ny)
        # every cell swept by the move, so a fast IR cannot tunnel through a thin wall
        if axis == 0:
            swept = self.blocked[min(cx0, cx1):max(cx0, cx1) + 1, cy0]
        else:
            swept = self.blocked[cx0, min(cy0, cy1):max(cy0, cy1) + 1]
        if swept.any():
            return x, y
        return nx, ny

    def step(self, action, phase=1) -> StepOutcome:
        sc = self.scenario
        st = self.state
        if st is None:
            raise RuntimeError("call reset() before step()")
        if not isinstance(action, EnvAction):
            action = EnvAction.from_raw(action, sc)
        motion = np.asarray(action.motion, dtype=float)
        frac = np.asarray(action.power_frac, dtype=float)
        if motion.shape != (sc.num_irs, 2) or frac.shape != (sc.num_irs,):
            raise ValueError(f"action shape mismatch for {sc.num_irs} IRs")
        if np.isnan(motion).any() or np.isnan(frac).any():
            raise ValueError("action contains NaN")

        active = ~st.arrived
        limit = sc.v_max * sc.slot_seconds
        pos = st.positions.copy()
        for u in np.flatnonzero(active):
            dx, dy = motion[u]
            mag = math.hypot(dx, dy)
            if mag > limit:
                dx, dy = dx * limit / mag, dy * limit / mag
            x, y = self._move_axis(pos[u, 0], pos[u, 1], dx, 0)
            x, y = self._move_axis(x, y, dy, 1)
            pos[u] = (x, y)

        dist = np.hypot(*(pos - self.dests).T)
        new_arrivals = active & (dist <= sc.arrival_radius)
        arrived = st.arrived | new_arrivals
        all_arrived = bool(arrived.all())

        powers = allocate_power(frac, sc.budget_mw, active)
        serv_dbm, interf_mw = self._channel(pos)
        rates = np.zeros(sc.num_irs)
        outage = np.zeros(sc.num_irs, dtype=bool)
        sinr = np.zeros(sc.num_irs)
        ids = np.flatnonzero(active)
        if ids.size:
            tx = self._serving.tx_power_dbm
            states = [IrLinkState(int(u), float(dbm_to_mw(serv_dbm[u] - tx)), float(interf_mw[u]), self.noise_mw)
                      for u in ids]
            alloc = PowerAllocation(tuple(powers[ids]), sc.budget_mw)
            if self.ma_mode == "noma":
                rep = noma_link(states, alloc, sc.bandwidth_hz, sc.demand_bps)
            else:
                rep = oma_rates(states, alloc, sc.bandwidth_hz, len(states), sc.demand_bps)
            rates[ids] = rep.rate_bps
            outage[ids] = rep.outage
            sinr[ids] = rep.sinr_linear

        outage_slots = st.outage_slots + (outage & active)
        mission_slots = st.mission_slots + active
        elapsed = st.elapsed + 1

        if phase == 1:
            reward = reward_phase1(dist, self.d_max, active, new_arrivals, all_arrived)
        elif phase == 2:
            reward = reward_phase2(outage, active, new_arrivals, all_arrived, sc.lam)
        elif phase == "combined":
            reward = (reward_phase1(dist, self.d_max, active, new_arrivals, all_arrived)
                      - sc.lam * int(np.count_nonzero(outage & active)))
        else:
            raise ValueError(f"unknown reward phase {phase!r}")

        self.state = EnvState(pos, arrived, serv_dbm, elapsed, outage_slots, mission_slots)
        done = all_arrived or elapsed >= sc.t_total
        info = {"rates": rates, "outage": outage & active, "powers": powers, "sinr": sinr,
                "new_arrivals": new_arrivals, "active": active, "distances": dist}
        return StepOutcome(float(reward), self.state, done, info)

    def observe(self, state: EnvState | None = None) -> np.ndarray:
        st = state if state is not None else self.state
        w, h = self.grid.extent
        obs = np.empty((self.scenario.num_irs, 3))
        obs[:, 0] = (st.positions[:, 0] - self.grid.origin_x) / w
        obs[:, 1] = (st.positions[:, 1] - self.grid.origin_y) / h
        obs[:, 2] = (st.gains_dbm + GAIN_OFFSET) / GAIN_SPAN
        return obs.ravel()

    def episode_mqi(self, state: EnvState | None = None) -> float:
        st = state if state is not None else self.state
        return mqi(self.scenario.t_total, st.mission_slots.tolist(), st.outage_slots.tolist(), self.scenario.lam)


def build_maps(scenario: Scenario) -> dict[str, PowerMap]:
    return {ap.id: build_power_map(scenario.layout, ap, scenario.ir_antenna_height) for ap in scenario.aps}
