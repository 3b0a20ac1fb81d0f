"""Downlink NOMA cluster with SIC, the OMA baseline, and the mission quality indicator.

All link arithmetic is in linear units (milliwatts, dimensionless power gains).
Per-IR outputs are aligned with the order of the input ``states`` list and
carry ``ir_ids`` so results never depend on positional labels.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

# relative slack when checking a power allocation against the budget
BUDGET_RTOL = 1e-12


@dataclass(frozen=True)
class IrLinkState:
    ir_id: int
    channel_gain_linear: float
    external_interference_mw: float
    noise_mw: float

    def __post_init__(self):
        if self.channel_gain_linear < 0 or self.external_interference_mw < 0:
            raise ValueError(f"IR {self.ir_id}: gain and interference must be nonnegative")


@dataclass(frozen=True)
class EquivalentGain:
    ir_id: int
    value: float


@dataclass(frozen=True)
class DecodingOrder:
    """IR ids from first-decoded (weakest) to last-decoded (strongest)."""

    ir_ids: tuple[int, ...]

    def position(self, ir_id: int) -> int:
        return self.ir_ids.index(ir_id)


@dataclass(frozen=True)
class PowerAllocation:
    powers_mw: tuple[float, ...]
    budget_mw: float

    def __post_init__(self):
        p = np.asarray(self.powers_mw, dtype=float)
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise ValueError(f"powers must be finite and nonnegative, got {self.powers_mw}")
        if p.sum() > self.budget_mw * (1 + BUDGET_RTOL):
            raise ValueError(f"allocation {p.sum():.6g} mW exceeds cluster budget {self.budget_mw:.6g} mW")


@dataclass
class LinkReport:
    ir_ids: tuple[int, ...]
    sinr_linear: np.ndarray
    rate_bps: np.ndarray | None = None
    outage: np.ndarray | None = None

    def by_id(self, field_name: str = "sinr_linear") -> dict[int, float]:
        vals = getattr(self, field_name)
        return {i: vals[k] for k, i in enumerate(self.ir_ids)}


def equivalent_gains(states: Sequence[IrLinkState]) -> list[EquivalentGain]:
    if not states:
        raise ValueError("need at least one IR")
    out = []
    for s in states:
        if s.noise_mw <= 0:
            raise ValueError(f"IR {s.ir_id}: noise power must be positive, got {s.noise_mw}")
        out.append(EquivalentGain(s.ir_id, s.channel_gain_linear / (s.external_interference_mw + s.noise_mw)))
    return out


def decoding_order(gains: Sequence[EquivalentGain]) -> DecodingOrder:
    """Ascending equivalent gain; ties go to the smaller ir_id first."""
    if not gains:
        raise ValueError("need at least one IR")
    ranked = sorted(gains, key=lambda g: (g.value, g.ir_id))
    return DecodingOrder(tuple(g.ir_id for g in ranked))


def _check_alignment(order: DecodingOrder, states: Sequence[IrLinkState], alloc: PowerAllocation):
    ids = [s.ir_id for s in states]
    if len(set(ids)) != len(ids):
        raise ValueError(f"duplicate ir_id in states: {ids}")
    if sorted(order.ir_ids) != sorted(ids):
        raise ValueError(f"decoding order {order.ir_ids} does not match IRs {tuple(ids)}")
    if len(alloc.powers_mw) != len(states):
        raise ValueError(f"{len(alloc.powers_mw)} powers for {len(states)} IRs")


def cluster_sinr(order: DecodingOrder, states: Sequence[IrLinkState], alloc: PowerAllocation) -> LinkReport:
    """SIC receiver SINR: an IR removes the signals decoded before its own and
    treats those decoded after it as intra-cluster interference."""
    _check_alignment(order, states, alloc)
    idx = {s.ir_id: k for k, s in enumerate(states)}
    p = np.asarray(alloc.powers_mw, dtype=float)
    sinr = np.empty(len(states))
    for pos, ir in enumerate(order.ir_ids):
        k = idx[ir]
        s = states[k]
        later = sum(p[idx[j]] for j in order.ir_ids[pos + 1:])
        g = s.channel_gain_linear
        sinr[k] = g * p[k] / (g * later + s.external_interference_mw + s.noise_mw)
    return LinkReport(tuple(s.ir_id for s in states), sinr)


def threshold_sinr(demand_bps: float, bandwidth_hz: float) -> float:
    """Smallest linear SINR whose Shannon rate meets the demand."""
    return 2.0 ** (demand_bps / bandwidth_hz) - 1.0


def rates_and_outage(report: LinkReport, bandwidth_hz: float, demand_bps: float) -> LinkReport:
    if bandwidth_hz <= 0:
        raise ValueError("bandwidth must be positive")
    rate = bandwidth_hz * np.log2(1.0 + report.sinr_linear)
    return LinkReport(report.ir_ids, report.sinr_linear, rate, rate < demand_bps)


def oma_rates(
    states: Sequence[IrLinkState],
    alloc: PowerAllocation,
    bandwidth_hz: float,
    num_irs: int | None = None,
    demand_bps: float | None = None,
) -> LinkReport:
    """Equal orthogonal band split, no intra-cluster interference.

    Each IR sees the noise of its own ``B/U`` sub-band; external interference is
    not rescaled.
    """
    if len(alloc.powers_mw) != len(states):
        raise ValueError(f"{len(alloc.powers_mw)} powers for {len(states)} IRs")
    u = len(states) if num_irs is None else num_irs
    if u < 1:
        raise ValueError("num_irs must be positive")
    p = np.asarray(alloc.powers_mw, dtype=float)
    sinr = np.array(
        [s.channel_gain_linear * p[k] / (s.external_interference_mw + s.noise_mw / u) for k, s in enumerate(states)]
    )
    rate = (bandwidth_hz / u) * np.log2(1.0 + sinr)
    outage = None if demand_bps is None else rate < demand_bps
    return LinkReport(tuple(s.ir_id for s in states), sinr, rate, outage)


def noma_link(states: Sequence[IrLinkState], alloc: PowerAllocation, bandwidth_hz: float, demand_bps: float) -> LinkReport:
    order = decoding_order(equivalent_gains(states))
    return rates_and_outage(cluster_sinr(order, states, alloc), bandwidth_hz, demand_bps)


def mqi(t_total: float, mission_times: Sequence[float], outage_durations: Sequence[float], lam: float) -> float:
    if len(mission_times) != len(outage_durations):
        raise ValueError("mission_times and outage_durations differ in length")
    if any(t < 0 for t in mission_times) or any(t < 0 for t in outage_durations):
        raise ValueError("times must be nonnegative")
    return t_total - sum(t + lam * o for t, o in zip(mission_times, outage_durations))
