"""ITU indoor path loss (LoS / NLoS with per-obstacle penetration) and Rayleigh fading."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MIN_DISTANCE_M = 1.0


@dataclass(frozen=True)
class PropagationParams:
    """Office-scenario defaults at 2 GHz.

    The 5.2 GHz office constants are ``dist_power_coeff=31``,
    ``floor_loss_base=16`` and ``floor_loss_step=0``.
    """

    freq_mhz: float = 2000.0
    dist_power_coeff: float = 25.5
    floor_loss_base: float = 15.0
    floor_loss_step: float = 4.0

    def __post_init__(self):
        if not self.freq_mhz > 0:
            raise ValueError(f"freq_mhz must be positive, got {self.freq_mhz}")
        if not self.dist_power_coeff > 0:
            raise ValueError(f"dist_power_coeff must be positive, got {self.dist_power_coeff}")

    def obstacle_loss(self, n):
        return self.floor_loss_base + self.floor_loss_step * (np.asarray(n) - 1)


@dataclass(frozen=True)
class FadingModel:
    mode: str = "expected"  # "expected" | "sampled"
    rayleigh_mean_power: float = 1.0

    def __post_init__(self):
        if self.mode not in ("expected", "sampled"):
            raise ValueError(f"unknown fading mode {self.mode!r}")


def _clamp(d):
    return np.maximum(np.asarray(d, dtype=float), MIN_DISTANCE_M)


def basic_loss(params: PropagationParams) -> float:
    return 20.0 * np.log10(params.freq_mhz) - 28.0


def nlos_loss(d, n, params: PropagationParams):
    """NLoS loss in dB for ``n >= 1`` obstacles; distances under 1 m are clamped."""
    if np.any(np.asarray(n) < 1):
        raise ValueError("nlos_loss needs at least one obstacle; use los_loss for n = 0")
    return basic_loss(params) + params.dist_power_coeff * np.log10(_clamp(d)) + params.obstacle_loss(n)


def los_loss(d, params: PropagationParams):
    return 16.9 * np.log10(_clamp(d)) - 27.2 + 20.0 * np.log10(params.freq_mhz)


def path_loss(d, n, params: PropagationParams):
    """Dispatch to LoS or NLoS loss by obstacle count (works elementwise on arrays)."""
    n = np.asarray(n)
    if n.ndim == 0:
        return float(los_loss(d, params)) if n == 0 else float(nlos_loss(d, n, params))
    out = np.asarray(los_loss(d, params), dtype=float) * np.ones(n.shape)
    blocked = n > 0
    if blocked.any():
        d_arr = np.broadcast_to(np.asarray(d, dtype=float), n.shape)
        out[blocked] = nlos_loss(d_arr[blocked], n[blocked], params)
    return out


def sample_fading(model: FadingModel, rng: np.random.Generator | None = None, size=None):
    """Small-scale fading power gain: unit-mean exponential (Rayleigh amplitude)."""
    if model.mode == "expected":
        return model.rayleigh_mean_power if size is None else np.full(size, model.rayleigh_mean_power)
    if rng is None:
        raise ValueError("sampled fading needs an explicit random generator")
    return rng.exponential(model.rayleigh_mean_power, size=size)


def received_power_dbm(tx_power_dbm, loss_db, fading_power_gain=1.0):
    fading_power_gain = np.asarray(fading_power_gain, dtype=float)
    if np.any(fading_power_gain <= 0):
        raise ValueError("fading power gain must be positive")
    out = tx_power_dbm - np.asarray(loss_db) + 10.0 * np.log10(fading_power_gain)
    return float(out) if np.ndim(out) == 0 else out
