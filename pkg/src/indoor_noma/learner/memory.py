"""Replay buffer and Ornstein-Uhlenbeck exploration noise."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class ReplayBuffer:
    """Fixed-capacity ring of (s, a, r, s', done) with uniform sampling."""

    def __init__(self, capacity: int, obs_dim: int, act_dim: int):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self.obs = np.zeros((capacity, obs_dim))
        self.act = np.zeros((capacity, act_dim))
        self.rew = np.zeros(capacity)
        self.next_obs = np.zeros((capacity, obs_dim))
        self.done = np.zeros(capacity)
        self.insert_id = np.zeros(capacity, dtype=np.int64)  # 1-based insertion counter
        self.inserted = 0

    def __len__(self) -> int:
        return min(self.inserted, self.capacity)

    def add(self, s, a, r, s2, done) -> None:
        vals = (np.asarray(s), np.asarray(a), r, np.asarray(s2))
        if not all(np.all(np.isfinite(v)) for v in vals):
            raise ValueError("experience contains non-finite entries")
        i = self.inserted % self.capacity
        self.obs[i] = s
        self.act[i] = a
        self.rew[i] = r
        self.next_obs[i] = s2
        self.done[i] = float(done)
        self.inserted += 1
        self.insert_id[i] = self.inserted

    def clear(self) -> None:
        self.inserted = 0

    def sample(self, batch_size: int, rng: np.random.Generator):
        n = len(self)
        if n < batch_size:
            raise ValueError(f"buffer holds {n} < batch size {batch_size}")
        idx = rng.integers(0, n, size=batch_size)
        return self.obs[idx], self.act[idx], self.rew[idx], self.next_obs[idx], self.done[idx]

    def state_dict(self) -> dict:
        n = len(self)
        return {"obs": self.obs[:n], "act": self.act[:n], "rew": self.rew[:n],
                "next_obs": self.next_obs[:n], "done": self.done[:n],
                "insert_id": self.insert_id[:n], "inserted": np.array(self.inserted)}

    def load_state_dict(self, d: dict) -> None:
        n = len(d["rew"])
        for name in ("obs", "act", "rew", "next_obs", "done", "insert_id"):
            getattr(self, name)[:n] = d[name]
        self.inserted = int(d["inserted"])


@dataclass
class OuNoise:
    """Mean-reverting noise whose scale decays linearly over a phase's episodes."""

    dim: int
    initial_scale: float
    total_episodes: int
    theta: float = 0.15
    floor: float = 0.05
    scale: float = field(init=False)
    x: np.ndarray = field(init=False)

    def __post_init__(self):
        self.scale = max(self.floor, self.initial_scale)
        self.x = np.zeros(self.dim)

    def schedule(self, episode: int) -> float:
        return max(self.floor, self.initial_scale * (1.0 - episode / self.total_episodes))

    def start_episode(self, episode: int) -> None:
        self.scale = self.schedule(episode)
        self.x = np.zeros(self.dim)

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        self.x = self.x + self.theta * (0.0 - self.x) + self.scale * rng.standard_normal(self.dim)
        return self.x
