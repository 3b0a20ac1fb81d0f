"""Deterministic-policy actor-critic agent (DDPG updates with BN networks)."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .memory import OuNoise, ReplayBuffer
from .nets import MlpSpec, actor_spec, backward, copy_params, critic_spec, forward, init_params, trainable_keys
from .optim import AdamState, adam_step, soft_update


@dataclass
class AgentConfig:
    actor_lr: float = 1e-4
    critic_lr: float = 1e-4
    discount: float = 1.0
    tau: float = 0.002
    batch_size: int = 64
    buffer_capacity: int = 50_000
    phase1_episodes: int = 300
    phase2_episodes: int = 200
    steps_per_episode: int | None = None  # None: the scenario's t_total
    phase1_noise: float = 0.5
    phase2_noise: float = 0.4
    noise_floor: float = 0.05
    ou_theta: float = 0.15
    invert_gradients: bool = False  # shrink dQ/da pushing an action toward its bound
    reward_scale: float = 1.0  # rewards are multiplied by this before entering the replay buffer
    actor_hidden: tuple = (64, 128)
    critic_hidden: tuple = (128, 64)

    def __post_init__(self):
        self.actor_hidden = tuple(self.actor_hidden)
        self.critic_hidden = tuple(self.critic_hidden)
        if not 0 < self.tau <= 1:
            raise ValueError(f"tau must lie in (0, 1], got {self.tau}")
        for name in ("actor_lr", "critic_lr"):
            lr = getattr(self, name)
            if not 1e-5 <= lr <= 1e-3:
                raise ValueError(f"{name} {lr} outside [1e-5, 1e-3]")
        ratio = self.actor_lr / self.critic_lr
        if not 0.1 <= ratio <= 10:
            raise ValueError("actor and critic learning rates must be within 10x of each other")
        if self.batch_size < 1 or self.buffer_capacity < self.batch_size:
            raise ValueError("need 1 <= batch_size <= buffer_capacity")
        if not self.reward_scale > 0:
            raise ValueError("reward_scale must be positive")
        if not 0 <= self.noise_floor:
            raise ValueError("noise_floor must be nonnegative")

    @classmethod
    def from_overrides(cls, overrides: dict | None = None, **extra) -> "AgentConfig":
        merged = {**(overrides or {}), **extra}
        known = {f.name for f in fields(cls)}
        unknown = set(merged) - known
        if unknown:
            raise ValueError(f"unknown learner config keys: {sorted(unknown)}")
        return cls(**merged)


@dataclass
class Agent:
    config: AgentConfig
    obs_dim: int
    act_dim: int
    actor_spec: MlpSpec
    critic_spec: MlpSpec
    actor: dict
    critic: dict
    actor_target: dict
    critic_target: dict
    actor_opt: AdamState = field(default_factory=AdamState)
    critic_opt: AdamState = field(default_factory=AdamState)
    noise: OuNoise | None = None
    buffer: ReplayBuffer | None = None
    phase: int = 1

    @classmethod
    def create(cls, obs_dim: int, act_dim: int, config: AgentConfig, rng: np.random.Generator) -> "Agent":
        a_spec = actor_spec(obs_dim, act_dim, config.actor_hidden)
        c_spec = critic_spec(obs_dim, act_dim, config.critic_hidden)
        actor = init_params(a_spec, rng)
        critic = init_params(c_spec, rng)
        return cls(config, obs_dim, act_dim, a_spec, c_spec, actor, critic, copy_params(actor), copy_params(critic),
                   noise=OuNoise(act_dim, config.phase1_noise, config.phase1_episodes, config.ou_theta,
                                 config.noise_floor),
                   buffer=ReplayBuffer(config.buffer_capacity, obs_dim, act_dim))

    def networks(self) -> dict[str, dict]:
        return {"actor": self.actor, "critic": self.critic,
                "actor_target": self.actor_target, "critic_target": self.critic_target}

    def greedy(self, obs) -> np.ndarray:
        out, _ = forward(self.actor, self.actor_spec, np.atleast_2d(obs), mode="eval")
        return out[0] if np.ndim(obs) == 1 else out


def select_action(agent: Agent, obs, rng: np.random.Generator | None = None, explore: bool = True) -> np.ndarray:
    """Actor output plus OU noise, clipped to [-1, 1]."""
    a = agent.greedy(obs)
    if explore:
        a = a + agent.noise.sample(rng)
    return np.clip(a, -1.0, 1.0)


def critic_target(batch, actor_t: dict, critic_t: dict, a_spec: MlpSpec, c_spec: MlpSpec, rho: float) -> np.ndarray:
    """Bootstrapped targets y = r + rho * Q'(s', mu'(s')); terminal transitions keep y = r."""
    _, _, r, s2, done = batch
    a2, _ = forward(actor_t, a_spec, s2, mode="eval")
    q2, _ = forward(critic_t, c_spec, np.hstack([s2, a2]), mode="eval")
    return r + rho * (1.0 - done) * q2[:, 0]


def _trainable(grads: dict, params: dict) -> dict:
    keys = set(trainable_keys(params))
    return {k: g for k, g in grads.items() if k in keys}


def train_step(agent: Agent, batch) -> dict:
    """One critic regression step, one deterministic policy-gradient step, then soft target updates."""
    cfg = agent.config
    s, a, _, _, _ = batch
    n = len(s)
    y = critic_target(batch, agent.actor_target, agent.critic_target, agent.actor_spec, agent.critic_spec,
                      cfg.discount)

    q, cache = forward(agent.critic, agent.critic_spec, np.hstack([s, a]), mode="train")
    err = y - q[:, 0]
    critic_loss = float(np.mean(err ** 2))
    grads, _ = backward(agent.critic, agent.critic_spec, cache, (-2.0 / n) * err[:, None])
    adam_step(agent.critic, _trainable(grads, agent.critic), agent.critic_opt, cfg.critic_lr)

    pi, a_cache = forward(agent.actor, agent.actor_spec, s, mode="train")
    # Running statistics here: batch-statistics BN over the action column would
    # project out any shift common to the whole batch from dQ/da.
    q_pi, c_cache = forward(agent.critic, agent.critic_spec, np.hstack([s, pi]), mode="eval")
    # ascend mean Q: gradient of -mean(Q) w.r.t. the action inputs
    _, g_in = backward(agent.critic, agent.critic_spec, c_cache, np.full((n, 1), -1.0 / n))
    g_a = g_in[:, agent.obs_dim:]
    if cfg.invert_gradients:
        g_a = g_a * np.where(g_a < 0, 1.0 - pi, 1.0 + pi) / 2.0
    a_grads, _ = backward(agent.actor, agent.actor_spec, a_cache, g_a)
    adam_step(agent.actor, _trainable(a_grads, agent.actor), agent.actor_opt, cfg.actor_lr)

    soft_update(agent.critic_target, agent.critic, cfg.tau)
    soft_update(agent.actor_target, agent.actor, cfg.tau)
    return {"critic_loss": critic_loss, "mean_q": float(np.mean(q_pi))}


def transfer(agent: Agent, initial_noise: float, episodes: int) -> Agent:
    """Start a new training task from ``agent``'s four networks.

    Networks are copied verbatim; optimiser moments and the replay buffer start
    empty (the new reward makes stored returns stale) and OU noise restarts at
    ``initial_noise``.
    """
    cfg = agent.config
    return Agent(cfg, agent.obs_dim, agent.act_dim, agent.actor_spec, agent.critic_spec,
                 copy_params(agent.actor), copy_params(agent.critic),
                 copy_params(agent.actor_target), copy_params(agent.critic_target),
                 noise=OuNoise(agent.act_dim, initial_noise, episodes, cfg.ou_theta, cfg.noise_floor),
                 buffer=ReplayBuffer(cfg.buffer_capacity, agent.obs_dim, agent.act_dim),
                 phase=agent.phase + 1)


# -- checkpoints -----------------------------------------------------------

def save_checkpoint(agent: Agent, path) -> None:
    """All four networks, optimiser moments, noise state and replay contents in one .npz."""
    arrays = {}
    for net_name, params in agent.networks().items():
        for k, v in params.items():
            arrays[f"{net_name}/{k}"] = v
    for opt_name, opt in (("actor_opt", agent.actor_opt), ("critic_opt", agent.critic_opt)):
        for k, v in opt.m.items():
            arrays[f"{opt_name}/m/{k}"] = v
        for k, v in opt.v.items():
            arrays[f"{opt_name}/v/{k}"] = v
    arrays["noise/x"] = agent.noise.x
    for k, v in agent.buffer.state_dict().items():
        arrays[f"buffer/{k}"] = v
    meta = {
        "config": asdict(agent.config),
        "obs_dim": agent.obs_dim,
        "act_dim": agent.act_dim,
        "actor_spec": [list(l) for l in agent.actor_spec.layers],
        "critic_spec": [list(l) for l in agent.critic_spec.layers],
        "actor_opt_t": agent.actor_opt.t,
        "critic_opt_t": agent.critic_opt.t,
        "noise": {"initial_scale": agent.noise.initial_scale, "total_episodes": agent.noise.total_episodes,
                  "theta": agent.noise.theta, "floor": agent.noise.floor, "scale": agent.noise.scale},
        "phase": agent.phase,
    }
    arrays["meta"] = np.array(json.dumps(meta))
    with open(Path(path), "wb") as fh:
        np.savez(fh, **arrays)


def load_checkpoint(path) -> Agent:
    with np.load(Path(path), allow_pickle=False) as z:
        data = {k: z[k] for k in z.files}
    meta = json.loads(str(data.pop("meta")))
    cfg = AgentConfig(**meta["config"])
    a_spec = MlpSpec(tuple(tuple(l) for l in meta["actor_spec"]))
    c_spec = MlpSpec(tuple(tuple(l) for l in meta["critic_spec"]))
    nets = {"actor": {}, "critic": {}, "actor_target": {}, "critic_target": {}}
    opts = {"actor_opt": AdamState(t=meta["actor_opt_t"]), "critic_opt": AdamState(t=meta["critic_opt_t"])}
    buf = {}
    for key, arr in data.items():
        head, rest = key.split("/", 1)
        if head in nets:
            nets[head][rest] = arr
        elif head in opts:
            which, name = rest.split("/", 1)
            getattr(opts[head], which)[name] = arr
        elif head == "buffer":
            buf[rest] = arr
    nz = meta["noise"]
    noise = OuNoise(meta["act_dim"], nz["initial_scale"], nz["total_episodes"], nz["theta"], nz["floor"])
    noise.scale = nz["scale"]
    noise.x = data["noise/x"]
    buffer = ReplayBuffer(cfg.buffer_capacity, meta["obs_dim"], meta["act_dim"])
    buffer.load_state_dict(buf)
    return Agent(cfg, meta["obs_dim"], meta["act_dim"], a_spec, c_spec, nets["actor"], nets["critic"],
                 nets["actor_target"], nets["critic_target"], opts["actor_opt"], opts["critic_opt"],
                 noise, buffer, meta["phase"])
