"""Training loops: two-phase transfer training, the single-phase DDPG baseline, and greedy evaluation."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field

import numpy as np

from ..env import IndoorRobotEnv
from ..scenario import Scenario
from .agent import Agent, AgentConfig, select_action, train_step, transfer

log = logging.getLogger(__name__)

METRIC_COLUMNS = ("episode", "phase", "cumulative_reward", "mqi", "reached", "mission_slots", "outage_slots")


@dataclass
class EpisodeResult:
    cumulative_reward: float
    mqi: float
    reached: bool
    steps: int
    mission_slots: int = 0  # summed over IRs
    outage_slots: int = 0
    trace: list = field(default_factory=list)


@dataclass
class TrainResult:
    agent: Agent
    metrics: list[dict]
    phase1_agent: Agent | None = None

    def column(self, name: str, phase=None) -> np.ndarray:
        rows = [m for m in self.metrics if phase is None or m["phase"] == phase]
        return np.array([m[name] for m in rows], dtype=float)


class _Streams:
    """Independent random streams derived from one run seed."""

    def __init__(self, seed: int):
        init, noise, sample, env = np.random.SeedSequence(seed).spawn(4)
        self.init = np.random.default_rng(init)
        self.noise = np.random.default_rng(noise)
        self.sample = np.random.default_rng(sample)
        self.env_seeds = np.random.default_rng(env)

    def env_seed(self) -> int:
        return int(self.env_seeds.integers(2**32))


def run_episode(env: IndoorRobotEnv, agent: Agent, phase, seed: int, *, explore: bool, learn: bool,
                noise_rng=None, sample_rng=None, max_steps: int | None = None,
                record: bool = False) -> EpisodeResult:
    state = env.reset(seed)
    obs = env.observe(state)
    total = 0.0
    trace = []
    limit = min(max_steps or env.scenario.t_total, env.scenario.t_total)
    cfg = agent.config
    for t in range(limit):
        raw = select_action(agent, obs, noise_rng, explore=explore)
        out = env.step(raw, phase=phase)
        next_obs = env.observe(out.state)
        total += out.reward
        if learn:
            agent.buffer.add(obs, raw, cfg.reward_scale * out.reward, next_obs, out.done)
            if len(agent.buffer) >= cfg.batch_size:
                train_step(agent, agent.buffer.sample(cfg.batch_size, sample_rng))
        if record:
            trace.append({"slot": t + 1, "positions": out.state.positions.copy(),
                          "powers_mw": out.info["powers"].copy(), "rates_bps": out.info["rates"].copy(),
                          "outage": out.info["outage"].copy(), "arrived": out.state.arrived.copy(),
                          "reward": out.reward})
        obs = next_obs
        if out.done:
            break
    final = env.state
    return EpisodeResult(total, env.episode_mqi(final), bool(final.arrived.all()), final.elapsed,
                         int(final.mission_slots.sum()), int(final.outage_slots.sum()), trace)


def _run_phase(env, agent, phase, episodes, streams, metrics, first_episode, progress=None):
    for e in range(episodes):
        agent.noise.start_episode(e)
        res = run_episode(env, agent, phase, streams.env_seed(), explore=True, learn=True,
                          noise_rng=streams.noise, sample_rng=streams.sample,
                          max_steps=agent.config.steps_per_episode)
        row = {"episode": first_episode + e, "phase": phase if isinstance(phase, int) else 1,
               "cumulative_reward": res.cumulative_reward, "mqi": res.mqi, "reached": int(res.reached),
               "mission_slots": res.mission_slots, "outage_slots": res.outage_slots}
        metrics.append(row)
        if progress:
            progress(row)
    return agent


def make_env(scenario: Scenario, channel_source="radio_map", ma_mode=None, maps=None) -> IndoorRobotEnv:
    return IndoorRobotEnv(scenario, channel_source=channel_source, ma_mode=ma_mode, maps=maps)


def train_dtdpg(scenario: Scenario, config: AgentConfig, seed: int, *, channel_source="radio_map",
                ma_mode=None, maps=None, progress=None) -> TrainResult:
    """Destination training with the inducing reward, then transfer all four
    networks into MQI training with the QoS penalty."""
    env = make_env(scenario, channel_source, ma_mode, maps)
    streams = _Streams(seed)
    agent = Agent.create(env.obs_dim, env.act_dim, config, streams.init)
    metrics: list[dict] = []
    _run_phase(env, agent, 1, config.phase1_episodes, streams, metrics, 0, progress)
    agent2 = transfer(agent, config.phase2_noise, config.phase2_episodes)
    _run_phase(env, agent2, 2, config.phase2_episodes, streams, metrics, config.phase1_episodes, progress)
    return TrainResult(agent2, metrics, agent)


def train_ddpg_baseline(scenario: Scenario, config: AgentConfig, seed: int, *, channel_source="radio_map",
                        ma_mode=None, maps=None, progress=None) -> TrainResult:
    """Single-phase DDPG on the combined reward with the same total episode budget."""
    env = make_env(scenario, channel_source, ma_mode, maps)
    streams = _Streams(seed)
    total = config.phase1_episodes + config.phase2_episodes
    agent = Agent.create(env.obs_dim, env.act_dim, config, streams.init)
    agent.noise.initial_scale = config.phase1_noise
    agent.noise.total_episodes = total
    metrics: list[dict] = []
    _run_phase(env, agent, "combined", total, streams, metrics, 0, progress)
    return TrainResult(agent, metrics)


def evaluate(agent: Agent, scenario: Scenario, episodes: int = 20, fading: str = "expected", seed: int = 0,
             ma_mode=None, maps=None, record: bool = False) -> list[EpisodeResult]:
    """Noise-free rollouts; ``fading="sampled"`` draws Rayleigh fading every slot."""
    source = "sampled" if fading == "sampled" else "radio_map"
    env = make_env(scenario, source, ma_mode, maps)
    if env.obs_dim != agent.obs_dim or env.act_dim != agent.act_dim:
        raise ValueError(
            f"checkpoint expects obs/action widths {agent.obs_dim}/{agent.act_dim}, "
            f"scenario provides {env.obs_dim}/{env.act_dim}"
        )
    seeds = np.random.SeedSequence(seed).generate_state(episodes)
    return [run_episode(env, agent, 2, int(s), explore=False, learn=False, record=record) for s in seeds]


def final_window(values, window: int = 20) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    return values[-window:]


def write_metrics_csv(metrics: list[dict], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=METRIC_COLUMNS)
        w.writeheader()
        for row in metrics:
            w.writerow({**row, "cumulative_reward": f"{row['cumulative_reward']:.6f}", "mqi": f"{row['mqi']:.6f}"})


def trace_columns(num_irs: int) -> list[str]:
    cols = ["episode", "slot"]
    for u in range(num_irs):
        cols += [f"x_{u}", f"y_{u}", f"power_mw_{u}", f"rate_bps_{u}", f"outage_{u}", f"arrived_{u}"]
    return cols + ["reward"]


def write_trace_csv(results: list[EpisodeResult], num_irs: int, path) -> None:
    """One row per slot: positions, allocated powers, rates, outage and arrival flags, reward."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(trace_columns(num_irs))
        for ep, res in enumerate(results):
            for rec in res.trace:
                row = [ep, rec["slot"]]
                for u in range(num_irs):
                    row += [f"{rec['positions'][u, 0]:.6f}", f"{rec['positions'][u, 1]:.6f}",
                            f"{rec['powers_mw'][u]:.6f}", f"{rec['rates_bps'][u]:.3f}",
                            int(rec["outage"][u]), int(rec["arrived"][u])]
                w.writerow(row + [f"{rec['reward']:.6f}"])
