import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from indoor_noma.learner import (
    Agent,
    AgentConfig,
    AdamState,
    OuNoise,
    ReplayBuffer,
    adam_step,
    critic_target,
    evaluate,
    load_checkpoint,
    save_checkpoint,
    soft_update,
    train_ddpg_baseline,
    train_dtdpg,
    transfer,
)
from indoor_noma.learner.agent import train_step
from indoor_noma.learner.training import METRIC_COLUMNS, write_metrics_csv, write_trace_csv

SMALL = dict(phase1_episodes=3, phase2_episodes=2, steps_per_episode=12, batch_size=8, buffer_capacity=200,
             actor_hidden=(8, 8), critic_hidden=(8, 8))


def small_agent(seed=0, **kw):
    return Agent.create(6, 6, AgentConfig(**{**SMALL, **kw}), np.random.default_rng(seed))


# -- optimiser ----------------------------------------------------------------

def test_soft_update_exact():
    t = {"w": np.array([0.0])}
    soft_update(t, {"w": np.array([1.0])}, 0.002)
    assert t["w"][0] == 0.002


def test_adam_first_step_moves_by_lr_against_the_sign():
    p = {"w": np.array([1.0, -2.0, 0.5])}
    adam_step(p, {"w": np.array([3.0, -0.1, 0.0])}, AdamState(), 1e-3)
    assert p["w"].tolist() == pytest.approx([1.0 - 1e-3, -2.0 + 1e-3, 0.5], abs=1e-9)


def test_adam_rejects_shape_mismatch():
    with pytest.raises(ValueError):
        adam_step({"w": np.zeros(2)}, {"w": np.zeros(3)}, AdamState(), 1e-3)


# -- replay and noise ---------------------------------------------------------

def test_replay_ring_overwrites_oldest():
    buf = ReplayBuffer(3, 1, 1)
    for k in range(5):
        buf.add([k], [0.0], float(k), [k + 1], False)
    assert len(buf) == 3
    assert sorted(buf.insert_id.tolist()) == [3, 4, 5]
    assert sorted(buf.rew.tolist()) == [2.0, 3.0, 4.0]


def test_replay_rejects_nonfinite_and_small_samples():
    buf = ReplayBuffer(4, 1, 1)
    with pytest.raises(ValueError):
        buf.add([np.nan], [0.0], 0.0, [0.0], False)
    buf.add([0.0], [0.0], 0.0, [0.0], False)
    with pytest.raises(ValueError):
        buf.sample(2, np.random.default_rng(0))


def test_ou_schedule_decays_linearly_to_floor():
    n = OuNoise(2, 0.5, 100, floor=0.05)
    assert n.schedule(0) == 0.5
    assert n.schedule(50) == pytest.approx(0.25)
    assert n.schedule(95) == 0.05
    n.start_episode(50)
    assert n.scale == pytest.approx(0.25) and not n.x.any()


def test_ou_noise_is_mean_reverting():
    n = OuNoise(1, 0.0, 10, theta=0.5, floor=0.0)
    n.x = np.array([1.0])
    assert n.sample(np.random.default_rng(0))[0] == 0.5


# -- agent --------------------------------------------------------------------

@pytest.mark.parametrize("bad", [dict(tau=0.0), dict(actor_lr=1e-2), dict(actor_lr=1e-5, critic_lr=1e-3),
                                 dict(batch_size=10, buffer_capacity=5), dict(reward_scale=0.0)])
def test_config_validation(bad):
    with pytest.raises(ValueError):
        AgentConfig(**bad)


def test_config_overrides_reject_unknown_keys():
    assert AgentConfig.from_overrides({"tau": 0.01}).tau == 0.01
    with pytest.raises(ValueError, match="unknown"):
        AgentConfig.from_overrides({"gamma": 0.9})


def test_terminal_target_is_reward():
    ag = small_agent()
    s2 = np.random.default_rng(1).normal(size=(4, 6))
    batch = (None, None, np.array([1.0, 2.0, 3.0, 4.0]), s2, np.array([1.0, 0.0, 1.0, 0.0]))
    y = critic_target(batch, ag.actor_target, ag.critic_target, ag.actor_spec, ag.critic_spec, 0.9)
    assert y[0] == 1.0 and y[2] == 3.0
    assert y[1] != 2.0


def test_train_step_updates_online_and_soft_target():
    ag = small_agent(tau=0.5)
    rng = np.random.default_rng(2)
    batch = (rng.normal(size=(8, 6)), rng.uniform(-1, 1, (8, 6)), rng.normal(size=8), rng.normal(size=(8, 6)),
             np.zeros(8))
    w0 = ag.actor["0.W"].copy()
    wt0 = ag.actor_target["0.W"].copy()
    info = train_step(ag, batch)
    assert np.isfinite(info["critic_loss"])
    assert not np.array_equal(ag.actor["0.W"], w0)
    assert np.allclose(ag.actor_target["0.W"], 0.5 * wt0 + 0.5 * ag.actor["0.W"])


@given(st.floats(-1, 1), st.floats(-1, 1))
def test_select_action_stays_in_box(a, b):
    ag = small_agent()
    ag.noise.x = np.full(6, 5.0 * a)
    from indoor_noma.learner import select_action
    out = select_action(ag, np.full(6, b), np.random.default_rng(0))
    assert np.all(np.abs(out) <= 1.0)


def test_transfer_copies_networks_and_resets_state():
    ag = small_agent()
    ag.buffer.add(np.zeros(6), np.zeros(6), 1.0, np.zeros(6), False)
    ag.actor_opt.t = 7
    new = transfer(ag, 0.3, 10)
    for name, params in ag.networks().items():
        for k, v in params.items():
            assert np.array_equal(new.networks()[name][k], v)
            assert new.networks()[name][k] is not v
    assert new.actor_opt.t == 0 and not new.actor_opt.m
    assert len(new.buffer) == 0
    assert new.noise.initial_scale == 0.3 and new.phase == 2


def test_checkpoint_round_trip(tmp_path):
    ag = small_agent(invert_gradients=True, reward_scale=0.1)
    rng = np.random.default_rng(3)
    for _ in range(10):
        ag.buffer.add(rng.normal(size=6), rng.uniform(-1, 1, 6), 0.5, rng.normal(size=6), False)
    train_step(ag, ag.buffer.sample(8, rng))
    ag.noise.x = rng.normal(size=6)
    path = tmp_path / "ck.npz"
    save_checkpoint(ag, path)
    back = load_checkpoint(path)
    assert back.config == ag.config
    for name, params in ag.networks().items():
        assert params.keys() == back.networks()[name].keys()
        for k in params:
            assert np.array_equal(params[k], back.networks()[name][k])
    assert back.actor_opt.t == ag.actor_opt.t
    assert all(np.array_equal(ag.critic_opt.v[k], back.critic_opt.v[k]) for k in ag.critic_opt.v)
    assert np.array_equal(back.noise.x, ag.noise.x)
    assert len(back.buffer) == 10 and back.buffer.inserted == 10
    obs = rng.normal(size=6)
    assert np.array_equal(back.greedy(obs), ag.greedy(obs))


# -- training loops -----------------------------------------------------------

def test_two_phase_training_metrics(tiny):
    cfg = AgentConfig(**SMALL)
    res = train_dtdpg(tiny, cfg, seed=0)
    assert len(res.metrics) == 5
    assert [m["phase"] for m in res.metrics] == [1, 1, 1, 2, 2]
    assert [m["episode"] for m in res.metrics] == list(range(5))
    assert res.phase1_agent is not None and res.agent.phase == 2
    assert all(set(m) == set(METRIC_COLUMNS) for m in res.metrics)


def test_training_is_reproducible_per_seed(tiny):
    cfg = AgentConfig(**SMALL)
    a = train_dtdpg(tiny, cfg, seed=4)
    b = train_dtdpg(tiny, cfg, seed=4)
    assert a.metrics == b.metrics
    assert all(np.array_equal(a.agent.actor[k], b.agent.actor[k]) for k in a.agent.actor)
    c = train_dtdpg(tiny, cfg, seed=5)
    assert a.column("cumulative_reward").tolist() != c.column("cumulative_reward").tolist()


def test_baseline_uses_the_same_total_budget(tiny):
    res = train_ddpg_baseline(tiny, AgentConfig(**SMALL), seed=0)
    assert len(res.metrics) == 5 and res.phase1_agent is None


def test_evaluate_and_outputs(tiny, tmp_path):
    ag = small_agent()
    out = evaluate(ag, tiny, episodes=2, fading="sampled", record=True)
    assert len(out) == 2 and all(r.steps == tiny.t_total or r.reached for r in out)
    write_trace_csv(out, 2, tmp_path / "t.csv")
    rows = (tmp_path / "t.csv").read_text().splitlines()
    assert rows[0].startswith("episode,slot,x_0,y_0,power_mw_0")
    assert len(rows) == 1 + sum(r.steps for r in out)
    write_metrics_csv([{"episode": 0, "phase": 1, "cumulative_reward": 1.5, "mqi": 900.0, "reached": 1,
                        "mission_slots": 3, "outage_slots": 0}], tmp_path / "m.csv")
    assert (tmp_path / "m.csv").read_text().splitlines()[1] == "0,1,1.500000,900.000000,1,3,0"


def test_evaluate_rejects_dimension_mismatch(tiny):
    ag = Agent.create(9, 9, AgentConfig(**SMALL), np.random.default_rng(0))
    with pytest.raises(ValueError, match="obs/action widths"):
        evaluate(ag, tiny, episodes=1)
