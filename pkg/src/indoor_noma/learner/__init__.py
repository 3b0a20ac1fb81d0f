from .agent import Agent, AgentConfig, critic_target, load_checkpoint, save_checkpoint, select_action, train_step, transfer
from .memory import OuNoise, ReplayBuffer
from .nets import MlpSpec, actor_spec, backward, critic_spec, forward, init_params
from .optim import AdamState, adam_step, soft_update
from .training import TrainResult, evaluate, train_ddpg_baseline, train_dtdpg

__all__ = [
    "Agent", "AgentConfig", "critic_target", "load_checkpoint", "save_checkpoint", "select_action",
    "train_step", "transfer", "OuNoise", "ReplayBuffer", "MlpSpec", "actor_spec", "backward",
    "critic_spec", "forward", "init_params", "AdamState", "adam_step", "soft_update", "TrainResult",
    "evaluate", "train_ddpg_baseline", "train_dtdpg",
]
