"""Adam and Polyak (soft) target updates over parameter dicts."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

BETA1 = 0.9
BETA2 = 0.999
ADAM_EPS = 1e-8


@dataclass
class AdamState:
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)
    t: int = 0

    def copy(self) -> "AdamState":
        return AdamState({k: a.copy() for k, a in self.m.items()}, {k: a.copy() for k, a in self.v.items()}, self.t)


def adam_step(params: dict, grads: dict, state: AdamState, lr: float) -> dict:
    """In-place Adam update of every parameter that has a gradient."""
    state.t += 1
    c1 = 1.0 - BETA1 ** state.t
    c2 = 1.0 - BETA2 ** state.t
    for k, g in grads.items():
        if params[k].shape != g.shape:
            raise ValueError(f"gradient shape {g.shape} != parameter shape {params[k].shape} for {k}")
        m = state.m.get(k)
        if m is None:
            m = state.m[k] = np.zeros_like(g)
            state.v[k] = np.zeros_like(g)
        v = state.v[k]
        m *= BETA1
        m += (1 - BETA1) * g
        v *= BETA2
        v += (1 - BETA2) * g * g
        params[k] -= lr * (m / c1) / (np.sqrt(v / c2) + ADAM_EPS)
    return params


def soft_update(target: dict, online: dict, tau: float) -> dict:
    """target <- (1 - tau) * target + tau * online, for every entry incl. BN running stats."""
    for k, w in online.items():
        target[k] = (1.0 - tau) * target[k] + tau * w
    return target
