"""Small numpy MLPs with batch normalisation and hand-written backprop.

A network is an :class:`MlpSpec` (a tuple of layer descriptors) plus a flat
parameter dict keyed ``"<layer index>.<name>"``.  Keeping parameters in one
dict makes target copies, soft updates, Adam and checkpointing one-liners.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

BN_MOMENTUM = 0.99
BN_EPS = 1e-5
TRAINABLE = ("W", "b", "gamma", "beta")


@dataclass(frozen=True)
class MlpSpec:
    """Layers are ``("linear", n_in, n_out)``, ``("relu",)``, ``("tanh",)`` or ``("bn", width)``."""

    layers: tuple

    def __post_init__(self):
        width = self.input_width
        for layer in self.layers:
            kind = layer[0]
            if kind == "linear":
                if layer[1] != width:
                    raise ValueError(f"linear layer expects {layer[1]} inputs but receives {width}")
                width = layer[2]
            elif kind == "bn":
                if layer[1] != width:
                    raise ValueError(f"bn layer width {layer[1]} != incoming width {width}")
            elif kind not in ("relu", "tanh"):
                raise ValueError(f"unknown layer kind {kind!r}")

    @property
    def input_width(self) -> int:
        first = self.layers[0]
        return first[1]

    @property
    def output_width(self) -> int:
        for layer in reversed(self.layers):
            if layer[0] in ("linear", "bn"):
                return layer[-1]
        return self.input_width


def actor_spec(obs_dim: int, act_dim: int, hidden=(64, 128)) -> MlpSpec:
    """relu hidden stack, batch norm, then a tanh output layer."""
    layers = []
    width = obs_dim
    for h in hidden:
        layers += [("linear", width, h), ("relu",)]
        width = h
    layers += [("bn", width), ("linear", width, act_dim), ("tanh",)]
    return MlpSpec(tuple(layers))


def critic_spec(obs_dim: int, act_dim: int, hidden=(128, 64)) -> MlpSpec:
    # BN is per-feature, so one BN over concat(state, action) is the same as
    # separate BN layers on each input followed by concatenation.
    width = obs_dim + act_dim
    layers = [("bn", width)]
    for h in hidden:
        layers += [("linear", width, h), ("relu",)]
        width = h
    layers.append(("linear", width, 1))
    return MlpSpec(tuple(layers))


def init_params(spec: MlpSpec, rng: np.random.Generator, final_scale: float = 3e-3) -> dict:
    params = {}
    last_linear = max((i for i, l in enumerate(spec.layers) if l[0] == "linear"), default=-1)
    for i, layer in enumerate(spec.layers):
        if layer[0] == "linear":
            n_in, n_out = layer[1], layer[2]
            lim = final_scale if i == last_linear else 1.0 / np.sqrt(n_in)
            params[f"{i}.W"] = rng.uniform(-lim, lim, size=(n_in, n_out))
            params[f"{i}.b"] = rng.uniform(-lim, lim, size=n_out)
        elif layer[0] == "bn":
            w = layer[1]
            params[f"{i}.gamma"] = np.ones(w)
            params[f"{i}.beta"] = np.zeros(w)
            params[f"{i}.running_mean"] = np.zeros(w)
            params[f"{i}.running_var"] = np.ones(w)
    return params


def trainable_keys(params: dict) -> list[str]:
    return [k for k in params if k.rsplit(".", 1)[1] in TRAINABLE]


def copy_params(params: dict) -> dict:
    return {k: v.copy() for k, v in params.items()}


def forward(params: dict, spec: MlpSpec, x, mode: str = "train", update_stats: bool = True):
    """Returns ``(output, cache)``.

    Train mode normalises with batch statistics and (unless ``update_stats`` is
    False) moves the running statistics in ``params`` in place.  Eval mode uses
    the running statistics.
    """
    if mode not in ("train", "eval"):
        raise ValueError(f"mode must be train or eval, got {mode!r}")
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[1] != spec.input_width:
        raise ValueError(f"input must be (batch, {spec.input_width}), got {x.shape}")
    if mode == "train" and x.shape[0] == 0:
        raise ValueError("empty batch in train mode")
    saved = []
    h = x
    for i, layer in enumerate(spec.layers):
        kind = layer[0]
        if kind == "linear":
            saved.append(h)
            h = h @ params[f"{i}.W"] + params[f"{i}.b"]
        elif kind == "relu":
            mask = h > 0
            saved.append(mask)
            h = h * mask
        elif kind == "tanh":
            h = np.tanh(h)
            saved.append(h)
        else:
            gamma, beta = params[f"{i}.gamma"], params[f"{i}.beta"]
            if mode == "train":
                mu = h.mean(axis=0)
                var = h.var(axis=0)
                if update_stats:
                    rm, rv = params[f"{i}.running_mean"], params[f"{i}.running_var"]
                    rm *= BN_MOMENTUM
                    rm += (1 - BN_MOMENTUM) * mu
                    rv *= BN_MOMENTUM
                    rv += (1 - BN_MOMENTUM) * var
            else:
                mu = params[f"{i}.running_mean"]
                var = params[f"{i}.running_var"]
            inv_std = 1.0 / np.sqrt(var + BN_EPS)
            xhat = (h - mu) * inv_std
            saved.append((xhat, inv_std))
            h = gamma * xhat + beta
    return h, {"spec": spec, "mode": mode, "saved": saved}


def backward(params: dict, spec: MlpSpec, cache: dict, grad_out):
    """Exact gradients of ``forward``. Returns ``(param_grads, input_grad)``."""
    if cache.get("spec") != spec or len(cache["saved"]) != len(spec.layers):
        raise ValueError("cache does not belong to this network spec")
    train = cache["mode"] == "train"
    grads = {}
    g = np.asarray(grad_out, dtype=float)
    for i in range(len(spec.layers) - 1, -1, -1):
        kind = spec.layers[i][0]
        s = cache["saved"][i]
        if kind == "linear":
            grads[f"{i}.W"] = s.T @ g
            grads[f"{i}.b"] = g.sum(axis=0)
            g = g @ params[f"{i}.W"].T
        elif kind == "relu":
            g = g * s
        elif kind == "tanh":
            g = g * (1.0 - s * s)
        else:
            xhat, inv_std = s
            gamma = params[f"{i}.gamma"]
            grads[f"{i}.gamma"] = (g * xhat).sum(axis=0)
            grads[f"{i}.beta"] = g.sum(axis=0)
            dxhat = g * gamma
            if train:
                n = g.shape[0]
                g = (inv_std / n) * (n * dxhat - dxhat.sum(axis=0) - xhat * (dxhat * xhat).sum(axis=0))
            else:
                g = dxhat * inv_std
    return grads, g
