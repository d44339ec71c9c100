"""SGD and Adam updates over a DenoiserNet's parameter list."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List

import numpy as np

from .net import DenoiserNet
from .tensor import ShapeError


def sgd_step(net: DenoiserNet, lr: float):
    """p <- p - lr * grad for every parameter. Gradients are left intact."""
    for p, g in net.parameters():
        p -= lr * g


@dataclass
class AdamState:
    lr: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: List[np.ndarray] = field(default_factory=list)
    v: List[np.ndarray] = field(default_factory=list)

    @classmethod
    def for_net(cls, net: DenoiserNet, lr: float = 1e-4, **kw) -> "AdamState":
        state = cls(lr=lr, **kw)
        for p, _ in net.parameters():
            state.m.append(np.zeros_like(p))
            state.v.append(np.zeros_like(p))
        return state


def adam_step(net: DenoiserNet, state: AdamState):
    """Standard Adam with bias correction."""
    params = list(net.parameters())
    if len(params) != len(state.m):
        raise ShapeError(
            f"adam state holds {len(state.m)} buffers, net has {len(params)}"
        )
    state.t += 1
    bc1 = 1.0 - state.beta1**state.t
    bc2 = 1.0 - state.beta2**state.t
    for i, (p, g) in enumerate(params):
        if state.m[i].shape != p.shape:
            raise ShapeError(
                f"adam buffer {i} shape {state.m[i].shape} != param {p.shape}"
            )
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g
        m_hat = state.m[i] / bc1
        v_hat = state.v[i] / bc2
        p -= state.lr * m_hat / (np.sqrt(v_hat) + state.eps)


def cosine_lr(step: int, total_steps: int, lr_start: float, lr_end: float) -> float:
    """Cosine decay from lr_start to lr_end over total_steps."""
    if total_steps <= 1:
        return lr_start
    frac = min(step / (total_steps - 1), 1.0)
    return lr_end + 0.5 * (lr_start - lr_end) * (1.0 + np.cos(np.pi * frac))
