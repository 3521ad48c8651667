"""Adam optimizer state and update step."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from prosodia.errors import ValidationError
from prosodia.nn.network import ParamStore


@dataclass
class AdamState:
    """First/second moment estimates per parameter, plus step counter."""

    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)
    step_count: int = 0
    beta1: float = 0.5
    beta2: float = 0.999
    epsilon: float = 1e-8

    @classmethod
    def for_params(cls, params: ParamStore, beta1: float = 0.5, beta2: float = 0.999,
                   epsilon: float = 1e-8) -> "AdamState":
        return cls(
            m={name: np.zeros_like(p.values) for name, p in params},
            v={name: np.zeros_like(p.values) for name, p in params},
            beta1=beta1,
            beta2=beta2,
            epsilon=epsilon,
        )


def adam_step(params: ParamStore, state: AdamState, lr: float) -> None:
    """One bias-corrected Adam update; consumes and clears all gradients."""
    missing = [name for name, p in params if p.grad is None]
    if missing:
        raise ValidationError(f"adam_step with missing gradients: {missing[:4]}")
    state.step_count += 1
    t = state.step_count
    bc1 = 1.0 - state.beta1**t
    bc2 = 1.0 - state.beta2**t
    for name, p in params:
        g = p.grad
        m = state.m[name]
        v = state.v[name]
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * (g * g)
        p.values -= lr * (m / bc1) / (np.sqrt(v / bc2) + state.epsilon)
        p.grad = None
