"""Adam optimizer with bias correction.

Moments live in an AdamState keyed by parameter name so checkpoints can
serialize optimizer state alongside weights.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError, ShapeError
from .tensor import Tensor


@dataclass
class AdamState:
    beta1: float = 0.9
    beta2: float = 0.997
    eps: float = 1e-9
    step: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)


def adam_step(params: dict[str, Tensor], state: AdamState, lr: float) -> None:
    """One bias-corrected Adam update, in place. Missing grads count as zero."""
    if lr <= 0:
        raise ConfigError(f"learning rate must be positive, got {lr}")
    state.step += 1
    t = state.step
    bc1 = 1.0 - state.beta1 ** t
    bc2 = 1.0 - state.beta2 ** t
    for name, param in params.items():
        if name not in state.m:
            state.m[name] = np.zeros_like(param.data)
            state.v[name] = np.zeros_like(param.data)
        grad = param.grad
        if grad is None:
            grad = 0.0
        elif grad.shape != param.data.shape:
            raise ShapeError(
                f"adam_step: grad shape {grad.shape} != param shape {param.data.shape} ({name})"
            )
        m = state.m[name]
        v = state.v[name]
        m *= state.beta1
        m += (1.0 - state.beta1) * grad
        v *= state.beta2
        v += (1.0 - state.beta2) * np.square(grad)
        param.data -= lr * (m / bc1) / (np.sqrt(v / bc2) + state.eps)
