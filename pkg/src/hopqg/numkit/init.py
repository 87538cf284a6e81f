"""Parameter initializers.

Word embeddings draw from a zero-mean Gaussian with std d^-1/2; all other
parameters use LeCun uniform bounds +-sqrt(3/fan_in). Both are deterministic
for a fixed seed.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import ConfigError
from .tensor import Tensor


def init_gaussian_embedding(rows: int, d: int, seed: int) -> Tensor:
    if d < 1:
        raise ConfigError(f"embedding dim must be >= 1, got {d}")
    rng = np.random.default_rng(seed)
    return Tensor(rng.normal(0.0, d ** -0.5, size=(rows, d)), requires_grad=True)


def init_lecun_uniform(shape: tuple[int, ...], seed: int, fan_in: int | None = None) -> Tensor:
    """Uniform on +-sqrt(3/fan_in); fan_in defaults to the first dimension."""
    if fan_in is None:
        fan_in = shape[0]
    if fan_in < 1:
        raise ConfigError(f"fan_in must be >= 1, got {fan_in}")
    limit = math.sqrt(3.0 / fan_in)
    rng = np.random.default_rng(seed)
    return Tensor(rng.uniform(-limit, limit, size=shape), requires_grad=True)


def init_zeros(shape: tuple[int, ...]) -> Tensor:
    return Tensor(np.zeros(shape), requires_grad=True)


def init_ones(shape: tuple[int, ...]) -> Tensor:
    return Tensor(np.ones(shape), requires_grad=True)
