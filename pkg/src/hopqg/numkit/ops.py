"""Differentiable operations over Tensors.

Every op computes eagerly, then records a backward rule on the active tape
when gradients are needed. Backward rules receive the output gradient and
return one gradient (or None) per input, in order. Rules must not mutate the
incoming gradient array.
"""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError, ContractError, DegenerateRowError, ShapeError
from .tensor import Tensor, active_tape

_LN_EPS = 1e-6


def _coerce(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _maybe_record(out: Tensor, inputs: tuple[Tensor, ...], rule) -> Tensor:
    tape = active_tape()
    if tape is not None and out.requires_grad:
        tape.record(out, inputs, rule)
    return out


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum grad down to `shape`, undoing numpy broadcasting."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, dim in enumerate(shape):
        if dim == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def matmul(a, b) -> Tensor:
    a, b = _coerce(a), _coerce(b)
    if a.data.ndim != 2 or b.data.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul: incompatible shapes {a.shape} x {b.shape}")
    out = Tensor(a.data @ b.data, a.requires_grad or b.requires_grad)
    a_data, b_data = a.data, b.data

    def rule(g):
        return (
            g @ b_data.T if a.requires_grad else None,
            a_data.T @ g if b.requires_grad else None,
        )

    return _maybe_record(out, (a, b), rule)


def transpose(x) -> Tensor:
    x = _coerce(x)
    out = Tensor(x.data.T, x.requires_grad)
    return _maybe_record(out, (x,), lambda g: (g.T,))


def add(a, b) -> Tensor:
    a, b = _coerce(a), _coerce(b)
    try:
        data = a.data + b.data
    except ValueError:
        raise ShapeError(f"add: cannot broadcast {a.shape} with {b.shape}")
    out = Tensor(data, a.requires_grad or b.requires_grad)

    def rule(g):
        return (
            _unbroadcast(g, a.shape) if a.requires_grad else None,
            _unbroadcast(g, b.shape) if b.requires_grad else None,
        )

    return _maybe_record(out, (a, b), rule)


def mul(a, b) -> Tensor:
    a, b = _coerce(a), _coerce(b)
    try:
        data = a.data * b.data
    except ValueError:
        raise ShapeError(f"mul: cannot broadcast {a.shape} with {b.shape}")
    out = Tensor(data, a.requires_grad or b.requires_grad)
    a_data, b_data = a.data, b.data

    def rule(g):
        return (
            _unbroadcast(g * b_data, a.shape) if a.requires_grad else None,
            _unbroadcast(g * a_data, b.shape) if b.requires_grad else None,
        )

    return _maybe_record(out, (a, b), rule)


def scale(x, factor: float) -> Tensor:
    x = _coerce(x)
    out = Tensor(x.data * factor, x.requires_grad)
    return _maybe_record(out, (x,), lambda g: (g * factor,))


def relu(x) -> Tensor:
    x = _coerce(x)
    out = Tensor(np.maximum(x.data, 0.0), x.requires_grad)
    positive = x.data > 0
    return _maybe_record(out, (x,), lambda g: (g * positive,))


def sigmoid(x) -> Tensor:
    x = _coerce(x)
    # Two-sided stable form: no overflow for large |x|.
    data = np.where(x.data >= 0, 1.0 / (1.0 + np.exp(-np.abs(x.data))),
                    np.exp(-np.abs(x.data)) / (1.0 + np.exp(-np.abs(x.data))))
    out = Tensor(data, x.requires_grad)
    return _maybe_record(out, (x,), lambda g: (g * data * (1.0 - data),))


def softmax_rows(x, mask=None) -> Tensor:
    """Row-wise softmax with optional boolean mask (True = keep).

    Masked entries are exactly zero in the output. Stability comes from
    per-row max subtraction over the unmasked entries.
    """
    x = _coerce(x)
    data = x.data
    if data.ndim != 2:
        raise ShapeError(f"softmax_rows expects a 2-d tensor, got {x.shape}")
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != data.shape:
            raise ShapeError(
                f"softmax_rows: mask shape {mask.shape} != input shape {data.shape}"
            )
        if not mask.any(axis=1).all():
            bad = int(np.flatnonzero(~mask.any(axis=1))[0])
            raise DegenerateRowError(f"softmax_rows: row {bad} is fully masked")
        shifted = np.where(mask, data, -np.inf)
        row_max = shifted.max(axis=1, keepdims=True)
        exps = np.where(mask, np.exp(shifted - row_max), 0.0)
    else:
        row_max = data.max(axis=1, keepdims=True)
        exps = np.exp(data - row_max)
    probs = exps / exps.sum(axis=1, keepdims=True)
    out = Tensor(probs, x.requires_grad)

    def rule(g):
        dot = (g * probs).sum(axis=1, keepdims=True)
        return (probs * (g - dot),)

    return _maybe_record(out, (x,), rule)


def layer_norm(x, gain, bias, eps: float = _LN_EPS) -> Tensor:
    """Normalize the last dimension to zero mean / unit variance, then affine."""
    x, gain, bias = _coerce(x), _coerce(gain), _coerce(bias)
    data = x.data
    mean = data.mean(axis=-1, keepdims=True)
    centered = data - mean
    var = (centered * centered).mean(axis=-1, keepdims=True)
    inv_std = 1.0 / np.sqrt(var + eps)
    normed = centered * inv_std
    out = Tensor(normed * gain.data + bias.data,
                 x.requires_grad or gain.requires_grad or bias.requires_grad)
    gain_data = gain.data
    n = data.shape[-1]

    def rule(g):
        g_gain = _unbroadcast(g * normed, gain.shape) if gain.requires_grad else None
        g_bias = _unbroadcast(g, bias.shape) if bias.requires_grad else None
        if x.requires_grad:
            gn = g * gain_data
            g_x = inv_std * (
                gn
                - gn.mean(axis=-1, keepdims=True)
                - normed * (gn * normed).mean(axis=-1, keepdims=True)
            )
        else:
            g_x = None
        return (g_x, g_gain, g_bias)

    return _maybe_record(out, (x, gain, bias), rule)


def dropout(x, p: float, train: bool, rng: np.random.Generator | None = None) -> Tensor:
    """Inverted dropout: survivors scaled by 1/(1-p); identity in eval mode."""
    if not 0.0 <= p < 1.0:
        raise ConfigError(f"dropout rate must be in [0, 1), got {p}")
    x = _coerce(x)
    if not train or p == 0.0:
        return x
    if rng is None:
        raise ConfigError("dropout in train mode requires a seeded generator")
    keep = rng.random(x.shape) >= p
    factor = 1.0 / (1.0 - p)
    out = Tensor(x.data * keep * factor, x.requires_grad)
    return _maybe_record(out, (x,), lambda g: (g * keep * factor,))


def embedding_lookup(table, ids) -> Tensor:
    """Gather rows of `table` by integer id."""
    table = _coerce(table)
    ids = np.asarray(ids, dtype=np.int64)
    if ids.size and (ids.min() < 0 or ids.max() >= table.shape[0]):
        raise ShapeError(
            f"embedding_lookup: id out of range for table with {table.shape[0]} rows"
        )
    out = Tensor(table.data[ids], table.requires_grad)

    def rule(g):
        acc = np.zeros_like(table.data)
        np.add.at(acc, ids, g)
        return (acc,)

    return _maybe_record(out, (table,), rule)


def concat_cols(a, b) -> Tensor:
    """Concatenate two matrices along the last axis."""
    a, b = _coerce(a), _coerce(b)
    if a.data.ndim != 2 or b.data.ndim != 2 or a.shape[0] != b.shape[0]:
        raise ShapeError(f"concat_cols: incompatible shapes {a.shape} and {b.shape}")
    out = Tensor(np.concatenate([a.data, b.data], axis=1),
                 a.requires_grad or b.requires_grad)
    split = a.shape[1]

    def rule(g):
        return (
            g[:, :split] if a.requires_grad else None,
            g[:, split:] if b.requires_grad else None,
        )

    return _maybe_record(out, (a, b), rule)


def slice_cols(x, start: int, stop: int) -> Tensor:
    x = _coerce(x)
    out = Tensor(x.data[:, start:stop], x.requires_grad)

    def rule(g):
        acc = np.zeros_like(x.data)
        acc[:, start:stop] = g
        return (acc,)

    return _maybe_record(out, (x,), rule)


def gather_rows(x, indices) -> Tensor:
    x = _coerce(x)
    indices = np.asarray(indices, dtype=np.int64)
    out = Tensor(x.data[indices], x.requires_grad)

    def rule(g):
        acc = np.zeros_like(x.data)
        np.add.at(acc, indices, g)
        return (acc,)

    return _maybe_record(out, (x,), rule)


def span_means(x, spans) -> Tensor:
    """Mean-pool row spans of x: out[i] = mean(x[start_i:stop_i]).

    Spans are half-open (start, stop) pairs with stop > start.
    """
    x = _coerce(x)
    for start, stop in spans:
        if not 0 <= start < stop <= x.shape[0]:
            raise ShapeError(
                f"span_means: span ({start}, {stop}) outside {x.shape[0]} rows"
            )
    pooled = np.stack([x.data[start:stop].mean(axis=0) for start, stop in spans])
    out = Tensor(pooled, x.requires_grad)

    def rule(g):
        acc = np.zeros_like(x.data)
        for i, (start, stop) in enumerate(spans):
            acc[start:stop] += g[i] / (stop - start)
        return (acc,)

    return _maybe_record(out, (x,), rule)


def row_scatter(base, rows, indices) -> Tensor:
    """Copy of `base` with base[indices[i]] replaced by rows[i]."""
    base, rows = _coerce(base), _coerce(rows)
    indices = np.asarray(indices, dtype=np.int64)
    if len(indices) != rows.shape[0]:
        raise ShapeError(
            f"row_scatter: {len(indices)} indices for {rows.shape[0]} rows"
        )
    data = base.data.copy()
    data[indices] = rows.data
    out = Tensor(data, base.requires_grad or rows.requires_grad)

    def rule(g):
        if base.requires_grad:
            g_base = g.copy()
            g_base[indices] = 0.0
        else:
            g_base = None
        return (g_base, g[indices] if rows.requires_grad else None)

    return _maybe_record(out, (base, rows), rule)


def stack_rows(parts: list[Tensor]) -> Tensor:
    """Stack [1 x d] rows into an [n x d] matrix."""
    if not parts:
        raise ContractError("stack_rows: empty list")
    parts = [_coerce(p) for p in parts]
    widths = {p.shape for p in parts}
    if len(widths) != 1 or parts[0].data.ndim != 2 or parts[0].shape[0] != 1:
        raise ShapeError(f"stack_rows expects matching 1-row matrices, got {widths}")
    out = Tensor(
        np.concatenate([p.data for p in parts], axis=0),
        any(p.requires_grad for p in parts),
    )

    def rule(g):
        return tuple(
            g[i:i + 1] if p.requires_grad else None for i, p in enumerate(parts)
        )

    return _maybe_record(out, tuple(parts), rule)


def sum_all(x) -> Tensor:
    x = _coerce(x)
    out = Tensor(x.data.sum(), x.requires_grad)
    return _maybe_record(out, (x,), lambda g: (np.broadcast_to(g, x.shape).copy(),))


def mean_all(x) -> Tensor:
    x = _coerce(x)
    out = Tensor(x.data.mean(), x.requires_grad)
    n = x.size
    return _maybe_record(
        out, (x,), lambda g: (np.broadcast_to(g / n, x.shape).copy(),)
    )


def mean_tensors(parts: list[Tensor]) -> Tensor:
    """Mean of same-shape tensors (used to average per-example losses)."""
    if not parts:
        raise ContractError("mean_tensors: empty list")
    total = parts[0]
    for part in parts[1:]:
        total = add(total, part)
    return scale(total, 1.0 / len(parts))


def label_smoothed_nll(logits, targets, smoothing: float = 0.0) -> Tensor:
    """Mean smoothed cross-entropy over positions.

    Target distribution puts 1 - smoothing on the gold class and spreads
    `smoothing` uniformly over the other V-1 classes. smoothing=0 reduces to
    plain negative log-likelihood.
    """
    logits = _coerce(logits)
    targets = np.asarray(targets, dtype=np.int64)
    if logits.data.ndim != 2 or targets.ndim != 1 or len(targets) != logits.shape[0]:
        raise ShapeError(
            f"label_smoothed_nll: logits {logits.shape} vs {targets.shape} targets"
        )
    if not 0.0 <= smoothing < 1.0:
        raise ConfigError(f"label smoothing must be in [0, 1), got {smoothing}")
    k, vocab = logits.shape
    if targets.size and (targets.min() < 0 or targets.max() >= vocab):
        raise ContractError("label_smoothed_nll: target id outside vocabulary")
    shifted = logits.data - logits.data.max(axis=1, keepdims=True)
    log_z = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    log_probs = shifted - log_z
    rows = np.arange(k)
    if smoothing == 0.0:
        value = -log_probs[rows, targets].mean()
    else:
        off = smoothing / (vocab - 1)
        gold = log_probs[rows, targets]
        value = -((1.0 - smoothing - off) * gold + off * log_probs.sum(axis=1)).mean()
    out = Tensor(value, logits.requires_grad)
    probs = np.exp(log_probs)

    def rule(g):
        target_dist = np.full((k, vocab), smoothing / (vocab - 1) if smoothing else 0.0)
        target_dist[rows, targets] = 1.0 - smoothing
        return (g * (probs - target_dist) / k,)

    return _maybe_record(out, (logits,), rule)


def binary_cross_entropy_with_logits(logits, labels) -> Tensor:
    """Mean BCE of sigmoid(logits) against 0/1 labels, computed stably."""
    logits = _coerce(logits)
    labels = np.asarray(labels, dtype=np.float64)
    if logits.data.shape != labels.shape:
        raise ShapeError(
            f"bce: logits {logits.shape} vs labels {labels.shape}"
        )
    z = logits.data
    per_item = np.maximum(z, 0.0) - z * labels + np.log1p(np.exp(-np.abs(z)))
    out = Tensor(per_item.mean(), logits.requires_grad)
    n = max(labels.size, 1)
    probs = np.where(z >= 0, 1.0 / (1.0 + np.exp(-np.abs(z))),
                     np.exp(-np.abs(z)) / (1.0 + np.exp(-np.abs(z))))

    def rule(g):
        return (g * (probs - labels) / n,)

    return _maybe_record(out, (logits,), rule)
