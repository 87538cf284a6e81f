"""Minimal dense-tensor library: reverse-mode autodiff, initializers, Adam.

A tape and the tensors recorded on it belong to one worker; independent model
instances may run in parallel workers, but nothing here synchronizes shared
mutable state.
"""

from .init import init_gaussian_embedding, init_lecun_uniform, init_ones, init_zeros
from .ops import (
    add,
    binary_cross_entropy_with_logits,
    concat_cols,
    dropout,
    embedding_lookup,
    gather_rows,
    label_smoothed_nll,
    layer_norm,
    matmul,
    mean_all,
    mean_tensors,
    mul,
    relu,
    row_scatter,
    scale,
    sigmoid,
    slice_cols,
    softmax_rows,
    span_means,
    stack_rows,
    sum_all,
    transpose,
)
from .optim import AdamState, adam_step
from .snapshot import read_snapshot, write_snapshot
from .tensor import Tape, Tensor, active_tape

__all__ = [
    "AdamState",
    "Tape",
    "Tensor",
    "active_tape",
    "adam_step",
    "add",
    "binary_cross_entropy_with_logits",
    "concat_cols",
    "dropout",
    "embedding_lookup",
    "gather_rows",
    "init_gaussian_embedding",
    "init_lecun_uniform",
    "init_ones",
    "init_zeros",
    "label_smoothed_nll",
    "layer_norm",
    "matmul",
    "mean_all",
    "mean_tensors",
    "mul",
    "read_snapshot",
    "relu",
    "row_scatter",
    "scale",
    "sigmoid",
    "slice_cols",
    "softmax_rows",
    "span_means",
    "stack_rows",
    "sum_all",
    "transpose",
    "write_snapshot",
]
