"""Dense tensors with reverse-mode automatic differentiation.

A Tensor wraps a numpy array plus an optional gradient buffer. Operations
(see ops.py) execute eagerly; when a Tape is active and an input requires a
gradient, the op records itself so that Tape.backward can replay the recorded
sequence in reverse and accumulate gradients.

Double precision is the default dtype: the finite-difference gradient checks
in the test suite are not achievable in float32.
"""

from __future__ import annotations

import numpy as np

from ..errors import ContractError

DEFAULT_DTYPE = np.float64


def as_array(values, dtype=DEFAULT_DTYPE) -> np.ndarray:
    return np.asarray(values, dtype=dtype)


class Tensor:
    """A dense array with an optional accumulated gradient.

    requires_grad marks tensors whose gradient should be retained after
    backward. Ops propagate the flag so every tensor downstream of a
    parameter participates in the tape.
    """

    __slots__ = ("data", "requires_grad", "grad")

    def __init__(self, values, requires_grad: bool = False):
        self.data = as_array(values)
        self.requires_grad = bool(requires_grad)
        self.grad: np.ndarray | None = None

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return self.data.size

    def zero_grad(self) -> None:
        self.grad = None

    def detach(self) -> "Tensor":
        return Tensor(self.data.copy(), requires_grad=False)

    def to_list(self):
        return self.data.tolist()

    def __repr__(self) -> str:  # pragma: no cover - debug aid
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"


# Stack of active tapes; ops record onto the innermost one.
_TAPES: list["Tape"] = []


def active_tape() -> "Tape | None":
    return _TAPES[-1] if _TAPES else None


class Tape:
    """Ordered record of executed ops for one forward pass.

    Eager execution means the record order is already topological, so the
    backward pass is a single reverse sweep. Each record holds the output
    tensor, the input tensors, and a rule mapping the output gradient to
    per-input gradients.
    """

    def __init__(self):
        self._records: list[tuple[Tensor, tuple[Tensor, ...], object]] = []

    def __enter__(self) -> "Tape":
        _TAPES.append(self)
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        _TAPES.pop()

    def __len__(self) -> int:
        return len(self._records)

    def record(self, out: Tensor, inputs: tuple[Tensor, ...], backward) -> None:
        self._records.append((out, inputs, backward))

    def backward(self, loss: Tensor) -> None:
        """Accumulate dLoss/dT into every requires-grad tensor reachable from loss.

        Repeated calls without zero_grad accumulate, matching optimizer
        gradient-accumulation semantics.
        """
        if loss.size != 1:
            raise ContractError(
                f"backward expects a scalar loss, got shape {loss.shape}"
            )
        flowing: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
        keepalive: dict[int, Tensor] = {id(loss): loss}
        for out, inputs, rule in reversed(self._records):
            out_grad = flowing.pop(id(out), None)
            holder = keepalive.pop(id(out), None)
            if out_grad is None:
                continue
            if holder is not None and holder.requires_grad:
                holder.grad = out_grad if holder.grad is None else holder.grad + out_grad
            for tensor, grad in zip(inputs, rule(out_grad)):
                if grad is None:
                    continue
                key = id(tensor)
                if key in flowing:
                    flowing[key] = flowing[key] + grad
                else:
                    flowing[key] = grad
                    keepalive[key] = tensor
        for key, tensor in keepalive.items():
            if tensor.requires_grad:
                grad = flowing[key]
                tensor.grad = grad.copy() if tensor.grad is None else tensor.grad + grad
