import enum
import typing as t

import numpy as np
import numpy.typing as npt
from scipy import special

from src.exceptions import TeleDriveDimensionError, TeleDriveNonFiniteError, TeleDriveTapeError

__all__: tuple[str, ...] = (
    "Array",
    "Op",
    "Tensor",
    "backward",
    "concat",
    "stack",
)

Array = npt.NDArray[np.float64]
Operand = t.Union["Tensor", float, int, Array]
BackwardFn = t.Callable[[Array], tuple[t.Optional[Array], ...]]


class Op(enum.StrEnum):
    """Kinds of node recorded on the gradient tape."""

    LEAF = "leaf"
    ADD = "add"
    SUB = "sub"
    MUL = "mul"
    NEG = "neg"
    MATMUL = "matmul"
    SIGMOID = "sigmoid"
    TANH = "tanh"
    GELU = "gelu"
    EXP = "exp"
    SUM = "sum"
    MEAN = "mean"
    INDEX = "index"
    CONCAT = "concat"
    STACK = "stack"


def _unbroadcast(grad: Array, shape: tuple[int, ...]) -> Array:
    """Sum a broadcast gradient back down to the operand's shape."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


class Tensor:
    """
    A float64 array that records the operations applied to it.

    Leaves created with ``requires_grad=True`` receive ``.grad`` after
    :func:`backward`; intermediate nodes only keep their parents while some
    ancestor needs a gradient, so pure inference builds no graph.
    """

    __slots__ = ("data", "grad", "name", "requires_grad", "op", "_parents", "_backward", "_consumed")

    def __init__(self, data: npt.ArrayLike, *, requires_grad: bool = False, name: t.Optional[str] = None) -> None:
        self.data: Array = np.array(data, dtype=np.float64)
        self.grad: t.Optional[Array] = None
        self.name = name
        self.requires_grad = requires_grad
        self.op = Op.LEAF
        self._parents: tuple["Tensor", ...] = ()
        self._backward: t.Optional[BackwardFn] = None
        self._consumed = False

    @classmethod
    def _record(cls, data: Array, op: Op, parents: tuple["Tensor", ...], backward_fn: BackwardFn) -> "Tensor":
        out = cls.__new__(cls)
        out.data = data
        out.grad = None
        out.name = None
        out.op = op
        out.requires_grad = any(parent.requires_grad for parent in parents)
        out._parents = parents if out.requires_grad else ()
        out._backward = backward_fn if out.requires_grad else None
        out._consumed = False
        return out

    @staticmethod
    def lift(value: Operand) -> "Tensor":
        """Wrap constants so they can take part in recorded operations."""
        return value if isinstance(value, Tensor) else Tensor(value)

    def __repr__(self) -> str:
        label = f" {self.name!r}" if self.name else ""
        return f"<Tensor{label} shape={self.shape} op={self.op}>"

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(self.data.shape)

    @property
    def values(self) -> list[float]:
        """Values in row-major order."""
        return [float(v) for v in self.data.ravel()]

    def item(self) -> float:
        return float(self.data.reshape(()))

    def detach(self) -> "Tensor":
        return Tensor(self.data.copy())

    def zero_grad(self) -> None:
        self.grad = None

    def __add__(self, other: Operand) -> "Tensor":
        rhs = Tensor.lift(other)
        a_shape, b_shape = self.shape, rhs.shape
        try:
            data = self.data + rhs.data
        except ValueError:
            raise TeleDriveDimensionError.mismatch("add", a_shape, b_shape) from None
        return Tensor._record(data, Op.ADD, (self, rhs), lambda g: (_unbroadcast(g, a_shape), _unbroadcast(g, b_shape)))

    __radd__ = __add__

    def __sub__(self, other: Operand) -> "Tensor":
        rhs = Tensor.lift(other)
        a_shape, b_shape = self.shape, rhs.shape
        try:
            data = self.data - rhs.data
        except ValueError:
            raise TeleDriveDimensionError.mismatch("sub", a_shape, b_shape) from None
        return Tensor._record(
            data, Op.SUB, (self, rhs), lambda g: (_unbroadcast(g, a_shape), _unbroadcast(-g, b_shape))
        )

    def __rsub__(self, other: Operand) -> "Tensor":
        return Tensor.lift(other) - self

    def __mul__(self, other: Operand) -> "Tensor":
        rhs = Tensor.lift(other)
        a, b = self.data, rhs.data
        try:
            data = a * b
        except ValueError:
            raise TeleDriveDimensionError.mismatch("mul", a.shape, b.shape) from None
        return Tensor._record(
            data, Op.MUL, (self, rhs), lambda g: (_unbroadcast(g * b, a.shape), _unbroadcast(g * a, b.shape))
        )

    __rmul__ = __mul__

    def __neg__(self) -> "Tensor":
        return Tensor._record(-self.data, Op.NEG, (self,), lambda g: (-g,))

    def __matmul__(self, weight: "Tensor") -> "Tensor":
        """``x @ W`` for ``x`` of shape (..., F) and a 2-D ``W`` of shape (F, H)."""
        x, w = self.data, weight.data
        if w.ndim != 2 or x.ndim == 0 or x.shape[-1] != w.shape[0]:
            raise TeleDriveDimensionError.mismatch("matmul", x.shape, w.shape)
        data = x @ w

        def _backward(g: Array) -> tuple[Array, Array]:
            grad_x = g @ w.T
            grad_w = x.reshape(-1, w.shape[0]).T @ g.reshape(-1, w.shape[1])
            return grad_x, grad_w

        return Tensor._record(data, Op.MATMUL, (self, weight), _backward)

    def __getitem__(self, index: t.Any) -> "Tensor":
        shape = self.shape
        data = np.array(self.data[index], dtype=np.float64)
        parts = index if isinstance(index, tuple) else (index,)
        basic = all(isinstance(part, (int, slice)) or part is Ellipsis or part is None for part in parts)

        def _backward(g: Array) -> tuple[Array]:
            grad = np.zeros(shape, dtype=np.float64)
            if basic:
                grad[index] = g
            else:
                np.add.at(grad, index, g)
            return (grad,)

        return Tensor._record(data, Op.INDEX, (self,), _backward)

    def sigmoid(self) -> "Tensor":
        out = special.expit(self.data)
        return Tensor._record(out, Op.SIGMOID, (self,), lambda g: (g * out * (1.0 - out),))

    def tanh(self) -> "Tensor":
        out = np.tanh(self.data)
        return Tensor._record(out, Op.TANH, (self,), lambda g: (g * (1.0 - out * out),))

    def gelu(self) -> "Tensor":
        x = self.data
        cdf = 0.5 * (1.0 + special.erf(x / np.sqrt(2.0)))
        pdf = np.exp(-0.5 * x * x) / np.sqrt(2.0 * np.pi)
        return Tensor._record(x * cdf, Op.GELU, (self,), lambda g: (g * (cdf + x * pdf),))

    def exp(self) -> "Tensor":
        out = np.exp(self.data)
        return Tensor._record(out, Op.EXP, (self,), lambda g: (g * out,))

    def sum(self, axis: t.Optional[int] = None) -> "Tensor":
        shape = self.shape
        data = np.asarray(self.data.sum(axis=axis), dtype=np.float64)

        def _backward(g: Array) -> tuple[Array]:
            grad = g if axis is None else np.expand_dims(g, axis)
            return (np.broadcast_to(grad, shape).copy(),)

        return Tensor._record(data, Op.SUM, (self,), _backward)

    def mean(self) -> "Tensor":
        shape, count = self.shape, self.data.size
        data = np.asarray(self.data.mean(), dtype=np.float64)
        return Tensor._record(data, Op.MEAN, (self,), lambda g: (np.full(shape, float(g) / count),))


def concat(tensors: t.Sequence[Tensor], axis: int = -1) -> Tensor:
    """Concatenate along ``axis``; gradients are split back to each part."""
    parts = tuple(tensors)
    try:
        data = np.concatenate([part.data for part in parts], axis=axis)
    except ValueError:
        raise TeleDriveDimensionError(f"concat: incompatible shapes {[part.shape for part in parts]}.") from None
    bounds = np.cumsum([part.data.shape[axis] for part in parts])[:-1]
    return Tensor._record(data, Op.CONCAT, parts, lambda g: tuple(np.split(g, bounds, axis=axis)))


def stack(tensors: t.Sequence[Tensor], axis: int = 0) -> Tensor:
    """Stack equally shaped tensors along a new ``axis``."""
    parts = tuple(tensors)
    try:
        data = np.stack([part.data for part in parts], axis=axis)
    except ValueError:
        raise TeleDriveDimensionError(f"stack: incompatible shapes {[part.shape for part in parts]}.") from None

    def _backward(g: Array) -> tuple[Array, ...]:
        return tuple(np.take(g, i, axis=axis) for i in range(len(parts)))

    return Tensor._record(data, Op.STACK, parts, _backward)


def _topological_order(root: Tensor) -> list[Tensor]:
    order: list[Tensor] = []
    seen: set[int] = set()
    stack_: list[tuple[Tensor, bool]] = [(root, False)]
    while stack_:
        node, expanded = stack_.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack_.append((node, True))
        for parent in node._parents:
            if id(parent) not in seen:
                stack_.append((parent, False))
    return order


def backward(loss: Tensor) -> None:
    """
    Reverse-mode pass from a scalar ``loss``.

    Gradients accumulate into ``.grad`` of every leaf with ``requires_grad``.
    The tape is released afterwards; a second call on the same loss raises.
    """
    if loss._consumed:
        raise TeleDriveTapeError("backward() called twice on the same tape; run a new forward pass first.")
    if loss.data.size != 1:
        raise TeleDriveDimensionError(f"backward() needs a scalar loss, got shape {loss.shape}.")
    loss._consumed = True
    if not loss.requires_grad:
        return
    order = _topological_order(loss)
    grads: dict[int, Array] = {id(loss): np.ones_like(loss.data)}
    for node in reversed(order):
        grad = grads.pop(id(node), None)
        if grad is None:
            continue
        if node._backward is None:
            if node.requires_grad:
                if not np.all(np.isfinite(grad)):
                    raise TeleDriveNonFiniteError(f"non-finite gradient for {node!r}.")
                node.grad = grad.copy() if node.grad is None else node.grad + grad
            continue
        for parent, parent_grad in zip(node._parents, node._backward(grad)):
            if parent_grad is None or not parent.requires_grad:
                continue
            key = id(parent)
            grads[key] = parent_grad if key not in grads else grads[key] + parent_grad
    for node in order:
        node._parents = ()
        node._backward = None
