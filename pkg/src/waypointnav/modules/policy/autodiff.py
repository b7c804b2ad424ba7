"""
Differentiable primitives with hand-written backward passes. torch's autograd graph records the order in which
they are applied and replays their `backward` methods in reverse, so the policy's forward pass is built only from
these operations (plus indexing and reshaping).
"""

from typing import Sequence

import torch
from torch.autograd import Function


def _unbroadcast(grad: torch.Tensor, shape: torch.Size) -> torch.Tensor:
    """Sum `grad` over the dimensions that broadcasting added or expanded to reach it from `shape`."""
    while grad.dim() > len(shape):
        grad = grad.sum(dim=0)
    for dim, size in enumerate(shape):
        if size == 1 and grad.shape[dim] != 1:
            grad = grad.sum(dim=dim, keepdim=True)
    return grad


def _check_broadcast(op: str, a: torch.Tensor, b: torch.Tensor) -> None:
    try:
        torch.broadcast_shapes(a.shape, b.shape)
    except RuntimeError as e:
        raise ValueError(f"{op}: shapes {tuple(a.shape)} and {tuple(b.shape)} do not broadcast") from e


class _MatMul(Function):
    @staticmethod
    def forward(ctx, a: torch.Tensor, b: torch.Tensor) -> torch.Tensor:
        ctx.save_for_backward(a, b)
        return a @ b

    @staticmethod
    def backward(ctx, grad: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        a, b = ctx.saved_tensors
        grad_a = _unbroadcast(grad @ b.transpose(-1, -2), a.shape)
        grad_b = _unbroadcast(a.transpose(-1, -2) @ grad, b.shape)
        return grad_a, grad_b


class _Add(Function):
    @staticmethod
    def forward(ctx, a: torch.Tensor, b: torch.Tensor) -> torch.Tensor:
        ctx.shapes = (a.shape, b.shape)
        return a + b

    @staticmethod
    def backward(ctx, grad: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        return _unbroadcast(grad, ctx.shapes[0]), _unbroadcast(grad, ctx.shapes[1])


class _Sub(Function):
    @staticmethod
    def forward(ctx, a: torch.Tensor, b: torch.Tensor) -> torch.Tensor:
        ctx.shapes = (a.shape, b.shape)
        return a - b

    @staticmethod
    def backward(ctx, grad: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        return _unbroadcast(grad, ctx.shapes[0]), _unbroadcast(-grad, ctx.shapes[1])


class _Mul(Function):
    @staticmethod
    def forward(ctx, a: torch.Tensor, b: torch.Tensor) -> torch.Tensor:
        ctx.save_for_backward(a, b)
        return a * b

    @staticmethod
    def backward(ctx, grad: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        a, b = ctx.saved_tensors
        return _unbroadcast(grad * b, a.shape), _unbroadcast(grad * a, b.shape)


class _Concat(Function):
    @staticmethod
    def forward(ctx, dim: int, *tensors: torch.Tensor) -> torch.Tensor:
        ctx.dim = dim
        ctx.sizes = [t.shape[dim] for t in tensors]
        return torch.cat(tensors, dim=dim)

    @staticmethod
    def backward(ctx, grad: torch.Tensor) -> tuple:
        return (None, *torch.split(grad, ctx.sizes, dim=ctx.dim))


class _MeanPool(Function):
    @staticmethod
    def forward(ctx, x: torch.Tensor, dim: int) -> torch.Tensor:
        ctx.dim, ctx.shape = dim, x.shape
        return x.mean(dim=dim)

    @staticmethod
    def backward(ctx, grad: torch.Tensor) -> tuple[torch.Tensor, None]:
        return grad.unsqueeze(ctx.dim).expand(ctx.shape) / ctx.shape[ctx.dim], None


class _Tanh(Function):
    @staticmethod
    def forward(ctx, x: torch.Tensor) -> torch.Tensor:
        y = torch.tanh(x)
        ctx.save_for_backward(y)
        return y

    @staticmethod
    def backward(ctx, grad: torch.Tensor) -> torch.Tensor:
        (y,) = ctx.saved_tensors
        return grad * (1 - y * y)


class _Sigmoid(Function):
    @staticmethod
    def forward(ctx, x: torch.Tensor) -> torch.Tensor:
        y = torch.sigmoid(x)
        ctx.save_for_backward(y)
        return y

    @staticmethod
    def backward(ctx, grad: torch.Tensor) -> torch.Tensor:
        (y,) = ctx.saved_tensors
        return grad * y * (1 - y)


class _ReLU(Function):
    @staticmethod
    def forward(ctx, x: torch.Tensor) -> torch.Tensor:
        ctx.save_for_backward(x)
        return x.clamp(min=0)

    @staticmethod
    def backward(ctx, grad: torch.Tensor) -> torch.Tensor:
        (x,) = ctx.saved_tensors
        return grad * (x > 0).to(grad.dtype)


class _Softmax(Function):
    @staticmethod
    def forward(ctx, x: torch.Tensor, dim: int) -> torch.Tensor:
        shifted = x - x.amax(dim=dim, keepdim=True)
        y = torch.exp(shifted)
        y = y / y.sum(dim=dim, keepdim=True)
        ctx.dim = dim
        ctx.save_for_backward(y)
        return y

    @staticmethod
    def backward(ctx, grad: torch.Tensor) -> tuple[torch.Tensor, None]:
        (y,) = ctx.saved_tensors
        return y * (grad - (grad * y).sum(dim=ctx.dim, keepdim=True)), None


def matmul(a: torch.Tensor, b: torch.Tensor) -> torch.Tensor:
    """
    Matrix product over the last two dimensions, batched over any leading ones; 1-D operands are treated as a
    row (left) or column (right) vector and the added dimension is dropped again.

    Raises:
        ValueError: If the inner dimensions differ or the batch dimensions do not broadcast.
    """
    if a.dim() == 0 or b.dim() == 0:
        raise ValueError("matmul: operands must have at least one dimension")
    left, right = a.dim() == 1, b.dim() == 1
    a2 = a.unsqueeze(0) if left else a
    b2 = b.unsqueeze(-1) if right else b
    if a2.shape[-1] != b2.shape[-2]:
        raise ValueError(f"matmul: inner dimensions of {tuple(a.shape)} and {tuple(b.shape)} differ")
    try:
        torch.broadcast_shapes(a2.shape[:-2], b2.shape[:-2])
    except RuntimeError as e:
        raise ValueError(f"matmul: batch dimensions of {tuple(a.shape)} and {tuple(b.shape)} do not broadcast") from e
    out = _MatMul.apply(a2, b2)
    if right:
        out = out.squeeze(-1)
    if left:
        out = out.squeeze(-2)
    return out


def add(a: torch.Tensor, b: torch.Tensor) -> torch.Tensor:
    _check_broadcast("add", a, b)
    return _Add.apply(a, b)


def sub(a: torch.Tensor, b: torch.Tensor) -> torch.Tensor:
    _check_broadcast("sub", a, b)
    return _Sub.apply(a, b)


def mul(a: torch.Tensor, b: torch.Tensor) -> torch.Tensor:
    _check_broadcast("mul", a, b)
    return _Mul.apply(a, b)


def concat(tensors: Sequence[torch.Tensor], dim: int = -1) -> torch.Tensor:
    """
    Raises:
        ValueError: If `tensors` is empty or the shapes disagree outside `dim`.
    """
    if not tensors:
        raise ValueError("concat: nothing to concatenate")
    ndim = tensors[0].dim()
    axis = dim % ndim

    def outside(t: torch.Tensor) -> torch.Size:
        return t.shape[:axis] + t.shape[axis + 1 :]

    for t in tensors[1:]:
        if t.dim() != ndim or outside(t) != outside(tensors[0]):
            shapes = [tuple(t.shape) for t in tensors]
            raise ValueError(f"concat: shapes {shapes} differ outside dimension {dim}")
    return _Concat.apply(axis, *tensors)


def mean_pool(x: torch.Tensor, dim: int = 0) -> torch.Tensor:
    if x.dim() == 0 or x.shape[dim] == 0:
        raise ValueError(f"mean_pool: cannot pool an empty dimension {dim} of shape {tuple(x.shape)}")
    return _MeanPool.apply(x, dim % x.dim())


def tanh(x: torch.Tensor) -> torch.Tensor:
    return _Tanh.apply(x)


def sigmoid(x: torch.Tensor) -> torch.Tensor:
    return _Sigmoid.apply(x)


def relu(x: torch.Tensor) -> torch.Tensor:
    return _ReLU.apply(x)


def softmax(x: torch.Tensor, dim: int = -1) -> torch.Tensor:
    if x.dim() == 0 or x.shape[dim] == 0:
        raise ValueError(f"softmax: cannot normalise an empty dimension {dim} of shape {tuple(x.shape)}")
    return _Softmax.apply(x, dim % x.dim())


PRIMITIVES = {
    "matmul": matmul,
    "add": add,
    "sub": sub,
    "mul": mul,
    "concat": concat,
    "mean_pool": mean_pool,
    "tanh": tanh,
    "sigmoid": sigmoid,
    "relu": relu,
    "softmax": softmax,
}
