"""
Differentiable operations used by the encoders and losses.
"""

from __future__ import annotations

from typing import Optional, Sequence, Tuple

import numpy as np

from core.errors import DegenerateInputError, DimensionError
from ndmath.tensor import ArrayLike, Function, Tensor


# ============================================================================
# 逐元素算子
# ============================================================================

class Add(Function):
    def forward(self, a, b):
        return a + b

    def backward(self, grad):
        a, b = self.inputs
        return self.unbroadcast(grad, a.shape), self.unbroadcast(grad, b.shape)


class Sub(Function):
    def forward(self, a, b):
        return a - b

    def backward(self, grad):
        a, b = self.inputs
        return self.unbroadcast(grad, a.shape), self.unbroadcast(-grad, b.shape)


class Mul(Function):
    def forward(self, a, b):
        return a * b

    def backward(self, grad):
        a, b = self.inputs
        return (
            self.unbroadcast(grad * b.data, a.shape),
            self.unbroadcast(grad * a.data, b.shape),
        )


class Div(Function):
    def forward(self, a, b):
        return a / b

    def backward(self, grad):
        a, b = self.inputs
        return (
            self.unbroadcast(grad / b.data, a.shape),
            self.unbroadcast(-grad * a.data / (b.data ** 2), b.shape),
        )


class Sin(Function):
    def forward(self, a):
        return np.sin(a)

    def backward(self, grad):
        return (grad * np.cos(self.inputs[0].data),)


class ReLU(Function):
    def forward(self, a):
        self.mask = a > 0
        return np.where(self.mask, a, 0.0)

    def backward(self, grad):
        return (grad * self.mask,)


class Exp(Function):
    def forward(self, a):
        self.out = np.exp(a)
        return self.out

    def backward(self, grad):
        return (grad * self.out,)


# ============================================================================
# 线性代数与形状算子
# ============================================================================

class MatMul(Function):
    def forward(self, a, b):
        if a.ndim != 2 or b.ndim != 2:
            raise DimensionError(f"matmul expects 2-D operands, got {a.shape} and {b.shape}")
        if a.shape[1] != b.shape[0]:
            raise DimensionError(f"matmul inner extents differ: {a.shape} x {b.shape}")
        return a @ b

    def backward(self, grad):
        a, b = self.inputs
        return grad @ b.data.T, a.data.T @ grad


class Transpose(Function):
    def forward(self, a):
        if a.ndim != 2:
            raise DimensionError(f"transpose expects a 2-D tensor, got {a.shape}")
        return a.T

    def backward(self, grad):
        return (grad.T,)


class Reshape(Function):
    def forward(self, a, shape=()):
        return a.reshape(shape)

    def backward(self, grad):
        return (grad.reshape(self.inputs[0].shape),)


class Sum(Function):
    def forward(self, a, axis=None, keepdims=False):
        self.axis = axis
        self.keepdims = keepdims
        return np.asarray(a.sum(axis=axis, keepdims=keepdims))

    def backward(self, grad):
        shape = self.inputs[0].shape
        if self.axis is not None and not self.keepdims:
            grad = np.expand_dims(grad, self.axis)
        return (np.broadcast_to(grad, shape).copy(),)


class Mean(Function):
    def forward(self, a, axis=None, keepdims=False):
        self.axis = axis
        self.keepdims = keepdims
        self.count = a.size if axis is None else a.shape[axis]
        return np.asarray(a.mean(axis=axis, keepdims=keepdims))

    def backward(self, grad):
        shape = self.inputs[0].shape
        if self.axis is not None and not self.keepdims:
            grad = np.expand_dims(grad, self.axis)
        return (np.broadcast_to(grad / self.count, shape).copy(),)


class TakeRows(Function):
    def forward(self, a, indices=()):
        self.indices = np.asarray(indices, dtype=np.int64)
        return a[self.indices]

    def backward(self, grad):
        out = np.zeros_like(self.inputs[0].data)
        np.add.at(out, self.indices, grad)
        return (out,)


class Diagonal(Function):
    def forward(self, a):
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionError(f"diagonal expects a square matrix, got {a.shape}")
        return np.diagonal(a).copy()

    def backward(self, grad):
        return (np.diag(grad),)


class Concat(Function):
    def forward(self, *arrays, axis=0):
        self.axis = axis
        self.sizes = [x.shape[axis] for x in arrays]
        return np.concatenate(arrays, axis=axis)

    def backward(self, grad):
        bounds = np.cumsum(self.sizes)[:-1]
        return tuple(np.split(grad, bounds, axis=self.axis))


# ============================================================================
# 归一化与 softmax
# ============================================================================

class L2Normalize(Function):
    """
    沿最后一维做 L2 归一化

    反向传播使用完整的商法则雅可比: dx = (g - y * <g, y>) / ||x||
    """

    def forward(self, a):
        norm = np.sqrt(np.sum(a * a, axis=-1, keepdims=True))
        if np.any(norm == 0.0):
            raise DegenerateInputError("l2_normalize of a zero vector")
        self.norm = norm
        self.out = a / norm
        return self.out

    def backward(self, grad):
        y = self.out
        return ((grad - y * np.sum(grad * y, axis=-1, keepdims=True)) / self.norm,)


class LogSoftmax(Function):
    """沿最后一维的数值稳定 log-softmax (减去最大值)"""

    def forward(self, a):
        if a.shape[-1] == 0:
            raise DimensionError("log_softmax of an empty row")
        shifted = a - np.max(a, axis=-1, keepdims=True)
        log_norm = np.log(np.sum(np.exp(shifted), axis=-1, keepdims=True))
        self.out = shifted - log_norm
        return self.out

    def backward(self, grad):
        softmax = np.exp(self.out)
        return (grad - softmax * np.sum(grad, axis=-1, keepdims=True),)


# ============================================================================
# 卷积
# ============================================================================

def _im2col(x: np.ndarray, k: int, stride: int, pad: int) -> Tuple[np.ndarray, int, int]:
    n, c, h, w = x.shape
    xp = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    oh = (h + 2 * pad - k) // stride + 1
    ow = (w + 2 * pad - k) // stride + 1
    s0, s1, s2, s3 = xp.strides
    windows = np.lib.stride_tricks.as_strided(
        xp,
        shape=(n, c, k, k, oh, ow),
        strides=(s0, s1, s2, s3, s2 * stride, s3 * stride),
        writeable=False,
    )
    cols = windows.transpose(0, 4, 5, 1, 2, 3).reshape(n * oh * ow, c * k * k)
    return cols, oh, ow


class Conv2d(Function):
    """
    二维卷积 (N×C×H×W 输入, F×C×k×k 卷积核, F 维偏置)，基于 im2col + 矩阵乘法
    """

    def forward(self, x, weight, bias, stride=1, padding=0):
        if x.ndim != 4 or weight.ndim != 4:
            raise DimensionError(f"conv2d expects 4-D input and weight, got {x.shape} and {weight.shape}")
        if x.shape[1] != weight.shape[1]:
            raise DimensionError(f"conv2d channel mismatch: input {x.shape[1]}, weight {weight.shape[1]}")
        self.stride = stride
        self.padding = padding
        k = weight.shape[2]
        self.cols, self.oh, self.ow = _im2col(x, k, stride, padding)
        wmat = weight.reshape(weight.shape[0], -1)
        out = self.cols @ wmat.T + bias
        return out.reshape(x.shape[0], self.oh, self.ow, weight.shape[0]).transpose(0, 3, 1, 2)

    def backward(self, grad):
        x, weight, bias = self.inputs
        n, c, h, w = x.shape
        f, _, k, _ = weight.shape
        g2 = grad.transpose(0, 2, 3, 1).reshape(-1, f)
        dweight = (g2.T @ self.cols).reshape(weight.shape)
        dbias = g2.sum(axis=0)

        dx = None
        if x.requires_grad:
            dcols = (g2 @ weight.data.reshape(f, -1)).reshape(n, self.oh, self.ow, c, k, k)
            pad, s = self.padding, self.stride
            dxp = np.zeros((n, c, h + 2 * pad, w + 2 * pad))
            for i in range(k):
                for j in range(k):
                    dxp[:, :, i:i + s * self.oh:s, j:j + s * self.ow:s] += dcols[:, :, :, :, i, j].transpose(0, 3, 1, 2)
            dx = dxp[:, :, pad:pad + h, pad:pad + w]
        return dx, dweight, dbias


# ============================================================================
# 函数式接口
# ============================================================================

def add(a: ArrayLike, b: ArrayLike) -> Tensor:
    return Add.apply(a, b)


def sub(a: ArrayLike, b: ArrayLike) -> Tensor:
    return Sub.apply(a, b)


def mul(a: ArrayLike, b: ArrayLike) -> Tensor:
    return Mul.apply(a, b)


def div(a: ArrayLike, b: ArrayLike) -> Tensor:
    return Div.apply(a, b)


def sin(a: ArrayLike) -> Tensor:
    return Sin.apply(a)


def relu(a: ArrayLike) -> Tensor:
    return ReLU.apply(a)


def exp(a: ArrayLike) -> Tensor:
    return Exp.apply(a)


def matmul(a: ArrayLike, b: ArrayLike) -> Tensor:
    """c[i][j] = Σ_p a[i][p]·b[p][j]; inner extents must match."""
    return MatMul.apply(a, b)


def transpose(a: ArrayLike) -> Tensor:
    return Transpose.apply(a)


def reshape(a: ArrayLike, shape: Sequence[int]) -> Tensor:
    return Reshape.apply(a, shape=tuple(shape))


def sum(a: ArrayLike, axis: Optional[int] = None, keepdims: bool = False) -> Tensor:  # noqa: A001
    return Sum.apply(a, axis=axis, keepdims=keepdims)


def mean(a: ArrayLike, axis: Optional[int] = None, keepdims: bool = False) -> Tensor:
    return Mean.apply(a, axis=axis, keepdims=keepdims)


def take_rows(a: ArrayLike, indices: Sequence[int]) -> Tensor:
    return TakeRows.apply(a, indices=indices)


def diagonal(a: ArrayLike) -> Tensor:
    return Diagonal.apply(a)


def concat(tensors: Sequence[ArrayLike], axis: int = 0) -> Tensor:
    return Concat.apply(*tensors, axis=axis)


def l2_normalize(v: ArrayLike) -> Tensor:
    """Unit Euclidean norm along the last axis; zero vectors are rejected."""
    return L2Normalize.apply(v)


def log_softmax(logits: ArrayLike) -> Tensor:
    """Row-wise log-softmax along the last axis."""
    return LogSoftmax.apply(logits)


def log_softmax_row(logits: ArrayLike) -> Tensor:
    """Log-softmax of a single row ``Tensor[n]``."""
    row = logits if isinstance(logits, Tensor) else Tensor(logits)
    if row.ndim != 1:
        raise DimensionError(f"log_softmax_row expects a 1-D row, got shape {row.shape}")
    return LogSoftmax.apply(row)


def conv2d(x: ArrayLike, weight: ArrayLike, bias: ArrayLike, stride: int = 1, padding: int = 0) -> Tensor:
    return Conv2d.apply(x, weight, bias, stride=stride, padding=padding)
