"""
ndmath
======

float64 稠密张量与反向自动微分，供编码器和损失函数使用。
"""

from .tensor import ComputeGraph, Function, Tensor, as_tensor, backward, parameter
from .functional import (
    concat,
    conv2d,
    diagonal,
    exp,
    l2_normalize,
    log_softmax,
    log_softmax_row,
    matmul,
    mean,
    relu,
    reshape,
    sin,
    take_rows,
    transpose,
)
from .gradcheck import grad_check

__all__ = [
    "ComputeGraph",
    "Function",
    "Tensor",
    "as_tensor",
    "backward",
    "parameter",
    "concat",
    "conv2d",
    "diagonal",
    "exp",
    "l2_normalize",
    "log_softmax",
    "log_softmax_row",
    "matmul",
    "mean",
    "relu",
    "reshape",
    "sin",
    "take_rows",
    "transpose",
    "grad_check",
]
