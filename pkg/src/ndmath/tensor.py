"""
Dense Tensor with Reverse-Mode Autodiff
=======================================

最小化的稠密张量实现：

- Tensor: float64 数值缓冲区 + 可选梯度槽
- Function: 可微算子基类，子类实现 forward / backward
- ComputeGraph: 从输出张量回溯得到的拓扑有序算子记录
- backward: 反向传播，覆盖 (而非累加) 叶子参数的梯度槽
"""

from __future__ import annotations

from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from core.errors import ContractError, DimensionError


ArrayLike = Union["Tensor", np.ndarray, float, int, Sequence[float], Sequence[Sequence[float]]]


# ============================================================================
# Function
# ============================================================================

class Function:
    """
    可微算子基类

    forward 接收输入张量的 numpy 数组并返回输出数组；
    backward 接收输出梯度，返回与输入一一对应的梯度 (不需要梯度的输入可返回 None)。
    """

    def __init__(self, *inputs: "Tensor"):
        self.inputs: Tuple["Tensor", ...] = inputs

    def forward(self, *arrays: np.ndarray, **kwargs: Any) -> np.ndarray:
        raise NotImplementedError(f"{type(self).__name__}.forward")

    def backward(self, grad: np.ndarray) -> Tuple[Optional[np.ndarray], ...]:
        raise NotImplementedError(f"{type(self).__name__}.backward")

    @classmethod
    def apply(cls, *inputs: ArrayLike, **kwargs: Any) -> "Tensor":
        tensors = tuple(as_tensor(x) for x in inputs)
        fn = cls(*tensors)
        out = fn.forward(*(t.data for t in tensors), **kwargs)
        requires_grad = any(t.requires_grad for t in tensors)
        return Tensor(out, requires_grad=requires_grad, creator=fn if requires_grad else None, copy=False)

    @staticmethod
    def unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
        """把广播后的梯度求和还原到输入形状"""
        if grad.shape == shape:
            return grad
        while grad.ndim > len(shape):
            grad = grad.sum(axis=0)
        for axis, extent in enumerate(shape):
            if extent == 1 and grad.shape[axis] != 1:
                grad = grad.sum(axis=axis, keepdims=True)
        return grad


# ============================================================================
# Tensor
# ============================================================================

class Tensor:
    """
    稠密实数张量

    Attributes:
        data: float64 数值缓冲区
        grad: 梯度槽，与 data 形状一致；backward 之前为 None
        requires_grad: 是否参与求导
        creator: 产生该张量的算子；叶子张量为 None
        name: 参数名 (仅用于日志和检查点)
    """

    __array_priority__ = 100

    def __init__(
        self,
        data: ArrayLike,
        requires_grad: bool = False,
        creator: Optional[Function] = None,
        name: str = "",
        copy: bool = True,
    ):
        if isinstance(data, Tensor):
            data = data.data
        array = np.array(data, dtype=np.float64) if copy else np.asarray(data, dtype=np.float64)
        if array.size == 0:
            raise DimensionError(f"Tensor extents must be positive, got shape {array.shape}")
        self.data: np.ndarray = array
        self.grad: Optional[np.ndarray] = None
        self.requires_grad = bool(requires_grad)
        self.creator = creator
        self.name = name

    # ------------------------------------------------------------------
    # 基本属性
    # ------------------------------------------------------------------

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def values(self) -> np.ndarray:
        """行优先展开的数值"""
        return self.data.reshape(-1)

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def is_leaf(self) -> bool:
        return self.creator is None

    def item(self) -> float:
        if self.data.size != 1:
            raise ContractError(f"item() requires a single value, got shape {self.shape}")
        return float(self.data.reshape(-1)[0])

    def numpy(self) -> np.ndarray:
        return self.data.copy()

    def detach(self) -> "Tensor":
        return Tensor(self.data, requires_grad=False)

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self) -> str:
        label = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad}{label})"

    def __len__(self) -> int:
        return self.shape[0] if self.shape else 1

    # ------------------------------------------------------------------
    # 运算符
    # ------------------------------------------------------------------

    def __add__(self, other: ArrayLike) -> "Tensor":
        from ndmath import functional as F
        return F.add(self, other)

    def __radd__(self, other: ArrayLike) -> "Tensor":
        from ndmath import functional as F
        return F.add(other, self)

    def __sub__(self, other: ArrayLike) -> "Tensor":
        from ndmath import functional as F
        return F.sub(self, other)

    def __rsub__(self, other: ArrayLike) -> "Tensor":
        from ndmath import functional as F
        return F.sub(other, self)

    def __neg__(self) -> "Tensor":
        from ndmath import functional as F
        return F.mul(self, -1.0)

    def __mul__(self, other: ArrayLike) -> "Tensor":
        from ndmath import functional as F
        return F.mul(self, other)

    def __rmul__(self, other: ArrayLike) -> "Tensor":
        from ndmath import functional as F
        return F.mul(other, self)

    def __truediv__(self, other: ArrayLike) -> "Tensor":
        from ndmath import functional as F
        return F.div(self, other)

    def __matmul__(self, other: ArrayLike) -> "Tensor":
        from ndmath import functional as F
        return F.matmul(self, other)

    @property
    def T(self) -> "Tensor":
        from ndmath import functional as F
        return F.transpose(self)

    def sum(self, axis: Optional[int] = None, keepdims: bool = False) -> "Tensor":
        from ndmath import functional as F
        return F.sum(self, axis=axis, keepdims=keepdims)

    def mean(self, axis: Optional[int] = None, keepdims: bool = False) -> "Tensor":
        from ndmath import functional as F
        return F.mean(self, axis=axis, keepdims=keepdims)

    def reshape(self, *shape: int) -> "Tensor":
        from ndmath import functional as F
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return F.reshape(self, shape)

    def backward(self, params: Optional[Sequence["Tensor"]] = None) -> List[np.ndarray]:
        return backward(self, params)


def as_tensor(value: ArrayLike) -> Tensor:
    """常量包装为不求导的张量，已是 Tensor 时原样返回"""
    if isinstance(value, Tensor):
        return value
    return Tensor(value, requires_grad=False)


def parameter(data: ArrayLike, name: str = "") -> Tensor:
    """创建可训练的叶子参数"""
    return Tensor(data, requires_grad=True, name=name)


# ============================================================================
# ComputeGraph
# ============================================================================

class ComputeGraph:
    """
    从输出张量回溯得到的计算图

    nodes 按拓扑顺序排列 (每个节点的输入都排在它之前)，
    leaves 为图中需要梯度的叶子参数，按首次出现的顺序排列。
    """

    def __init__(self, output: Tensor):
        self.output = output
        self.nodes: List[Tensor] = self._topological_order(output)
        self.leaves: List[Tensor] = [n for n in self.nodes if n.is_leaf and n.requires_grad]

    @staticmethod
    def _topological_order(output: Tensor) -> List[Tensor]:
        order: List[Tensor] = []
        visited = set()
        # 迭代式后序遍历，避免深图递归溢出
        stack: List[Tuple[Tensor, bool]] = [(output, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            if node.creator is not None:
                for parent in reversed(node.creator.inputs):
                    if id(parent) not in visited:
                        stack.append((parent, False))
        return order

    def __len__(self) -> int:
        return len(self.nodes)


def backward(loss: Tensor, params: Optional[Sequence[Tensor]] = None) -> List[np.ndarray]:
    """
    反向传播

    Args:
        loss: 标量损失
        params: 需要报告梯度的参数；为 None 时报告图中全部叶子

    Returns:
        与 params (或图叶子) 顺序一致的梯度数组列表

    Raises:
        ContractError: loss 不是标量

    每次调用都会覆盖叶子的 grad 槽；未出现在图中的参数得到全零梯度。
    """
    if loss.data.size != 1:
        raise ContractError(f"backward requires a scalar loss, got shape {loss.shape}")

    graph = ComputeGraph(loss)
    grads: Dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}

    for node in reversed(graph.nodes):
        grad = grads.get(id(node))
        if grad is None or node.creator is None:
            continue
        input_grads = node.creator.backward(grad)
        for parent, parent_grad in zip(node.creator.inputs, input_grads):
            if parent_grad is None or not parent.requires_grad:
                continue
            key = id(parent)
            if key in grads:
                grads[key] = grads[key] + parent_grad
            else:
                grads[key] = parent_grad

    targets = list(params) if params is not None else graph.leaves
    result: List[np.ndarray] = []
    for leaf in targets:
        grad = grads.get(id(leaf))
        grad = np.zeros_like(leaf.data) if grad is None else np.array(grad, dtype=np.float64).reshape(leaf.shape)
        leaf.grad = grad
        result.append(grad)
    return result
