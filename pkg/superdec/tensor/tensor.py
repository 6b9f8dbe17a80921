# superdec/tensor/tensor.py
"""
Tensor and Differentiation Graph

A dense numpy-backed tensor that records the operations applied to it so a
single reverse-mode pass can populate gradients on every reachable leaf.

Each differentiable operation is a Function subclass with a forward over raw
arrays and a backward returning one gradient per input. Function.apply wires
the node into the graph; Graph orders the nodes and runs them in reverse.

Conventions:
- activations are rank-4 [B, C, H, W] in row-major order; parameters may
  have lower rank (conv bias is [Cout])
- f32 is the training dtype, f64 the verification dtype; operands of one op
  must share a dtype
- gradients accumulate into .grad of leaves until zero_grad() is called
"""

import threading
from abc import ABC, abstractmethod
from contextlib import contextmanager
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from superdec.core.exceptions import DTypeError, GraphError

ArrayLike = Union[np.ndarray, float, int, Sequence]

DTYPES = {"f32": np.dtype(np.float32), "f64": np.dtype(np.float64)}
DTYPE_NAMES = {v: k for k, v in DTYPES.items()}

_state = threading.local()


def _grad_enabled() -> bool:
    return getattr(_state, "grad_enabled", True)


@contextmanager
def no_grad() -> Iterator[None]:
    """Disable graph recording on the current thread."""
    previous = _grad_enabled()
    _state.grad_enabled = False
    try:
        yield
    finally:
        _state.grad_enabled = previous


def resolve_dtype(dtype: Union[str, np.dtype, type, None]) -> np.dtype:
    """Map "f32"/"f64" (or a numpy float dtype) to a numpy dtype."""
    if dtype is None:
        from superdec.core.config import get_settings
        return DTYPES[get_settings().DEFAULT_DTYPE]
    if isinstance(dtype, str) and dtype in DTYPES:
        return DTYPES[dtype]
    resolved = np.dtype(dtype)
    if resolved not in DTYPE_NAMES:
        raise DTypeError(f"unsupported dtype {dtype!r}; use f32 or f64")
    return resolved


class Tensor:
    """
    Dense array participating in a reverse-mode differentiation graph.

    Attributes:
        data: numpy array holding the values
        requires_grad: whether gradients flow to (or through) this tensor
        grad: accumulated gradient, same shape as data, for leaves only
    """

    def __init__(
        self,
        data: ArrayLike,
        requires_grad: bool = False,
        dtype: Union[str, np.dtype, None] = None,
    ):
        if dtype is None and isinstance(data, np.ndarray) and data.dtype in DTYPE_NAMES:
            target = data.dtype
        else:
            target = resolve_dtype(dtype)
        self.data: np.ndarray = np.array(data, dtype=target)
        self.requires_grad = requires_grad
        self.grad: Optional[np.ndarray] = None
        self._node: Optional["Function"] = None

    # --------------------------------------------------------------------------
    # Introspection
    # --------------------------------------------------------------------------
    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    @property
    def dtype_name(self) -> str:
        return DTYPE_NAMES[self.data.dtype]

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def is_leaf(self) -> bool:
        return self._node is None

    def numpy(self) -> np.ndarray:
        return self.data.copy()

    def item(self) -> float:
        return float(self.data.reshape(-1)[0]) if self.data.size == 1 else float("nan")

    def detach(self) -> "Tensor":
        return Tensor(self.data.copy(), requires_grad=False)

    def astype(self, dtype: Union[str, np.dtype]) -> "Tensor":
        return Tensor(self.data.astype(resolve_dtype(dtype)), requires_grad=self.requires_grad)

    def zero_grad(self) -> None:
        self.grad = None

    def backward(self) -> None:
        backward(self)

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, dtype={self.dtype_name}, requires_grad={self.requires_grad})"

    # --------------------------------------------------------------------------
    # Operators (dispatch to the functional layer)
    # --------------------------------------------------------------------------
    def __add__(self, other):
        from superdec.tensor import functional as F
        return F.add(self, other)

    def __radd__(self, other):
        return self.__add__(other)

    def __sub__(self, other):
        from superdec.tensor import functional as F
        return F.sub(self, other)

    def __rsub__(self, other):
        from superdec.tensor import functional as F
        return F.add(F.scale(self, -1.0), other)

    def __mul__(self, other):
        from superdec.tensor import functional as F
        return F.mul(self, other)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __neg__(self):
        from superdec.tensor import functional as F
        return F.scale(self, -1.0)


class Parameter(Tensor):
    """A learnable tensor with a unique dotted path inside its model."""

    def __init__(self, data: ArrayLike, name: str = "", dtype: Union[str, np.dtype, None] = None):
        super().__init__(data, requires_grad=True, dtype=dtype)
        self.name = name

    @property
    def value(self) -> Tensor:
        return self

    def __repr__(self) -> str:
        return f"Parameter(name={self.name!r}, shape={self.shape}, dtype={self.dtype_name})"


class Function(ABC):
    """
    One recorded operation.

    Subclasses implement forward over numpy arrays (saving whatever backward
    needs on self) and backward returning a gradient per tensor input, or
    None for inputs that receive no gradient.
    """

    def __init__(self):
        self.inputs: Tuple[Tensor, ...] = ()
        self.consumed = False

    @abstractmethod
    def forward(self, *arrays: np.ndarray, **kwargs) -> np.ndarray:
        pass

    @abstractmethod
    def backward(self, grad: np.ndarray) -> Tuple[Optional[np.ndarray], ...]:
        pass

    @classmethod
    def apply(cls, *inputs: Tensor, **kwargs) -> Tensor:
        dtypes = {t.dtype for t in inputs}
        if len(dtypes) > 1:
            raise DTypeError(f"{cls.__name__}: mixed operand dtypes {sorted(str(d) for d in dtypes)}")
        fn = cls()
        out_data = fn.forward(*[t.data for t in inputs], **kwargs)
        out_dtype = inputs[0].dtype if inputs else out_data.dtype
        requires = _grad_enabled() and any(t.requires_grad for t in inputs)
        out = Tensor(np.asarray(out_data, dtype=out_dtype), requires_grad=requires)
        if requires:
            fn.inputs = inputs
            out._node = fn
        return out

    def release(self) -> None:
        """Drop saved state after the backward pass."""
        self.consumed = True
        keep = {"inputs", "consumed"}
        for attr in [a for a in vars(self) if a not in keep]:
            delattr(self, attr)


class Graph:
    """
    Topologically ordered record of the ops that produced a tensor.

    Built lazily from the output by an iterative depth-first walk; run()
    visits nodes in exact reverse topological order and consumes them.
    """

    def __init__(self, output: Tensor):
        if output._node is None:
            raise GraphError("no forward graph recorded for this tensor")
        self.output = output
        self.order: List[Tensor] = self._topological_order(output)

    @staticmethod
    def _topological_order(root: Tensor) -> List[Tensor]:
        order: List[Tensor] = []
        visited = set()
        stack: List[Tuple[Tensor, bool]] = [(root, False)]
        while stack:
            tensor, expanded = stack.pop()
            if expanded:
                order.append(tensor)
                continue
            if id(tensor) in visited:
                continue
            visited.add(id(tensor))
            stack.append((tensor, True))
            if tensor._node is not None:
                for parent in reversed(tensor._node.inputs):
                    if parent.requires_grad and id(parent) not in visited:
                        stack.append((parent, False))
        return order

    def run(self, seed: np.ndarray) -> None:
        for tensor in self.order:
            if tensor._node is not None and tensor._node.consumed:
                raise GraphError("graph already consumed; run a new forward pass before backward")

        grads: Dict[int, np.ndarray] = {id(self.output): seed}
        for tensor in reversed(self.order):
            grad = grads.pop(id(tensor), None)
            node = tensor._node
            if node is None:
                if grad is not None and tensor.requires_grad:
                    tensor.grad = grad.copy() if tensor.grad is None else tensor.grad + grad
                continue
            if grad is not None:
                input_grads = node.backward(grad)
                for parent, parent_grad in zip(node.inputs, input_grads):
                    if parent_grad is None or not parent.requires_grad:
                        continue
                    parent_grad = np.asarray(parent_grad, dtype=parent.dtype)
                    key = id(parent)
                    grads[key] = parent_grad if key not in grads else grads[key] + parent_grad
            node.release()


def backward(loss: Tensor) -> None:
    """
    Populate .grad on every leaf reachable from a scalar loss.

    Raises:
        GraphError: if the loss is not a single element, has no recorded
            graph, or its graph was already consumed
    """
    if loss.size != 1:
        raise GraphError(f"backward needs a scalar loss, got shape {loss.shape}")
    if loss._node is None:
        raise GraphError("no forward graph recorded for this tensor")
    if loss._node.consumed:
        raise GraphError("graph already consumed; run a new forward pass before backward")
    Graph(loss).run(np.ones_like(loss.data))
