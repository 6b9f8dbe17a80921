# superdec/tensor/functional.py
"""
Differentiable Operations

Every op used by the blocks, the baseline decoder and the losses is defined
here as a Function subclass plus a thin functional wrapper that validates
shapes before recording the node.

Shape policy: binary ops require identical shapes. The only implicit
broadcast is a Python/numpy scalar combined with a tensor; anything else
goes through expand(), which states the broadcast explicitly.
"""

import numbers
from typing import List, Optional, Sequence, Tuple

import numpy as np
from numpy.lib.stride_tricks import as_strided

from superdec.core.exceptions import ShapeError
from superdec.tensor.tensor import Function, Tensor

BAND_AXIS_NAMES = ("B", "C", "H", "W")


def _is_scalar(value) -> bool:
    return isinstance(value, numbers.Number) or (isinstance(value, np.ndarray) and value.ndim == 0)


def _require_rank4(x: Tensor, op: str) -> None:
    if x.ndim != 4:
        raise ShapeError(f"{op} expects a rank-4 [B, C, H, W] tensor, got shape {x.shape}",
                         dimension="rank", expected=4, actual=x.ndim)


def _require_same_shape(a: Tensor, b: Tensor, op: str) -> None:
    if a.shape == b.shape:
        return
    if a.ndim != b.ndim:
        raise ShapeError(f"{op}: operand ranks differ", dimension="rank", expected=a.ndim, actual=b.ndim)
    for axis, (ea, eb) in enumerate(zip(a.shape, b.shape)):
        if ea != eb:
            name = BAND_AXIS_NAMES[axis] if a.ndim == 4 else str(axis)
            raise ShapeError(f"{op}: shape mismatch {a.shape} vs {b.shape}", dimension=name, expected=ea, actual=eb)


# ------------------------------------------------------------------------------
# Elementwise
# ------------------------------------------------------------------------------
class Add(Function):
    def forward(self, a, b):
        return a + b

    def backward(self, grad):
        return grad, grad


class Sub(Function):
    def forward(self, a, b):
        return a - b

    def backward(self, grad):
        return grad, -grad


class Mul(Function):
    def forward(self, a, b):
        self.a, self.b = a, b
        return a * b

    def backward(self, grad):
        return grad * self.b, grad * self.a


class Scale(Function):
    def forward(self, x, factor: float = 1.0):
        self.factor = factor
        return x * np.asarray(factor, dtype=x.dtype)

    def backward(self, grad):
        return (grad * np.asarray(self.factor, dtype=grad.dtype),)


class Shift(Function):
    def forward(self, x, offset: float = 0.0):
        return x + np.asarray(offset, dtype=x.dtype)

    def backward(self, grad):
        return (grad,)


class Relu(Function):
    def forward(self, x):
        self.mask = x > 0
        return np.where(self.mask, x, np.zeros((), dtype=x.dtype))

    def backward(self, grad):
        return (grad * self.mask,)


class Sigmoid(Function):
    def forward(self, x):
        self.out = stable_sigmoid(x)
        return self.out

    def backward(self, grad):
        return (grad * self.out * (1 - self.out),)


def stable_sigmoid(x: np.ndarray) -> np.ndarray:
    """Logistic function without overflow for large |x|."""
    e = np.exp(-np.abs(x))
    return np.where(x >= 0, 1 / (1 + e), e / (1 + e)).astype(x.dtype, copy=False)


def _binary(fn: type, scalar_fn, a: Tensor, b, op: str) -> Tensor:
    if _is_scalar(b):
        return scalar_fn(a, b)
    _require_same_shape(a, b, op)
    return fn.apply(a, b)


def add(a: Tensor, b) -> Tensor:
    return _binary(Add, lambda x, s: Shift.apply(x, offset=float(s)), a, b, "add")


def sub(a: Tensor, b) -> Tensor:
    return _binary(Sub, lambda x, s: Shift.apply(x, offset=-float(s)), a, b, "sub")


def mul(a: Tensor, b) -> Tensor:
    return _binary(Mul, lambda x, s: Scale.apply(x, factor=float(s)), a, b, "mul")


def scale(x: Tensor, factor: float) -> Tensor:
    return Scale.apply(x, factor=float(factor))


def relu(x: Tensor) -> Tensor:
    return Relu.apply(x)


def sigmoid(x: Tensor) -> Tensor:
    return Sigmoid.apply(x)


ELEMENTWISE_KINDS = {
    "add": add,
    "sub": sub,
    "mul": mul,
    "relu": relu,
    "sigmoid": sigmoid,
}


def elementwise(kind: str, a: Tensor, b=None) -> Tensor:
    """Pointwise op by name: add, sub, mul (binary) or relu, sigmoid (unary)."""
    if kind not in ELEMENTWISE_KINDS:
        raise ValueError(f"Unknown elementwise kind: {kind}")
    if kind in ("relu", "sigmoid"):
        return ELEMENTWISE_KINDS[kind](a)
    if b is None:
        raise ShapeError(f"elementwise {kind} needs a second operand")
    return ELEMENTWISE_KINDS[kind](a, b)


# ------------------------------------------------------------------------------
# Explicit broadcast and reductions
# ------------------------------------------------------------------------------
class Expand(Function):
    def forward(self, x, shape: Tuple[int, ...] = ()):
        self.axes = tuple(i for i, (s, t) in enumerate(zip(x.shape, shape)) if s == 1 and t != 1)
        return np.broadcast_to(x, shape).copy()

    def backward(self, grad):
        return (grad.sum(axis=self.axes, keepdims=True) if self.axes else grad,)


def expand(x: Tensor, shape: Sequence[int]) -> Tensor:
    """Broadcast unit axes of x to shape; every non-unit axis must already match."""
    shape = tuple(int(s) for s in shape)
    if x.ndim != len(shape):
        raise ShapeError("expand: rank mismatch", dimension="rank", expected=len(shape), actual=x.ndim)
    for axis, (s, t) in enumerate(zip(x.shape, shape)):
        if s != t and s != 1:
            raise ShapeError(f"expand: cannot broadcast {x.shape} to {shape}",
                             dimension=BAND_AXIS_NAMES[axis] if x.ndim == 4 else str(axis), expected=t, actual=s)
    return Expand.apply(x, shape=shape)


class Sum(Function):
    def forward(self, x):
        self.shape = x.shape
        total = np.sum(x, dtype=np.float64)
        return np.full((1, 1, 1, 1), total, dtype=x.dtype)

    def backward(self, grad):
        return (np.broadcast_to(grad.reshape(()), self.shape).copy(),)


class Mean(Function):
    def forward(self, x):
        self.shape = x.shape
        total = np.sum(x, dtype=np.float64) / max(x.size, 1)
        return np.full((1, 1, 1, 1), total, dtype=x.dtype)

    def backward(self, grad):
        count = max(int(np.prod(self.shape)), 1)
        return (np.broadcast_to(grad.reshape(()) / count, self.shape).copy(),)


def sum_all(x: Tensor) -> Tensor:
    """Sum of all elements as a [1,1,1,1] tensor (accumulated in f64)."""
    return Sum.apply(x)


def mean_all(x: Tensor) -> Tensor:
    """Mean of all elements as a [1,1,1,1] tensor (accumulated in f64)."""
    return Mean.apply(x)


# ------------------------------------------------------------------------------
# Convolution
# ------------------------------------------------------------------------------
class Conv2d(Function):
    """
    2-D cross-correlation via im2col and one batched matmul.

    cols has shape (B, Cin*kh*kw, H'*W'); backward scatters dcols back with
    a kh*kw loop over strided views.
    """

    def forward(self, x, weight, bias=None, stride: int = 1, padding: int = 0):
        B, C, H, W = x.shape
        c_out, _, kh, kw = weight.shape
        if padding:
            x = np.pad(x, ((0, 0), (0, 0), (padding, padding), (padding, padding)))
        Hp, Wp = x.shape[2], x.shape[3]
        h_out = (Hp - kh) // stride + 1
        w_out = (Wp - kw) // stride + 1
        sB, sC, sH, sW = x.strides
        patches = as_strided(
            x,
            shape=(B, C, kh, kw, h_out, w_out),
            strides=(sB, sC, sH, sW, stride * sH, stride * sW),
            writeable=False,
        )
        cols = patches.reshape(B, C * kh * kw, h_out * w_out)
        w_mat = weight.reshape(c_out, -1)
        out = np.matmul(w_mat, cols)
        if bias is not None:
            out = out + bias.reshape(1, c_out, 1)

        self.cols = cols
        self.weight = weight
        self.has_bias = bias is not None
        self.stride = stride
        self.padding = padding
        self.padded_shape = (B, C, Hp, Wp)
        self.out_hw = (h_out, w_out)
        return out.reshape(B, c_out, h_out, w_out)

    def backward(self, grad):
        B, c_out, h_out, w_out = grad.shape
        g = grad.reshape(B, c_out, h_out * w_out)
        w_mat = self.weight.reshape(c_out, -1)

        grad_weight = np.tensordot(g, self.cols, axes=([0, 2], [0, 2])).reshape(self.weight.shape)
        grad_bias = g.sum(axis=(0, 2)) if self.has_bias else None

        dcols = np.matmul(w_mat.T, g)
        _, C, Hp, Wp = self.padded_shape
        kh, kw = self.weight.shape[2], self.weight.shape[3]
        s = self.stride
        dcols = dcols.reshape(B, C, kh, kw, h_out, w_out)
        dx = np.zeros(self.padded_shape, dtype=grad.dtype)
        for i in range(kh):
            for j in range(kw):
                dx[:, :, i:i + s * h_out:s, j:j + s * w_out:s] += dcols[:, :, i, j]
        p = self.padding
        if p:
            dx = dx[:, :, p:Hp - p, p:Wp - p]
        if self.has_bias:
            return dx, grad_weight, grad_bias
        return dx, grad_weight


def conv2d(
    x: Tensor,
    weight: Tensor,
    bias: Optional[Tensor] = None,
    stride: int = 1,
    padding: int = 0,
) -> Tensor:
    """
    Cross-correlate x [B,Cin,H,W] with weight [Cout,Cin,kh,kw].

    Raises:
        ShapeError: naming the offending dimension when channels, kernel
            parity or the output extent do not fit
    """
    _require_rank4(x, "conv2d")
    if weight.ndim != 4:
        raise ShapeError("conv2d weight must be [Cout, Cin, kh, kw]", dimension="rank", expected=4, actual=weight.ndim)
    B, C, H, W = x.shape
    c_out, c_in, kh, kw = weight.shape
    if c_in != C:
        raise ShapeError("conv2d input channels do not match weight", dimension="Cin", expected=c_in, actual=C)
    if kh % 2 == 0 or kw % 2 == 0:
        raise ShapeError("conv2d kernel extents must be odd", dimension="kernel", expected="odd", actual=(kh, kw))
    if stride < 1:
        raise ShapeError("conv2d stride must be positive", dimension="stride", expected=">= 1", actual=stride)
    for name, extent, k in (("H", H, kh), ("W", W, kw)):
        span = extent + 2 * padding - k
        if span < 0 or span % stride != 0:
            raise ShapeError("conv2d output extent is not a positive integer", dimension=name,
                             expected=f"(extent + 2*padding - k) divisible by {stride}", actual=extent)
    if bias is not None:
        if bias.shape != (c_out,):
            raise ShapeError("conv2d bias must be [Cout]", dimension="Cout", expected=c_out, actual=bias.shape)
        return Conv2d.apply(x, weight, bias, stride=stride, padding=padding)
    return Conv2d.apply(x, weight, stride=stride, padding=padding)


# ------------------------------------------------------------------------------
# Channel concatenation and slicing
# ------------------------------------------------------------------------------
class Concat(Function):
    def forward(self, *parts):
        self.sizes = [p.shape[1] for p in parts]
        return np.concatenate(parts, axis=1)

    def backward(self, grad):
        bounds = np.cumsum([0] + self.sizes)
        return tuple(grad[:, bounds[i]:bounds[i + 1]].copy() for i in range(len(self.sizes)))


class ChannelSlice(Function):
    def forward(self, x, start: int = 0, stop: int = 0):
        self.shape, self.start, self.stop = x.shape, start, stop
        return x[:, start:stop].copy()

    def backward(self, grad):
        full = np.zeros(self.shape, dtype=grad.dtype)
        full[:, self.start:self.stop] = grad
        return (full,)


def concat_channels(parts: Sequence[Tensor]) -> Tensor:
    """Concatenate [B,·,H,W] tensors along the channel axis."""
    if not parts:
        raise ShapeError("concat_channels needs at least one tensor")
    first = parts[0]
    _require_rank4(first, "concat_channels")
    for part in parts[1:]:
        _require_rank4(part, "concat_channels")
        for axis in (0, 2, 3):
            if part.shape[axis] != first.shape[axis]:
                raise ShapeError("concat_channels extents differ", dimension=BAND_AXIS_NAMES[axis],
                                 expected=first.shape[axis], actual=part.shape[axis])
    return Concat.apply(*parts)


def channel_slice(x: Tensor, start: int, stop: int) -> Tensor:
    _require_rank4(x, "channel_slice")
    return ChannelSlice.apply(x, start=start, stop=stop)


def chunk_channels(x: Tensor, n: int) -> List[Tensor]:
    """Split x into n equal channel slices, in channel order."""
    _require_rank4(x, "chunk_channels")
    C = x.shape[1]
    if n < 1 or C % n != 0:
        raise ShapeError(f"cannot split {C} channels into {n} chunks", dimension="C",
                         expected=f"multiple of {n}", actual=C)
    width = C // n
    return [channel_slice(x, i * width, (i + 1) * width) for i in range(n)]


# ------------------------------------------------------------------------------
# Pooling
# ------------------------------------------------------------------------------
class GlobalAvgPool(Function):
    def forward(self, x):
        self.shape = x.shape
        return x.mean(axis=(2, 3), keepdims=True)

    def backward(self, grad):
        B, C, H, W = self.shape
        return (np.broadcast_to(grad / (H * W), self.shape).copy(),)


class GlobalMaxPool(Function):
    def forward(self, x):
        B, C, H, W = x.shape
        self.shape = x.shape
        flat = x.reshape(B, C, H * W)
        self.index = np.argmax(flat, axis=2)
        return np.take_along_axis(flat, self.index[..., None], axis=2).reshape(B, C, 1, 1)

    def backward(self, grad):
        B, C, H, W = self.shape
        out = np.zeros((B, C, H * W), dtype=grad.dtype)
        np.put_along_axis(out, self.index[..., None], grad.reshape(B, C, 1), axis=2)
        return (out.reshape(self.shape),)


class ChannelMean(Function):
    def forward(self, x):
        self.shape = x.shape
        return x.mean(axis=1, keepdims=True)

    def backward(self, grad):
        return (np.broadcast_to(grad / self.shape[1], self.shape).copy(),)


class ChannelMax(Function):
    def forward(self, x):
        self.shape = x.shape
        self.index = np.argmax(x, axis=1)[:, None]
        return np.take_along_axis(x, self.index, axis=1)

    def backward(self, grad):
        out = np.zeros(self.shape, dtype=grad.dtype)
        np.put_along_axis(out, self.index, grad, axis=1)
        return (out,)


POOL_KINDS = {
    "global_avg": GlobalAvgPool,
    "global_max": GlobalMaxPool,
    "spatial_mean_over_channels": ChannelMean,
    "spatial_max_over_channels": ChannelMax,
}


def pool(kind: str, x: Tensor) -> Tensor:
    """
    Reduce x by kind: global_* return [B,C,1,1], spatial_*_over_channels
    return [B,1,H,W]. Max kinds route gradient to the first argmax.
    """
    if kind not in POOL_KINDS:
        raise ValueError(f"Unknown pool kind: {kind}")
    _require_rank4(x, "pool")
    if x.shape[2] < 1 or x.shape[3] < 1:
        raise ShapeError("pool needs H, W >= 1", dimension="H", expected=">= 1", actual=x.shape[2])
    return POOL_KINDS[kind].apply(x)


class AvgPool2x2(Function):
    def forward(self, x):
        B, C, H, W = x.shape
        self.shape = x.shape
        return x.reshape(B, C, H // 2, 2, W // 2, 2).mean(axis=(3, 5))

    def backward(self, grad):
        g = np.repeat(np.repeat(grad, 2, axis=2), 2, axis=3) / 4
        return (g.astype(grad.dtype, copy=False),)


def avg_pool2x2(x: Tensor) -> Tensor:
    """Non-overlapping 2x2 average pooling, stride 2."""
    _require_rank4(x, "avg_pool2x2")
    for axis in (2, 3):
        if x.shape[axis] % 2:
            raise ShapeError("avg_pool2x2 needs even spatial extents", dimension=BAND_AXIS_NAMES[axis],
                             expected="even", actual=x.shape[axis])
    return AvgPool2x2.apply(x)


# ------------------------------------------------------------------------------
# Upsampling
# ------------------------------------------------------------------------------
def interpolation_matrix(n: int, mode: str, dtype=np.float64) -> np.ndarray:
    """
    (2n x n) matrix mapping a length-n signal to its 2x upsampling.

    bilinear follows the align-corners=false convention: output index i
    samples source coordinate (i + 0.5) / 2 - 0.5, clamped at the borders.
    """
    m = np.zeros((2 * n, n), dtype=dtype)
    for i in range(2 * n):
        if mode == "nearest":
            m[i, i // 2] = 1.0
            continue
        src = max((i + 0.5) / 2 - 0.5, 0.0)
        i0 = min(int(np.floor(src)), n - 1)
        i1 = min(i0 + 1, n - 1)
        w1 = src - i0
        m[i, i0] += 1.0 - w1
        m[i, i1] += w1
    return m


class Upsample2x(Function):
    def forward(self, x, mode: str = "nearest"):
        self.mh = interpolation_matrix(x.shape[2], mode, x.dtype)
        self.mw = interpolation_matrix(x.shape[3], mode, x.dtype)
        return np.einsum("ih,bchw,jw->bcij", self.mh, x, self.mw, optimize=True)

    def backward(self, grad):
        return (np.einsum("ih,bcij,jw->bchw", self.mh, grad, self.mw, optimize=True),)


def upsample(x: Tensor, mode: str = "bilinear", factor: int = 2) -> Tensor:
    """Upsample x [B,C,H,W] to [B,C,2H,2W] by nearest or bilinear interpolation."""
    if factor != 2:
        raise ShapeError("upsample supports factor 2 only", dimension="factor", expected=2, actual=factor)
    if mode not in ("nearest", "bilinear"):
        raise ValueError(f"Unknown upsample mode: {mode}")
    _require_rank4(x, "upsample")
    return Upsample2x.apply(x, mode=mode)
