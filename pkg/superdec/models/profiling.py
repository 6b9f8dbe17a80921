# superdec/models/profiling.py
"""
MAC cost model.

Dense convolutions cost B*H'*W'*Cout*Cin*kh*kw. Everything else is
channel-linear: a fixed constant times an element count, so its cost is a
function of B*C*H*W alone and is identical at (H, W, C) and (H/2, W/2, 4C).

Constants (MAC-equivalents):
  elementwise add/sub/mul      1 per output element
  relu, sigmoid                1 per output element
  pooling reductions           1 per input element
  dwt, idwt                    8 per output element (4 adds + scale per band formula)
  upsample                     4 per output element (bilinear), 1 (nearest)
  concat, slice, expand        0 (data movement)
"""

from typing import Tuple

from superdec.schemas.reports import MacRow

ELEMENTWISE_MACS = 1
ACTIVATION_MACS = 1
POOL_MACS_PER_INPUT = 1
WAVELET_MACS = 8
UPSAMPLE_MACS = {"bilinear": 4, "nearest": 1}

Shape = Tuple[int, ...]


def volume(shape: Shape) -> int:
    total = 1
    for extent in shape:
        total *= int(extent)
    return total


def conv2d_macs(batch: int, out_h: int, out_w: int, c_out: int, c_in: int, kh: int, kw: int) -> int:
    return batch * out_h * out_w * c_out * c_in * kh * kw


def channel_linear_macs(shape: Shape, constant: int) -> int:
    return volume(shape) * constant


def conv_row(name: str, input_shape: Shape, c_out: int, kernel: int, padding: int, params: int) -> MacRow:
    B, c_in, H, W = input_shape
    out = (B, c_out, H + 2 * padding - kernel + 1, W + 2 * padding - kernel + 1)
    return MacRow(
        name=name, op=f"conv{kernel}x{kernel}", input_shape=tuple(input_shape), output_shape=out,
        macs=conv2d_macs(B, out[2], out[3], c_out, c_in, kernel, kernel), params=params,
    )


def linear_row(name: str, op: str, input_shape: Shape, output_shape: Shape, constant: int) -> MacRow:
    return MacRow(
        name=name, op=op, input_shape=tuple(input_shape), output_shape=tuple(output_shape),
        macs=channel_linear_macs(output_shape, constant),
    )


def pool_row(name: str, op: str, input_shape: Shape, output_shape: Shape) -> MacRow:
    return MacRow(
        name=name, op=op, input_shape=tuple(input_shape), output_shape=tuple(output_shape),
        macs=channel_linear_macs(input_shape, POOL_MACS_PER_INPUT),
    )


def move_row(name: str, op: str, input_shape: Shape, output_shape: Shape) -> MacRow:
    return MacRow(name=name, op=op, input_shape=tuple(input_shape), output_shape=tuple(output_shape), macs=0)
