# superdec/repositories/golden.py
"""
Golden tensor files (.supt).

Layout, all little-endian:
    b"SUPT"  u8 version (1)  u8 dtype (0 = f32, 1 = f64)
    u32 dim0  u32 dim1  u32 dim2  u32 dim3
    dim0*dim1*dim2*dim3 scalars, row-major

Arrays of rank below 4 are written with leading unit dims; pass shape to
load_golden to restore them.
"""

import struct
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from superdec.core.exceptions import GoldenFormatError

MAGIC = b"SUPT"
VERSION = 1
HEADER = struct.Struct("<4sBB4I")
DTYPE_CODES = {np.dtype(np.float32): 0, np.dtype(np.float64): 1}
CODE_DTYPES = {0: np.dtype("<f4"), 1: np.dtype("<f8")}

PathLike = Union[str, Path]


def encode_golden(array: np.ndarray) -> bytes:
    array = np.asarray(array)
    if array.dtype not in DTYPE_CODES:
        raise GoldenFormatError(f"unsupported dtype {array.dtype}; golden files hold f32 or f64")
    if array.ndim > 4:
        raise GoldenFormatError(f"golden files hold rank <= 4, got rank {array.ndim}")
    dims = (1,) * (4 - array.ndim) + tuple(array.shape)
    code = DTYPE_CODES[array.dtype]
    body = np.ascontiguousarray(array, dtype=CODE_DTYPES[code]).tobytes(order="C")
    return HEADER.pack(MAGIC, VERSION, code, *dims) + body


def decode_golden(payload: bytes, shape: Optional[Sequence[int]] = None) -> np.ndarray:
    if len(payload) < HEADER.size:
        raise GoldenFormatError(f"truncated header: {len(payload)} bytes")
    magic, version, code, *dims = HEADER.unpack_from(payload)
    if magic != MAGIC:
        raise GoldenFormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise GoldenFormatError(f"unsupported version {version}")
    if code not in CODE_DTYPES:
        raise GoldenFormatError(f"unknown dtype code {code}")
    dtype = CODE_DTYPES[code]
    count = int(np.prod(dims))
    expected = HEADER.size + count * dtype.itemsize
    if len(payload) != expected:
        raise GoldenFormatError(f"payload is {len(payload)} bytes, header implies {expected}")
    array = np.frombuffer(payload, dtype=dtype, offset=HEADER.size, count=count).reshape(dims)
    array = array.astype(dtype.newbyteorder("="))
    if shape is not None:
        if int(np.prod(shape)) != count:
            raise GoldenFormatError(f"cannot view {tuple(dims)} as {tuple(shape)}")
        array = array.reshape(tuple(shape))
    return array


def save_golden(path: PathLike, array: np.ndarray) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_golden(array))
    return path


def load_golden(path: PathLike, shape: Optional[Sequence[int]] = None) -> np.ndarray:
    path = Path(path)
    if not path.is_file():
        raise GoldenFormatError(f"no golden file at {path}")
    return decode_golden(path.read_bytes(), shape=shape)
