"""Tensor and mask files in the NPY version 1.0 container, plus uniform
random mask synthesis.

Only little-endian float64 payloads are accepted. Masks travel as 0/1 float
tensors and are converted to boolean arrays on load.
"""

from __future__ import annotations

import ast
import math
import struct
from math import prod

import numpy as np

__all__ = ["save_tensor", "load_tensor", "save_mask", "load_mask", "make_mask"]

MAGIC = b"\x93NUMPY"
VERSION = (1, 0)
HEADER_ALIGN = 64
DTYPE = "<f8"


def _header_bytes(shape) -> bytes:
    meta = "{'descr': '%s', 'fortran_order': False, 'shape': %s, }" % (
        DTYPE,
        repr(tuple(int(s) for s in shape)),
    )
    base = len(MAGIC) + 2 + 2
    pad = -(base + len(meta) + 1) % HEADER_ALIGN
    return (meta + " " * pad + "\n").encode("latin1")


def save_tensor(path, x) -> None:
    """Write ``x`` as little-endian float64 in NPY v1.0 layout."""
    x = np.asarray(x, dtype=DTYPE)
    if x.ndim < 1:
        raise ValueError("tensor must have order >= 1")
    if any(s < 1 for s in x.shape):
        raise ValueError(f"zero-sized mode in shape {x.shape}")
    header = _header_bytes(x.shape)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(bytes(VERSION))
        fh.write(struct.pack("<H", len(header)))
        fh.write(header)
        fh.write(np.ascontiguousarray(x).tobytes())


def load_tensor(path) -> np.ndarray:
    """Read an NPY v1.0 file written by :func:`save_tensor` or numpy."""
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < len(MAGIC):
        raise ValueError(f"file too short for NPY magic ({len(data)} bytes)")
    for off in range(len(MAGIC)):
        if data[off] != MAGIC[off]:
            raise ValueError(
                f"bad NPY magic at byte offset {off}: "
                f"expected 0x{MAGIC[off]:02x}, got 0x{data[off]:02x}"
            )
    if data[6:8] != bytes(VERSION):
        raise ValueError(f"unsupported NPY version {data[6]}.{data[7]}; expected 1.0")
    if len(data) < 10:
        raise ValueError("truncated NPY header length field")
    (hlen,) = struct.unpack("<H", data[8:10])
    header_end = 10 + hlen
    if len(data) < header_end:
        raise ValueError(f"truncated NPY header: need {hlen} bytes, have {len(data) - 10}")
    try:
        meta = ast.literal_eval(data[10:header_end].decode("latin1").strip())
    except (ValueError, SyntaxError) as exc:
        raise ValueError(f"malformed NPY header dictionary: {exc}") from None
    if not isinstance(meta, dict) or not {"descr", "fortran_order", "shape"} <= set(meta):
        raise ValueError("malformed NPY header: missing required keys")
    if meta["descr"] != DTYPE:
        raise ValueError(
            f"unsupported dtype {meta['descr']!r}; expected little-endian float64 {DTYPE!r}"
        )
    if not isinstance(meta["fortran_order"], bool):
        raise ValueError("malformed NPY header: fortran_order must be a boolean")
    shape = meta["shape"]
    if not isinstance(shape, tuple) or not all(isinstance(s, int) for s in shape):
        raise ValueError(f"malformed NPY header: bad shape {shape!r}")
    if len(shape) < 1:
        raise ValueError("tensor must have order >= 1")
    if any(s < 1 for s in shape):
        raise ValueError(f"zero-sized mode in shape {shape}")
    count = prod(shape)
    payload = data[header_end:]
    if len(payload) != count * 8:
        kind = "truncated" if len(payload) < count * 8 else "oversized"
        raise ValueError(
            f"{kind} payload: expected {count * 8} bytes for shape {shape}, got {len(payload)}"
        )
    arr = np.frombuffer(payload, dtype=DTYPE, count=count)
    order = "F" if meta["fortran_order"] else "C"
    return arr.reshape(shape, order=order).copy()


def save_mask(path, mask) -> None:
    """Write a boolean mask as a 0/1 float tensor."""
    save_tensor(path, np.asarray(mask, dtype=bool).astype(float))


def load_mask(path) -> np.ndarray:
    """Read a 0/1 float tensor as a boolean mask; other values are rejected."""
    arr = load_tensor(path)
    if not np.isin(arr, (0.0, 1.0)).all():
        raise ValueError("mask file must contain only 0 and 1 values")
    return arr != 0.0


def make_mask(shape, missing_rate: float, seed: int) -> np.ndarray:
    """Boolean observation mask with exactly floor(missing_rate * total)
    entries missing, drawn uniformly without replacement; deterministic in
    ``seed``."""
    if not 0.0 <= missing_rate < 1.0:
        raise ValueError(f"missing rate {missing_rate} out of range [0, 1)")
    shape = tuple(int(s) for s in shape)
    total = prod(shape)
    if total < 1:
        raise ValueError(f"empty shape {shape}")
    # round before flooring so that rates like 0.95 * 100 count exactly
    n_missing = int(math.floor(round(missing_rate * total, 9)))
    rng = np.random.default_rng(seed)
    missing = rng.choice(total, size=n_missing, replace=False)
    flat = np.ones(total, dtype=bool)
    flat[missing] = False
    return flat.reshape(shape)
