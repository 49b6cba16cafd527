"""Dense tensor kernels: permutation, generalized unfolding and folding.

Tensors are plain ``numpy.ndarray`` values and mode indices are 0-based.
Whenever several modes are flattened into one matrix dimension, a single
fixed rule applies: the first listed mode varies fastest (column-major
flattening of the permuted tensor). Every matricization in the package is
defined through this rule, so row and column enumerations always agree
across modules.

All operations are pure functions; results never alias their inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import prod

import numpy as np

__all__ = [
    "ModeSplit",
    "gen_unfold",
    "gen_fold",
    "mode_unfold",
    "mode_fold",
    "permute",
    "hadamard",
    "axpy",
    "frobenius_norm",
]


def _check_perm(perm, order: int) -> None:
    if len(perm) != order or sorted(perm) != list(range(order)):
        raise ValueError(f"perm {tuple(perm)!r} is not a permutation of 0..{order - 1}")


@dataclass(frozen=True)
class ModeSplit:
    """Mode permutation plus a split point.

    ``perm[:d]`` become row modes of the matricization, ``perm[d:]`` the
    column modes, each flattened with the first listed mode varying fastest.
    """

    perm: tuple[int, ...]
    d: int

    def validate(self, order: int) -> None:
        _check_perm(self.perm, order)
        if not 1 <= self.d < order:
            raise ValueError(f"split point d={self.d} out of range [1, {order - 1}]")


def _owned(out: np.ndarray, src: np.ndarray) -> np.ndarray:
    return out.copy() if np.shares_memory(out, src) else out


def gen_unfold(x: np.ndarray, split: ModeSplit) -> np.ndarray:
    """Matricize ``x`` according to ``split``.

    The tensor is permuted by ``split.perm``; the first ``split.d`` permuted
    modes are flattened into rows, the remaining ones into columns.
    """
    x = np.asarray(x)
    split.validate(x.ndim)
    rows = prod(x.shape[a] for a in split.perm[: split.d])
    cols = prod(x.shape[a] for a in split.perm[split.d :])
    out = np.transpose(x, split.perm).reshape(rows, cols, order="F")
    return _owned(out, x)


def gen_fold(m: np.ndarray, split: ModeSplit, shape) -> np.ndarray:
    """Exact inverse of :func:`gen_unfold` for the same split and shape."""
    m = np.asarray(m)
    shape = tuple(int(s) for s in shape)
    split.validate(len(shape))
    if m.ndim != 2:
        raise ValueError(f"expected a matrix, got order {m.ndim}")
    permuted = tuple(shape[a] for a in split.perm)
    rows = prod(permuted[: split.d])
    cols = prod(permuted[split.d :])
    if m.shape != (rows, cols):
        raise ValueError(
            f"matrix shape {m.shape} does not match split {split} of shape {shape}; "
            f"expected {(rows, cols)}"
        )
    out = np.transpose(m.reshape(permuted, order="F"), np.argsort(split.perm))
    return _owned(out, m)


def _mode_split(i: int, order: int) -> ModeSplit:
    if not 0 <= i < order:
        raise ValueError(f"mode {i} out of range for order {order}")
    return ModeSplit((i, *(a for a in range(order) if a != i)), 1)


def mode_unfold(x: np.ndarray, i: int) -> np.ndarray:
    """Classical mode-``i`` unfolding: rows run over mode ``i``, columns over
    the remaining modes in ascending order, first one varying fastest."""
    x = np.asarray(x)
    return gen_unfold(x, _mode_split(i, x.ndim))


def mode_fold(m: np.ndarray, i: int, shape) -> np.ndarray:
    """Inverse of :func:`mode_unfold`."""
    return gen_fold(m, _mode_split(i, len(shape)), shape)


def permute(x: np.ndarray, perm) -> np.ndarray:
    """Reorder modes; returns a new array."""
    x = np.asarray(x)
    _check_perm(perm, x.ndim)
    return np.transpose(x, perm).copy()


def _check_same_shape(x: np.ndarray, y: np.ndarray) -> None:
    if x.shape != y.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {y.shape}")


def hadamard(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Elementwise product of two same-shape tensors."""
    x, y = np.asarray(x), np.asarray(y)
    _check_same_shape(x, y)
    return x * y


def axpy(a: float, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """``a * x + y`` for same-shape tensors."""
    x, y = np.asarray(x), np.asarray(y)
    _check_same_shape(x, y)
    return a * x + y


def frobenius_norm(x: np.ndarray) -> float:
    """Square root of the sum of squared entries."""
    return float(np.linalg.norm(np.asarray(x, dtype=float).ravel()))
