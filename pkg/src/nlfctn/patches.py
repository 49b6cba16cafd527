"""Overlapped patch grids, Euclidean block matching, similar-patch groups,
and mean aggregation back into the image.

Patches window the two leading (spatial) modes and span every trailing mode
in full. A group stacks its member patches along a new trailing mode, so the
group tensor has one order more than the image.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "PatchGrid",
    "KeyLattice",
    "NssGroup",
    "build_patch_grid",
    "build_key_lattice",
    "extract_patch",
    "patch_stack",
    "block_match",
    "form_group",
    "aggregate",
]


def _check_spatial(shape, patch: int) -> None:
    if len(shape) < 2:
        raise ValueError(f"image must have order >= 2, got shape {tuple(shape)}")
    if patch < 1:
        raise ValueError(f"patch size must be >= 1, got {patch}")
    if patch > min(shape[0], shape[1]):
        raise ValueError(
            f"patch size {patch} exceeds spatial extent {shape[0]}x{shape[1]}"
        )


def _axis_origins(extent: int, patch: int, stride: int) -> list[int]:
    origins = list(range(0, extent - patch + 1, stride))
    if origins[-1] != extent - patch:
        # flush origin keeps the last rows/columns covered
        origins.append(extent - patch)
    return origins


@dataclass(frozen=True)
class PatchGrid:
    """Sliding-window patch origins over the two spatial modes.

    The position of an origin in ``origins`` (row-major) is the patch linear
    index used to break distance ties in block matching.
    """

    image_shape: tuple
    patch: int
    overlap: int
    origins: tuple

    @property
    def count(self) -> int:
        return len(self.origins)


@dataclass(frozen=True)
class KeyLattice:
    """Regular lattice of key-patch origins with stride ``interval``."""

    image_shape: tuple
    patch: int
    interval: int
    origins: tuple

    @property
    def count(self) -> int:
        return len(self.origins)


def build_patch_grid(shape, patch: int, overlap: int) -> PatchGrid:
    """All patch origins with stride ``patch - overlap``, plus flush origins
    at the far borders when the stride does not divide evenly."""
    _check_spatial(shape, patch)
    if not 1 <= overlap < patch:
        raise ValueError(f"overlap {overlap} out of range [1, {patch - 1}]")
    stride = patch - overlap
    rows = _axis_origins(int(shape[0]), patch, stride)
    cols = _axis_origins(int(shape[1]), patch, stride)
    origins = tuple((r, c) for r in rows for c in cols)
    return PatchGrid(tuple(int(s) for s in shape), patch, overlap, origins)


def build_key_lattice(shape, patch: int, interval: int) -> KeyLattice:
    """Key origins with stride ``interval``, flush-clamped like the grid."""
    _check_spatial(shape, patch)
    if interval < 1:
        raise ValueError(f"interval must be >= 1, got {interval}")
    for extent in shape[:2]:
        if extent > patch and interval > extent - patch:
            raise ValueError(
                f"interval {interval} out of range [1, {extent - patch}] "
                f"for extent {extent}"
            )
    rows = _axis_origins(int(shape[0]), patch, interval)
    cols = _axis_origins(int(shape[1]), patch, interval)
    origins = tuple((r, c) for r in rows for c in cols)
    return KeyLattice(tuple(int(s) for s in shape), patch, interval, origins)


def extract_patch(image: np.ndarray, origin, patch: int) -> np.ndarray:
    """View of the patch cube at ``origin``: patch x patch spatially, full
    extent along every trailing mode."""
    r, c = int(origin[0]), int(origin[1])
    if r < 0 or c < 0 or r + patch > image.shape[0] or c + patch > image.shape[1]:
        raise ValueError(
            f"origin {(r, c)} out of bounds for patch {patch} on shape {image.shape}"
        )
    return image[r : r + patch, c : c + patch, ...]


def patch_stack(image: np.ndarray, grid: PatchGrid) -> np.ndarray:
    """All grid patches flattened to rows, in grid order."""
    image = np.asarray(image, dtype=float)
    return np.stack([extract_patch(image, o, grid.patch).ravel() for o in grid.origins])


def block_match(image: np.ndarray, grid: PatchGrid, key_origin, s: int, stack=None):
    """Origins of the ``s`` patches most similar to the key patch.

    Similarity is Euclidean distance over the full patch cube. Ties break
    toward the smaller patch linear index, and the key patch itself is always
    ranked first. ``stack`` may carry a precomputed :func:`patch_stack` of
    ``image`` to amortize repeated calls.
    """
    if s < 1:
        raise ValueError(f"group size must be >= 1, got {s}")
    if s > grid.count:
        raise ValueError(f"group size {s} exceeds patch count {grid.count}")
    image = np.asarray(image, dtype=float)
    if stack is None:
        stack = patch_stack(image, grid)
    key_origin = (int(key_origin[0]), int(key_origin[1]))
    key = extract_patch(image, key_origin, grid.patch).ravel()
    d2 = ((stack - key) ** 2).sum(axis=1)
    ranking = np.lexsort((np.arange(grid.count), d2))
    try:
        key_index = grid.origins.index(key_origin)
    except ValueError:
        key_index = None
    members = [key_origin]
    for t in ranking:
        if len(members) == s:
            break
        if t == key_index:
            continue
        members.append(grid.origins[t])
    return tuple(members)


@dataclass(frozen=True)
class NssGroup:
    """A stack of similar patches and the matching observation mask.

    ``values`` has shape (patch, patch, trailing modes..., members); the key
    patch is member 0. ``key_index`` records the key's position in the
    lattice that produced the group, when applicable.
    """

    origins: tuple
    values: np.ndarray
    mask: np.ndarray
    key_index: int | None = None

    @property
    def size(self) -> int:
        return self.values.shape[-1]


def form_group(image: np.ndarray, mask: np.ndarray, origins, patch: int,
               key_index: int | None = None) -> NssGroup:
    """Stack the member patches of ``image`` and ``mask`` along a new
    trailing mode."""
    image = np.asarray(image, dtype=float)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != image.shape:
        raise ValueError(f"mask shape {mask.shape} != image shape {image.shape}")
    origins = tuple((int(r), int(c)) for r, c in origins)
    if not origins:
        raise ValueError("group needs at least one member origin")
    values = np.stack([extract_patch(image, o, patch) for o in origins], axis=-1)
    gmask = np.stack([extract_patch(mask, o, patch) for o in origins], axis=-1)
    return NssGroup(origins, values, gmask, key_index)


def aggregate(groups, shape, fallback: np.ndarray) -> np.ndarray:
    """Pixelwise mean of every member patch covering each position.

    ``groups`` holds ``(values, origins)`` pairs as produced by completing
    :class:`NssGroup` tensors. Positions no member covers take the fallback
    value. Accumulation order is canonicalized internally, so the result does
    not depend on the order groups are supplied in.
    """
    shape = tuple(int(s) for s in shape)
    fallback = np.asarray(fallback, dtype=float)
    if fallback.shape != shape:
        raise ValueError(f"fallback shape {fallback.shape} != image shape {shape}")

    def _key(entry):
        values, origins = entry
        return (tuple((int(r), int(c)) for r, c in origins), np.asarray(values).tobytes())

    acc = np.zeros(shape)
    cnt = np.zeros(shape)
    for values, origins in sorted(groups, key=_key):
        values = np.asarray(values, dtype=float)
        p = values.shape[0]
        expected = (p, p) + shape[2:] + (len(tuple(origins)),)
        if values.shape != expected:
            raise ValueError(
                f"group shape {values.shape} inconsistent with image shape {shape} "
                f"and {len(tuple(origins))} members; expected {expected}"
            )
        for m, (r, c) in enumerate(origins):
            if r < 0 or c < 0 or r + p > shape[0] or c + p > shape[1]:
                raise ValueError(f"member origin {(r, c)} out of bounds for {shape}")
            acc[r : r + p, c : c + p, ...] += values[..., m]
            cnt[r : r + p, c : c + p, ...] += 1.0
    out = fallback.copy()
    covered = cnt > 0
    out[covered] = acc[covered] / cnt[covered]
    return out
