"""Synthetic test volumes with controlled structure.

Used by the test suite and the experiment scripts: tiled textures carry
strong patch self-similarity, random-factor ground truths have exact low
FCTN rank.
"""

from __future__ import annotations

import numpy as np

from .fctn import FctnFactors, FctnRank, contract_all

__all__ = ["tiled_texture_volume", "fctn_ground_truth"]


def tiled_texture_volume(height: int, width: int, bands: int, tile: int = 7,
                         seed: int = 0) -> np.ndarray:
    """Periodic random texture with smooth per-band gain and offset ramps.

    The spatial pattern repeats every ``tile`` pixels in both directions, so
    patches sampled at multiples of the period are identical. Band ``b`` is
    an affine map of the pattern with weights ramping linearly across bands.
    Values lie in [0, 1].
    """
    if height < tile or width < tile:
        raise ValueError(f"extent {height}x{width} smaller than tile {tile}")
    if bands < 1:
        raise ValueError("bands must be >= 1")
    rng = np.random.default_rng(seed)
    base = rng.random((tile, tile))
    reps = (-(-height // tile), -(-width // tile))
    plane = np.tile(base, reps)[:height, :width]
    out = np.empty((height, width, bands))
    for b in range(bands):
        ramp = b / max(bands - 1, 1)
        gain = 0.5 + 0.5 * ramp
        offset = 0.8 * (1.0 - ramp)
        out[..., b] = (1.0 - gain) * offset + gain * plane
    return out


def fctn_ground_truth(dims, rank: FctnRank, seed: int = 0) -> np.ndarray:
    """Dense tensor contracted from standard normal random factors, so its
    FCTN rank is exactly the given table.

    Zero-mean factors avoid the dominant constant component that heavily
    skews all-positive products and slows alternating solvers on recovery
    studies.
    """
    rng = np.random.default_rng(seed)
    factors = FctnFactors(
        [rng.standard_normal(rank.factor_shape(k, dims)) for k in range(rank.order)]
    )
    return contract_all(factors)
