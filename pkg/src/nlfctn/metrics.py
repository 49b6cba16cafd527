"""Reconstruction quality metrics over band slices.

A band is one 2-D slice over the two leading spatial modes: order-3 tensors
have one band per index of mode 2, order-4 tensors one band per index pair
of the trailing modes. PSNR and SSIM average per-band values; SAM compares
spectral fibers along axis 2 and reports the mean angle in degrees.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate

__all__ = [
    "SSIM_WINDOW",
    "SSIM_SIGMA",
    "SSIM_K1",
    "SSIM_K2",
    "DYNAMIC_RANGE",
    "SPECTRAL_AXIS",
    "MetricsReport",
    "psnr",
    "ssim",
    "sam",
    "evaluate",
]

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03
DYNAMIC_RANGE = 1.0
SPECTRAL_AXIS = 2

METRIC_CONSTANTS = {
    "ssim_window": SSIM_WINDOW,
    "ssim_sigma": SSIM_SIGMA,
    "ssim_k1": SSIM_K1,
    "ssim_k2": SSIM_K2,
    "dynamic_range": DYNAMIC_RANGE,
    "spectral_axis": SPECTRAL_AXIS,
}


def _check_pair(x, ref, min_order=2):
    x = np.asarray(x, dtype=float)
    ref = np.asarray(ref, dtype=float)
    if x.shape != ref.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {ref.shape}")
    if x.ndim < min_order:
        raise ValueError(f"tensor order {x.ndim} < required {min_order}")
    return x, ref


def _bands(x):
    for ix in np.ndindex(x.shape[2:]):
        yield x[(slice(None), slice(None)) + ix]


def _psnr_band(a, b):
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(DYNAMIC_RANGE**2 / mse)


def psnr(x, ref) -> float:
    """Mean over bands of 10*log10(peak^2 / MSE); +inf when identical."""
    x, ref = _check_pair(x, ref)
    vals = [_psnr_band(a, b) for a, b in zip(_bands(x), _bands(ref))]
    return float(np.mean(vals))


def _gaussian_kernel():
    half = SSIM_WINDOW // 2
    t = np.arange(SSIM_WINDOW, dtype=float) - half
    g = np.exp(-(t**2) / (2.0 * SSIM_SIGMA**2))
    k = np.outer(g, g)
    return k / k.sum()


def _ssim_band(a, b, kernel):
    if min(a.shape) < SSIM_WINDOW:
        raise ValueError(
            f"spatial extent {a.shape} smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} window"
        )
    pad = SSIM_WINDOW // 2

    def win(m):
        # interior of the filtered map equals a 'valid' windowed mean
        return correlate(m, kernel, mode="reflect")[pad:-pad, pad:-pad]

    mu_a = win(a)
    mu_b = win(b)
    saa = win(a * a) - mu_a**2
    sbb = win(b * b) - mu_b**2
    sab = win(a * b) - mu_a * mu_b
    c1 = (SSIM_K1 * DYNAMIC_RANGE) ** 2
    c2 = (SSIM_K2 * DYNAMIC_RANGE) ** 2
    smap = ((2 * mu_a * mu_b + c1) * (2 * sab + c2)) / (
        (mu_a**2 + mu_b**2 + c1) * (saa + sbb + c2)
    )
    return float(smap.mean())


def ssim(x, ref) -> float:
    """Mean over bands of the Gaussian-windowed structural similarity."""
    x, ref = _check_pair(x, ref)
    kernel = _gaussian_kernel()
    vals = [_ssim_band(a, b, kernel) for a, b in zip(_bands(x), _bands(ref))]
    return float(np.mean(vals))


def sam(x, ref) -> float:
    """Mean spectral angle in degrees between fibers along axis 2.

    Positions where either fiber has zero norm are skipped; 0.0 when no
    position has two nonzero fibers.
    """
    x, ref = _check_pair(x, ref, min_order=3)
    nb = x.shape[SPECTRAL_AXIS]
    xm = np.moveaxis(x, SPECTRAL_AXIS, -1).reshape(-1, nb)
    rm = np.moveaxis(ref, SPECTRAL_AXIS, -1).reshape(-1, nb)
    nx = np.linalg.norm(xm, axis=1)
    nr = np.linalg.norm(rm, axis=1)
    valid = (nx > 0) & (nr > 0)
    if not valid.any():
        return 0.0
    u = xm[valid] / nx[valid, None]
    v = rm[valid] / nr[valid, None]
    # arccos of the normalized dot product, computed through atan2 so the
    # angle is exact (not just close) for identical and orthogonal fibers
    angles = 2.0 * np.arctan2(
        np.linalg.norm(u - v, axis=1), np.linalg.norm(u + v, axis=1)
    )
    return float(np.degrees(angles).mean())


@dataclass
class MetricsReport:
    """Scalar metrics plus per-band breakdowns for one tensor pair."""

    psnr: float
    ssim: float
    sam: float
    psnr_bands: list
    ssim_bands: list

    def to_dict(self) -> dict:
        return {
            "constants": dict(METRIC_CONSTANTS),
            "psnr": self.psnr,
            "ssim": self.ssim,
            "sam": self.sam,
            "psnr_bands": list(self.psnr_bands),
            "ssim_bands": list(self.ssim_bands),
        }


def evaluate(x, ref) -> MetricsReport:
    """All three metrics for a reconstruction against its reference."""
    x, ref = _check_pair(x, ref, min_order=3)
    kernel = _gaussian_kernel()
    psnr_bands = [_psnr_band(a, b) for a, b in zip(_bands(x), _bands(ref))]
    ssim_bands = [_ssim_band(a, b, kernel) for a, b in zip(_bands(x), _bands(ref))]
    return MetricsReport(
        psnr=float(np.mean(psnr_bands)),
        ssim=float(np.mean(ssim_bands)),
        sam=sam(x, ref),
        psnr_bands=psnr_bands,
        ssim_bands=ssim_bands,
    )
