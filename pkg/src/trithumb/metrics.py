"""Image quality metrics: PSNR, SSIM, and the Gaussian-blur control.

PSNR is capped at 99.0 dB so identical images stay reportable.  SSIM
uses the standard 11x11 Gaussian window (sigma 1.5), K1=0.01, K2=0.03,
L=255, evaluated at every fully valid window position and averaged over
positions and the three channels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import correlate1d

from .codec import mse
from .raster import ensure_image

PSNR_CAP = 99.0
_WINDOW = 11
_SIGMA = 1.5


class MetricError(ValueError):
    pass


@dataclass
class QualityReport:
    psnr: float
    ssim: float
    bytes: int = 0
    semantic: dict = field(default_factory=dict)


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    """10*log10(255^2 / mse), capped at 99.0 dB for identical images."""
    err = mse(a, b)
    if err == 0:
        return PSNR_CAP
    return min(PSNR_CAP, 10.0 * math.log10(255.0 ** 2 / err))


def _gaussian_kernel(sigma: float, half: int) -> np.ndarray:
    x = np.arange(-half, half + 1, dtype=np.float64)
    k = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return k / k.sum()


def ssim(a: np.ndarray, b: np.ndarray) -> float:
    a = ensure_image(a)
    b = ensure_image(b)
    if a.shape != b.shape:
        raise MetricError(f"shape mismatch {a.shape} vs {b.shape}")
    h, w = a.shape[:2]
    if h < _WINDOW or w < _WINDOW:
        raise MetricError(f"image {h}x{w} smaller than the {_WINDOW}-pixel window")
    half = _WINDOW // 2
    kern = _gaussian_kernel(_SIGMA, half)
    c1 = (0.01 * 255.0) ** 2
    c2 = (0.03 * 255.0) ** 2

    def win_mean(img: np.ndarray) -> np.ndarray:
        # separable Gaussian over fully valid positions only
        t = correlate1d(img, kern, axis=0, mode="constant")
        t = correlate1d(t, kern, axis=1, mode="constant")
        return t[half:-half, half:-half]

    total = 0.0
    for ch in range(3):
        x = a[:, :, ch].astype(np.float64)
        y = b[:, :, ch].astype(np.float64)
        mx = win_mean(x)
        my = win_mean(y)
        vx = win_mean(x * x) - mx * mx
        vy = win_mean(y * y) - my * my
        cxy = win_mean(x * y) - mx * my
        s = ((2 * mx * my + c1) * (2 * cxy + c2)
             / ((mx * mx + my * my + c1) * (vx + vy + c2)))
        total += float(s.mean())
    return total / 3.0


def gaussian_blur(image: np.ndarray, radius: float, passes: int = 1) -> np.ndarray:
    """Separable Gaussian with sigma = radius, kernel half-width ceil(3*sigma),
    clamp-to-edge borders, re-quantized to uint8 after every pass."""
    image = ensure_image(image)
    if radius < 1:
        raise MetricError("radius must be >= 1")
    if passes < 1:
        raise MetricError("passes must be >= 1")
    half = math.ceil(3.0 * radius)
    kern = _gaussian_kernel(float(radius), half)
    out = image
    for _ in range(passes):
        t = out.astype(np.float64)
        t = correlate1d(t, kern, axis=0, mode="nearest")
        t = correlate1d(t, kern, axis=1, mode="nearest")
        out = np.clip(np.floor(t + 0.5), 0, 255).astype(np.uint8)
    return out
