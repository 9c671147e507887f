"""Procedural test images with fixed seeds.

These stand in for photographs that cannot be redistributed: a band-limited
texture for the illumination study, a smooth blob for the small-phase checks,
and an H&E-like RGB patch for golden-file comparison.
"""

from __future__ import annotations

import numpy as np

from .core_types import ImageField


def _bandlimited_noise(rng: np.random.Generator, height: int, width: int,
                       low: float, high: float) -> np.ndarray:
    """White noise restricted to the annulus ``low <= r < high`` (cycles/pixel), zero mean, unit std."""
    noise = rng.standard_normal((height, width))
    v = np.fft.fftfreq(height)[:, None]
    u = np.fft.fftfreq(width)[None, :]
    r = np.sqrt(u * u + v * v)
    out = np.fft.ifft2(np.fft.fft2(noise) * ((r >= low) & (r < high))).real
    return (out - out.mean()) / out.std()


def textured_image(size: int = 256, seed: int = 7) -> ImageField:
    """Band-limited noise texture mapped into [0.1, 0.9]."""
    rng = np.random.default_rng(seed)
    tex = _bandlimited_noise(rng, size, size, 0.02, 0.25)
    tex = (tex - tex.min()) / (tex.max() - tex.min())
    return ImageField(0.1 + 0.8 * tex)


def smooth_blob(size: int = 64, sigma: float = 8.0, pedestal: float = 0.2) -> ImageField:
    """Centered Gaussian blob on a positive pedestal (no near-zero pixels)."""
    y, x = np.mgrid[0:size, 0:size].astype(np.float64)
    c = (size - 1) / 2.0
    blob = np.exp(-((x - c) ** 2 + (y - c) ** 2) / (2.0 * sigma * sigma))
    return ImageField(pedestal + (1.0 - pedestal) * blob)


def histology_patch(size: int = 96, seed: int = 2024) -> np.ndarray:
    """RGB float patch in [0, 1] loosely resembling an H&E stained tile.

    Pink stroma texture with darker purple round nuclei. Returns an
    ``(size, size, 3)`` array.
    """
    rng = np.random.default_rng(seed)
    stroma = 0.5 + 0.5 * np.tanh(_bandlimited_noise(rng, size, size, 0.01, 0.12))
    nuclei = np.zeros((size, size))
    y, x = np.mgrid[0:size, 0:size]
    for _ in range(14):
        cy, cx = rng.uniform(0, size, 2)
        rad = rng.uniform(2.5, 5.5)
        dy = np.minimum(np.abs(y - cy), size - np.abs(y - cy))
        dx = np.minimum(np.abs(x - cx), size - np.abs(x - cx))
        nuclei = np.maximum(nuclei, np.exp(-(dx * dx + dy * dy) / (2 * rad * rad)))
    pink = np.array([0.93, 0.62, 0.78])
    purple = np.array([0.38, 0.22, 0.55])
    base = pink * (0.85 + 0.15 * stroma[..., None])
    rgb = base * (1 - nuclei[..., None]) + purple * nuclei[..., None]
    rgb += 0.02 * rng.standard_normal(rgb.shape)
    return np.clip(rgb, 0.0, 1.0)
