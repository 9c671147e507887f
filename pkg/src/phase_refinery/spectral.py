"""Frequency grids, spectral kernels and the forward/inverse 2-D transforms.

Layout convention: spectra are kept unshifted (DC at index ``[0, 0]``) and
frequencies are in cycles/pixel as produced by :func:`numpy.fft.fftfreq`.
The forward transform is unnormalized; the inverse carries ``1/(H*W)``.
"""

from __future__ import annotations

import functools
import struct

import numpy as np

from .core_types import (
    AmplitudeFilter,
    ComplexField,
    FrequencyGrid,
    ImageField,
    InvalidFieldError,
    InvalidParameterError,
    KernelFamily,
    KernelParams,
    PhaseKernel,
    SpectralField,
)

__all__ = [
    "build_frequency_grid",
    "forward_spectrum",
    "inverse_spectrum",
    "pst_profile",
    "build_pst_kernel",
    "build_quadratic_kernel",
    "build_kernel",
    "build_lowpass",
    "cached_filters",
    "export_array",
    "read_exported_array",
]


def build_frequency_grid(height: int, width: int) -> FrequencyGrid:
    if int(height) != height or int(width) != width:
        raise InvalidFieldError("grid dimensions must be integers")
    if height < 2 or width < 2:
        raise InvalidFieldError(f"grid must be at least 2x2, got {height}x{width}")
    fu = np.fft.fftfreq(int(width))
    fv = np.fft.fftfreq(int(height))
    v, u = np.meshgrid(fv, fu, indexing="ij")
    return FrequencyGrid(u=u, v=v)


def forward_spectrum(image: ImageField) -> SpectralField:
    """Unnormalized 2-D DFT; the DC bin is the sum of all pixels."""
    return SpectralField(np.fft.fft2(image.values))


def inverse_spectrum(spectrum: SpectralField) -> ComplexField:
    return ComplexField(np.fft.ifft2(spectrum.values))


def pst_profile(rho):
    """Integral of arctan: ``rho*arctan(rho) - ln(1 + rho**2)/2``.

    Zero at the origin and increasing for ``rho >= 0``.
    """
    rho = np.asarray(rho, dtype=np.float64)
    return rho * np.arctan(rho) - 0.5 * np.log1p(rho * rho)


def _check_positive(name, value):
    value = float(value)
    if not np.isfinite(value) or value <= 0.0:
        raise InvalidParameterError(f"{name} must be finite and > 0, got {value!r}")
    return value


def build_pst_kernel(grid: FrequencyGrid, S: float, W: float) -> PhaseKernel:
    """Radial arctan-log phase profile scaled so the largest phase on the grid is ``S``."""
    S = _check_positive("S", S)
    W = _check_positive("W", W)
    profile = pst_profile(W * grid.r)
    phi = S * profile / pst_profile(W * grid.r_max)
    return PhaseKernel(phi)


def build_quadratic_kernel(grid: FrequencyGrid, strength: float) -> PhaseKernel:
    strength = _check_positive("strength", strength)
    rel = grid.r / grid.r_max
    return PhaseKernel(strength * rel * rel)


def build_kernel(grid: FrequencyGrid, params: KernelParams) -> PhaseKernel:
    if params.kernel_family is KernelFamily.PST_ARCTAN_LOG:
        return build_pst_kernel(grid, params.S, params.W)
    # W has no role in the quadratic profile.
    return build_quadratic_kernel(grid, params.S)


def build_lowpass(grid: FrequencyGrid, sigma_lpf: float) -> AmplitudeFilter:
    """Gaussian gain ``exp(-r**2 / (2*sigma**2))``.

    Far-tail gains that underflow are clamped to the smallest positive
    double so the filter stays strictly positive.
    """
    sigma = _check_positive("sigma_lpf", sigma_lpf)
    gain = np.exp(-(grid.r * grid.r) / (2.0 * sigma * sigma))
    return AmplitudeFilter(np.maximum(gain, np.finfo(np.float64).tiny))


@functools.lru_cache(maxsize=64)
def cached_filters(height: int, width: int, params: KernelParams) -> tuple[PhaseKernel, AmplitudeFilter]:
    """Kernel and low-pass for one image shape; results are immutable so sharing is safe."""
    grid = build_frequency_grid(height, width)
    return build_kernel(grid, params), build_lowpass(grid, params.sigma_lpf)


_HEADER = struct.Struct("<QQ")


def export_array(values, path) -> bytes:
    """Write a 2-D array as ``<u8 height, <u8 width`` followed by row-major ``<f8`` data.

    Returns the bytes written.
    """
    arr = np.asarray(getattr(values, "values", values), dtype="<f8")
    if arr.ndim != 2:
        raise InvalidFieldError(f"export needs a 2-D array, got shape {arr.shape}")
    payload = _HEADER.pack(*arr.shape) + np.ascontiguousarray(arr).tobytes(order="C")
    if path is not None:
        with open(path, "wb") as fh:
            fh.write(payload)
    return payload


def read_exported_array(source) -> np.ndarray:
    """Inverse of :func:`export_array`; accepts a path or the raw bytes."""
    if isinstance(source, (bytes, bytearray)):
        data = bytes(source)
    else:
        with open(source, "rb") as fh:
            data = fh.read()
    if len(data) < _HEADER.size:
        raise InvalidFieldError("truncated array header")
    height, width = _HEADER.unpack_from(data)
    expected = _HEADER.size + 8 * height * width
    if len(data) != expected:
        raise InvalidFieldError(f"expected {expected} bytes for {height}x{width}, got {len(data)}")
    return np.frombuffer(data, dtype="<f8", offset=_HEADER.size).reshape(height, width).astype(np.float64)
