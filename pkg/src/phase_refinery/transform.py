"""Phase Stretch Transform and its small-phase (equalized Laplacian) reference.

The pipeline is::

    image -> FFT -> * gain * exp(-i*phi) -> IFFT -> arg(.) -> normalize

Only the "analog" feature map is produced; there is no thresholding or
morphology stage.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core_types import (
    AmplitudeFilter,
    ComplexField,
    DimensionMismatchError,
    ImageField,
    InvalidParameterError,
    KernelFamily,
    KernelParams,
    Normalization,
    PhaseKernel,
    PhaseMap,
    RefineryConfig,
    RefineryError,
    SpectralField,
)
from .spectral import (
    build_frequency_grid,
    build_kernel,
    build_lowpass,
    cached_filters,
    forward_spectrum,
    inverse_spectrum,
)

__all__ = [
    "SmallPhaseResult",
    "apply_spectral_filters",
    "detect_phase",
    "normalize_output",
    "pst_phase",
    "pst",
    "division_guard",
    "small_phase_reference",
    "laplacian_reference",
    "small_phase_convergence",
]

# Phase spans narrower than this are treated as a constant map by min-max
# normalization, so FFT round-off on flat inputs does not get stretched to [0, 1].
DEGENERATE_PHASE_SPAN = 1e-12

# Relative threshold for the |E| division guard.
GUARD_RELATIVE = 1e-8


def _require_same_shape(*grids):
    shapes = {g.shape for g in grids}
    if len(shapes) != 1:
        raise DimensionMismatchError(f"shape mismatch: {sorted(shapes)}")


def apply_spectral_filters(
    spectrum: SpectralField, kernel: PhaseKernel, lpf: AmplitudeFilter
) -> SpectralField:
    _require_same_shape(spectrum, kernel, lpf)
    phi = kernel.phi
    transfer = lpf.gain * (np.cos(phi) - 1j * np.sin(phi))
    return SpectralField(spectrum.values * transfer)


def detect_phase(field: ComplexField) -> PhaseMap:
    """Four-quadrant argument of the field; exact zeros map to phase 0."""
    re = field.values.real
    # Adding +0.0 turns -0.0 into +0.0 so a negative real axis gives +pi, never -pi.
    im = field.values.imag + 0.0
    psi = np.arctan2(im, re)
    psi[(re == 0.0) & (im == 0.0)] = 0.0
    return PhaseMap(psi)


def normalize_output(psi: PhaseMap, policy: Normalization = Normalization.MINMAX_PER_IMAGE,
                     bit_depth: int | None = None) -> ImageField:
    """Map a phase map onto [0, 1].

    ``bit_depth`` is accepted for interface symmetry only; quantization
    happens when the image is written, not here.
    """
    if bit_depth is not None and bit_depth not in (8, 16):
        raise InvalidParameterError(f"bit_depth must be 8 or 16, got {bit_depth!r}")
    values = psi.psi
    if policy is Normalization.FIXED_PHASE_RANGE:
        return ImageField((values + math.pi) / (2.0 * math.pi))
    if policy is not Normalization.MINMAX_PER_IMAGE:
        raise InvalidParameterError(f"unknown normalization policy {policy!r}")
    lo, hi = float(values.min()), float(values.max())
    if hi - lo <= DEGENERATE_PHASE_SPAN:
        return ImageField(np.zeros_like(values))
    return ImageField((values - lo) / (hi - lo))


def pst_phase(image: ImageField, params: KernelParams) -> PhaseMap:
    """Detected phase of the propagated field, before normalization."""
    kernel, lpf = cached_filters(image.height, image.width, params)
    spectrum = apply_spectral_filters(forward_spectrum(image), kernel, lpf)
    return detect_phase(inverse_spectrum(spectrum))


def pst(image: ImageField, config: RefineryConfig) -> ImageField:
    """Refine one single-channel image into a normalized analog feature map."""
    return normalize_output(pst_phase(image, config.kernel), config.normalization,
                            config.output_bit_depth)


def division_guard(field: np.ndarray) -> float:
    """Magnitude below which ``|E|`` is treated as zero when dividing by it."""
    return GUARD_RELATIVE * float(np.abs(field).max())


def _guarded_ratio(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    eta = division_guard(den)
    mask = np.abs(den) > eta
    out = np.zeros_like(num, dtype=np.float64)
    np.divide(num, den, out=out, where=mask)
    return out


def _first_order_terms(image: ImageField, kernel: PhaseKernel, lpf: AmplitudeFilter):
    """Return ``(G, E)``: the kernel-weighted and plain low-passed fields."""
    _require_same_shape(image, kernel, lpf)
    filtered = forward_spectrum(image).values * lpf.gain
    g_complex = np.fft.ifft2(filtered * kernel.phi)
    e_complex = np.fft.ifft2(filtered)
    scale = max(1.0, float(np.abs(e_complex).max()), float(np.abs(g_complex).max()))
    residue = max(float(np.abs(g_complex.imag).max()), float(np.abs(e_complex.imag).max()))
    if residue > 1e-9 * scale:
        raise RefineryError(
            f"imaginary residue {residue:.3e} too large; kernel or filter is not symmetric"
        )
    return g_complex.real, e_complex.real


def small_phase_reference(image: ImageField, kernel: PhaseKernel, lpf: AmplitudeFilter) -> PhaseMap:
    """First-order prediction ``-G/E`` of the detected phase.

    To first order ``exp(-i*phi) ~ 1 - i*phi`` so ``Im{E_out} ~ -G`` with
    ``G = IFFT(FFT(E)*gain*phi)`` while ``Re{E_out} ~ E``. Pixels where
    ``|E|`` is below :func:`division_guard` are set to 0.

    The result is not clipped to [-pi, pi]; with a kernel of realistic
    strength it stays well inside that range. A map outside it raises.
    """
    g, e = _first_order_terms(image, kernel, lpf)
    return PhaseMap(-_guarded_ratio(g, e))


def laplacian_reference(image: ImageField) -> ImageField:
    """Periodic 5-point Laplacian divided by the image, 0 where ``|E|`` is guarded."""
    e = image.values
    lap = (
        (np.roll(e, 1, axis=0) - e)
        + (np.roll(e, -1, axis=0) - e)
        + (np.roll(e, 1, axis=1) - e)
        + (np.roll(e, -1, axis=1) - e)
    )
    return ImageField(_guarded_ratio(lap, e))


@dataclass(frozen=True)
class SmallPhaseResult:
    epsilon: float
    psi_exact: PhaseMap
    psi_approx: PhaseMap
    max_abs_error: float

    def __post_init__(self):
        if self.psi_exact.shape != self.psi_approx.shape:
            raise DimensionMismatchError("psi_exact and psi_approx differ in shape")
        if not (math.isfinite(self.max_abs_error) and self.max_abs_error >= 0.0):
            raise InvalidParameterError("max_abs_error must be finite and >= 0")


def small_phase_convergence(
    image: ImageField,
    kernel_family: KernelFamily = KernelFamily.PST_ARCTAN_LOG,
    epsilons: Sequence[float] = (1e-1, 5e-2, 2.5e-2),
    params: KernelParams | None = None,
) -> list[SmallPhaseResult]:
    """Compare the exact phase under a kernel scaled by ``eps`` against ``eps`` times
    the first-order reference.

    ``max_abs_error`` is ``max |psi_exact(eps) - eps*psi_ref| / eps`` over
    unguarded pixels. ``params`` supplies the kernel parameters (library defaults
    when omitted); its family is overridden by ``kernel_family``.
    """
    eps_list = [float(e) for e in epsilons]
    if not eps_list:
        raise InvalidParameterError("epsilons must be non-empty")
    if any(not math.isfinite(e) or e <= 0.0 for e in eps_list):
        raise InvalidParameterError("epsilons must be finite and > 0")
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise InvalidParameterError("epsilons must be strictly decreasing")

    base = params or KernelParams()
    params = KernelParams(S=base.S, W=base.W, sigma_lpf=base.sigma_lpf, kernel_family=kernel_family)
    grid = build_frequency_grid(image.height, image.width)
    kernel = build_kernel(grid, params)
    lpf = build_lowpass(grid, params.sigma_lpf)

    g, e = _first_order_terms(image, kernel, lpf)
    valid = np.abs(e) > division_guard(e)
    reference = -_guarded_ratio(g, e)
    filtered = forward_spectrum(image).values * lpf.gain

    results = []
    for eps in eps_list:
        field = ComplexField(np.fft.ifft2(filtered * np.exp(-1j * eps * kernel.phi)))
        psi_exact = detect_phase(field)
        approx = PhaseMap(eps * reference)
        diff = np.abs(psi_exact.psi - approx.psi)[valid]
        err = float(diff.max()) / eps if diff.size else 0.0
        results.append(SmallPhaseResult(eps, psi_exact, approx, err))
    return results
