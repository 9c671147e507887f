"""Domain types shared across the refinery.

Every grid type wraps a read-only float64/complex128 numpy array and checks
its invariants at construction. Instances are immutable and can be shared
between threads.
"""

from __future__ import annotations

import enum
import hashlib
import math
from dataclasses import dataclass, field

import numpy as np


class RefineryError(ValueError):
    """Base class for all validation errors raised by this package."""


class InvalidFieldError(RefineryError):
    """A grid has bad dimensions or non-finite values."""


class InvalidParameterError(RefineryError):
    """A scalar parameter is out of its allowed range."""


class DimensionMismatchError(RefineryError):
    """Two grids that must share a shape do not."""


class ConfigFormatError(RefineryError):
    """The on-disk config text could not be parsed."""


class KernelFamily(enum.Enum):
    PST_ARCTAN_LOG = "PST_ARCTAN_LOG"
    QUADRATIC = "QUADRATIC"


class ColorPolicy(enum.Enum):
    LUMA = "LUMA"
    PER_CHANNEL = "PER_CHANNEL"


class Normalization(enum.Enum):
    MINMAX_PER_IMAGE = "MINMAX_PER_IMAGE"
    FIXED_PHASE_RANGE = "FIXED_PHASE_RANGE"


def _frozen(values, dtype, name: str, min_size: int = 2) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    if arr.ndim != 2:
        raise InvalidFieldError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < min_size or arr.shape[1] < min_size:
        raise InvalidFieldError(f"{name} must be at least {min_size}x{min_size}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidFieldError(f"{name} contains non-finite values")
    arr.flags.writeable = False
    return arr


class _Grid:
    values: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True, eq=False)
class ImageField(_Grid):
    """Real intensity grid, nominally in [0, 1]."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values, np.float64, "ImageField"))


@dataclass(frozen=True, eq=False)
class ComplexField(_Grid):
    """Complex field in the spatial domain."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values, np.complex128, "ComplexField"))


@dataclass(frozen=True, eq=False)
class SpectralField(_Grid):
    """Complex spectrum in unshifted FFT layout: bin (0, 0) is DC."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values, np.complex128, "SpectralField"))


@dataclass(frozen=True, eq=False)
class FrequencyGrid:
    """Normalized spatial frequencies (cycles/pixel) in unshifted FFT layout.

    ``u`` varies along columns (horizontal), ``v`` along rows (vertical);
    both are full ``(height, width)`` arrays.
    """

    u: np.ndarray
    v: np.ndarray
    r: np.ndarray = field(init=False)

    def __post_init__(self):
        u = _frozen(self.u, np.float64, "FrequencyGrid.u")
        v = _frozen(self.v, np.float64, "FrequencyGrid.v")
        if u.shape != v.shape:
            raise DimensionMismatchError(f"u {u.shape} and v {v.shape} differ")
        if np.any(np.abs(u) > 0.5) or np.any(np.abs(v) > 0.5):
            raise InvalidFieldError("normalized frequencies must lie in [-0.5, 0.5]")
        r = np.sqrt(u * u + v * v)
        r.flags.writeable = False
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "r", r)

    @property
    def shape(self) -> tuple[int, int]:
        return self.r.shape

    @property
    def r_max(self) -> float:
        return float(self.r.max())


@dataclass(frozen=True, eq=False)
class PhaseKernel(_Grid):
    """Spectral phase in radians per frequency bin; applied as exp(-i*phi)."""

    values: np.ndarray

    def __post_init__(self):
        arr = _frozen(self.values, np.float64, "PhaseKernel")
        if arr[0, 0] != 0.0:
            raise InvalidFieldError("PhaseKernel must vanish at DC")
        object.__setattr__(self, "values", arr)

    @property
    def phi(self) -> np.ndarray:
        return self.values


@dataclass(frozen=True, eq=False)
class AmplitudeFilter(_Grid):
    """Real spectral gain in (0, 1] with unit gain at DC."""

    values: np.ndarray

    def __post_init__(self):
        arr = _frozen(self.values, np.float64, "AmplitudeFilter")
        if arr[0, 0] != 1.0:
            raise InvalidFieldError("AmplitudeFilter must have unit gain at DC")
        if np.any(arr <= 0.0) or np.any(arr > 1.0):
            raise InvalidFieldError("AmplitudeFilter gains must lie in (0, 1]")
        object.__setattr__(self, "values", arr)

    @property
    def gain(self) -> np.ndarray:
        return self.values


@dataclass(frozen=True, eq=False)
class PhaseMap(_Grid):
    """Detected phase in radians, within [-pi, pi]."""

    values: np.ndarray

    def __post_init__(self):
        arr = _frozen(self.values, np.float64, "PhaseMap")
        if np.any(np.abs(arr) > math.pi):
            raise InvalidFieldError("PhaseMap values must lie in [-pi, pi]")
        object.__setattr__(self, "values", arr)

    @property
    def psi(self) -> np.ndarray:
        return self.values


def _positive_finite(name: str, value) -> float:
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise InvalidParameterError(f"{name} must be a number, got {value!r}") from None
    if not math.isfinite(value) or value <= 0.0:
        raise InvalidParameterError(f"{name} must be finite and > 0, got {value!r}")
    return value


@dataclass(frozen=True)
class KernelParams:
    """Phase-kernel and low-pass parameters.

    ``S`` is the peak phase in radians, ``W`` the warp factor and
    ``sigma_lpf`` the Gaussian low-pass width in cycles/pixel.
    """

    S: float = 0.3
    W: float = 15.0
    sigma_lpf: float = 0.15
    kernel_family: KernelFamily = KernelFamily.PST_ARCTAN_LOG

    def __post_init__(self):
        object.__setattr__(self, "S", _positive_finite("S", self.S))
        object.__setattr__(self, "W", _positive_finite("W", self.W))
        object.__setattr__(self, "sigma_lpf", _positive_finite("sigma_lpf", self.sigma_lpf))
        if not isinstance(self.kernel_family, KernelFamily):
            raise InvalidParameterError(f"unknown kernel family {self.kernel_family!r}")


_CONFIG_KEYS = (
    "kernel.family",
    "kernel.S",
    "kernel.W",
    "kernel.sigma_lpf",
    "color_policy",
    "normalization",
    "output_bit_depth",
)


@dataclass(frozen=True)
class RefineryConfig:
    """Complete refinement protocol; must be identical at train and inference time."""

    kernel: KernelParams = field(default_factory=KernelParams)
    color_policy: ColorPolicy = ColorPolicy.LUMA
    normalization: Normalization = Normalization.MINMAX_PER_IMAGE
    output_bit_depth: int = 16

    def __post_init__(self):
        if not isinstance(self.kernel, KernelParams):
            raise InvalidParameterError("kernel must be a KernelParams")
        if not isinstance(self.color_policy, ColorPolicy):
            raise InvalidParameterError(f"unknown color policy {self.color_policy!r}")
        if not isinstance(self.normalization, Normalization):
            raise InvalidParameterError(f"unknown normalization {self.normalization!r}")
        if isinstance(self.output_bit_depth, bool) or self.output_bit_depth not in (8, 16):
            raise InvalidParameterError(f"output_bit_depth must be 8 or 16, got {self.output_bit_depth!r}")

    def to_text(self) -> str:
        """Serialize as flat ``key = value`` lines (floats use ``repr`` so parsing is exact)."""
        k = self.kernel
        items = {
            "kernel.family": k.kernel_family.value,
            "kernel.S": repr(k.S),
            "kernel.W": repr(k.W),
            "kernel.sigma_lpf": repr(k.sigma_lpf),
            "color_policy": self.color_policy.value,
            "normalization": self.normalization.value,
            "output_bit_depth": str(self.output_bit_depth),
        }
        return "".join(f"{key} = {items[key]}\n" for key in _CONFIG_KEYS)

    @classmethod
    def from_text(cls, text: str) -> RefineryConfig:
        """Parse the flat key-value format. Blank lines and ``#`` comments are allowed;
        unknown, duplicate or missing keys are errors."""
        items: dict[str, str] = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ConfigFormatError(f"line {lineno}: expected 'key = value'")
            key, value = key.strip(), value.strip()
            if key not in _CONFIG_KEYS:
                raise ConfigFormatError(f"line {lineno}: unknown key {key!r}")
            if key in items:
                raise ConfigFormatError(f"line {lineno}: duplicate key {key!r}")
            items[key] = value
        missing = [key for key in _CONFIG_KEYS if key not in items]
        if missing:
            raise ConfigFormatError(f"missing keys: {', '.join(missing)}")

        def enum_value(enum_cls, key):
            try:
                return enum_cls(items[key])
            except ValueError:
                raise ConfigFormatError(f"{key}: invalid value {items[key]!r}") from None

        try:
            bit_depth = int(items["output_bit_depth"])
        except ValueError:
            raise ConfigFormatError("output_bit_depth must be an integer") from None
        try:
            kernel = KernelParams(
                S=float(items["kernel.S"]),
                W=float(items["kernel.W"]),
                sigma_lpf=float(items["kernel.sigma_lpf"]),
                kernel_family=enum_value(KernelFamily, "kernel.family"),
            )
        except ValueError as exc:
            raise ConfigFormatError(str(exc)) from None
        try:
            return cls(
                kernel=kernel,
                color_policy=enum_value(ColorPolicy, "color_policy"),
                normalization=enum_value(Normalization, "normalization"),
                output_bit_depth=bit_depth,
            )
        except InvalidParameterError as exc:
            raise ConfigFormatError(str(exc)) from None

    def digest(self) -> str:
        return hashlib.sha256(self.to_text().encode("utf-8")).hexdigest()

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_text())

    @classmethod
    def load(cls, path) -> RefineryConfig:
        with open(path, encoding="utf-8") as fh:
            return cls.from_text(fh.read())
