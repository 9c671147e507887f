"""Illumination degradation and entropy stability study.

A horizontal linear ramp darkens the image in six graded steps. For each
step the Shannon entropy of the raw and of the refined image is measured;
a refined image whose entropy collapses relative to the uniformly lit one
is flagged as defective.
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass

import numpy as np

from .core_types import ImageField, InvalidParameterError, PhaseMap, RefineryConfig
from .transform import normalize_output, pst_phase

LEVEL_FLOORS = {1: 1.0, 2: 0.8, 3: 0.6, 4: 0.4, 5: 0.2, 6: 0.0}
DEFAULT_BINS = 256
DEFAULT_DROP_FRACTION = 0.5


class IlluminationProfile(enum.Enum):
    LINEAR_RAMP = "LINEAR_RAMP"


@dataclass(frozen=True)
class IlluminationSpec:
    """One graded illumination level.

    The multiplier falls linearly from 1 at the left edge to ``floor`` at the
    right edge. A zero floor ramps down over the left half only, leaving the
    right half completely dark.
    """

    level: int
    floor: float
    profile: IlluminationProfile = IlluminationProfile.LINEAR_RAMP

    def __post_init__(self):
        if isinstance(self.level, bool) or self.level not in LEVEL_FLOORS:
            raise InvalidParameterError(f"level must be an integer in 1..6, got {self.level!r}")
        floor = float(self.floor)
        if not 0.0 <= floor <= 1.0:
            raise InvalidParameterError(f"floor must lie in [0, 1], got {self.floor!r}")
        if self.level == 1 and floor != 1.0:
            raise InvalidParameterError("level 1 is uniform illumination (floor 1)")
        if self.level == 6 and floor != 0.0:
            raise InvalidParameterError("level 6 must reach a zero floor")
        if not isinstance(self.profile, IlluminationProfile):
            raise InvalidParameterError(f"unknown profile {self.profile!r}")
        object.__setattr__(self, "floor", floor)

    @classmethod
    def for_level(cls, level: int) -> IlluminationSpec:
        if level not in LEVEL_FLOORS:
            raise InvalidParameterError(f"level must be in 1..6, got {level!r}")
        return cls(level=level, floor=LEVEL_FLOORS[level])


def illumination_multiplier(width: int, spec: IlluminationSpec) -> np.ndarray:
    """Per-column multiplier of length ``width``."""
    x = np.arange(width, dtype=np.float64)
    if spec.floor == 1.0:
        return np.ones(width)
    span = (width - 1) / 2.0 if spec.floor == 0.0 else float(width - 1)
    return np.clip(1.0 - (1.0 - spec.floor) * x / span, spec.floor, 1.0)


def apply_illumination(image: ImageField, spec: IlluminationSpec) -> ImageField:
    if spec.floor == 1.0:
        return image
    ramp = illumination_multiplier(image.width, spec)
    return ImageField(np.clip(image.values * ramp[None, :], 0.0, 1.0))


def shannon_entropy(image: ImageField | np.ndarray, bins: int = DEFAULT_BINS) -> float:
    """Entropy in bits of a ``bins``-bin uniform histogram over [0, 1]."""
    if isinstance(bins, bool) or int(bins) != bins or bins < 2:
        raise InvalidParameterError(f"bins must be an integer >= 2, got {bins!r}")
    values = np.asarray(getattr(image, "values", image), dtype=np.float64).ravel()
    if values.size == 0:
        raise InvalidParameterError("cannot take the entropy of an empty image")
    if np.any(~np.isfinite(values)) or values.min() < 0.0 or values.max() > 1.0:
        raise InvalidParameterError("image values must lie in [0, 1]")
    counts, _ = np.histogram(values, bins=int(bins), range=(0.0, 1.0))
    p = counts[counts > 0] / values.size
    return float(-(p * np.log2(p)).sum()) + 0.0


def _crop_box(height: int, width: int, fraction: float) -> tuple[slice, slice]:
    if not 0.0 < fraction <= 1.0:
        raise InvalidParameterError(f"crop fraction must lie in (0, 1], got {fraction!r}")
    h = max(2, int(round(height * fraction)))
    w = max(2, int(round(width * fraction)))
    top = (height - h) // 2
    left = (width - w) // 2
    return slice(top, top + h), slice(left, left + w)


def center_crop(image: ImageField, fraction: float) -> ImageField:
    """Central region covering ``fraction`` of each side (at least 2 pixels)."""
    if fraction == 1.0:
        return image
    return ImageField(image.values[_crop_box(image.height, image.width, fraction)])


def refined_region(image: ImageField, config: RefineryConfig, crop: float = 1.0) -> ImageField:
    """Refine the whole image, then normalize only the central region of the phase map.

    The crop is taken before normalization so the wrap-around seam that a
    periodic transform sees at the image border cannot set the min-max range
    of the analyzed region. With ``crop=1`` this is exactly :func:`pst`.
    """
    psi = pst_phase(image, config.kernel)
    if crop != 1.0:
        psi = PhaseMap(psi.psi[_crop_box(image.height, image.width, crop)])
    return normalize_output(psi, config.normalization, config.output_bit_depth)


@dataclass(frozen=True)
class EntropyReport:
    levels: tuple[int, ...]
    floors: tuple[float, ...]
    raw_entropy: tuple[float, ...]
    refined_entropy: tuple[float, ...]
    raw_std: float
    refined_std: float
    flags: tuple[bool, ...]
    bins: int = DEFAULT_BINS

    def __post_init__(self):
        max_bits = float(np.log2(self.bins))
        for h in self.raw_entropy + self.refined_entropy:
            if not 0.0 <= h <= max_bits + 1e-12:
                raise InvalidParameterError(f"entropy {h} outside [0, {max_bits}] bits")

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["level", "floor", "raw_entropy_bits", "refined_entropy_bits", "flagged"])
        for row in zip(self.levels, self.floors, self.raw_entropy, self.refined_entropy, self.flags):
            level, floor, raw, refined, flagged = row
            writer.writerow([level, f"{floor:.6f}", f"{raw:.6f}", f"{refined:.6f}", str(flagged).lower()])
        return buf.getvalue()


def flag_defective(report: EntropyReport, drop_fraction: float = DEFAULT_DROP_FRACTION) -> tuple[bool, ...]:
    """Flag levels whose refined entropy falls below ``drop_fraction`` of level 1's.

    With a zero baseline nothing can fall below it, so nothing is flagged.
    """
    if not 0.0 < drop_fraction < 1.0:
        raise InvalidParameterError(f"drop_fraction must lie in (0, 1), got {drop_fraction!r}")
    baseline = report.refined_entropy[report.levels.index(1)]
    return tuple(h < drop_fraction * baseline for h in report.refined_entropy)


def entropy_stability_study(
    image: ImageField,
    config: RefineryConfig,
    bins: int = DEFAULT_BINS,
    crop: float = 1.0,
    drop_fraction: float = DEFAULT_DROP_FRACTION,
) -> EntropyReport:
    """Run all six illumination levels through the refinery and compare entropies.

    ``crop`` selects the central region that is analyzed (see
    :func:`refined_region`); the raw entropy uses the same region. The spread statistics are
    population standard deviations over levels 1 to 5; level 6 is the
    deliberately destroyed case and is excluded.
    """
    levels = tuple(sorted(LEVEL_FLOORS))
    raw, refined = [], []
    for level in levels:
        lit = apply_illumination(image, IlluminationSpec.for_level(level))
        raw.append(shannon_entropy(center_crop(lit, crop), bins))
        refined.append(shannon_entropy(refined_region(lit, config, crop), bins))
    report = EntropyReport(
        levels=levels,
        floors=tuple(LEVEL_FLOORS[lv] for lv in levels),
        raw_entropy=tuple(raw),
        refined_entropy=tuple(refined),
        raw_std=float(np.std(raw[:5])),
        refined_std=float(np.std(refined[:5])),
        flags=(False,) * len(levels),
        bins=int(bins),
    )
    flags = flag_defective(report, drop_fraction)
    return EntropyReport(**{**report.__dict__, "flags": flags})
