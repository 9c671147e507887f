import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from phase_refinery.analysis import (
    LEVEL_FLOORS,
    EntropyReport,
    IlluminationSpec,
    apply_illumination,
    center_crop,
    entropy_stability_study,
    flag_defective,
    illumination_multiplier,
    refined_region,
    shannon_entropy,
)
from phase_refinery.core_types import ImageField, InvalidParameterError, RefineryConfig
from phase_refinery.fixtures import textured_image
from phase_refinery.transform import pst

CFG = RefineryConfig()


def test_level_one_is_identity():
    img = textured_image(32, seed=1)
    assert apply_illumination(img, IlluminationSpec.for_level(1)) is img
    np.testing.assert_array_equal(illumination_multiplier(17, IlluminationSpec.for_level(1)), np.ones(17))


def test_ramp_midpoint():
    ramp = illumination_multiplier(101, IlluminationSpec(level=3, floor=0.5))
    assert ramp[0] == 1.0
    assert ramp[50] == pytest.approx(0.75, abs=1e-15)
    assert ramp[-1] == pytest.approx(0.5, abs=1e-15)
    assert np.all(np.diff(ramp) < 0)


def test_level_six_right_half_dark():
    img = ImageField(np.full((8, 64), 0.8))
    out = apply_illumination(img, IlluminationSpec.for_level(6)).values
    assert np.all(out[:, 32:] == 0.0)
    assert np.all(out[:, 0] == 0.8)
    assert np.all(out[:, :32] > 0.0)


@pytest.mark.parametrize("level", [2, 3, 4, 5])
def test_standard_levels_reach_their_floor(level):
    ramp = illumination_multiplier(40, IlluminationSpec.for_level(level))
    assert ramp[-1] == pytest.approx(LEVEL_FLOORS[level], abs=1e-15)


@pytest.mark.parametrize("kwargs", [
    {"level": 0, "floor": 1.0}, {"level": 7, "floor": 0.0}, {"level": True, "floor": 1.0},
    {"level": 1, "floor": 0.8}, {"level": 6, "floor": 0.1}, {"level": 3, "floor": 1.5},
    {"level": 3, "floor": 0.5, "profile": "RAMP"},
])
def test_illumination_spec_rejects(kwargs):
    with pytest.raises(InvalidParameterError):
        IlluminationSpec(**kwargs)


def test_entropy_examples():
    assert shannon_entropy(np.full((4, 4), 0.3)) == 0.0
    half = np.zeros((2, 4))
    half[1] = 1.0
    assert shannon_entropy(half) == pytest.approx(1.0, abs=1e-15)
    uniform = (np.arange(256) + 0.5) / 256
    assert shannon_entropy(uniform.reshape(16, 16)) == pytest.approx(8.0, abs=1e-12)


def test_entropy_bins_and_range_checks():
    assert shannon_entropy(np.array([[0.1, 0.9]]), bins=2) == pytest.approx(1.0)
    with pytest.raises(InvalidParameterError):
        shannon_entropy(np.array([[0.1, 1.2]]))
    with pytest.raises(InvalidParameterError):
        shannon_entropy(np.array([[0.1, 0.2]]), bins=1)
    with pytest.raises(InvalidParameterError):
        shannon_entropy(np.array([[math.nan, 0.2]]))


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, (6, 7), elements=st.floats(0, 1)), st.integers(0, 2**32 - 1))
def test_entropy_permutation_invariant(x, seed):
    perm = np.random.default_rng(seed).permutation(x.ravel()).reshape(x.shape)
    assert shannon_entropy(perm) == shannon_entropy(x)
    assert 0.0 <= shannon_entropy(x) <= math.log2(x.size) + 1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_entropy_invariant_to_bin_aligned_relabeling(seed):
    # Mapping bin centres onto other bin centres keeps the histogram shape.
    gen = np.random.default_rng(seed)
    idx = gen.integers(0, 128, size=(9, 9))
    a = (idx + 0.5) / 256
    b = (2 * idx + 1 + 0.5) / 256
    assert shannon_entropy(a) == pytest.approx(shannon_entropy(b), abs=1e-12)


def test_center_crop_box():
    img = ImageField(np.arange(100.0).reshape(10, 10))
    crop = center_crop(img, 0.5).values
    assert crop.shape == (5, 5)
    assert crop[0, 0] == 22.0
    assert center_crop(img, 1.0) is img
    with pytest.raises(InvalidParameterError):
        center_crop(img, 0.0)


def test_refined_region_full_is_pst():
    img = textured_image(64, seed=5)
    np.testing.assert_array_equal(refined_region(img, CFG).values, pst(img, CFG).values)
    part = refined_region(img, CFG, crop=0.5).values
    assert part.shape == (32, 32)
    assert part.min() == 0.0 and part.max() == 1.0


def _report(refined):
    n = len(refined)
    return EntropyReport(levels=tuple(range(1, n + 1)), floors=(1.0,) * n, raw_entropy=(1.0,) * n,
                         refined_entropy=tuple(refined), raw_std=0.0, refined_std=0.0, flags=(False,) * n)


def test_flag_defective_examples():
    assert flag_defective(_report([6.0, 5.9, 3.1, 2.9])) == (False, False, False, True)
    assert flag_defective(_report([6.0, 3.0])) == (False, False)
    assert flag_defective(_report([0.0, 0.0, 0.0])) == (False, False, False)
    with pytest.raises(InvalidParameterError):
        flag_defective(_report([1.0]), drop_fraction=1.0)


def test_report_rejects_impossible_entropy():
    with pytest.raises(InvalidParameterError):
        _report([9.0])


def test_study_on_textured_fixture():
    report = entropy_stability_study(textured_image(), CFG, crop=0.5)
    assert report.levels == (1, 2, 3, 4, 5, 6)
    assert report.floors == (1.0, 0.8, 0.6, 0.4, 0.2, 0.0)
    assert report.refined_std < report.raw_std
    assert report.flags == (False,) * 5 + (True,)
    # raw entropy falls as the ramp compresses the dynamic range
    assert report.raw_entropy[0] > report.raw_entropy[4]


def test_study_level_one_matches_direct_pst():
    img = textured_image(64, seed=9)
    report = entropy_stability_study(img, CFG)
    assert report.refined_entropy[0] == shannon_entropy(pst(img, CFG))
    assert report.raw_entropy[0] == shannon_entropy(img)


def test_study_black_image():
    report = entropy_stability_study(ImageField(np.zeros((32, 32))), CFG)
    assert report.raw_entropy == (0.0,) * 6
    assert report.refined_entropy == (0.0,) * 6
    assert not any(report.flags)


def test_study_constant_image_has_vacuous_flag_rule():
    # the ramp itself is structure, so only level 1 stays at zero entropy
    report = entropy_stability_study(ImageField(np.full((32, 32), 0.6)), CFG)
    assert report.raw_entropy[0] == report.refined_entropy[0] == 0.0
    assert not any(report.flags)


def test_report_csv_layout():
    report = entropy_stability_study(textured_image(64, seed=2), CFG)
    lines = report.to_csv().splitlines()
    assert lines[0] == "level,floor,raw_entropy_bits,refined_entropy_bits,flagged"
    assert len(lines) == 7
    cells = lines[6].split(",")
    assert cells[0] == "6" and cells[1] == "0.000000"
    assert cells[4] in ("true", "false")
    assert len(cells[2].split(".")[1]) == 6
