import math

import numpy as np
import pytest

from siftmatch.cordic import (
    AngleSample,
    CordicConfig,
    DEFAULT_CONFIG,
    arccos_raw_batch,
    arccos_table,
    cordic_arccos,
    cordic_polar_angle,
    cordic_sqrt,
    one_minus_sq_raw_batch,
    one_minus_x_squared,
    polar_raw_batch,
    sqrt_raw_batch,
)
from siftmatch.fixedpoint import UQ1_15, UQ2_14, FxSample, QFormat

LSB15 = UQ1_15.lsb
LSB14 = UQ2_14.lsb


def fx15(value: float) -> FxSample:
    return FxSample(round(value * 2 ** 15), UQ1_15)


class TestConfig:
    def test_defaults(self):
        cfg = CordicConfig()
        assert cfg.sqrt_iterations == 37
        assert cfg.polar_iterations == 11
        assert cfg.polar_rotations == 16  # angle fraction bits + 2

    def test_rotation_override(self):
        assert CordicConfig(polar_micro_rotations=20).polar_rotations == 20

    @pytest.mark.parametrize("kwargs", [
        {"sqrt_iterations": 0},
        {"polar_iterations": 0},
        {"polar_micro_rotations": 0},
        {"angle_format": QFormat(0, 16)},  # max < pi/2
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            CordicConfig(**kwargs)


class TestSqrt:
    def test_zero(self):
        assert cordic_sqrt(fx15(0.0)).raw == 0

    def test_one(self):
        out = cordic_sqrt(fx15(1.0))
        assert abs(out.raw - 0x8000) <= 1

    def test_quarter(self):
        out = cordic_sqrt(fx15(0.25))
        assert abs(out.to_real() - 0.5) <= 4 * LSB15

    def test_float_oracle_sweep(self):
        # 4-LSB absolute accuracy over [0.03, 1]
        raws = np.arange(round(0.03 * 2 ** 15), 2 ** 15 + 1, dtype=np.int64)
        got = sqrt_raw_batch(raws) * LSB15
        want = np.sqrt(raws * LSB15)
        assert np.abs(got - want).max() <= 4 * LSB15

    def test_small_inputs_stay_accurate(self):
        # The power-of-4 prescaling keeps even tiny arguments convergent.
        raws = np.arange(1, round(0.03 * 2 ** 15), dtype=np.int64)
        got = sqrt_raw_batch(raws) * LSB15
        want = np.sqrt(raws * LSB15)
        assert np.abs(got - want).max() <= 4 * LSB15

    def test_rejects_wrong_format(self):
        with pytest.raises(ValueError):
            cordic_sqrt(FxSample(1, UQ2_14))


class TestOneMinusXSquared:
    def test_endpoints(self):
        assert one_minus_x_squared(fx15(0.0)).to_real() == 1.0
        assert one_minus_x_squared(fx15(1.0)).raw == 0

    def test_0p6(self):
        out = one_minus_x_squared(fx15(0.6))
        assert abs(out.to_real() - 0.64) <= 2 * LSB15

    def test_saturates_at_zero_above_one(self):
        top = FxSample(UQ1_15.max_raw, UQ1_15)  # ~1.99997, square > 1
        assert one_minus_x_squared(top).raw == 0

    def test_matches_float_oracle(self):
        raws = np.arange(0, 2 ** 15 + 1, 37, dtype=np.int64)
        got = one_minus_sq_raw_batch(raws) * LSB15
        want = 1.0 - (raws * LSB15) ** 2
        assert np.abs(got - want).max() <= 2 ** -16 + 1e-12


class TestPolarAngle:
    def test_axis_u(self):
        out = cordic_polar_angle(fx15(1.0), fx15(0.0))
        assert out.raw == 0
        assert not out.degenerate

    def test_axis_v(self):
        out = cordic_polar_angle(fx15(0.0), fx15(1.0))
        assert abs(out.radians - math.pi / 2) <= 2 * LSB14

    def test_diagonal(self):
        out = cordic_polar_angle(fx15(1.0), fx15(1.0))
        assert abs(out.radians - math.pi / 4) <= 2 * LSB14

    def test_degenerate_origin(self):
        out = cordic_polar_angle(fx15(0.0), fx15(0.0))
        assert out.raw == 0
        assert out.degenerate

    def test_atan2_oracle_grid(self):
        rng = np.random.default_rng(7)
        u = rng.integers(0, 2 ** 15 + 1, 400)
        v = rng.integers(0, 2 ** 15 + 1, 400)
        keep = (u | v) != 0
        u, v = u[keep], v[keep]
        got = polar_raw_batch(u, v) * LSB14
        want = np.arctan2(v * LSB15, u * LSB15)
        assert np.abs(got - want).max() <= 2 * LSB14


class TestArccos:
    def test_one_maps_to_zero(self):
        assert cordic_arccos(fx15(1.0)).raw <= 2

    def test_zero_maps_to_half_pi(self):
        out = cordic_arccos(fx15(0.0))
        assert abs(out.radians - math.pi / 2) <= 2 * LSB14

    def test_half(self):
        out = cordic_arccos(fx15(0.5))
        assert abs(out.radians - 1.047198) <= 8 * LSB14

    def test_above_one_maps_to_zero(self):
        # quantization can push a dot product slightly over 1.0
        out = cordic_arccos(FxSample(0x8000 + 13, UQ1_15))
        assert out.raw == 0

    def test_accuracy_sweep_bound(self):
        raws = np.arange(2 ** 15 + 1, dtype=np.int64)
        err = np.abs(arccos_raw_batch(raws) * LSB14 - np.arccos(raws * LSB15))
        assert err.max() <= 8 * LSB14

    def test_monotone_outside_measured_bound(self):
        raws = np.arange(2 ** 15 + 1, dtype=np.int64)
        approx = arccos_raw_batch(raws).astype(np.int64)
        exact = np.arccos(raws * LSB15)
        bound = np.abs(approx * LSB14 - exact).max()
        rng = np.random.default_rng(3)
        i = rng.integers(0, len(raws) - 1, 200_000)
        j = rng.integers(0, len(raws) - 1, 200_000)
        lo, hi = np.minimum(i, j), np.maximum(i, j)
        separated = exact[lo] - exact[hi] > 2 * bound  # arccos decreases in x
        assert (approx[lo][separated] > approx[hi][separated]).all()

    def test_composition_matches_op_chain(self):
        for raw in (0, 1, 137, 16384, 30000, 32768):
            x = FxSample(raw, UQ1_15)
            chained = cordic_polar_angle(
                x, cordic_sqrt(one_minus_x_squared(x)))
            assert cordic_arccos(x).raw == chained.raw


class TestDeterminismAndBatch:
    def test_identical_runs(self):
        raws = np.arange(0, 2 ** 15 + 1, 11, dtype=np.int64)
        a = arccos_raw_batch(raws)
        b = arccos_raw_batch(raws)
        assert np.array_equal(a, b)

    def test_scalar_equals_batch(self):
        rng = np.random.default_rng(17)
        raws = rng.integers(0, 2 ** 15 + 1, 300)
        batch = arccos_raw_batch(raws.astype(np.int64))
        for raw, expect in zip(raws, batch):
            assert cordic_arccos(FxSample(int(raw), UQ1_15)).raw == int(expect)

    def test_lookup_table_equals_batch(self):
        table = arccos_table(DEFAULT_CONFIG)
        raws = np.arange(0, 2 ** 16, 97, dtype=np.int64)
        assert np.array_equal(table[raws], arccos_raw_batch(raws).astype(np.uint16))

    def test_angle_sample_accessors(self):
        out = cordic_arccos(fx15(0.25))
        assert isinstance(out, AngleSample)
        assert out.radians == out.raw * LSB14
