"""Fixed-point CORDIC kernels: square root, polar angle, and their arccos composition.

Models the arccos unit of the matching accelerator, which is built from two
CORDIC cores: a hyperbolic-mode square root and a circular vectoring stage
that translates ``(u, v) = (x, sqrt(1 - x^2))`` into the angle
``arccos(x) = atan2(v, u)``.  The polar magnitude the vectoring stage also
produces is never needed and is dropped.

Everything is integer shift-and-add arithmetic:

* The square root prescales its argument by a power of four so the
  hyperbolic iteration always starts inside its convergence region, applies
  the standard repeated-iteration schedule (indices 4, 13, 40, ... run
  twice), pre-compensates the CORDIC gain with a single constant multiply,
  and rescales the result by the exact half-power-of-two at the end.  Input
  zero maps to zero exactly.
* The polar stage runs plain circular vectoring micro-rotations starting at
  the 45-degree step, accumulating the angle in a wide fixed-point register.

``sqrt_iterations`` and ``polar_iterations`` mirror the hardware core
latencies and are consumed by the pipeline model as timing metadata.  The
square root runs exactly ``sqrt_iterations`` micro-rotations; the polar
stage's functional rotation count instead follows the output precision
(``fraction_bits + 2``, 16 for the default UQ2.14 angle), because a
vectoring datapath short enough to round at 11 steps could not hit the
documented angle accuracy.

All kernels run the same code path for scalars and numpy arrays, so batch
evaluation is bit-identical to the scalar ops, deterministic across runs
and platforms (constants are derived with mpmath, not libm).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from mpmath import mp

from .fixedpoint import UQ1_15, UQ2_14, FxSample, QFormat, round_shift_even

__all__ = [
    "AngleSample",
    "CordicConfig",
    "DEFAULT_CONFIG",
    "arccos_raw_batch",
    "arccos_table",
    "cordic_arccos",
    "cordic_polar_angle",
    "cordic_sqrt",
    "one_minus_sq_raw_batch",
    "one_minus_x_squared",
    "polar_raw_batch",
    "sqrt_raw_batch",
]

# Internal datapath widths (guard bits over the 16-bit interfaces).
_WORK_FRAC = 24   # x/y registers of both cores
_GAIN_FRAC = 30   # gain pre-compensation constant
_Z_FRAC = 26      # polar angle accumulator


@dataclass(frozen=True)
class CordicConfig:
    """Configuration of the arccos unit.

    ``sqrt_iterations`` and ``polar_iterations`` are the pipeline depths of
    the two cores (timing metadata; the square root also iterates exactly
    that many times).  ``polar_micro_rotations`` overrides the functional
    rotation count of the vectoring stage; by default it is derived from the
    angle format as ``fraction_bits + 2``.
    """

    sqrt_iterations: int = 37
    polar_iterations: int = 11
    input_format: QFormat = UQ1_15
    angle_format: QFormat = UQ2_14
    polar_micro_rotations: int | None = None

    def __post_init__(self) -> None:
        if self.sqrt_iterations < 1 or self.polar_iterations < 1:
            raise ValueError("iteration counts must be >= 1")
        if self.polar_micro_rotations is not None and self.polar_micro_rotations < 1:
            raise ValueError("polar_micro_rotations must be >= 1")
        if self.angle_format.max_value < np.pi / 2:
            raise ValueError("angle format cannot represent pi/2")
        if self.input_format.fraction_bits > _WORK_FRAC:
            raise ValueError("input fraction bits exceed internal precision")

    @property
    def polar_rotations(self) -> int:
        if self.polar_micro_rotations is not None:
            return self.polar_micro_rotations
        return self.angle_format.fraction_bits + 2


DEFAULT_CONFIG = CordicConfig()


@dataclass(frozen=True)
class AngleSample:
    """An angle in the configured format; radians in [0, pi/2] semantically.

    ``degenerate`` marks the (0, 0) polar input, which has no defined angle.
    """

    sample: FxSample
    degenerate: bool = False

    @property
    def raw(self) -> int:
        return self.sample.raw

    @property
    def radians(self) -> float:
        return self.sample.to_real()


@lru_cache(maxsize=None)
def _sqrt_schedule(iterations: int) -> tuple[int, ...]:
    """Hyperbolic iteration indices with the standard repeats at 4, 13, 40, ..."""
    seq: list[int] = []
    i, repeat = 1, 4
    while len(seq) < iterations:
        seq.append(i)
        if i == repeat and len(seq) < iterations:
            seq.append(i)
            repeat = 3 * repeat + 1
        i += 1
    return tuple(seq)


@lru_cache(maxsize=None)
def _sqrt_constants(iterations: int) -> tuple[tuple[int, ...], int, int]:
    """(schedule, inverse-gain multiplier, pre-compensated 0.25 offset)."""
    schedule = _sqrt_schedule(iterations)
    with mp.workdps(60):
        gain = mp.mpf(1)
        for i in schedule:
            gain *= mp.sqrt(1 - mp.mpf(2) ** (-2 * i))
        inv_gain = int(mp.nint((1 << _GAIN_FRAC) / gain))
        quarter = int(mp.nint((1 << _WORK_FRAC) / (4 * gain)))
    return schedule, inv_gain, quarter


@lru_cache(maxsize=None)
def _atan_table(rotations: int) -> tuple[int, ...]:
    with mp.workdps(60):
        return tuple(
            int(mp.nint(mp.atan(mp.mpf(2) ** -i) * (1 << _Z_FRAC)))
            for i in range(rotations)
        )


def sqrt_raw_batch(raws, cfg: CordicConfig = DEFAULT_CONFIG) -> np.ndarray:
    """Square root of UQ1.15 raws via hyperbolic vectoring; returns UQ1.15 raws.

    The argument is prescaled by 4**k into (0.25, 1] (exactly undone by a
    2**-k shift of the result), which keeps every input inside the
    convergence region and preserves relative accuracy for small arguments.
    """
    r = np.atleast_1d(np.asarray(raws)).astype(np.int64)
    schedule, inv_gain, quarter = _sqrt_constants(cfg.sqrt_iterations)
    frac = cfg.input_format.fraction_bits

    # Power-of-4 normalization exponent from the bit length of the raw.
    bit_length = np.frexp(r.astype(np.float64))[1].astype(np.int64)
    k = np.maximum(0, (frac - bit_length) // 2)

    value = r << (_WORK_FRAC - frac + 2 * k)
    scaled = (value * inv_gain) >> _GAIN_FRAC
    x = scaled + quarter
    y = scaled - quarter
    for i in schedule:
        dx = y >> i
        dy = x >> i
        neg = y < 0
        x = np.where(neg, x + dx, x - dx)
        y = np.where(neg, y + dy, y - dy)

    out = round_shift_even(x, (_WORK_FRAC - frac) + k)
    out = np.clip(out, 0, cfg.input_format.max_raw)
    return np.where(r > 0, out, 0)


def polar_raw_batch(u_raws, v_raws, cfg: CordicConfig = DEFAULT_CONFIG,
                    u_fraction_bits: int = 15,
                    v_fraction_bits: int = 15) -> np.ndarray:
    """Vectoring-mode angle atan2(v, u) for non-negative raws, as angle-format raws.

    The magnitude output of the hardware core is unused and not produced.
    A (0, 0) input yields angle 0 (callers flag it as degenerate).
    """
    u = np.atleast_1d(np.asarray(u_raws)).astype(np.int64)
    v = np.atleast_1d(np.asarray(v_raws)).astype(np.int64)
    table = _atan_table(cfg.polar_rotations)

    x = u << (_WORK_FRAC - u_fraction_bits)
    y = v << (_WORK_FRAC - v_fraction_bits)
    z = np.zeros_like(x)
    for i, alpha in enumerate(table):
        dx = y >> i
        dy = x >> i
        pos = y >= 0
        x = np.where(pos, x + dx, x - dx)
        y = np.where(pos, y - dy, y + dy)
        z = np.where(pos, z + alpha, z - alpha)

    angle = round_shift_even(z, _Z_FRAC - cfg.angle_format.fraction_bits)
    angle = np.clip(angle, 0, cfg.angle_format.max_raw)
    return np.where((u == 0) & (v == 0), 0, angle)


def one_minus_sq_raw_batch(raws) -> np.ndarray:
    """1 - x*x on UQ1.15 raws: exact UQ2.30 product, floor at 0, round to UQ1.15."""
    r = np.atleast_1d(np.asarray(raws)).astype(np.int64)
    wide = (1 << 30) - r * r
    np.clip(wide, 0, None, out=wide)
    return round_shift_even(wide, 15)


def arccos_raw_batch(raws, cfg: CordicConfig = DEFAULT_CONFIG) -> np.ndarray:
    """arccos of UQ1.15 raws as angle-format raws: atan2(sqrt(1 - x^2), x)."""
    r = np.atleast_1d(np.asarray(raws)).astype(np.int64)
    v = sqrt_raw_batch(one_minus_sq_raw_batch(r), cfg)
    return polar_raw_batch(r, v, cfg,
                           u_fraction_bits=cfg.input_format.fraction_bits,
                           v_fraction_bits=cfg.input_format.fraction_bits)


@lru_cache(maxsize=4)
def arccos_table(cfg: CordicConfig = DEFAULT_CONFIG) -> np.ndarray:
    """arccos raws for every representable input, for bulk lookups.

    Bit-identical to :func:`arccos_raw_batch` by construction; the pipeline
    model uses this to evaluate millions of angles cheaply.
    """
    table = arccos_raw_batch(
        np.arange(cfg.input_format.max_raw + 1, dtype=np.int64), cfg)
    table = table.astype(np.uint16)
    table.setflags(write=False)
    return table


def _require_format(sample: FxSample, fmt: QFormat, what: str) -> None:
    if sample.fmt != fmt:
        raise ValueError(f"{what} must be {fmt}, got {sample.fmt}")


def cordic_sqrt(x: FxSample, cfg: CordicConfig = DEFAULT_CONFIG) -> FxSample:
    """Square root of a UQ1.15 sample."""
    _require_format(x, cfg.input_format, "sqrt input")
    raw = int(sqrt_raw_batch(x.raw, cfg)[0])
    return FxSample(raw, cfg.input_format)


def one_minus_x_squared(x: FxSample) -> FxSample:
    """Saturating 1 - x*x for a UQ1.15 sample (result in [0, 1])."""
    _require_format(x, UQ1_15, "input")
    return FxSample(int(one_minus_sq_raw_batch(x.raw)[0]), UQ1_15)


def cordic_polar_angle(u: FxSample, v: FxSample,
                       cfg: CordicConfig = DEFAULT_CONFIG) -> AngleSample:
    """Angle of the non-negative vector (u, v); (0, 0) is flagged degenerate."""
    raw = int(polar_raw_batch(u.raw, v.raw, cfg,
                              u_fraction_bits=u.fmt.fraction_bits,
                              v_fraction_bits=v.fmt.fraction_bits)[0])
    return AngleSample(FxSample(raw, cfg.angle_format),
                       degenerate=(u.raw == 0 and v.raw == 0))


def cordic_arccos(x: FxSample, cfg: CordicConfig = DEFAULT_CONFIG) -> AngleSample:
    """arccos of a UQ1.15 sample as an angle sample."""
    _require_format(x, cfg.input_format, "arccos input")
    raw = int(arccos_raw_batch(x.raw, cfg)[0])
    return AngleSample(FxSample(raw, cfg.angle_format))
