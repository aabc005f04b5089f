"""Floating-point reference matcher: cosine angle distance plus ratio test.

For each query descriptor the matcher computes the angular distance
arccos(clamp(dot, 0, 1)) to every database descriptor, takes the two
smallest, and accepts the nearest neighbor only when
``min < threshold * second_min`` (threshold 0.6 by default).

Summation order for dot products is strict left-to-right over the 128
elements, so results are bit-reproducible; the batched matrix path below
accumulates element-by-element in the same order and therefore produces
bit-identical floats to the scalar ops.  Everything here is stateless.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .descriptors import DESCRIPTOR_LEN, Descriptor, DescriptorSet

__all__ = [
    "MatchResult",
    "SECOND_MIN_SURROGATE",
    "angular_distance",
    "dot_matrix",
    "dot_product",
    "match_all",
    "match_one",
]

# Stand-in second minimum for a single-descriptor database: no real angle can
# reach pi, so the ratio test degenerates to "min < threshold * pi".
SECOND_MIN_SURROGATE = math.pi

DEFAULT_THRESHOLD = 0.6


@dataclass(frozen=True)
class MatchResult:
    """Verdict for one query descriptor.

    ``min_angle <= second_min_angle`` always; ``matched`` implies
    ``best_index`` is set.  ``min_raw``/``second_min_raw`` are populated only
    by the fixed-point pipeline engine (UQ2.14 raws).
    """

    query_index: int
    best_index: int | None
    min_angle: float
    second_min_angle: float
    matched: bool
    query_xy: tuple[int, int]
    best_xy: tuple[int, int] | None
    min_raw: int | None = None
    second_min_raw: int | None = None


def dot_matrix(queries: np.ndarray, database: np.ndarray) -> np.ndarray:
    """All-pairs dot products, accumulated left-to-right over the elements.

    ``queries`` is (m, 128), ``database`` is (n, 128); returns (m, n).
    Each cell sees the identical float64 addition sequence as
    :func:`dot_product`, so the two agree bitwise.
    """
    queries = np.asarray(queries, dtype=np.float64)
    database = np.asarray(database, dtype=np.float64)
    acc = np.zeros((queries.shape[0], database.shape[0]), dtype=np.float64)
    for i in range(DESCRIPTOR_LEN):
        acc += queries[:, i, None] * database[None, :, i]
    return acc


def dot_product(a: Descriptor, b: Descriptor) -> float:
    """Dot product of two descriptors in float arithmetic (left-to-right sum)."""
    if a.elements.shape != (DESCRIPTOR_LEN,) or b.elements.shape != (DESCRIPTOR_LEN,):
        raise ValueError(f"descriptors must have {DESCRIPTOR_LEN} elements")
    return float(dot_matrix(a.elements[None, :], b.elements[None, :])[0, 0])


def angular_distance(a: Descriptor, b: Descriptor) -> float:
    """arccos of the clamped dot product; range [0, pi/2] for unit vectors."""
    return float(np.arccos(np.clip(dot_product(a, b), 0.0, 1.0)))


def _angle_rows(queries: np.ndarray, database: np.ndarray) -> np.ndarray:
    dots = dot_matrix(queries, database)
    return np.arccos(np.clip(dots, 0.0, 1.0))


def _check_threshold(threshold: float) -> None:
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"threshold must be in (0, 1), got {threshold}")


def _row_result(query_index: int, angles: np.ndarray, threshold: float,
                queries: DescriptorSet, db: DescriptorSet) -> MatchResult:
    best = int(np.argmin(angles))  # first occurrence: smallest index wins ties
    if angles.shape[0] == 1:
        min_angle = float(angles[0])
        second = SECOND_MIN_SURROGATE
    else:
        two = np.partition(angles, 1)[:2]
        min_angle = float(two.min())
        second = float(two.max())
    matched = min_angle < threshold * second
    return MatchResult(
        query_index=query_index,
        best_index=best,
        min_angle=min_angle,
        second_min_angle=second,
        matched=matched,
        query_xy=(int(queries.xy[query_index, 0]), int(queries.xy[query_index, 1])),
        best_xy=(int(db.xy[best, 0]), int(db.xy[best, 1])),
    )


def match_one(query: Descriptor, db: DescriptorSet,
              threshold: float = DEFAULT_THRESHOLD,
              query_index: int = 0) -> MatchResult:
    """Match a single descriptor against a database.

    The database must be non-empty; with a single entry the second minimum
    is the pi surrogate (see :data:`SECOND_MIN_SURROGATE`).
    """
    _check_threshold(threshold)
    if len(db) == 0:
        raise ValueError("database is empty")
    angles = _angle_rows(query.elements[None, :], db.floats)[0]
    result = _row_result(0, angles, threshold, _single_set(query), db)
    return MatchResult(**{**result.__dict__, "query_index": query_index,
                          "query_xy": query.xy})


def _single_set(d: Descriptor) -> DescriptorSet:
    return DescriptorSet("query", d.elements[None, :], d.raws[None, :],
                         np.array([[d.x, d.y]], dtype=np.uint16))


def match_all(queries: DescriptorSet, db: DescriptorSet,
              threshold: float = DEFAULT_THRESHOLD) -> list[MatchResult]:
    """Match every query descriptor; output order equals query order."""
    _check_threshold(threshold)
    if len(queries) == 0:
        return []
    if len(db) == 0:
        raise ValueError("database is empty")
    angles = _angle_rows(queries.floats, db.floats)
    return [_row_result(k, angles[k], threshold, queries, db)
            for k in range(len(queries))]
