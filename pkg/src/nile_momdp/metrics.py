"""Quality metrics for sets of objective vectors (maximization everywhere).

All metrics first drop exact duplicate rows. Hypervolume is computed exactly
by recursive dimension sweep: the d-dimensional dominated region above the
reference point is sliced along the last axis into slabs, each slab's cross
section being a (d-1)-dimensional hypervolume of the points tall enough to
reach it, with an O(n log n) staircase sweep as the 2-d base case. Intended
for the low-dimensional case (d <= 4); it stays exact in higher dimensions
but the cost grows quickly.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import floor
from typing import Optional, Sequence

import numpy as np

from .errors import UsageError


def _as_points(points) -> np.ndarray:
    arr = np.asarray(points, dtype=float)
    if arr.size == 0:
        return arr.reshape(0, arr.shape[1] if arr.ndim == 2 else 0)
    if arr.ndim != 2:
        raise UsageError(f"expected a 2-d array of objective vectors, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise UsageError("objective vectors must be finite")
    return arr


def unique_rows(points) -> np.ndarray:
    """Exact duplicate rows removed, first occurrence kept, order preserved."""
    arr = _as_points(points)
    seen = set()
    keep = []
    for i, row in enumerate(arr):
        key = row.tobytes()
        if key not in seen:
            seen.add(key)
            keep.append(i)
    return arr[keep]


def dominates(a, b) -> bool:
    """True when a is at least b everywhere and better somewhere (maximization)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return bool(np.all(a >= b) and np.any(a > b))


def pareto_indices(points) -> list[int]:
    """Indices of the non-dominated rows (first occurrence of duplicates)."""
    arr = _as_points(points)
    n = len(arr)
    keep = []
    seen = set()
    for i in range(n):
        row = arr[i]
        key = row.tobytes()
        if key in seen:
            continue
        seen.add(key)
        ge = np.all(arr >= row, axis=1)
        gt = np.any(arr > row, axis=1)
        if not np.any(ge & gt):
            keep.append(i)
    return keep


def pareto_filter(points) -> np.ndarray:
    """The non-dominated subset, duplicates removed, input order preserved."""
    arr = _as_points(points)
    if len(arr) == 0:
        return arr
    return arr[pareto_indices(arr)]


def cardinality(points) -> int:
    """Number of distinct non-dominated objective vectors."""
    arr = _as_points(points)
    if len(arr) == 0:
        return 0
    return len(pareto_indices(arr))


def _hv_2d(points: np.ndarray, ref: np.ndarray) -> float:
    order = np.argsort(-points[:, 0], kind="stable")
    total = 0.0
    best_y = ref[1]
    for i in order:
        x, y = points[i]
        if y > best_y:
            total += (x - ref[0]) * (y - best_y)
            best_y = y
    return total


def _hv_recursive(points: np.ndarray, ref: np.ndarray) -> float:
    d = points.shape[1]
    if len(points) == 0:
        return 0.0
    if d == 1:
        return float(points[:, 0].max() - ref[0])
    if d == 2:
        return _hv_2d(points, ref)
    order = np.argsort(-points[:, -1], kind="stable")
    sorted_pts = points[order]
    zs = sorted_pts[:, -1]
    total = 0.0
    for i in range(len(sorted_pts)):
        lower = zs[i + 1] if i + 1 < len(sorted_pts) else ref[-1]
        height = zs[i] - lower
        if height > 0.0:
            slab = _hv_recursive(sorted_pts[: i + 1, :-1], ref[:-1])
            total += height * slab
    return total


def hypervolume(points, reference) -> float:
    """Exact hypervolume dominated by `points` above `reference` (maximization).

    Points that do not strictly exceed the reference in every coordinate
    contribute nothing and are dropped before the sweep.
    """
    ref = np.asarray(reference, dtype=float)
    if ref.ndim != 1:
        raise UsageError("reference point must be a 1-d vector")
    if not np.all(np.isfinite(ref)):
        raise UsageError("reference point must be finite")
    arr = _as_points(points)
    if len(arr) == 0:
        return 0.0
    if arr.shape[1] != len(ref):
        raise UsageError(f"points have {arr.shape[1]} objectives, "
                         f"reference has {len(ref)}")
    arr = unique_rows(arr)
    arr = arr[np.all(arr > ref, axis=1)]
    if len(arr) == 0:
        return 0.0
    # dominated points never change the union of boxes; filtering keeps the
    # recursion small
    arr = pareto_filter(arr)
    return float(_hv_recursive(arr, ref))


def sparsity(points) -> float:
    """Average squared gap between consecutive sorted values, per objective.

    Sp(S) = (1 / (|S| - 1)) * sum_j sum_i (s_j(i) - s_j(i+1))^2 where s_j is
    objective column j sorted. Sets with fewer than two distinct points have
    sparsity 0. Scales quadratically: Sp(a*S) = a^2 * Sp(S).
    """
    arr = unique_rows(points)
    n = len(arr)
    if n < 2:
        return 0.0
    total = 0.0
    for j in range(arr.shape[1]):
        col = np.sort(arr[:, j])
        gaps = np.diff(col)
        total += float(np.dot(gaps, gaps))
    return total / (n - 1)


def default_reference_point(points, margin: float = 0.01) -> np.ndarray:
    """Reference just below the componentwise minimum of the set.

    Offset per axis is `margin` times the axis range, floored at 1e-9 so
    degenerate (constant) axes still get a strictly dominated reference.
    """
    arr = _as_points(points)
    if len(arr) == 0:
        raise UsageError("cannot derive a reference point from an empty set")
    lo = arr.min(axis=0)
    span = arr.max(axis=0) - lo
    offset = np.maximum(margin * span, 1e-9)
    return lo - offset


def percent_of_baseline(value: float, baseline: float) -> int:
    """value / baseline as a whole percent, half-up rounding."""
    if baseline <= 0.0:
        raise UsageError("baseline must be positive")
    return int(floor(100.0 * value / baseline + 0.5))


@dataclass(frozen=True)
class SolutionSetSummary:
    """Scorecard of one solution set against a shared reference point."""

    hypervolume: float
    cardinality: int
    sparsity: float
    reference: tuple[float, ...]


def evaluate_solution_set(points, reference: Optional[Sequence[float]] = None
                          ) -> SolutionSetSummary:
    """Filter to the Pareto set, then compute all three metrics."""
    front = pareto_filter(points)
    ref = (default_reference_point(front) if reference is None
           else np.asarray(reference, dtype=float))
    return SolutionSetSummary(
        hypervolume=hypervolume(front, ref),
        cardinality=len(front),
        sparsity=sparsity(front),
        reference=tuple(float(r) for r in ref),
    )
