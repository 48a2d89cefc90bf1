"""Comparison reports for solution sets: SVG parallel coordinates and a table.

The figure pipeline merges every input set, keeps only points that survive
Pareto filtering against the whole union, and draws one panel per input set
showing its survivors as polylines over the objectives. Axes are normalized
to [0, 1] using the min/max of each objective across all survivors, so the
panels share a common scale; a set whose survivors all sit at an axis'
global maximum draws as a flat line at the top. Panel titles carry the
survivor count.

The table scores each set's own Pareto front (not the union-filtered one)
against a shared reference point: hypervolume, percent of the best set's
hypervolume, cardinality, and sparsity.

All geometry is emitted with fixed two-decimal formatting so equal inputs
give byte-identical SVG.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence
from xml.sax.saxutils import escape

import numpy as np

from .errors import UsageError
from .metrics import (default_reference_point, hypervolume, pareto_filter,
                      percent_of_baseline, sparsity, unique_rows)

PANEL_W = 560.0
PANEL_H = 340.0
PANEL_GAP = 30.0
OUTER_MARGIN = 10.0
PAD_LEFT = 55.0
PAD_RIGHT = 25.0
PAD_TOP = 45.0
PAD_BOTTOM = 50.0

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _f(value: float) -> str:
    return format(float(value), ".2f")


def filter_sets_against_union(sets: Sequence[np.ndarray]) -> list[np.ndarray]:
    """Per set: its distinct points not dominated by anything in any set."""
    arrays = [unique_rows(s) for s in sets]
    non_empty = [a for a in arrays if len(a)]
    if not non_empty:
        return [a for a in arrays]
    union = np.vstack(non_empty)
    survivors = []
    for arr in arrays:
        keep = []
        for i, row in enumerate(arr):
            dominated = np.any(np.all(union >= row, axis=1)
                               & np.any(union > row, axis=1))
            if not dominated:
                keep.append(i)
        survivors.append(arr[keep])
    return survivors


def normalization_bounds(survivor_sets: Sequence[np.ndarray]
                         ) -> tuple[np.ndarray, np.ndarray]:
    stacked = np.vstack([s for s in survivor_sets if len(s)])
    return stacked.min(axis=0), stacked.max(axis=0)


def _normalize(values: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    span = hi - lo
    out = np.empty_like(values, dtype=float)
    for j in range(values.shape[1]):
        if span[j] > 0.0:
            out[:, j] = (values[:, j] - lo[j]) / span[j]
        else:
            out[:, j] = 0.5
    return out


def parallel_coordinates_svg(labeled_sets: Sequence[tuple[str, np.ndarray]],
                             objective_names: Sequence[str]) -> str:
    """Render the union-filtered sets; one panel per set, shared axis scale."""
    if not labeled_sets:
        raise UsageError("at least one solution set is required")
    labels = [label for label, _ in labeled_sets]
    survivors = filter_sets_against_union([points for _, points in labeled_sets])
    if not any(len(s) for s in survivors):
        raise UsageError("every solution set is empty")
    d = survivors[[i for i, s in enumerate(survivors) if len(s)][0]].shape[1]
    if len(objective_names) != d:
        raise UsageError(f"need {d} objective names, got {len(objective_names)}")
    lo, hi = normalization_bounds(survivors)

    k = len(labels)
    ncols = 2 if k > 1 else 1
    nrows = (k + ncols - 1) // ncols
    width = 2 * OUTER_MARGIN + ncols * PANEL_W + (ncols - 1) * PANEL_GAP
    height = 2 * OUTER_MARGIN + nrows * PANEL_H + (nrows - 1) * PANEL_GAP

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_f(width)}" '
        f'height="{_f(height)}" viewBox="0 0 {_f(width)} {_f(height)}">',
        f'<rect x="0" y="0" width="{_f(width)}" height="{_f(height)}" fill="#ffffff"/>',
    ]

    inner_w = PANEL_W - PAD_LEFT - PAD_RIGHT
    inner_h = PANEL_H - PAD_TOP - PAD_BOTTOM
    for idx, (label, points) in enumerate(zip(labels, survivors)):
        row, col = divmod(idx, ncols)
        x0 = OUTER_MARGIN + col * (PANEL_W + PANEL_GAP)
        y0 = OUTER_MARGIN + row * (PANEL_H + PANEL_GAP)
        color = PALETTE[idx % len(PALETTE)]
        count = len(points)
        parts.append(f'<g class="panel" data-label="{escape(label)}" '
                     f'data-count="{count}">')
        parts.append(f'<rect x="{_f(x0)}" y="{_f(y0)}" width="{_f(PANEL_W)}" '
                     f'height="{_f(PANEL_H)}" fill="none" stroke="#cccccc"/>')
        parts.append(f'<text x="{_f(x0 + PANEL_W / 2)}" y="{_f(y0 + 24)}" '
                     f'font-family="sans-serif" font-size="15" text-anchor="middle">'
                     f'{escape(label)} ({count})</text>')

        if d == 1:
            xs = [x0 + PAD_LEFT + inner_w / 2]
        else:
            xs = [x0 + PAD_LEFT + j * inner_w / (d - 1) for j in range(d)]
        y_top = y0 + PAD_TOP
        y_bot = y0 + PAD_TOP + inner_h
        for j, ax in enumerate(xs):
            parts.append(f'<line x1="{_f(ax)}" y1="{_f(y_top)}" x2="{_f(ax)}" '
                         f'y2="{_f(y_bot)}" stroke="#888888"/>')
            parts.append(f'<text x="{_f(ax)}" y="{_f(y_bot + 18)}" '
                         f'font-family="sans-serif" font-size="12" '
                         f'text-anchor="middle">{escape(str(objective_names[j]))}</text>')
            parts.append(f'<text x="{_f(ax)}" y="{_f(y_bot + 34)}" '
                         f'font-family="sans-serif" font-size="9" fill="#666666" '
                         f'text-anchor="middle">{format(lo[j], ".4g")} .. '
                         f'{format(hi[j], ".4g")}</text>')

        if count:
            norm = _normalize(points, lo, hi)
            for row_vals in norm:
                coords = " ".join(f"{_f(xs[j])},{_f(y_bot - row_vals[j] * inner_h)}"
                                  for j in range(d))
                parts.append(f'<polyline points="{coords}" fill="none" '
                             f'stroke="{color}" stroke-width="1" stroke-opacity="0.6"/>')
        parts.append("</g>")

    parts.append("</svg>")
    return "\n".join(parts) + "\n"


@dataclass(frozen=True)
class TableRow:
    label: str
    hypervolume: float
    pct_of_best: int
    cardinality: int
    sparsity: float


@dataclass(frozen=True)
class ReportBundle:
    svg: str
    rows: tuple[TableRow, ...]
    reference: tuple[float, ...]
    survivors: tuple[np.ndarray, ...]
    merged: np.ndarray


def metrics_table(labeled_sets: Sequence[tuple[str, np.ndarray]],
                  reference: Optional[Sequence[float]] = None
                  ) -> tuple[list[TableRow], np.ndarray]:
    fronts = [(label, pareto_filter(points)) for label, points in labeled_sets]
    if reference is None:
        union = np.vstack([front for _, front in fronts if len(front)])
        ref = default_reference_point(union)
    else:
        ref = np.asarray(reference, dtype=float)
    hvs = [hypervolume(front, ref) for _, front in fronts]
    best = max(hvs) if hvs else 0.0
    rows = []
    for (label, front), hv in zip(fronts, hvs):
        pct = percent_of_baseline(hv, best) if best > 0.0 else 0
        rows.append(TableRow(label=label, hypervolume=hv, pct_of_best=pct,
                             cardinality=len(front), sparsity=sparsity(front)))
    return rows, ref


def format_table(rows: Sequence[TableRow]) -> str:
    header = ("set", "hypervolume", "pct_of_best", "cardinality", "sparsity")
    body = [(r.label, f"{r.hypervolume:.2E}", str(r.pct_of_best),
             str(r.cardinality), f"{r.sparsity:.3f}") for r in rows]
    widths = [max(len(header[c]), *(len(b[c]) for b in body)) if body else len(header[c])
              for c in range(len(header))]
    lines = ["  ".join(h.ljust(widths[c]) for c, h in enumerate(header))]
    for b in body:
        lines.append("  ".join(cell.ljust(widths[c]) for c, cell in enumerate(b)))
    return "\n".join(lines) + "\n"


def build_report(labeled_sets: Sequence[tuple[str, np.ndarray]],
                 objective_names: Sequence[str],
                 reference: Optional[Sequence[float]] = None) -> ReportBundle:
    rows, ref = metrics_table(labeled_sets, reference)
    svg = parallel_coordinates_svg(labeled_sets, objective_names)
    survivors = filter_sets_against_union([points for _, points in labeled_sets])
    merged = pareto_filter(np.vstack([s for s in survivors if len(s)]))
    return ReportBundle(svg=svg, rows=tuple(rows), reference=tuple(float(r) for r in ref),
                        survivors=tuple(survivors), merged=merged)
