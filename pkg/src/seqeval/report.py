"""Report rendering: text tables (markdown, CSV, JSON) and SVG charts.

Rendering is a pure function of the report object; identical input gives
byte-identical output, so rendered artifacts can be diffed and pinned in
tests.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .core import MetricHeader, MetricResult, ReportTable, TrajectoryTable

_ARROWS = {"maximize": "↑", "minimize": "↓"}


def format_cell(result: MetricResult, precision: int = 4) -> str:
    """"ERR" for failed cells, "m ± s" for fold results, else the value."""
    if not result.ok:
        return "ERR"
    if result.deviation is not None:
        return f"{result.value:.{precision}f} ± {result.deviation:.{precision}f}"
    return f"{result.value:.{precision}f}"


def _header_label(metric: MetricHeader) -> str:
    return f"{metric.name} {_ARROWS[metric.direction]}"


def render_table(report: ReportTable, format: str = "markdown", precision: int = 4) -> str:
    """Render the group x metric grid as text.

    Groups are rows, metrics are columns; headers carry direction arrows
    so readers know which way is better. JSON output keeps full float
    precision and parses back to the same value graph.
    """
    if not report.group_names or not report.metrics:
        raise ValueError("cannot render an empty report")
    if format == "json":
        return report_to_json(report)
    headers = ["Group"] + [_header_label(m) for m in report.metrics]
    rows = [
        [g] + [format_cell(report.cell(g, m.name), precision) for m in report.metrics]
        for g in report.group_names
    ]
    if format == "csv":
        lines = [",".join(headers)]
        lines += [",".join(r) for r in rows]
        return "\n".join(lines) + "\n"
    if format == "markdown":
        lines = ["| " + " | ".join(headers) + " |"]
        lines.append("|" + "|".join(" --- " for _ in headers) + "|")
        lines += ["| " + " | ".join(r) + " |" for r in rows]
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown table format '{format}'")


def show(report: ReportTable, precision: int = 4) -> None:
    """Print the markdown table."""
    print(render_table(report, "markdown", precision), end="")


def report_to_json(report: ReportTable) -> str:
    doc = {
        "groups": list(report.group_names),
        "metrics": [
            {"name": m.name, "direction": m.direction, "arity": m.arity} for m in report.metrics
        ],
        "cells": {
            g: {
                m.name: _cell_to_doc(report.cell(g, m.name))
                for m in report.metrics
            }
            for g in report.group_names
        },
    }
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def _cell_to_doc(cell: MetricResult) -> dict:
    if not cell.ok:
        return {"error": cell.error}
    doc: dict = {"value": cell.value}
    if cell.deviation is not None:
        doc["deviation"] = cell.deviation
    if cell.per_fold is not None:
        doc["per_fold"] = cell.per_fold
    return doc


def report_from_json(text: str) -> ReportTable:
    doc = json.loads(text)
    metrics = [MetricHeader(m["name"], m["direction"], m.get("arity", "scalar")) for m in doc["metrics"]]
    cells = {}
    for g in doc["groups"]:
        for m in metrics:
            c = doc["cells"][g][m.name]
            if "error" in c:
                cells[(g, m.name)] = MetricResult(value=None, error=c["error"])
            else:
                cells[(g, m.name)] = MetricResult(
                    value=c["value"],
                    deviation=c.get("deviation"),
                    per_fold=c.get("per_fold"),
                )
    return ReportTable(list(doc["groups"]), metrics, cells)


def trajectory_to_json(traj: TrajectoryTable) -> str:
    doc = [
        {"iteration": idx, "report": json.loads(report_to_json(table))}
        for idx, table in traj.entries
    ]
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def trajectory_to_csv(traj: TrajectoryTable) -> str:
    lines = ["iteration,group,metric,value,deviation"]
    for idx, table in traj.entries:
        for g in table.group_names:
            for m in table.metrics:
                c = table.cell(g, m.name)
                if not c.ok:
                    lines.append(f"{idx},{g},{m.name},ERR,")
                else:
                    dev = "" if c.deviation is None else repr(c.deviation)
                    lines.append(f"{idx},{g},{m.name},{c.value!r},{dev}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# charts


@dataclass
class ChartSpec:
    """What to draw and how large.

    kind: "bar", "parallel-coordinates", or "trajectory".
    metrics: subset of metric names, in order; None selects all.
    error_bars: "deviation" draws a whisker where a cell has one; "none"
        suppresses them.
    """

    kind: str
    metrics: list[str] | None = None
    error_bars: str = "deviation"
    width: int = 640
    height: int = 400

    def __post_init__(self) -> None:
        if self.kind not in ("bar", "parallel-coordinates", "trajectory"):
            raise ValueError(f"unknown chart kind '{self.kind}'")
        if self.error_bars not in ("deviation", "none"):
            raise ValueError(f"error_bars must be 'deviation' or 'none', got '{self.error_bars}'")
        if self.width < 100 or self.height < 100:
            raise ValueError("chart dimensions must be at least 100x100 pixels")


_MARGIN = 50.0
_PALETTE = ("#4878d0", "#ee854a", "#6acc64", "#d65f5f", "#956cb4", "#8c613c", "#dc7ec0", "#797979")


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _svg_open(width: int, height: int, title: str) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f"<title>{title}</title>",
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
    ]


def _selected_metrics(report: ReportTable, spec: ChartSpec) -> list[MetricHeader]:
    if spec.metrics is None:
        chosen = list(report.metrics)
    else:
        by_name = {m.name: m for m in report.metrics}
        missing = [n for n in spec.metrics if n not in by_name]
        if missing:
            raise ValueError(f"metrics not in report: {missing}")
        chosen = [by_name[n] for n in spec.metrics]
    if not chosen:
        raise ValueError("chart selection is empty")
    return chosen


def _cell_values(report: ReportTable, metrics: list[MetricHeader]) -> dict[tuple[str, str], MetricResult]:
    cells = {}
    for g in report.group_names:
        for m in metrics:
            c = report.cell(g, m.name)
            if not c.ok:
                raise ValueError(f"cannot chart error cell ({g}, {m.name}): {c.error}")
            cells[(g, m.name)] = c
    return cells


def render_chart(source: ReportTable | TrajectoryTable, spec: ChartSpec) -> str:
    """Standalone SVG for the selected chart kind.

    Bar charts draw one rect per (group, metric) value. Parallel
    coordinates draw one vertical axis per metric (min-max scaled per
    axis) and one polyline per group. Trajectories need a trajectory
    table and draw one polyline per (group, metric) with a vertex per
    iteration.
    """
    if spec.kind == "trajectory":
        if not isinstance(source, TrajectoryTable):
            raise ValueError("trajectory charts need a trajectory table")
        return _render_trajectory(source, spec)
    if not isinstance(source, ReportTable):
        raise ValueError(f"{spec.kind} charts need a report table")
    if spec.kind == "bar":
        return _render_bar(source, spec)
    return _render_parallel(source, spec)


def _render_bar(report: ReportTable, spec: ChartSpec) -> str:
    metrics = _selected_metrics(report, spec)
    cells = _cell_values(report, metrics)
    groups = report.group_names
    values = [cells[(g, m.name)].value for g in groups for m in metrics]
    lo = min(0.0, min(values))
    hi = max(0.0, max(values))
    if hi == lo:
        hi = lo + 1.0
    plot_w = spec.width - 2 * _MARGIN
    plot_h = spec.height - 2 * _MARGIN

    def y_of(v: float) -> float:
        return _MARGIN + (hi - v) / (hi - lo) * plot_h

    n_bars = len(values)
    slot = plot_w / n_bars
    bar_w = slot * 0.7
    parts = _svg_open(spec.width, spec.height, "metric values by group")
    parts.append(
        f'<line x1="{_fmt(_MARGIN)}" y1="{_fmt(y_of(0.0))}" x2="{_fmt(_MARGIN + plot_w)}" '
        f'y2="{_fmt(y_of(0.0))}" stroke="#333333" stroke-width="1"/>'
    )
    i = 0
    for g in groups:
        for mi, m in enumerate(metrics):
            c = cells[(g, m.name)]
            x = _MARGIN + i * slot + (slot - bar_w) / 2
            y_top = y_of(max(c.value, 0.0))
            h = abs(y_of(c.value) - y_of(0.0))
            color = _PALETTE[mi % len(_PALETTE)]
            parts.append(
                f'<rect class="bar" x="{_fmt(x)}" y="{_fmt(y_top)}" width="{_fmt(bar_w)}" '
                f'height="{_fmt(h)}" fill="{color}"/>'
            )
            if spec.error_bars == "deviation" and c.deviation is not None:
                cx = x + bar_w / 2
                y1 = y_of(c.value + c.deviation)
                y2 = y_of(c.value - c.deviation)
                parts.append(
                    f'<line class="errorbar" x1="{_fmt(cx)}" y1="{_fmt(y1)}" x2="{_fmt(cx)}" '
                    f'y2="{_fmt(y2)}" stroke="#333333" stroke-width="1"/>'
                )
            label = f"{g}: {m.name}" if len(metrics) > 1 else g
            parts.append(
                f'<text x="{_fmt(x + bar_w / 2)}" y="{_fmt(spec.height - _MARGIN + 16)}" '
                f'font-size="10" text-anchor="middle">{label}</text>'
            )
            i += 1
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _render_parallel(report: ReportTable, spec: ChartSpec) -> str:
    metrics = _selected_metrics(report, spec)
    cells = _cell_values(report, metrics)
    groups = report.group_names
    plot_h = spec.height - 2 * _MARGIN
    n_axes = len(metrics)
    xs = (
        [_MARGIN + i * (spec.width - 2 * _MARGIN) / (n_axes - 1) for i in range(n_axes)]
        if n_axes > 1
        else [spec.width / 2.0]
    )
    # per-axis min-max scaling; a flat axis pins its points to the middle
    scaled: dict[tuple[str, str], float] = {}
    for m in metrics:
        vals = [cells[(g, m.name)].value for g in groups]
        lo, hi = min(vals), max(vals)
        for g in groups:
            v = cells[(g, m.name)].value
            scaled[(g, m.name)] = 0.5 if hi == lo else (v - lo) / (hi - lo)
    parts = _svg_open(spec.width, spec.height, "metric profiles by group")
    for x, m in zip(xs, metrics):
        parts.append(
            f'<line class="axis" x1="{_fmt(x)}" y1="{_fmt(_MARGIN)}" x2="{_fmt(x)}" '
            f'y2="{_fmt(_MARGIN + plot_h)}" stroke="#333333" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{_fmt(x)}" y="{_fmt(_MARGIN - 10)}" font-size="11" '
            f'text-anchor="middle">{_header_label(m)}</text>'
        )
    for gi, g in enumerate(groups):
        pts = " ".join(
            f"{_fmt(x)},{_fmt(_MARGIN + (1.0 - scaled[(g, m.name)]) * plot_h)}"
            for x, m in zip(xs, metrics)
        )
        color = _PALETTE[gi % len(_PALETTE)]
        parts.append(
            f'<polyline class="series" points="{pts}" fill="none" stroke="{color}" stroke-width="2"/>'
        )
        parts.append(
            f'<text x="{_fmt(_MARGIN)}" y="{_fmt(spec.height - _MARGIN + 16 + 12 * gi)}" '
            f'font-size="10" fill="{color}">{g}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _render_trajectory(traj: TrajectoryTable, spec: ChartSpec) -> str:
    if not traj.entries:
        raise ValueError("trajectory table has no iterations")
    first = traj.entries[0][1]
    metrics = _selected_metrics(first, spec)
    groups = first.group_names
    series: dict[tuple[str, str], list[float]] = {(g, m.name): [] for g in groups for m in metrics}
    for _, table in traj.entries:
        for g in groups:
            for m in metrics:
                c = table.cell(g, m.name)
                if not c.ok:
                    raise ValueError(f"cannot chart error cell ({g}, {m.name}): {c.error}")
                series[(g, m.name)].append(c.value)
    indices = traj.iteration_indices
    all_vals = [v for vals in series.values() for v in vals]
    lo, hi = min(all_vals), max(all_vals)
    if hi == lo:
        lo, hi = lo - 0.5, hi + 0.5
    x_lo, x_hi = min(indices), max(indices)
    plot_w = spec.width - 2 * _MARGIN
    plot_h = spec.height - 2 * _MARGIN

    def x_of(idx: int) -> float:
        if x_hi == x_lo:
            return _MARGIN + plot_w / 2
        return _MARGIN + (idx - x_lo) / (x_hi - x_lo) * plot_w

    def y_of(v: float) -> float:
        return _MARGIN + (hi - v) / (hi - lo) * plot_h

    parts = _svg_open(spec.width, spec.height, "metric trajectories across iterations")
    parts.append(
        f'<line class="axis" x1="{_fmt(_MARGIN)}" y1="{_fmt(_MARGIN + plot_h)}" '
        f'x2="{_fmt(_MARGIN + plot_w)}" y2="{_fmt(_MARGIN + plot_h)}" stroke="#333333" stroke-width="1"/>'
    )
    for idx in indices:
        parts.append(
            f'<text x="{_fmt(x_of(idx))}" y="{_fmt(spec.height - _MARGIN + 16)}" '
            f'font-size="10" text-anchor="middle">{idx}</text>'
        )
    si = 0
    for g in groups:
        for m in metrics:
            pts = " ".join(
                f"{_fmt(x_of(idx))},{_fmt(y_of(v))}" for idx, v in zip(indices, series[(g, m.name)])
            )
            color = _PALETTE[si % len(_PALETTE)]
            parts.append(
                f'<polyline class="trajectory" points="{pts}" fill="none" '
                f'stroke="{color}" stroke-width="2"/>'
            )
            parts.append(
                f'<text x="{_fmt(_MARGIN)}" y="{_fmt(14.0 + 12 * si)}" '
                f'font-size="10" fill="{color}">{g}: {m.name}</text>'
            )
            si += 1
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def render_scatter(coordinates, labels=None, width: int = 640, height: int = 480) -> str:
    """2-D scatter as SVG, one circle per point, colored by label."""
    pts = np.atleast_2d(np.asarray(coordinates, dtype=float))
    if pts.shape[1] < 2:
        raise ValueError("scatter needs at least 2 coordinate columns")
    labs = [str(v) for v in labels] if labels is not None else ["all"] * pts.shape[0]
    if len(labs) != pts.shape[0]:
        raise ValueError(f"{len(labs)} labels for {pts.shape[0]} points")
    palette = {lab: _PALETTE[i % len(_PALETTE)] for i, lab in enumerate(sorted(set(labs)))}
    x, y = pts[:, 0], pts[:, 1]
    x_lo, x_hi = float(x.min()), float(x.max())
    y_lo, y_hi = float(y.min()), float(y.max())
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5
    plot_w = width - 2 * _MARGIN
    plot_h = height - 2 * _MARGIN
    parts = _svg_open(width, height, "projected embedding scatter")
    for xi, yi, lab in zip(x, y, labs):
        cx = _MARGIN + (xi - x_lo) / (x_hi - x_lo) * plot_w
        cy = _MARGIN + (y_hi - yi) / (y_hi - y_lo) * plot_h
        parts.append(
            f'<circle class="point" cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="3" fill="{palette[lab]}"/>'
        )
    for i, (lab, color) in enumerate(sorted(palette.items())):
        parts.append(
            f'<text x="{_fmt(width - _MARGIN + 4)}" y="{_fmt(_MARGIN + 12 * i)}" '
            f'font-size="10" fill="{color}">{lab}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
