"""Benchmark tables: per-source x per-model grids of consistency scores.

Layout rules:
  * real sources render before generated ones, manifest order otherwise
  * per model column, the lowest mean among GENERATED sources is bold;
    ties are all bold; real rows are context and never bold
  * means and stds render with four decimals (round-half-even)
  * a cell with no scorable video renders "n/a" with a footnote

The CSV schema is fixed; downstream tooling keys on these exact columns:
mode, metric, source, kind, model, mean, std_mean_across_videos,
n_videos, n_unscorable, is_bold.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

from .consistency import SourceAggregate

CSV_COLUMNS = (
    "mode",
    "metric",
    "source",
    "kind",
    "model",
    "mean",
    "std_mean_across_videos",
    "n_videos",
    "n_unscorable",
    "is_bold",
)

FORMATS = ("plain", "markdown", "csv", "json")

NA_FOOTNOTE = "n/a = no scorable videos (fewer than two valid frames each)."


class ReportError(ValueError):
    pass


@dataclass(frozen=True)
class ReportCell:
    """One (source, model) cell. mean is None when nothing was scorable."""

    mean: float | None
    std_mean_across_videos: float | None
    n_videos: int
    n_unscorable: int


@dataclass(frozen=True)
class BenchmarkReport:
    mode: str
    metric: str
    sources: tuple[tuple[str, str], ...]  # (name, kind), real rows first
    models: tuple[str, ...]
    cells: dict[tuple[str, str], ReportCell]  # keyed (source, model)
    bold: frozenset[tuple[str, str]]
    metadata: dict

    def cell(self, source: str, model: str) -> ReportCell:
        return self.cells[(source, model)]


def _toolkit_version() -> str:
    from fcbench import __version__

    return __version__


def _std_across_videos(agg: SourceAggregate) -> float:
    import numpy as np

    means = np.asarray([s.mean for s in agg.per_video], dtype=np.float64)
    return float(means.std())  # population std, ddof 0


def build_report(
    aggregates,
    sources,
    models,
    mode: str,
    metric: str,
    metadata: dict | None = None,
    unscorable_counts: dict[tuple[str, str], int] | None = None,
) -> BenchmarkReport:
    """Assemble the grid.

    aggregates: SourceAggregate per (source, model) that had scorable videos.
    sources: (name, kind) pairs in manifest order.
    models: model ids in manifest order.
    unscorable_counts: counts for cells where NO video was scorable, keyed
    (source, model); cells with aggregates carry their own count.
    """
    source_names = [name for name, _ in sources]
    kinds = dict(sources)
    by_key: dict[tuple[str, str], SourceAggregate] = {}
    for agg in aggregates:
        if agg.mode != mode or agg.metric != metric:
            raise ReportError(
                f"aggregate for {agg.source_name}/{agg.model_id} is "
                f"{agg.mode}/{agg.metric}, report is {mode}/{metric}"
            )
        if agg.source_name not in kinds:
            raise ReportError(f"aggregate names unknown source {agg.source_name!r}")
        if agg.model_id not in models:
            raise ReportError(f"aggregate names unknown model {agg.model_id!r}")
        key = (agg.source_name, agg.model_id)
        if key in by_key:
            raise ReportError(f"duplicate aggregate for {key}")
        by_key[key] = agg

    ordered = sorted(sources, key=lambda s: 0 if s[1] == "real" else 1)

    cells: dict[tuple[str, str], ReportCell] = {}
    for name in source_names:
        for model in models:
            agg = by_key.get((name, model))
            if agg is not None:
                cells[(name, model)] = ReportCell(
                    mean=agg.mean_of_video_means,
                    std_mean_across_videos=_std_across_videos(agg),
                    n_videos=len(agg.per_video),
                    n_unscorable=agg.n_unscorable,
                )
            else:
                count = (unscorable_counts or {}).get((name, model), 0)
                cells[(name, model)] = ReportCell(
                    mean=None, std_mean_across_videos=None, n_videos=0, n_unscorable=count
                )

    bold = set()
    for model in models:
        candidates = [
            (name, cells[(name, model)].mean)
            for name, kind in ordered
            if kind == "generated" and cells[(name, model)].mean is not None
        ]
        if not candidates:
            continue
        best = min(mean for _, mean in candidates)
        for name, mean in candidates:
            if mean == best:
                bold.add((name, model))

    meta = dict(metadata or {})
    meta.setdefault("toolkit_version", _toolkit_version())
    return BenchmarkReport(
        mode=mode,
        metric=metric,
        sources=tuple(ordered),
        models=tuple(models),
        cells=cells,
        bold=frozenset(bold),
        metadata=meta,
    )


def format_value(x: float | None) -> str:
    """Four decimals, round-half-even; the n/a sentinel for empty cells."""
    return "n/a" if x is None else f"{x:.4f}"


def _has_na(report: BenchmarkReport) -> bool:
    return any(c.mean is None for c in report.cells.values())


def render_csv(report: BenchmarkReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for name, kind in report.sources:
        for model in report.models:
            cell = report.cell(name, model)
            writer.writerow(
                [
                    report.mode,
                    report.metric,
                    name,
                    kind,
                    model,
                    format_value(cell.mean),
                    format_value(cell.std_mean_across_videos),
                    cell.n_videos,
                    cell.n_unscorable,
                    "true" if (name, model) in report.bold else "false",
                ]
            )
    return buf.getvalue()


def render_markdown(report: BenchmarkReport) -> str:
    lines = [
        f"Scores ({report.mode}, {report.metric}); lower is more consistent.",
        "",
        "| source | kind | " + " | ".join(report.models) + " |",
        "|" + "---|" * (2 + len(report.models)),
    ]
    for name, kind in report.sources:
        row = [name, kind]
        for model in report.models:
            text = format_value(report.cell(name, model).mean)
            if (name, model) in report.bold:
                text = f"**{text}**"
            row.append(text)
        lines.append("| " + " | ".join(row) + " |")
    lines.append("")
    if _has_na(report):
        lines.append(NA_FOOTNOTE)
    lines.append(_metadata_line(report))
    return "\n".join(lines) + "\n"


def render_plain(report: BenchmarkReport) -> str:
    header = ["source", "kind", *report.models]
    rows = [header]
    for name, kind in report.sources:
        row = [name, kind]
        for model in report.models:
            text = format_value(report.cell(name, model).mean)
            if (name, model) in report.bold:
                text += "*"
            row.append(text)
        rows.append(row)
    widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in rows]
    lines.append("")
    lines.append("* lowest mean among generated sources for that model")
    if _has_na(report):
        lines.append(NA_FOOTNOTE)
    lines.append(_metadata_line(report))
    return "\n".join(lines) + "\n"


def render_json(report: BenchmarkReport) -> str:
    rows = []
    for name, kind in report.sources:
        for model in report.models:
            cell = report.cell(name, model)
            rows.append(
                {
                    "mode": report.mode,
                    "metric": report.metric,
                    "source": name,
                    "kind": kind,
                    "model": model,
                    "mean": cell.mean,
                    "std_mean_across_videos": cell.std_mean_across_videos,
                    "n_videos": cell.n_videos,
                    "n_unscorable": cell.n_unscorable,
                    "is_bold": (name, model) in report.bold,
                }
            )
    return json.dumps({"metadata": report.metadata, "rows": rows}, indent=2, sort_keys=True) + "\n"


def _metadata_line(report: BenchmarkReport) -> str:
    meta = report.metadata
    parts = [f"{key}={meta[key]}" for key in sorted(meta)]
    return "run: " + " ".join(parts)


_RENDERERS = {
    "plain": render_plain,
    "markdown": render_markdown,
    "csv": render_csv,
    "json": render_json,
}


def render_table(report: BenchmarkReport, fmt: str = "plain") -> str:
    try:
        renderer = _RENDERERS[fmt]
    except KeyError:
        raise ReportError(f"unknown format {fmt!r}; choose from {FORMATS}") from None
    return renderer(report)


def emit_plot_data(report: BenchmarkReport) -> str:
    """Long-format CSV for plotting; demands a complete, plottable grid."""
    if not any(kind == "generated" for _, kind in report.sources):
        raise ReportError("plot data needs at least one generated source")
    missing = [key for key, cell in report.cells.items() if cell.mean is None]
    if missing:
        raise ReportError(f"plot data needs every cell scored; missing {sorted(missing)}")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["source", "kind", "model", "mean", "std_mean_across_videos"])
    for name, kind in report.sources:
        for model in report.models:
            cell = report.cell(name, model)
            writer.writerow(
                [name, kind, model, repr(cell.mean), repr(cell.std_mean_across_videos)]
            )
    return buf.getvalue()
