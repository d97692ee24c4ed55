"""Pareto-front extraction and reporting over completed DSE manifests.

Domination is weak (<=, <=) with at least one strict inequality on the
(latency, area) plane; exact coordinate duplicates keep only the lowest
point index. Failed records carry no metrics and are ignored by front
extraction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .designspace import Manifest
from .synthrunner import SUCCEEDED, SynthesisOutcome

__all__ = [
    "DesignRecord",
    "ParetoFront",
    "SummaryStats",
    "records_from_manifest",
    "pareto_front",
    "summarize",
    "emit_report",
    "REPORT_FORMATS",
]


@dataclass(frozen=True)
class DesignRecord:
    """One design point's assignment and synthesis outcome."""

    point_index: int
    assignment: Mapping[str, str]
    outcome: SynthesisOutcome

    @property
    def success(self) -> bool:
        return self.outcome.success


@dataclass(frozen=True)
class ParetoFront:
    """Non-dominated point indices, sorted by ascending latency."""

    indices: tuple[int, ...]

    def __contains__(self, index: int) -> bool:
        return index in set(self.indices)

    def __len__(self) -> int:
        return len(self.indices)


def records_from_manifest(manifest: Manifest) -> list[DesignRecord]:
    """Build records from a manifest that has been through a run."""
    records = []
    for row in sorted(manifest.rows, key=lambda r: r.index):
        if row.status is None:
            raise ValueError(f"manifest row {row.index} has no result; run the points first")
        if row.status == SUCCEEDED:
            outcome = SynthesisOutcome(
                success=True,
                latency_ms=row.latency_ms,
                area=row.area,
                synth_seconds=row.synth_seconds or 0.0,
            )
        else:
            outcome = SynthesisOutcome(
                success=False,
                synth_seconds=row.synth_seconds or 0.0,
                log_text=row.status,
            )
        records.append(DesignRecord(point_index=row.index, assignment=dict(row.values), outcome=outcome))
    return records


def pareto_front(records: Iterable[DesignRecord]) -> ParetoFront:
    """Extract the non-dominated set on (latency, area).

    A successful record r is on the front iff no successful s has
    latency <= and area <= with at least one strict. Runs in O(n log n):
    sort by (latency, area, index) and keep points that strictly lower the
    best area seen so far, which also drops coordinate duplicates beyond
    the lowest-index one.
    """
    ok = [r for r in records if r.success]
    ok.sort(key=lambda r: (r.outcome.latency_ms, r.outcome.area, r.point_index))
    front: list[DesignRecord] = []
    best_area = float("inf")
    for r in ok:
        if r.outcome.area < best_area:
            front.append(r)
            best_area = r.outcome.area
    return ParetoFront(indices=tuple(r.point_index for r in front))


@dataclass(frozen=True)
class SummaryStats:
    """Aggregate run statistics plus front span ratios."""

    total_points: int
    succeeded: int
    success_rate: float  # percentage, unrounded
    pareto_count: int
    latency_span_ratio: float | None  # max/min latency across the front
    area_span_ratio: float | None

    @property
    def success_rate_display(self) -> str:
        return f"{self.success_rate:.1f}"


def summarize(records: Sequence[DesignRecord]) -> SummaryStats:
    """Success-rate and Pareto statistics for a completed record set."""
    total = len(records)
    if total < 1:
        raise ValueError("need at least one record")
    by_index = {r.point_index: r for r in records}
    succeeded = sum(1 for r in records if r.success)
    front = pareto_front(records)
    lat_ratio = area_ratio = None
    if len(front) >= 1:
        lats = [by_index[i].outcome.latency_ms for i in front.indices]
        areas = [by_index[i].outcome.area for i in front.indices]
        lat_ratio = max(lats) / min(lats)
        area_ratio = max(areas) / min(areas)
    return SummaryStats(
        total_points=total,
        succeeded=succeeded,
        success_rate=100.0 * succeeded / total,
        pareto_count=len(front),
        latency_span_ratio=lat_ratio,
        area_span_ratio=area_ratio,
    )


REPORT_FORMATS = ("text-table", "csv", "plot-data")


def emit_report(
    records: Sequence[DesignRecord], front: ParetoFront, format: str = "text-table"
) -> str:
    """Render records plus front membership in the requested format.

    plot-data is TSV (latency_ms, area, synth_seconds, is_pareto) over the
    successful records, ready for any plotting tool; csv adds index and
    status for every record; text-table gives the run summary columns.
    """
    if format not in REPORT_FORMATS:
        raise ValueError(f"unknown report format {format!r}; expected one of {REPORT_FORMATS}")
    on_front = set(front.indices)

    if format == "plot-data":
        lines = ["latency_ms\tarea\tsynth_seconds\tis_pareto"]
        for r in records:
            if r.success:
                flag = 1 if r.point_index in on_front else 0
                o = r.outcome
                lines.append(f"{o.latency_ms:g}\t{o.area:g}\t{o.synth_seconds:g}\t{flag}")
        return "\n".join(lines) + "\n"

    if format == "csv":
        lines = ["index,status,latency_ms,area,synth_seconds,is_pareto"]
        for r in records:
            o = r.outcome
            lines.append(
                f"{r.point_index},{'succeeded' if r.success else 'failed'},"
                f"{'' if o.latency_ms is None else f'{o.latency_ms:g}'},"
                f"{'' if o.area is None else f'{o.area:g}'},"
                f"{o.synth_seconds:g},{1 if r.point_index in on_front else 0}"
            )
        return "\n".join(lines) + "\n"

    # text-table
    header = (
        f"{'DSE points':>12} {'Successful syntheses':>22} "
        f"{'Synthesis Success Rate':>24} {'Pareto-optimal designs':>24}"
    )
    if not records:
        return header + "\n"
    stats = summarize(records)
    line = (
        f"{stats.total_points:>12} {stats.succeeded:>22} "
        f"{stats.success_rate_display + '%':>24} {stats.pareto_count:>24}"
    )
    out = [header, line]
    if stats.pareto_count >= 1:
        out.append(
            f"front span: {stats.latency_span_ratio:.1f}x latency, "
            f"{stats.area_span_ratio:.1f}x area"
        )
    return "\n".join(out) + "\n"
