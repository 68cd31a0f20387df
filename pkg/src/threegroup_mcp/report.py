from __future__ import annotations

from datetime import datetime

from pydantic import BaseModel, ConfigDict, Field

from . import __version__
from .models import (
    HYPOTHESES,
    AdjustedQuartet,
    GroupSummary,
    Hypothesis,
    ParadoxReport,
    PowerReport,
    ProcedureKind,
    PValueQuartet,
    RejectionReport,
    SimEstimate,
    SimultaneousIntervals,
)
from .utils import format_p, now

ROW_LETTERS: dict[ProcedureKind, str] = {
    ProcedureKind.closed: "A",
    ProcedureKind.shaffer: "B",
    ProcedureKind.stepdown_dunnett: "C",
    ProcedureKind.stepdown_tukey: "D",
}


class DecisionRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    method: str
    alpha: float
    rejected: tuple[Hypothesis, ...]
    trace: tuple[str, ...] = ()


class EstimateRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    method: str
    metric: str
    value: float
    mc_se: float
    reps: int


class ReportMeta(BaseModel):
    model_config = ConfigDict(frozen=True)

    version: str = __version__
    command: str
    created_at: datetime = Field(default_factory=now)
    alpha: float | None = None
    seed: int | None = None
    reps: int | None = None
    generator: str | None = None
    notes: tuple[str, ...] = ()


class ReportDocument(BaseModel):
    """Everything a command reports; text and JSON output are both rendered from it."""

    model_config = ConfigDict(frozen=True)

    title: str
    groups: tuple[GroupSummary, ...] | None = None
    raw_p: PValueQuartet | None = None
    adjusted_p: dict[str, AdjustedQuartet] = {}
    decisions: tuple[DecisionRecord, ...] = ()
    paradox: dict[str, ParadoxReport] = {}
    intervals: SimultaneousIntervals | None = None
    estimates: tuple[EstimateRecord, ...] = ()
    supplementary: tuple[ReportDocument, ...] = ()
    meta: ReportMeta


def decision_record(report: RejectionReport) -> DecisionRecord:
    return DecisionRecord(
        method=report.method.name,
        alpha=report.alpha,
        rejected=tuple(h for h in HYPOTHESES if h in report.rejected),
        trace=report.trace,
    )


def estimate_record(method: str, metric: str, estimate: SimEstimate) -> EstimateRecord:
    return EstimateRecord(method=method, metric=metric, value=estimate.value, mc_se=estimate.mc_se, reps=estimate.reps)


def power_records(method: str, power: PowerReport) -> list[EstimateRecord]:
    records = [estimate_record(method, f"power:{h.value}", est) for h, est in power.per_hypothesis.items()]
    records.append(estimate_record(method, "power:avg_pairwise", power.avg_pairwise))
    records.append(estimate_record(method, "power:all_pairwise", power.all_pairwise))
    records.append(estimate_record(method, "power:any_pairwise", power.any_pairwise))
    return records


def render_json(document: ReportDocument) -> str:
    return document.model_dump_json(indent=2)


def render_text(document: ReportDocument, *, trace: bool = False) -> str:
    lines: list[str] = [document.title, "=" * len(document.title)]
    if document.groups:
        lines.append("")
        lines.append("Groups")
        for index, group in enumerate(document.groups, start=1):
            lines.append(f"  {index}: {group.label:<12} n={group.n:<4} mean={group.mean:.4g}  sd={group.sd:.4g}")

    if document.raw_p is not None:
        lines.append("")
        lines.append("Raw p-values")
        lines.append(_header(""))
        lines.append(_row("", [document.raw_p.get(h) for h in HYPOTHESES]))

    if document.adjusted_p:
        lines.append("")
        lines.append("Adjusted p-values")
        lines.append(_header("scenario"))
        for name, adjusted in document.adjusted_p.items():
            label = f"{ROW_LETTERS[adjusted.scenario.kind]} {name}"
            lines.append(_row(label, [adjusted.get(h) for h in HYPOTHESES]))

    if document.decisions:
        lines.append("")
        lines.append("Decisions (p <= alpha rejects)")
        for decision in document.decisions:
            rejected = ", ".join(h.value for h in decision.rejected) or "none"
            lines.append(f"  {decision.method} (alpha={decision.alpha:g}): rejected {rejected}")
            if trace:
                lines.extend(f"      {step}" for step in decision.trace)

    findings = [(name, message) for name, report in document.paradox.items() for message in report.messages]
    if findings:
        lines.append("")
        lines.append("Paradoxical outcomes")
        lines.extend(f"  {name}: {message}" for name, message in findings)

    if document.intervals is not None:
        intervals = document.intervals
        lines.append("")
        lines.append(
            f"Simultaneous {intervals.level:.1%} intervals ({intervals.family}, critical value {intervals.critical_value:.4f})"
        )
        for interval in intervals.intervals:
            i, j = interval.pair
            marker = "*" if interval.excludes_zero else " "
            lines.append(
                f"  ({i},{j}) estimate={interval.estimate:+.4f}  [{interval.lower:+.4f}, {interval.upper:+.4f}] "
                f"adj.p={format_p(interval.adjusted_p)} {marker}"
            )
        lines.append("  * interval excludes 0, exactly when the single-step adjusted p-value is <= alpha")

    if document.estimates:
        lines.append("")
        lines.append("Monte Carlo estimates")
        for record in document.estimates:
            lines.append(
                f"  {record.method:<32} {record.metric:<20} {record.value:.4f}  (mc se {record.mc_se:.4f}, reps {record.reps})"
            )

    meta = document.meta
    if meta.notes:
        lines.append("")
        lines.append("Notes")
        lines.extend(f"  - {note}" for note in meta.notes)
    if meta.seed is not None:
        lines.append("")
        lines.append(f"seed={meta.seed} reps={meta.reps} generator={meta.generator}")

    for section in document.supplementary:
        lines.append("")
        lines.append(render_text(section, trace=trace))
    return "\n".join(lines)


def _header(label: str) -> str:
    return f"  {label:<22}" + "".join(f"{h.value:>8}" for h in HYPOTHESES)


def _row(label: str, values: list[float]) -> str:
    return f"  {label:<22}" + "".join(f"{format_p(value):>8}" for value in values)
