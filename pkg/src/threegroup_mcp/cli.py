from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from pathlib import Path

import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .anova import loadings_from_sizes, raw_p_quartet, summarize, summary_from_stats
from .distributions import dunnett_two_sided_p, student_t_critical, tukey_adjusted_p
from .errors import ErrorCode, MultcompError, invalid_argument
from .models import (
    PAIRWISE,
    AdjustmentInputs,
    AgreementFamily,
    Baseline,
    BaselineKind,
    GroupData,
    Hypothesis,
    Method,
    ProcedureKind,
    PValueQuartet,
    Scenario,
    SimScenario,
    StudySummary,
)
from .procedures import (
    adjust,
    baseline_decide,
    check_paradox,
    dunnett_simultaneous_ci,
    stepwise_decide,
    tukey_simultaneous_ci,
)
from .report import (
    DecisionRecord,
    EstimateRecord,
    ReportDocument,
    ReportMeta,
    decision_record,
    estimate_record,
    power_records,
)
from .simulation import (
    DEFAULT_CHUNK_SIZE,
    agreement_from,
    dominance_from,
    fwer_from,
    generator_identity,
    paradox_from,
    power_from,
    simulate_rejections,
)

logger = logging.getLogger(__name__)

ALL_SCENARIOS = tuple(ProcedureKind)
SUMMARY_NOTE = (
    "p-values were recomputed from summary statistics; they can differ slightly from "
    "p-values computed on the original raw data"
)

# Reported raw p-values of the worked example; "<0.001" entries use the placeholder 0.0005.
EXAMPLE_RAW = PValueQuartet(p12=0.027, p13=0.0005, p23=0.037, p123=0.0005)
EXAMPLE_GROUPS: tuple[tuple[str, int, float, float], ...] = (
    ("1", 20, 11.5, 1.9),
    ("2", 20, 12.8, 1.9),
    ("3", 20, 14.1, 1.9),
)
EXAMPLE_NU = 57
EXAMPLE_PLACEHOLDERS = frozenset({Hypothesis.h13})


# Input.


class SummaryFileGroup(BaseModel):
    label: str
    n: int = Field(ge=2)
    mean: float
    sd: float = Field(ge=0.0)


class SummaryFile(BaseModel):
    groups: list[SummaryFileGroup] = Field(min_length=3, max_length=3)


class AnalysisRequest(BaseModel):
    """Where the data for analyze and ci come from; exactly one source."""

    model_config = ConfigDict(frozen=True)

    csv: Path | None = None
    groups: tuple[str, ...] = ()
    summary_file: Path | None = None

    @model_validator(mode="after")
    def _one_source(self) -> AnalysisRequest:
        sources = sum([self.csv is not None, bool(self.groups), self.summary_file is not None])
        if sources != 1:
            raise ValueError("give exactly one of --csv, --group (three times) or --summary-file")
        return self

    @property
    def from_summary(self) -> bool:
        return self.csv is None


def _parse_error(message: str, **details: object) -> MultcompError:
    return MultcompError(code=ErrorCode.parse_error, message=message, details=dict(details) or None)


def read_csv_groups(path: Path) -> list[GroupData]:
    """Read a `group,value` CSV; labels map to groups 1-3 in order of first appearance."""
    try:
        frame = pd.read_csv(path, dtype={"group": "string", "value": "string"}, encoding="utf-8", skipinitialspace=True)
    except FileNotFoundError as exc:
        raise _parse_error(f"{path}: file not found", path=str(path)) from exc
    except pd.errors.EmptyDataError as exc:
        raise _parse_error(f"{path}: line 1: file is empty", path=str(path), line=1) from exc
    except (pd.errors.ParserError, UnicodeDecodeError, ValueError) as exc:
        raise _parse_error(f"{path}: {exc}", path=str(path)) from exc

    columns = [str(column).strip().lower() for column in frame.columns]
    if columns != ["group", "value"]:
        raise _parse_error(
            f"{path}: line 1: header must be 'group,value', got {','.join(map(str, frame.columns))!r}",
            path=str(path),
            line=1,
        )
    frame.columns = columns

    labels = frame["group"].str.strip()
    values = pd.to_numeric(frame["value"].str.strip(), errors="coerce")
    for position in range(len(frame)):
        line = position + 2
        if pd.isna(labels.iloc[position]) or not labels.iloc[position]:
            raise _parse_error(f"{path}: line {line}, column 1: missing group label", line=line, column=1)
        value = values.iloc[position]
        if pd.isna(value) or not math.isfinite(float(value)):
            raw = frame["value"].iloc[position]
            raise _parse_error(f"{path}: line {line}, column 2: {raw!r} is not a finite number", line=line, column=2)

    order = list(pd.unique(labels))
    if len(order) != 3:
        raise _parse_error(f"{path}: expected exactly 3 groups, got {len(order)}", groups=len(order))
    data = [
        GroupData(
            index=index,
            label=str(label),
            values=tuple(float(v) for v in values[labels == label].to_numpy(dtype=float)),
        )
        for index, label in enumerate(order, start=1)
    ]
    logger.info("CSV read (path=%s, groups=%s, rows=%s)", path, [g.label for g in data], len(frame))
    return data


def parse_group_spec(spec: str, default_label: str) -> tuple[str, tuple[int, float, float]]:
    """Parse `n:mean:sd` or `label=n:mean:sd`."""
    label, _, body = spec.rpartition("=")
    label = label.strip() or default_label
    parts = body.split(":")
    if len(parts) != 3:
        raise invalid_argument(f"group spec {spec!r} must look like n:mean:sd", spec=spec)
    try:
        n = int(parts[0])
        mean = float(parts[1])
        sd = float(parts[2])
    except ValueError as exc:
        raise invalid_argument(f"group spec {spec!r} must look like n:mean:sd", spec=spec) from exc
    return label, (n, mean, sd)


def read_summary_file(path: Path) -> StudySummary:
    try:
        content = SummaryFile.model_validate_json(path.read_bytes())
    except FileNotFoundError as exc:
        raise _parse_error(f"{path}: file not found", path=str(path)) from exc
    except ValidationError as exc:
        raise _parse_error(f"{path}: {exc}", path=str(path)) from exc
    return summary_from_stats(
        [(group.n, group.mean, group.sd) for group in content.groups],
        labels=[group.label for group in content.groups],
    )


def load_summary(request: AnalysisRequest) -> StudySummary:
    if request.csv is not None:
        return summarize(read_csv_groups(request.csv))
    if request.summary_file is not None:
        return read_summary_file(request.summary_file)
    if len(request.groups) != 3:
        raise invalid_argument(f"--group must be given exactly 3 times, got {len(request.groups)}")
    parsed = [parse_group_spec(spec, str(index)) for index, spec in enumerate(request.groups, start=1)]
    return summary_from_stats([triple for _, triple in parsed], labels=[label for label, _ in parsed])


def parse_method(name: str, *, primary: tuple[int, int] = (1, 2), control: int = 1) -> Method:
    """Map a method name (or row letter A-D) to a scenario or baseline."""
    key = name.strip().lower()
    letters = dict(zip("abcd", ProcedureKind, strict=True))
    if key in letters:
        return Scenario(kind=letters[key], primary_pair=primary, control=control)
    try:
        return Scenario(kind=ProcedureKind(key), primary_pair=primary, control=control)
    except ValueError:
        pass
    try:
        return Baseline(kind=BaselineKind(key))
    except ValueError:
        known = [k.value for k in ProcedureKind] + [k.value for k in BaselineKind]
        raise invalid_argument(f"unknown method {name!r}; expected one of {', '.join(known)}", method=name) from None


def parse_scenarios(names: Sequence[str], *, primary: tuple[int, int], control: int) -> list[Scenario]:
    if not names or any(name.strip().lower() == "all" for name in names):
        return [Scenario(kind=kind, primary_pair=primary, control=control) for kind in ALL_SCENARIOS]
    scenarios: list[Scenario] = []
    for name in names:
        method = parse_method(name, primary=primary, control=control)
        if not isinstance(method, Scenario):
            raise invalid_argument(f"{name!r} is a baseline; pass it with --baseline", method=name)
        scenarios.append(method)
    return scenarios


def _check_alpha(alpha: float) -> None:
    if not 0.0 <= alpha <= 1.0:
        raise invalid_argument("alpha must lie in [0, 1]", alpha=alpha)


# Commands.


def _analysis_document(
    title: str,
    inputs: StudySummary | AdjustmentInputs,
    scenarios: Sequence[Scenario],
    baselines: Sequence[Baseline],
    alpha: float,
    *,
    groups: StudySummary | None,
    meta: ReportMeta,
) -> ReportDocument:
    raw = inputs.raw if isinstance(inputs, AdjustmentInputs) else raw_p_quartet(inputs)
    adjusted = {}
    decisions: list[DecisionRecord] = []
    paradox = {}
    for scenario in scenarios:
        adjusted[scenario.name] = adjust(inputs, scenario)
        report = stepwise_decide(inputs, scenario, alpha)
        decisions.append(decision_record(report))
        paradox[scenario.name] = check_paradox(report)
    for baseline in baselines:
        report = baseline_decide(inputs, baseline, alpha)
        decisions.append(decision_record(report))
        paradox[baseline.name] = check_paradox(report)
    return ReportDocument(
        title=title,
        groups=groups.groups if groups is not None else None,
        raw_p=raw,
        adjusted_p=adjusted,
        decisions=tuple(decisions),
        paradox=paradox,
        meta=meta,
    )


def cmd_analyze(
    request: AnalysisRequest,
    *,
    methods: Sequence[str] = (),
    baselines: Sequence[str] = (),
    primary: tuple[int, int] = (1, 2),
    control: int = 1,
    alpha: float = 0.05,
) -> ReportDocument:
    """Full report for the chosen scenarios (all four by default) on one study."""
    _check_alpha(alpha)
    scenarios = parse_scenarios(methods, primary=primary, control=control)
    baseline_methods: list[Baseline] = []
    for name in baselines:
        method = parse_method(name)
        if not isinstance(method, Baseline):
            raise invalid_argument(f"{name!r} is a scenario; pass it with --method", method=name)
        baseline_methods.append(method)
    summary = load_summary(request)
    notes: tuple[str, ...] = ()
    if request.from_summary:
        logger.warning("Analysis uses summary statistics (labels=%s)", summary.labels)
        notes = (SUMMARY_NOTE,)
    logger.info("Analyze started (scenarios=%s, alpha=%s)", [s.name for s in scenarios], alpha)
    return _analysis_document(
        "Three-group multiple comparisons",
        summary,
        scenarios,
        baseline_methods,
        alpha,
        groups=summary,
        meta=ReportMeta(command="analyze", alpha=alpha, notes=notes),
    )


def cmd_adjust(
    p12: float,
    p13: float,
    p23: float,
    p123: float | None = None,
    *,
    method: str = "closed",
    primary: tuple[int, int] = (1, 2),
    alpha: float = 0.05,
) -> ReportDocument:
    """Closed or Shaffer adjustment of p-values coming from any model-appropriate tests."""
    _check_alpha(alpha)
    scenario = parse_method(method, primary=primary)
    if not isinstance(scenario, Scenario):
        raise invalid_argument(f"{method!r} is a baseline, not an adjustment procedure", method=method)
    if scenario.kind in (ProcedureKind.stepdown_dunnett, ProcedureKind.stepdown_tukey):
        raise MultcompError(
            code=ErrorCode.usage_error,
            message=(
                f"{scenario.name} needs test statistics, not p-values alone; use `analyze` with data or summary "
                "statistics, or the closed procedure for models other than one-way ANOVA"
            ),
            details={"method": scenario.name},
        )
    notes: tuple[str, ...] = ()
    if p123 is None:
        if scenario.kind == ProcedureKind.closed:
            raise MultcompError(
                code=ErrorCode.usage_error,
                message="the closed procedure needs the global p-value (--p123)",
            )
        p123 = 1.0
        notes = ("p123 not supplied; Shaffer's procedure does not use it",)
    try:
        raw = PValueQuartet(p12=p12, p13=p13, p23=p23, p123=p123)
    except ValidationError as exc:
        raise invalid_argument(f"p-values must lie in [0, 1]: {exc}") from exc
    adjusted = adjust(raw, scenario)
    report = stepwise_decide(raw, scenario, alpha)
    return ReportDocument(
        title="Adjusted p-values",
        raw_p=raw,
        adjusted_p={scenario.name: adjusted},
        decisions=(decision_record(report),),
        paradox={scenario.name: check_paradox(report)},
        meta=ReportMeta(command="adjust", alpha=alpha, notes=notes),
    )


def cmd_ci(
    request: AnalysisRequest,
    *,
    family: str = "tukey",
    control: int = 1,
    alpha: float = 0.05,
) -> ReportDocument:
    summary = load_summary(request)
    match family:
        case "tukey":
            intervals = tukey_simultaneous_ci(summary, alpha)
        case "dunnett":
            intervals = dunnett_simultaneous_ci(summary, control, alpha)
        case _:
            raise invalid_argument(f"unknown interval family {family!r}; expected tukey or dunnett", family=family)
    notes = [f"an interval excludes 0 exactly when its single-step adjusted p-value is <= {alpha:g}"]
    if family == "dunnett":
        notes.append(f"differences are mean_i - mean_{control}, reported as pair ({control}, i)")
    if request.from_summary:
        notes.append(SUMMARY_NOTE)
    return ReportDocument(
        title="Simultaneous confidence intervals",
        groups=summary.groups,
        intervals=intervals,
        meta=ReportMeta(command="ci", alpha=alpha, notes=tuple(notes)),
    )


def cmd_simulate(
    kind: str,
    scenario: SimScenario,
    methods: Sequence[str],
    *,
    family: str = "both",
    primary: tuple[int, int] = (1, 2),
    control: int = 1,
    workers: int = 1,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> ReportDocument:
    """Monte Carlo estimates for fwer, power, agreement, dominance or paradox."""
    resolved = [parse_method(name, primary=primary, control=control) for name in methods]
    if not resolved:
        raise invalid_argument("simulate needs at least one --method")
    if kind in ("agreement", "dominance") and len(resolved) != 2:
        raise invalid_argument(f"simulate {kind} compares exactly two methods, got {len(resolved)}", kind=kind)
    if kind not in ("fwer", "power", "agreement", "dominance", "paradox"):
        raise invalid_argument(f"unknown simulation {kind!r}", kind=kind)
    families = [AgreementFamily.pairwise, AgreementFamily.all] if family == "both" else [AgreementFamily(family)]

    matrices = simulate_rejections(scenario, resolved, workers=workers, chunk_size=chunk_size)
    records: list[EstimateRecord] = []
    match kind:
        case "fwer":
            records = [estimate_record(m.name, "fwer", fwer_from(scenario, matrices[m])) for m in resolved]
        case "power":
            for m in resolved:
                records.extend(power_records(m.name, power_from(scenario, matrices[m])))
        case "paradox":
            records = [estimate_record(m.name, "paradox", paradox_from(scenario, matrices[m])) for m in resolved]
        case "agreement":
            first, second = resolved
            records = [
                estimate_record(
                    f"{first.name} vs {second.name}",
                    f"agreement:{f.value}",
                    agreement_from(scenario, matrices[first], matrices[second], f),
                )
                for f in families
            ]
        case "dominance":
            method, baseline = resolved
            records = [
                estimate_record(
                    f"{method.name} > {baseline.name}",
                    "dominance",
                    dominance_from(scenario, matrices[method], matrices[baseline]),
                )
            ]
    notes = (
        f"means={scenario.means} sd={scenario.sd:g} n={scenario.n} alpha={scenario.alpha:g}",
        f"true hypotheses: {', '.join(h.value for h in (*PAIRWISE, Hypothesis.h123) if scenario.is_true(h)) or 'none'}",
    )
    return ReportDocument(
        title=f"Simulation: {kind}",
        estimates=tuple(records),
        meta=ReportMeta(
            command=f"simulate {kind}",
            alpha=scenario.alpha,
            seed=scenario.seed,
            reps=scenario.reps,
            generator=generator_identity(),
            notes=notes,
        ),
    )


def example_inputs(
    raw: PValueQuartet = EXAMPLE_RAW,
    nu: float = EXAMPLE_NU,
    n: int = 20,
    placeholders: frozenset[Hypothesis] = EXAMPLE_PLACEHOLDERS,
) -> AdjustmentInputs:
    """
    Single-step Tukey and Dunnett p-values reconstructed from reported raw pairwise p-values.

    Each raw p-value is inverted to its |t| on nu degrees of freedom; a balanced design with
    n per group and control group 1 is assumed. Placeholder entries ("<0.001") stay placeholders.
    """

    def single_step(h: Hypothesis, adjusted: float) -> float:
        return raw.get(h) if h in placeholders else max(adjusted, raw.get(h))

    t = {h: student_t_critical(raw.get(h), nu) for h in PAIRWISE}
    tukey = {h: single_step(h, tukey_adjusted_p(t[h], nu)) for h in PAIRWISE}
    loadings = loadings_from_sizes((n, n, n), 1)
    controls = Scenario(kind=ProcedureKind.stepdown_dunnett, control=1).control_hypotheses
    dunnett = {h: single_step(h, dunnett_two_sided_p(t[h], loadings, nu)) for h in controls}
    return AdjustmentInputs(raw=raw, tukey=tukey, dunnett=dunnett, control=1)


def cmd_example(alpha: float = 0.05) -> ReportDocument:
    """Reproduce the worked example: reported p-values first, then the summary-statistic path."""
    _check_alpha(alpha)
    scenarios = [Scenario(kind=kind) for kind in ALL_SCENARIOS]
    baselines = [Baseline(kind=kind) for kind in BaselineKind]
    reported = _analysis_document(
        "Worked example (reported p-values)",
        example_inputs(),
        scenarios,
        baselines,
        alpha,
        groups=None,
        meta=ReportMeta(
            command="example",
            alpha=alpha,
            notes=(
                "'<0.001' in the reported p-values is represented by the placeholder 0.0005",
                "single-step Tukey and Dunnett p-values are reconstructed by inverting the reported raw p-values "
                f"to t statistics on {EXAMPLE_NU} degrees of freedom",
            ),
        ),
    )
    summary = summary_from_stats(
        [(n, mean, sd) for _, n, mean, sd in EXAMPLE_GROUPS],
        labels=[label for label, *_ in EXAMPLE_GROUPS],
    )
    recomputed = _analysis_document(
        "Worked example (recomputed from summary statistics)",
        summary,
        scenarios,
        baselines,
        alpha,
        groups=summary,
        meta=ReportMeta(
            command="example",
            alpha=alpha,
            notes=(
                SUMMARY_NOTE,
                "the rounded means and sds give p12 near 0.035 instead of the reported 0.027",
            ),
        ),
    )
    return reported.model_copy(update={"supplementary": (recomputed,)})


def parse_triple(text: str, *, cast: type[float] | type[int] = float) -> tuple:
    parts = [part.strip() for part in text.split(",")]
    if len(parts) == 1 and cast is int:
        parts = parts * 3
    if len(parts) != 3:
        raise invalid_argument(f"expected three comma-separated values, got {text!r}", value=text)
    try:
        return tuple(cast(part) for part in parts)
    except ValueError as exc:
        raise invalid_argument(f"expected three comma-separated numbers, got {text!r}", value=text) from exc


def sim_scenario(
    means: tuple[float, float, float],
    sd: float,
    n: tuple[int, int, int],
    *,
    alpha: float,
    reps: int,
    seed: int,
) -> SimScenario:
    try:
        return SimScenario(means=means, sd=sd, n=n, alpha=alpha, reps=reps, seed=seed)
    except ValidationError as exc:
        raise invalid_argument(f"invalid simulation settings: {exc}") from exc
