from __future__ import annotations

import logging
import math
from collections.abc import Iterable, Mapping

from .anova import dunnett_loadings, pair_standard_error, pairwise_t, raw_p_quartet
from .distributions import (
    dunnett_critical,
    dunnett_two_sided_p,
    studentized_range_quantile,
    tukey_adjusted_p,
)
from .errors import invalid_argument
from .models import (
    PAIR_GROUPS,
    PAIRWISE,
    AdjustedQuartet,
    AdjustmentInputs,
    Baseline,
    BaselineKind,
    Hypothesis,
    PairInterval,
    ParadoxReport,
    ProcedureKind,
    PValueQuartet,
    RejectionReport,
    Scenario,
    SimultaneousIntervals,
    StudySummary,
)

logger = logging.getLogger(__name__)

BONFERRONI_FAMILY_SIZE = 3

StepInputs = PValueQuartet | StudySummary | AdjustmentInputs

_STEP_ONE_METHOD: dict[ProcedureKind, str] = {
    ProcedureKind.closed: "the ANOVA F-test",
    ProcedureKind.shaffer: "a t-test",
    ProcedureKind.stepdown_dunnett: "Dunnett's procedure",
    ProcedureKind.stepdown_tukey: "Tukey's procedure",
}


# Single-step adjusted p-values of the primary tests.


def single_step_tukey(s: StudySummary) -> dict[Hypothesis, float]:
    """Single-step Tukey(-Kramer) adjusted p-values for the three pairwise comparisons."""
    return {
        hypothesis: tukey_adjusted_p(pairwise_t(s, i, j), s.nu)
        for hypothesis, (i, j) in PAIR_GROUPS.items()
    }


def single_step_dunnett(s: StudySummary, control: int = 1) -> dict[Hypothesis, float]:
    """Single-step Dunnett adjusted p-values for the two comparisons with the control group."""
    loadings = dunnett_loadings(s, control)
    scenario = Scenario(kind=ProcedureKind.stepdown_dunnett, control=control)
    result: dict[Hypothesis, float] = {}
    for hypothesis in scenario.control_hypotheses:
        i, j = PAIR_GROUPS[hypothesis]
        result[hypothesis] = dunnett_two_sided_p(abs(pairwise_t(s, i, j)), loadings, s.nu)
    return result


def bonferroni_adjusted(raw: PValueQuartet) -> dict[Hypothesis, float]:
    return {hypothesis: min(1.0, BONFERRONI_FAMILY_SIZE * raw.get(hypothesis)) for hypothesis in PAIRWISE}


def prepare_inputs(inputs: StepInputs, scenario: Scenario | None = None) -> AdjustmentInputs:
    """
    Normalize any accepted input to AdjustmentInputs.

    A StudySummary yields raw p-values plus whatever single-step values the scenario needs;
    a bare PValueQuartet only supports the Closed and Shaffer procedures.
    """
    kind = scenario.kind if scenario is not None else None
    if isinstance(inputs, StudySummary):
        tukey = single_step_tukey(inputs) if kind == ProcedureKind.stepdown_tukey else None
        dunnett = None
        control = None
        if kind == ProcedureKind.stepdown_dunnett and scenario is not None:
            control = scenario.control
            dunnett = single_step_dunnett(inputs, control)
        return AdjustmentInputs(raw=raw_p_quartet(inputs), tukey=tukey, dunnett=dunnett, control=control)
    if isinstance(inputs, PValueQuartet):
        inputs = AdjustmentInputs(raw=inputs)
    if kind == ProcedureKind.stepdown_tukey and inputs.tukey is None:
        raise invalid_argument(
            "step-down Tukey needs test statistics (a study summary or Tukey-adjusted p-values), not p-values alone",
            scenario=kind.value,
        )
    if kind == ProcedureKind.stepdown_dunnett and scenario is not None:
        if inputs.dunnett is None:
            raise invalid_argument(
                "step-down Dunnett needs test statistics (a study summary or Dunnett-adjusted p-values), not p-values alone",
                scenario=kind.value,
            )
        if inputs.control is not None and inputs.control != scenario.control:
            raise invalid_argument(
                "Dunnett-adjusted p-values were computed for a different control group",
                expected=scenario.control,
                got=inputs.control,
            )
    return inputs


def _step_one_pvalues(inputs: AdjustmentInputs, scenario: Scenario) -> dict[Hypothesis, float]:
    """p-values of the primary hypotheses as tested in Step 1 (never below their raw p-value)."""
    raw = inputs.raw
    match scenario.kind:
        case ProcedureKind.closed:
            return {Hypothesis.h123: raw.p123}
        case ProcedureKind.shaffer:
            primary = scenario.primary_hypothesis
            return {primary: raw.get(primary)}
        case ProcedureKind.stepdown_dunnett:
            single_step: Mapping[Hypothesis, float] = inputs.dunnett or {}
            primaries: tuple[Hypothesis, ...] = scenario.control_hypotheses
        case ProcedureKind.stepdown_tukey:
            single_step = inputs.tukey or {}
            primaries = PAIRWISE
    missing = [h.value for h in primaries if h not in single_step]
    if missing:
        raise invalid_argument("single-step adjusted p-values missing for primary hypotheses", missing=missing)
    return {h: max(single_step[h], raw.get(h)) for h in primaries}


# Adjusted p-values, rows A-D.


def _adjusted_rows(raw: PValueQuartet, step_one: Mapping[Hypothesis, float], scenario: Scenario) -> AdjustedQuartet:
    best = min(step_one.values())
    return AdjustedQuartet(
        scenario=scenario,
        q12=max(raw.p12, best),
        q13=max(raw.p13, best),
        q23=max(raw.p23, best),
        q123=best,
        stepone_min=best,
    )


def adjust_closed(q: PValueQuartet) -> AdjustedQuartet:
    scenario = Scenario(kind=ProcedureKind.closed)
    return _adjusted_rows(q, _step_one_pvalues(AdjustmentInputs(raw=q), scenario), scenario)


def adjust_shaffer(q: PValueQuartet, primary_pair: tuple[int, int] = (1, 2)) -> AdjustedQuartet:
    """Shaffer's procedure; p123 plays no role."""
    scenario = Scenario(kind=ProcedureKind.shaffer, primary_pair=primary_pair)
    return _adjusted_rows(q, _step_one_pvalues(AdjustmentInputs(raw=q), scenario), scenario)


def adjust_from_single_step(
    raw: PValueQuartet,
    single_step: Mapping[Hypothesis, float],
    scenario: Scenario,
) -> AdjustedQuartet:
    """Rows C/D from raw p-values and supplied single-step Dunnett or Tukey p-values."""
    match scenario.kind:
        case ProcedureKind.stepdown_dunnett:
            inputs = AdjustmentInputs(raw=raw, dunnett=dict(single_step), control=scenario.control)
        case ProcedureKind.stepdown_tukey:
            inputs = AdjustmentInputs(raw=raw, tukey=dict(single_step))
        case _:
            raise invalid_argument("single-step p-values only apply to the step-down procedures", scenario=scenario.name)
    return _adjusted_rows(raw, _step_one_pvalues(inputs, scenario), scenario)


def adjust_stepdown_dunnett(s: StudySummary, control: int = 1) -> AdjustedQuartet:
    scenario = Scenario(kind=ProcedureKind.stepdown_dunnett, control=control)
    return adjust(s, scenario)


def adjust_stepdown_tukey(s: StudySummary) -> AdjustedQuartet:
    return adjust(s, Scenario(kind=ProcedureKind.stepdown_tukey))


def adjust(inputs: StepInputs, scenario: Scenario) -> AdjustedQuartet:
    """Adjusted p-values of the four hypotheses for any scenario."""
    prepared = prepare_inputs(inputs, scenario)
    return _adjusted_rows(prepared.raw, _step_one_pvalues(prepared, scenario), scenario)


# Decisions.


def _names(hypotheses: Iterable[Hypothesis]) -> str:
    items = [h.value for h in sorted(hypotheses, key=_order)]
    return ", ".join(items) if items else "none"


def _order(hypothesis: Hypothesis) -> int:
    return [*PAIRWISE, Hypothesis.h123].index(hypothesis)


def stepwise_decide(inputs: StepInputs, scenario: Scenario, alpha: float) -> RejectionReport:
    """Run the two-step procedure literally, recording a trace of each step."""
    prepared = prepare_inputs(inputs, scenario)
    raw = prepared.raw
    step_one = _step_one_pvalues(prepared, scenario)

    rejected = {h for h, p in step_one.items() if p <= alpha}
    trace = [
        f"Step 1: tested {_names(step_one)} with {_STEP_ONE_METHOD[scenario.kind]} at alpha={alpha:g}; "
        f"rejected {_names(rejected)}"
    ]
    if not rejected:
        trace.append("Stopped: no primary hypothesis rejected")
        return RejectionReport(alpha=alpha, rejected=frozenset(), method=scenario, trace=tuple(trace))

    if Hypothesis.h123 not in rejected:
        rejected.add(Hypothesis.h123)
        trace.append("Step 2: rejected H123 immediately")
    remaining = [h for h in PAIRWISE if h not in rejected]
    step_two = {h for h in remaining if raw.get(h) <= alpha}
    rejected |= step_two
    if not remaining:
        trace.append("Step 2: no pairwise hypothesis left to test")
    else:
        each = " each" if len(remaining) > 1 else ""
        trace.append(f"Step 2: tested {_names(remaining)}{each} at alpha={alpha:g}; rejected {_names(step_two)}")
    logger.debug("Stepwise decision (scenario=%s, alpha=%s, rejected=%s)", scenario.name, alpha, _names(rejected))
    return RejectionReport(alpha=alpha, rejected=frozenset(rejected), method=scenario, trace=tuple(trace))


def decide_from_adjusted(a: AdjustedQuartet, alpha: float) -> RejectionReport:
    """Reject exactly the hypotheses whose adjusted p-value is at most alpha."""
    rejected = frozenset(h for h, q in a.as_dict().items() if q <= alpha)
    return RejectionReport(alpha=alpha, rejected=rejected, method=a.scenario)


def baseline_decide(inputs: StepInputs, baseline: Baseline, alpha: float) -> RejectionReport:
    """The commonly used procedures the stepwise methods are compared against."""
    if isinstance(inputs, StudySummary):
        tukey = single_step_tukey(inputs) if baseline.kind == BaselineKind.anova_tukey else None
        prepared = AdjustmentInputs(raw=raw_p_quartet(inputs), tukey=tukey)
    else:
        prepared = prepare_inputs(inputs)
    raw = prepared.raw

    match baseline.kind:
        case BaselineKind.unadjusted:
            rejected = {h for h, p in raw.as_dict().items() if p <= alpha}
        case BaselineKind.anova_tukey:
            if prepared.tukey is None:
                raise invalid_argument("ANOVA followed by Tukey needs test statistics, not p-values alone")
            rejected = set()
            if raw.p123 <= alpha:
                rejected = {Hypothesis.h123} | {
                    h for h in PAIRWISE if max(prepared.tukey[h], raw.get(h)) <= alpha
                }
        case BaselineKind.anova_bonferroni:
            rejected = set()
            if raw.p123 <= alpha:
                bonferroni = bonferroni_adjusted(raw)
                rejected = {Hypothesis.h123} | {h for h in PAIRWISE if bonferroni[h] <= alpha}
    return RejectionReport(alpha=alpha, rejected=frozenset(rejected), method=baseline)


def check_paradox(r: RejectionReport) -> ParadoxReport:
    """Flag rejection patterns that logically imply further, unidentified false hypotheses."""
    pairwise = r.pairwise_rejected
    count = len(pairwise)
    implied = 0
    messages: list[str] = []
    if count == 1:
        implied = 1
        (only,) = tuple(pairwise)
        others = [h.value for h in PAIRWISE if h != only]
        messages.append(
            f"Only {only.value} was rejected; at least one of {others[0]} or {others[1]} must also be false, "
            "but the data do not say which."
        )
    elif count == 0 and Hypothesis.h123 in r.rejected:
        implied = 2
        messages.append(
            "H123 was rejected but no pairwise hypothesis was; at least two pairwise hypotheses must be false, "
            "but the data do not say which."
        )
    return ParadoxReport(pairwise_rejections=count, implied_additional_false=implied, messages=tuple(messages))


# Single-step simultaneous confidence intervals.


def tukey_simultaneous_ci(s: StudySummary, alpha: float = 0.05) -> SimultaneousIntervals:
    """Tukey(-Kramer) intervals for mean_i - mean_j over all three pairs."""
    if not 0.0 < alpha < 1.0:
        raise invalid_argument("alpha must lie strictly between 0 and 1", alpha=alpha)
    critical = studentized_range_quantile(1.0 - alpha, 3, s.nu) / math.sqrt(2.0)
    adjusted = single_step_tukey(s)
    intervals = []
    for hypothesis, (i, j) in PAIR_GROUPS.items():
        estimate = s.group(i).mean - s.group(j).mean
        half_width = critical * pair_standard_error(s, i, j)
        intervals.append(
            PairInterval(
                pair=(i, j),
                estimate=estimate,
                lower=estimate - half_width,
                upper=estimate + half_width,
                adjusted_p=adjusted[hypothesis],
            )
        )
    return SimultaneousIntervals(family="tukey", level=1.0 - alpha, critical_value=critical, intervals=tuple(intervals))


def dunnett_simultaneous_ci(s: StudySummary, control: int = 1, alpha: float = 0.05) -> SimultaneousIntervals:
    """Dunnett intervals for mean_i - mean_control; pair is reported as (control, i)."""
    if not 0.0 < alpha < 1.0:
        raise invalid_argument("alpha must lie strictly between 0 and 1", alpha=alpha)
    loadings = dunnett_loadings(s, control)
    critical = dunnett_critical(alpha, loadings, s.nu)
    adjusted = single_step_dunnett(s, control)
    intervals = []
    for g in (1, 2, 3):
        if g == control:
            continue
        estimate = s.group(g).mean - s.group(control).mean
        half_width = critical * pair_standard_error(s, g, control)
        hypothesis = next(h for h in adjusted if set(PAIR_GROUPS[h]) == {g, control})
        intervals.append(
            PairInterval(
                pair=(control, g),
                estimate=estimate,
                lower=estimate - half_width,
                upper=estimate + half_width,
                adjusted_p=adjusted[hypothesis],
            )
        )
    return SimultaneousIntervals(family="dunnett", level=1.0 - alpha, critical_value=critical, intervals=tuple(intervals))
