from __future__ import annotations

import math
from enum import StrEnum
from typing import Annotated, Self

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

Probability = Annotated[float, Field(ge=0.0, le=1.0)]
GroupIndex = Annotated[int, Field(ge=1, le=3)]
Pair = tuple[int, int]


class Hypothesis(StrEnum):
    h12 = "H12"
    h13 = "H13"
    h23 = "H23"
    h123 = "H123"


PAIRWISE: tuple[Hypothesis, Hypothesis, Hypothesis] = (Hypothesis.h12, Hypothesis.h13, Hypothesis.h23)
HYPOTHESES: tuple[Hypothesis, ...] = (*PAIRWISE, Hypothesis.h123)

PAIR_GROUPS: dict[Hypothesis, Pair] = {
    Hypothesis.h12: (1, 2),
    Hypothesis.h13: (1, 3),
    Hypothesis.h23: (2, 3),
}


def pair_hypothesis(i: int, j: int) -> Hypothesis:
    """Map an unordered group pair to its pairwise hypothesis."""
    key = (min(i, j), max(i, j))
    for hypothesis, groups in PAIR_GROUPS.items():
        if groups == key:
            return hypothesis
    raise ValueError(f"no pairwise hypothesis for groups ({i}, {j})")


class ProcedureKind(StrEnum):
    closed = "closed"
    shaffer = "shaffer"
    stepdown_dunnett = "stepdown-dunnett"
    stepdown_tukey = "stepdown-tukey"


class BaselineKind(StrEnum):
    unadjusted = "unadjusted"
    anova_tukey = "anova-tukey"
    anova_bonferroni = "anova-bonferroni"


class AgreementFamily(StrEnum):
    pairwise = "pairwise"
    all = "all"


class DegreesOfFreedom(BaseModel):
    """Error degrees of freedom; `math.inf` is the infinite (known variance) marker."""

    model_config = ConfigDict(frozen=True)

    value: float = Field(gt=0.0)

    @field_validator("value")
    @classmethod
    def _not_nan(cls, value: float) -> float:
        if math.isnan(value):
            raise ValueError("degrees of freedom must not be NaN")
        return value

    @classmethod
    def infinite(cls) -> DegreesOfFreedom:
        return cls(value=math.inf)

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.value)

    def __str__(self) -> str:
        return "inf" if self.is_infinite else f"{self.value:g}"


def as_df(nu: DegreesOfFreedom | float | int) -> DegreesOfFreedom:
    if isinstance(nu, DegreesOfFreedom):
        return nu
    return DegreesOfFreedom(value=float(nu))


class DunnettLoadings(BaseModel):
    model_config = ConfigDict(frozen=True)

    gammas: tuple[float, ...] = Field(min_length=1)

    @field_validator("gammas")
    @classmethod
    def _in_unit_interval(cls, gammas: tuple[float, ...]) -> tuple[float, ...]:
        for gamma in gammas:
            if not 0.0 <= gamma < 1.0:
                raise ValueError(f"factor loading {gamma!r} outside [0, 1)")
        return gammas


class GroupData(BaseModel):
    model_config = ConfigDict(frozen=True)

    index: GroupIndex
    label: str
    values: tuple[float, ...]


class GroupSummary(BaseModel):
    model_config = ConfigDict(frozen=True)

    label: str
    n: int = Field(ge=2)
    mean: float
    sd: float = Field(ge=0.0)


class StudySummary(BaseModel):
    """Sufficient statistics of the one-way ANOVA model with three groups."""

    model_config = ConfigDict(frozen=True)

    groups: tuple[GroupSummary, GroupSummary, GroupSummary]
    pooled_var: float = Field(gt=0.0)
    nu: DegreesOfFreedom

    def group(self, index: int) -> GroupSummary:
        return self.groups[index - 1]

    @property
    def labels(self) -> tuple[str, str, str]:
        return (self.groups[0].label, self.groups[1].label, self.groups[2].label)

    @property
    def is_balanced(self) -> bool:
        return len({group.n for group in self.groups}) == 1


class PValueQuartet(BaseModel):
    model_config = ConfigDict(frozen=True)

    p12: Probability
    p13: Probability
    p23: Probability
    p123: Probability

    def get(self, hypothesis: Hypothesis) -> float:
        return getattr(self, "p" + hypothesis.value[1:])

    def as_dict(self) -> dict[Hypothesis, float]:
        return {hypothesis: self.get(hypothesis) for hypothesis in HYPOTHESES}

    def relabel(self, mapping: dict[int, int]) -> PValueQuartet:
        """Return the quartet seen after renaming group g to mapping[g]."""
        values: dict[str, float] = {"p123": self.p123}
        for hypothesis in PAIRWISE:
            i, j = PAIR_GROUPS[hypothesis]
            target = pair_hypothesis(mapping[i], mapping[j])
            values["p" + target.value[1:]] = self.get(hypothesis)
        return PValueQuartet(**values)


class Scenario(BaseModel):
    """One of the four stepwise procedures, with its primary pair or control group."""

    model_config = ConfigDict(frozen=True)

    kind: ProcedureKind
    primary_pair: Pair = (1, 2)
    control: GroupIndex = 1

    @field_validator("primary_pair")
    @classmethod
    def _distinct_pair(cls, pair: Pair) -> Pair:
        i, j = pair
        if i == j or not {i, j} <= {1, 2, 3}:
            raise ValueError(f"primary pair must be two distinct groups in 1..3, got {pair}")
        return (min(i, j), max(i, j))

    @property
    def name(self) -> str:
        return self.kind.value

    @property
    def primary_hypothesis(self) -> Hypothesis:
        return pair_hypothesis(*self.primary_pair)

    @property
    def control_hypotheses(self) -> tuple[Hypothesis, Hypothesis]:
        others = [g for g in (1, 2, 3) if g != self.control]
        return (pair_hypothesis(self.control, others[0]), pair_hypothesis(self.control, others[1]))


class Baseline(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: BaselineKind

    @property
    def name(self) -> str:
        return self.kind.value


Method = Scenario | Baseline


class AdjustedQuartet(BaseModel):
    model_config = ConfigDict(frozen=True)

    scenario: Scenario
    q12: Probability
    q13: Probability
    q23: Probability
    q123: Probability
    stepone_min: Probability

    @model_validator(mode="after")
    def _global_not_above_pairs(self) -> Self:
        if self.q123 > min(self.q12, self.q13, self.q23):
            raise ValueError("adjusted p for H123 exceeds an adjusted pairwise p-value")
        return self

    def get(self, hypothesis: Hypothesis) -> float:
        return getattr(self, "q" + hypothesis.value[1:])

    def as_dict(self) -> dict[Hypothesis, float]:
        return {hypothesis: self.get(hypothesis) for hypothesis in HYPOTHESES}


class AdjustmentInputs(BaseModel):
    """Raw p-values plus the single-step adjusted p-values of the primary tests."""

    model_config = ConfigDict(frozen=True)

    raw: PValueQuartet
    tukey: dict[Hypothesis, Probability] | None = None
    dunnett: dict[Hypothesis, Probability] | None = None
    control: GroupIndex | None = None


class RejectionReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    alpha: Probability
    rejected: frozenset[Hypothesis]
    method: Scenario | Baseline
    trace: tuple[str, ...] = ()

    @property
    def pairwise_rejected(self) -> frozenset[Hypothesis]:
        return self.rejected - {Hypothesis.h123}


class ParadoxReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    pairwise_rejections: int = Field(ge=0, le=3)
    implied_additional_false: int = Field(ge=0, le=2)
    messages: tuple[str, ...] = ()


class PairInterval(BaseModel):
    model_config = ConfigDict(frozen=True)

    pair: Pair
    estimate: float
    lower: float
    upper: float
    adjusted_p: Probability

    @model_validator(mode="after")
    def _ordered(self) -> Self:
        if not self.lower <= self.estimate <= self.upper:
            raise ValueError("interval bounds do not bracket the estimate")
        return self

    @property
    def excludes_zero(self) -> bool:
        return self.lower > 0.0 or self.upper < 0.0


class SimultaneousIntervals(BaseModel):
    model_config = ConfigDict(frozen=True)

    family: str
    level: Probability
    critical_value: float
    intervals: tuple[PairInterval, ...]


class SimScenario(BaseModel):
    """Monte Carlo configuration for one design."""

    model_config = ConfigDict(frozen=True)

    means: tuple[float, float, float]
    sd: float = Field(gt=0.0)
    n: tuple[int, int, int]
    alpha: Probability = 0.05
    reps: int = Field(default=100_000, ge=1)
    seed: int = Field(default=20240601, ge=0, lt=2**64)

    @field_validator("n")
    @classmethod
    def _group_sizes(cls, n: tuple[int, int, int]) -> tuple[int, int, int]:
        if any(size < 2 for size in n):
            raise ValueError(f"each group needs at least 2 subjects, got {n}")
        return n

    def is_true(self, hypothesis: Hypothesis) -> bool:
        """Truth of a null hypothesis, by exact equality of the configured means."""
        if hypothesis == Hypothesis.h123:
            return self.means[0] == self.means[1] == self.means[2]
        i, j = PAIR_GROUPS[hypothesis]
        return self.means[i - 1] == self.means[j - 1]


class SimEstimate(BaseModel):
    model_config = ConfigDict(frozen=True)

    value: Probability
    mc_se: float = Field(ge=0.0)
    reps: int = Field(ge=1)

    @classmethod
    def from_mean(cls, value: float, reps: int) -> SimEstimate:
        value = min(1.0, max(0.0, value))
        return cls(value=value, mc_se=math.sqrt(value * (1.0 - value) / reps), reps=reps)


class PowerReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    per_hypothesis: dict[Hypothesis, SimEstimate]
    avg_pairwise: SimEstimate
    all_pairwise: SimEstimate
    any_pairwise: SimEstimate
