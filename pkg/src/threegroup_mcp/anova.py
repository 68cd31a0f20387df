from __future__ import annotations

import logging
import math
from collections.abc import Sequence

import numpy as np

from .distributions import f_sf, student_t_two_sided_p
from .errors import ErrorCode, MultcompError, invalid_argument
from .models import (
    PAIR_GROUPS,
    DegreesOfFreedom,
    DunnettLoadings,
    GroupData,
    GroupSummary,
    PValueQuartet,
    StudySummary,
)

logger = logging.getLogger(__name__)

GROUP_COUNT = 3


def summarize(data: Sequence[GroupData]) -> StudySummary:
    """Per-group n/mean/sd plus the pooled error variance on N - 3 degrees of freedom."""
    if len(data) != GROUP_COUNT:
        raise invalid_argument(f"expected exactly 3 groups, got {len(data)}", groups=len(data))
    ordered = sorted(data, key=lambda group: group.index)
    if [group.index for group in ordered] != [1, 2, 3]:
        raise invalid_argument("group indices must be 1, 2 and 3")

    triples: list[tuple[int, float, float]] = []
    for group in ordered:
        values = np.asarray(group.values, dtype=float)
        if values.size < 2:
            raise MultcompError(
                code=ErrorCode.insufficient_data,
                message=f"group {group.label!r} has {values.size} value(s); at least 2 are required",
                details={"group": group.label, "n": int(values.size)},
            )
        if not np.all(np.isfinite(values)):
            raise invalid_argument(f"group {group.label!r} contains non-finite values", group=group.label)
        triples.append((int(values.size), float(values.mean()), float(values.std(ddof=1))))
    return summary_from_stats(triples, labels=[group.label for group in ordered])


def summary_from_stats(
    triples: Sequence[tuple[int, float, float]],
    *,
    labels: Sequence[str] | None = None,
) -> StudySummary:
    """Build a StudySummary from (n, mean, sd) per group."""
    if len(triples) != GROUP_COUNT:
        raise invalid_argument(f"expected exactly 3 groups, got {len(triples)}", groups=len(triples))
    labels = list(labels) if labels is not None else ["1", "2", "3"]
    groups: list[GroupSummary] = []
    for label, (n, mean, sd) in zip(labels, triples, strict=True):
        if n < 2:
            raise MultcompError(
                code=ErrorCode.insufficient_data,
                message=f"group {label!r} has n={n}; at least 2 are required",
                details={"group": label, "n": n},
            )
        if not (math.isfinite(mean) and math.isfinite(sd)) or sd < 0.0:
            raise invalid_argument(f"group {label!r} needs a finite mean and a nonnegative finite sd", group=label)
        groups.append(GroupSummary(label=label, n=int(n), mean=float(mean), sd=float(sd)))

    nu = sum(group.n for group in groups) - GROUP_COUNT
    pooled_var = sum((group.n - 1) * group.sd**2 for group in groups) / nu
    if not pooled_var > 0.0:
        raise MultcompError(
            code=ErrorCode.degenerate_data,
            message="pooled variance is zero: every group is constant",
            details={"labels": labels},
        )
    summary = StudySummary(
        groups=(groups[0], groups[1], groups[2]),
        pooled_var=pooled_var,
        nu=DegreesOfFreedom(value=float(nu)),
    )
    logger.debug("Study summarized (n=%s, pooled_var=%s, nu=%s)", [g.n for g in groups], pooled_var, nu)
    return summary


def reconstruct_groups(summary: StudySummary) -> list[GroupData]:
    """Deterministic raw data whose per-group n, mean and sd equal the summary's."""
    data: list[GroupData] = []
    for index, group in enumerate(summary.groups, start=1):
        base = np.arange(group.n, dtype=float) - 0.5 * (group.n - 1)
        base /= base.std(ddof=1)
        values = group.mean + group.sd * base
        data.append(GroupData(index=index, label=group.label, values=tuple(float(v) for v in values)))
    return data


def pair_standard_error(s: StudySummary, i: int, j: int) -> float:
    return math.sqrt(s.pooled_var * (1.0 / s.group(i).n + 1.0 / s.group(j).n))


def pairwise_t(s: StudySummary, i: int, j: int) -> float:
    """Pooled-variance t statistic for mean_i - mean_j."""
    if i == j or not {i, j} <= {1, 2, 3}:
        raise invalid_argument("pairwise t needs two distinct groups in 1..3", i=i, j=j)
    return (s.group(i).mean - s.group(j).mean) / pair_standard_error(s, i, j)


def anova_f(s: StudySummary) -> float:
    """One-way ANOVA F statistic on (2, nu) degrees of freedom."""
    total = sum(group.n for group in s.groups)
    grand_mean = sum(group.n * group.mean for group in s.groups) / total
    between = sum(group.n * (group.mean - grand_mean) ** 2 for group in s.groups)
    return (between / (GROUP_COUNT - 1)) / s.pooled_var


def raw_p_quartet(s: StudySummary) -> PValueQuartet:
    """Two-sided pairwise t-test p-values and the ANOVA F-test p-value."""
    values = {
        f"p{i}{j}": student_t_two_sided_p(pairwise_t(s, i, j), s.nu)
        for i, j in PAIR_GROUPS.values()
    }
    values["p123"] = f_sf(anova_f(s), float(GROUP_COUNT - 1), s.nu)
    return PValueQuartet(**values)


def dunnett_loadings(s: StudySummary, control: int) -> DunnettLoadings:
    """Factor loadings sqrt(n_i / (n_i + n_control)) of the two treatment-versus-control comparisons."""
    return loadings_from_sizes(tuple(group.n for group in s.groups), control)


def loadings_from_sizes(sizes: Sequence[int], control: int) -> DunnettLoadings:
    if control not in (1, 2, 3):
        raise invalid_argument("control must be group 1, 2 or 3", control=control)
    n_control = sizes[control - 1]
    gammas = tuple(math.sqrt(sizes[g - 1] / (sizes[g - 1] + n_control)) for g in (1, 2, 3) if g != control)
    return DunnettLoadings(gammas=gammas)
