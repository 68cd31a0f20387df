from __future__ import annotations

from collections.abc import Callable

from scipy import optimize

from ..errors import numeric_failure

MAX_ITERATIONS = 200
X_TOLERANCE = 1e-12


def _expand_upper(
    residual: Callable[[float], float],
    *,
    start: float,
    label: str,
) -> float:
    """Double `start` until the residual changes sign (residual(0) is assumed < 0)."""
    upper = start
    for _ in range(MAX_ITERATIONS):
        if residual(upper) >= 0.0:
            return upper
        upper *= 2.0
    raise numeric_failure(f"could not bracket the {label}", last_upper=upper)


def _bracketed_root(residual: Callable[[float], float], lower: float, upper: float, *, label: str) -> float:
    try:
        root = optimize.brentq(
            residual,
            lower,
            upper,
            xtol=X_TOLERANCE,
            rtol=4.0 * 2.220446049250313e-16,
            maxiter=MAX_ITERATIONS,
        )
    except (RuntimeError, ValueError) as exc:
        raise numeric_failure(f"root search for the {label} failed", error=str(exc)) from exc
    return float(root)


def solve_increasing(
    fn: Callable[[float], float],
    target: float,
    *,
    label: str,
    lower: float = 0.0,
    start: float = 4.0,
) -> float:
    """Solve fn(x) = target for x >= lower, fn nondecreasing with fn(lower) <= target."""

    def residual(x: float) -> float:
        return fn(x) - target

    if residual(lower) >= 0.0:
        return lower
    upper = _expand_upper(residual, start=max(start, lower + start), label=label)
    return _bracketed_root(residual, lower, upper, label=label)


def solve_decreasing(
    fn: Callable[[float], float],
    target: float,
    *,
    label: str,
    lower: float = 0.0,
    start: float = 4.0,
) -> float:
    """Solve fn(x) = target for x >= lower, fn nonincreasing with fn(lower) >= target."""

    def residual(x: float) -> float:
        return target - fn(x)

    if residual(lower) >= 0.0:
        return lower
    upper = _expand_upper(residual, start=max(start, lower + start), label=label)
    return _bracketed_root(residual, lower, upper, label=label)
