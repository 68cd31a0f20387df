from __future__ import annotations

import math

from scipy import special

from ..errors import invalid_argument, numeric_failure
from ..models import DegreesOfFreedom, as_df
from .roots import solve_decreasing

# p-values below this are numeric noise and reported as 0.
P_FLOOR = 1e-15

_CF_EPS = 1e-16
_CF_TINY = 1e-300
_CF_MAX_ITER = 20_000


def clamp_probability(value: float) -> float:
    if value < P_FLOOR:
        return 0.0
    return min(1.0, value)


def _beta_continued_fraction(a: float, b: float, x: float) -> float:
    """Continued fraction for I_x(a, b), evaluated with the modified Lentz method."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _CF_TINY:
        d = _CF_TINY
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise numeric_failure("incomplete beta continued fraction did not converge", a=a, b=b, x=x)


def _reg_inc_beta(x: float, a: float, b: float, xc: float) -> float:
    # xc = 1 - x, passed separately to avoid cancellation near x = 1
    if x <= 0.0:
        return 0.0
    if xc <= 0.0:
        return 1.0
    log_front = a * math.log(x) + b * math.log(xc) - special.betaln(a, b)
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return min(1.0, front * _beta_continued_fraction(a, b, x) / a)
    return max(0.0, 1.0 - front * _beta_continued_fraction(b, a, xc) / b)


def reg_inc_beta(x: float, a: float, b: float) -> float:
    """Regularized incomplete beta function I_x(a, b)."""
    if not (a > 0.0 and b > 0.0) or math.isinf(a) or math.isinf(b):
        raise invalid_argument("incomplete beta parameters must be positive and finite", a=a, b=b)
    if not 0.0 <= x <= 1.0:
        raise invalid_argument("incomplete beta argument must lie in [0, 1]", x=x)
    return _reg_inc_beta(x, a, b, 1.0 - x)


def student_t_two_sided_p(t: float, nu: DegreesOfFreedom | float) -> float:
    """Two-sided tail probability 2 P(T_nu >= |t|)."""
    df = as_df(nu)
    if math.isnan(t):
        raise invalid_argument("t statistic is NaN")
    t = abs(t)
    if math.isinf(t):
        return 0.0
    if df.is_infinite:
        return clamp_probability(2.0 * float(special.ndtr(-t)))
    denom = df.value + t * t
    return clamp_probability(_reg_inc_beta(df.value / denom, 0.5 * df.value, 0.5, t * t / denom))


def f_sf(x: float, d1: float, d2: DegreesOfFreedom | float) -> float:
    """Upper tail P(F_{d1,d2} >= x)."""
    df2 = as_df(d2)
    if not d1 > 0.0:
        raise invalid_argument("numerator degrees of freedom must be positive", d1=d1)
    if math.isnan(x) or x < 0.0:
        raise invalid_argument("F statistic must be nonnegative", x=x)
    if x == 0.0:
        return 1.0
    if math.isinf(x):
        return 0.0
    if df2.is_infinite:
        return clamp_probability(float(special.gammaincc(0.5 * d1, 0.5 * d1 * x)))
    denom = df2.value + d1 * x
    return clamp_probability(_reg_inc_beta(df2.value / denom, 0.5 * df2.value, 0.5 * d1, d1 * x / denom))


def student_t_critical(alpha: float, nu: DegreesOfFreedom | float) -> float:
    """Two-sided critical value c with student_t_two_sided_p(c, nu) = alpha."""
    if not 0.0 < alpha < 1.0:
        raise invalid_argument("alpha must lie strictly between 0 and 1", alpha=alpha)
    df = as_df(nu)
    return solve_decreasing(
        lambda c: student_t_two_sided_p(c, df),
        alpha,
        label="student t critical value",
    )


def f_critical(alpha: float, d1: float, d2: DegreesOfFreedom | float) -> float:
    """Critical value x with f_sf(x, d1, d2) = alpha."""
    if not 0.0 < alpha < 1.0:
        raise invalid_argument("alpha must lie strictly between 0 and 1", alpha=alpha)
    df2 = as_df(d2)
    return solve_decreasing(
        lambda x: f_sf(x, d1, df2),
        alpha,
        label="F critical value",
    )
