from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from numpy.typing import NDArray
from scipy import special

from ..errors import invalid_argument
from ..models import DegreesOfFreedom, as_df
from .quadrature import NORMAL_CUTOFF, chi_scale_average, gauss_legendre_integrate
from .roots import solve_increasing
from .special import clamp_probability

_INNER_TOL = 1e-11
_OUTER_TOL = 1e-10


def _range_cdf_normal(x: NDArray[np.float64], k: int) -> NDArray[np.float64]:
    """P(range of k standard normals <= x), vectorized over x."""
    x = np.atleast_1d(np.asarray(x, dtype=float))

    def integrand(z: NDArray[np.float64]) -> NDArray[np.float64]:
        phi = np.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)
        spread = special.ndtr(z[None, :]) - special.ndtr(z[None, :] - x[:, None])
        return k * phi[None, :] * np.power(np.clip(spread, 0.0, 1.0), k - 1)

    values = gauss_legendre_integrate(integrand, -NORMAL_CUTOFF, NORMAL_CUTOFF, tol=_INNER_TOL)
    return np.where(x > 0.0, np.clip(values, 0.0, 1.0), 0.0)


@lru_cache(maxsize=4096)
def _studentized_range_cdf(q: float, k: int, nu: float) -> float:
    if math.isinf(nu):
        return float(_range_cdf_normal(np.array([q]), k)[0])
    value = chi_scale_average(lambda x: _range_cdf_normal(x, k), q, nu, tol=_OUTER_TOL)
    return min(1.0, max(0.0, value))


def studentized_range_cdf(q: float, k: int, nu: DegreesOfFreedom | float) -> float:
    """P(Q_{k,nu} <= q) for the range of k standard normals studentized by chi_nu/sqrt(nu)."""
    if k < 2:
        raise invalid_argument("studentized range needs k >= 2", k=k)
    df = as_df(nu)
    if math.isnan(q):
        raise invalid_argument("q is NaN")
    if q <= 0.0:
        return 0.0
    if math.isinf(q):
        return 1.0
    return _studentized_range_cdf(float(q), int(k), df.value)


def studentized_range_quantile(p: float, k: int, nu: DegreesOfFreedom | float) -> float:
    """q with studentized_range_cdf(q, k, nu) = p."""
    if not 0.0 < p < 1.0:
        raise invalid_argument("probability must lie strictly between 0 and 1", p=p)
    if k < 2:
        raise invalid_argument("studentized range needs k >= 2", k=k)
    df = as_df(nu)
    return solve_increasing(
        lambda q: studentized_range_cdf(q, k, df),
        p,
        label="studentized range quantile",
    )


def tukey_adjusted_p(t: float, nu: DegreesOfFreedom | float) -> float:
    """Single-step Tukey(-Kramer) adjusted p-value of a pairwise t statistic among three groups."""
    if math.isnan(t):
        raise invalid_argument("t statistic is NaN")
    if t == 0.0:
        return 1.0
    return clamp_probability(1.0 - studentized_range_cdf(math.sqrt(2.0) * abs(t), 3, nu))
