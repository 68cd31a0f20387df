from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from numpy.typing import NDArray
from scipy import special

from ..errors import invalid_argument
from ..models import DegreesOfFreedom, DunnettLoadings, as_df
from .quadrature import NORMAL_CUTOFF, chi_scale_average, gauss_legendre_integrate
from .roots import solve_decreasing
from .special import clamp_probability

_INNER_TOL = 1e-11
_OUTER_TOL = 1e-10


def _max_abs_cdf_normal(x: NDArray[np.float64], gammas: tuple[float, ...]) -> NDArray[np.float64]:
    """
    P(max_i |Z_i| < x) for standard normals with corr(Z_i, Z_j) = gamma_i * gamma_j.

    Conditional on the shared factor z the comparisons are independent:
    Z_i = gamma_i z + sqrt(1 - gamma_i^2) E_i.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))

    def integrand(z: NDArray[np.float64]) -> NDArray[np.float64]:
        phi = np.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)
        product = np.ones((x.size, z.size))
        for gamma in gammas:
            scale = math.sqrt(1.0 - gamma * gamma)
            shift = gamma * z[None, :]
            upper = special.ndtr((x[:, None] - shift) / scale)
            lower = special.ndtr((-x[:, None] - shift) / scale)
            product *= np.clip(upper - lower, 0.0, 1.0)
        return phi[None, :] * product

    values = gauss_legendre_integrate(integrand, -NORMAL_CUTOFF, NORMAL_CUTOFF, tol=_INNER_TOL)
    return np.where(x > 0.0, np.clip(values, 0.0, 1.0), 0.0)


@lru_cache(maxsize=4096)
def _dunnett_cdf(c: float, gammas: tuple[float, ...], nu: float) -> float:
    if math.isinf(nu):
        return float(_max_abs_cdf_normal(np.array([c]), gammas)[0])
    value = chi_scale_average(lambda x: _max_abs_cdf_normal(x, gammas), c, nu, tol=_OUTER_TOL)
    return min(1.0, max(0.0, value))


def dunnett_cdf(c: float, loadings: DunnettLoadings, nu: DegreesOfFreedom | float) -> float:
    """P(max_i |T_i| < c) for treatment-versus-control t statistics sharing one scale."""
    df = as_df(nu)
    if math.isnan(c):
        raise invalid_argument("critical value is NaN")
    c = abs(c)
    if c == 0.0:
        return 0.0
    if math.isinf(c):
        return 1.0
    return _dunnett_cdf(float(c), tuple(float(g) for g in loadings.gammas), df.value)


def dunnett_two_sided_p(tmax: float, loadings: DunnettLoadings, nu: DegreesOfFreedom | float) -> float:
    """P(max_i |T_i| >= tmax), the single-step Dunnett adjusted p-value."""
    return clamp_probability(1.0 - dunnett_cdf(tmax, loadings, nu))


def dunnett_critical(alpha: float, loadings: DunnettLoadings, nu: DegreesOfFreedom | float) -> float:
    """Two-sided critical value c with dunnett_two_sided_p(c, loadings, nu) = alpha."""
    if not 0.0 < alpha < 1.0:
        raise invalid_argument("alpha must lie strictly between 0 and 1", alpha=alpha)
    df = as_df(nu)
    return solve_decreasing(
        lambda c: dunnett_two_sided_p(c, loadings, df),
        alpha,
        label="Dunnett critical value",
    )
