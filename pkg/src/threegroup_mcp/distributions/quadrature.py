from __future__ import annotations

import logging
import math
from collections.abc import Callable
from functools import lru_cache

import numpy as np
from numpy.typing import NDArray
from scipy import special

from ..errors import numeric_failure

logger = logging.getLogger(__name__)

LEGENDRE_ORDER = 16
INITIAL_PANELS = 4
MAX_PANELS = 2048

# Standard normal factor is integrated over [-NORMAL_CUTOFF, NORMAL_CUTOFF].
NORMAL_CUTOFF = 8.5

Integrand = Callable[[NDArray[np.float64]], NDArray[np.float64]]


@lru_cache(maxsize=8)
def _legendre_rule(order: int) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    nodes, weights = np.polynomial.legendre.leggauss(order)
    return nodes, weights


def composite_rule(
    a: float,
    b: float,
    panels: int,
    *,
    order: int = LEGENDRE_ORDER,
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Nodes and weights of a composite Gauss-Legendre rule on [a, b] with equal panels."""
    base_nodes, base_weights = _legendre_rule(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * base_nodes[None, :]).ravel()
    weights = (half[:, None] * base_weights[None, :]).ravel()
    return nodes, weights


def gauss_legendre_integrate(
    f: Integrand,
    a: float,
    b: float,
    *,
    tol: float = 1e-10,
    panels: int = INITIAL_PANELS,
    max_panels: int = MAX_PANELS,
) -> NDArray[np.float64]:
    """
    Integrate a vectorized integrand over [a, b].

    `f` receives the 1-d node array and returns values with the node axis last, so a
    whole family of integrals (e.g. one per outer quadrature node) is computed at once.
    The number of panels is doubled until successive estimates agree within `tol`
    (maximum absolute difference over the family).
    """
    nodes, weights = composite_rule(a, b, panels)
    estimate = np.asarray(f(nodes)) @ weights
    while True:
        panels *= 2
        if panels > max_panels:
            raise numeric_failure(
                "Gauss-Legendre quadrature did not converge",
                interval=[a, b],
                max_panels=max_panels,
                tol=tol,
            )
        nodes, weights = composite_rule(a, b, panels)
        refined = np.asarray(f(nodes)) @ weights
        if np.max(np.abs(refined - estimate), initial=0.0) <= tol:
            if panels >= max_panels // 4:
                logger.warning("Quadrature converged near the panel cap (panels=%s, interval=[%s, %s])", panels, a, b)
            return refined
        estimate = refined


# Mass of the chi scale distribution dropped at each end of the truncated domain.
CHI_TAIL = 1e-16


def _chi_scale_bounds(nu: float) -> tuple[float, float]:
    """Truncation points, on the log scale, of s = chi_nu / sqrt(nu)."""
    half = 0.5 * nu
    lo = special.gammaincinv(half, CHI_TAIL)
    hi = special.gammainccinv(half, CHI_TAIL)
    return 0.5 * math.log(2.0 * lo / nu), 0.5 * math.log(2.0 * hi / nu)


def chi_scale_average(
    inner: Callable[[NDArray[np.float64]], NDArray[np.float64]],
    x: float,
    nu: float,
    *,
    tol: float = 1e-10,
) -> float:
    """
    E[inner(x * S)] for S = chi_nu / sqrt(nu), the studentizing scale.

    Integrated over y = log S on a finite interval, so the density is smooth and bounded
    for every nu.
    """
    y_lo, y_hi = _chi_scale_bounds(nu)
    half = 0.5 * nu
    log_norm = math.log(2.0) + half * math.log(half) - special.gammaln(half)

    def integrand(y: NDArray[np.float64]) -> NDArray[np.float64]:
        log_density = log_norm + nu * y - half * np.exp(2.0 * y)
        return np.exp(log_density) * inner(x * np.exp(y))

    return float(gauss_legendre_integrate(integrand, y_lo, y_hi, tol=tol))
