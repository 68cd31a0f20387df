from __future__ import annotations

from .dunnett import dunnett_cdf, dunnett_critical, dunnett_two_sided_p
from .quadrature import chi_scale_average, gauss_legendre_integrate
from .special import (
    P_FLOOR,
    clamp_probability,
    f_critical,
    f_sf,
    reg_inc_beta,
    student_t_critical,
    student_t_two_sided_p,
)
from .studentized_range import studentized_range_cdf, studentized_range_quantile, tukey_adjusted_p

__all__ = [
    "P_FLOOR",
    "chi_scale_average",
    "clamp_probability",
    "dunnett_cdf",
    "dunnett_critical",
    "dunnett_two_sided_p",
    "f_critical",
    "f_sf",
    "gauss_legendre_integrate",
    "reg_inc_beta",
    "student_t_critical",
    "student_t_two_sided_p",
    "studentized_range_cdf",
    "studentized_range_quantile",
    "tukey_adjusted_p",
]
