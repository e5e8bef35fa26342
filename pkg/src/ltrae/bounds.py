"""Closed forms: the dilogarithm, the d = 2 optimum and the pi/4 lower bound."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .asymptotics import objective_f
from .core import DegreeDistribution
from .errors import DomainError

PI_OVER_4 = math.pi / 4.0
LOWER_BOUND_TOL = 1e-9
_SERIES_TERMS = 60  # 2^-60 / 60^2 < 1e-21


def _li2_series(x: float) -> float:
    # sum_k x^k / k^2, |x| <= 1/2; summed smallest-first
    k = np.arange(_SERIES_TERMS, 0, -1, dtype=float)
    return float(np.sum(x**k / k**2))


def dilogarithm(x: float) -> float:
    """Li_2(x) = int_0^x -log(1-t)/t dt for real x in [-1, 1]."""
    x = float(x)
    if not -1.0 <= x <= 1.0:
        raise DomainError(f"dilogarithm implemented on [-1, 1], got {x}")
    if x == 1.0:
        return math.pi**2 / 6.0
    if abs(x) <= 0.5:
        return _li2_series(x)
    if x > 0.5:
        # Li2(x) + Li2(1-x) = pi^2/6 - log(x) log(1-x)
        return math.pi**2 / 6.0 - math.log(x) * math.log1p(-x) - _li2_series(1.0 - x)
    # x in [-1, -1/2):  Li2(x) = -Li2(x/(x-1)) - log(1-x)^2 / 2, x/(x-1) in (1/3, 1/2]
    return -_li2_series(x / (x - 1.0)) - 0.5 * math.log1p(-x) ** 2


@dataclass(frozen=True)
class D2ClosedForm:
    p2: float
    f_value: float
    neg_df_dp1: float
    divergent: bool = False


def d2_closed_form(p2: float) -> D2ClosedForm:
    """f and -df/dp_1 for p = (1 - p2, p2) in closed form.

    f = Li2(2 p2/(1+p2)) / (2 p2),
    -df/dp1 = log((1+p2)/(1-p2)) / (2 p2 (1+p2)).
    """
    p2 = float(p2)
    if not 0.0 < p2 <= 1.0:
        raise DomainError(f"p2 must lie in (0, 1), got {p2}")
    f = dilogarithm(2.0 * p2 / (1.0 + p2)) / (2.0 * p2)
    if p2 == 1.0:
        return D2ClosedForm(p2, f, math.inf, divergent=True)
    neg = (math.log1p(p2) - math.log1p(-p2)) / (2.0 * p2 * (1.0 + p2))
    return D2ClosedForm(p2, f, neg)


def solve_d2(xtol: float = 1e-12) -> tuple[float, float, float]:
    """(p1*, p2*, f*) for d = 2 from the KKT condition f = -df/dp1.

    The difference f - (-df/dp1) behaves like p2/2 > 0 near p2 = 0 and
    tends to -inf as p2 -> 1, so [1e-6, 1 - 1e-6] brackets the root.
    """
    def gap(p2):
        c = d2_closed_form(p2)
        return c.f_value - c.neg_df_dp1

    p2 = optimize.bisect(gap, 1e-6, 1.0 - 1e-6, xtol=xtol, rtol=4 * np.finfo(float).eps,
                         maxiter=200)
    return 1.0 - p2, p2, d2_closed_form(p2).f_value


def lower_bound_gap(dist: DegreeDistribution, rule=None) -> float:
    """f(p) - pi/4 (>= 0 by Cauchy-Schwarz)."""
    return objective_f(dist, rule) - PI_OVER_4


def check_lower_bound(dist: DegreeDistribution, rule=None) -> bool:
    """True iff f(p) >= pi/4 - 1e-9.  Raises DivergenceError when f is infinite."""
    return lower_bound_gap(dist, rule) >= -LOWER_BOUND_TOL
