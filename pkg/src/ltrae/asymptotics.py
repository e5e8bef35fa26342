"""Large-k behaviour of the peeling decoder.

With p'(t) the derivative of the degree generating polynomial,

    g(t, p) = -log(1-t) / p'(t)        (inverse asymptotic decoding curve)
    f(p)    = int_0^1 g(t, p) dt       (asymptotic relative random access expectation)
    s(r, p) = inf{t in [0,1): r p'(t) + log(1-t) < 0}  (decoded fraction at r)

Everything here is a pure function of an immutable :class:`DegreeDistribution`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import integrate, optimize

from .core import DegreeDistribution
from .errors import DivergenceError, DomainError, ValidationError
from .quadrature import QuadratureRule, default_rule

MONOTONE_TOL = 1e-9
S_TOL = 1e-10
# u = -log(1-t) grid used to bracket s(r, p) and to locate plateaus of cummax g
_U_GRID = np.concatenate([np.geomspace(1e-12, 1e-2, 400, endpoint=False),
                          np.linspace(1e-2, 60.0, 9600)])
_POWER_CHUNK = 256


class Gradient(NamedTuple):
    values: np.ndarray
    divergent: np.ndarray  # bool mask; values there are -inf


class Hessian(NamedTuple):
    values: np.ndarray
    divergent: np.ndarray  # bool mask; values there are +inf


@dataclass(frozen=True)
class MonotonicityReport:
    is_strictly_increasing: bool
    min_derivative: float
    argmin_t: float
    tolerance: float = MONOTONE_TOL


@dataclass(frozen=True, eq=False)
class DecodingCurve:
    r_grid: np.ndarray
    undecoded_fraction: np.ndarray
    area: float
    monotone: bool
    dist: DegreeDistribution = field(repr=False)


# --------------------------------------------------------------------------- #
# divergence bookkeeping
#
# Near t = 0, p'(t) ~ m p_m t^{m-1} with m the smallest degree in the support.
# f converges iff m <= 2; d f/d p_i iff i >= 2m - 2; d^2 f/d p_i d p_j iff
# i + j >= 3m - 2.
# --------------------------------------------------------------------------- #

def objective_diverges(dist: DegreeDistribution) -> bool:
    return dist.min_degree >= 3


def divergent_gradient_mask(dist: DegreeDistribution) -> np.ndarray:
    i = np.arange(1, dist.d + 1)
    return i <= 2 * dist.min_degree - 3


def divergent_hessian_mask(dist: DegreeDistribution) -> np.ndarray:
    i = np.arange(1, dist.d + 1)
    return (i[:, None] + i[None, :]) <= 3 * dist.min_degree - 3


def _require_finite_objective(dist):
    if objective_diverges(dist):
        raise DivergenceError(
            "p_1 = p_2 = 0: g(t, p) ~ c/t near t = 0 and f(p) is infinite")


def _powers(rule: QuadratureRule, degrees) -> np.ndarray:
    """Matrix  V[j, k] = t_j ** (degrees[k] - 1)."""
    logt = rule.log_nodes
    e = np.asarray(degrees, dtype=float) - 1.0
    return np.exp(np.outer(logt, e))


def _weighted_moments(rule, node_weights, degrees):
    """sum_j node_weights[j] * t_j^(i-1) for each i in ``degrees``."""
    degrees = np.asarray(degrees)
    out = np.empty(degrees.size)
    for lo in range(0, degrees.size, _POWER_CHUNK):
        chunk = degrees[lo:lo + _POWER_CHUNK]
        out[lo:lo + chunk.size] = node_weights @ _powers(rule, chunk)
    return out


# --------------------------------------------------------------------------- #
# g and its derivative
# --------------------------------------------------------------------------- #

def g(dist: DegreeDistribution, t):
    """-log(1-t)/p'(t) for t in [0, 1); the t -> 0 limit is returned at t = 0."""
    t = np.asarray(t, dtype=float)
    if np.any(~np.isfinite(t)) or np.any(t < 0.0) or np.any(t >= 1.0):
        raise DomainError("g(t, p) needs 0 <= t < 1")
    pp = dist.p_prime(t)
    zero = t == 0.0
    if np.any(pp[~zero] <= 0.0):
        raise DivergenceError("p'(t) = 0 inside (0, 1)")
    with np.errstate(divide="ignore", invalid="ignore"):
        out = -np.log1p(-t) / pp
    if np.any(zero):
        if dist[1] > 0.0:
            lim = 0.0
        elif dist[2] > 0.0:
            lim = 1.0 / (2.0 * dist[2])
        else:
            raise DivergenceError("g(t, p) -> inf as t -> 0 when p_1 = p_2 = 0")
        out = np.where(zero, lim, out)
    return out[()] if out.ndim == 0 else out


def g_prime(dist: DegreeDistribution, t):
    """d/dt g(t, p) = [p'(t)/(1-t) + log(1-t) p''(t)] / p'(t)^2."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0.0) or np.any(t >= 1.0):
        raise DomainError("g'(t, p) needs 0 <= t < 1")
    pp = dist.p_prime(t)
    ppp = dist.p_double_prime(t)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (pp / (1.0 - t) + np.log1p(-t) * ppp) / pp**2
    zero = t == 0.0
    if np.any(zero):
        p1, p2, p3 = dist[1], dist[2], dist[3]
        if p1 > 0.0:
            lim = 1.0 / p1
        elif p2 > 0.0:
            # g = (1 + t/2 + ...) / (2 p2 + 3 p3 t + ...)
            lim = (p2 - 3.0 * p3) / (4.0 * p2 * p2)
        else:
            raise DivergenceError("g'(0, p) undefined when p_1 = p_2 = 0")
        out = np.where(zero, lim, out)
    return out[()] if out.ndim == 0 else out


# --------------------------------------------------------------------------- #
# objective and derivatives
# --------------------------------------------------------------------------- #

def objective_f(dist: DegreeDistribution, rule: QuadratureRule | None = None) -> float:
    """f(p) = int_0^1 -log(1-t)/p'(t) dt."""
    _require_finite_objective(dist)
    rule = rule or default_rule()
    return rule.integrate(1.0 / dist.p_prime(rule.nodes))


def gradient_f(dist: DegreeDistribution, rule: QuadratureRule | None = None,
               degrees=None) -> Gradient:
    """Partial derivatives  d f/d p_i = -i int_0^1 t^(i-1) (-log(1-t)) / p'(t)^2 dt.

    ``degrees`` (1-based) restricts the evaluation to a subset of components;
    by default all i = 1..d are returned.  Components whose integral is
    infinite are reported through ``divergent`` rather than raised.
    """
    _require_finite_objective(dist)
    rule = rule or default_rule()
    degrees = np.arange(1, dist.d + 1) if degrees is None else np.asarray(degrees)
    pp = dist.p_prime(rule.nodes)
    node_w = rule.weights / pp**2
    vals = -degrees * _weighted_moments(rule, node_w, degrees)
    div = degrees <= 2 * dist.min_degree - 3
    vals[div] = -np.inf
    return Gradient(vals, div)


def extension_derivative(dist: DegreeDistribution, degree: int,
                         rule: QuadratureRule | None = None) -> float:
    """-d f/d p_D = D int_0^1 t^(D-1) (-log(1-t)) / p'(t)^2 dt, any D >= 1.

    The distribution itself is left at dimension d; p_D = 0 for D > d.
    """
    _require_finite_objective(dist)
    if degree <= 2 * dist.min_degree - 3:
        return np.inf
    rule = rule or default_rule()
    pp = dist.p_prime(rule.nodes)
    return float(degree * _weighted_moments(rule, rule.weights / pp**2, [degree])[0])


def hessian_f(dist: DegreeDistribution, rule: QuadratureRule | None = None,
              degrees=None) -> Hessian:
    """d^2 f / d p_i d p_j = 2 i j int t^(i+j-2) (-log(1-t)) / p'(t)^3 dt."""
    _require_finite_objective(dist)
    rule = rule or default_rule()
    degrees = np.arange(1, dist.d + 1) if degrees is None else np.asarray(degrees)
    pp = dist.p_prime(rule.nodes)
    V = _powers(rule, degrees) * degrees
    H = 2.0 * (V.T * (rule.weights / pp**3)) @ V
    H = 0.5 * (H + H.T)
    m = dist.min_degree
    div = (degrees[:, None] + degrees[None, :]) <= 3 * m - 3
    H[div] = np.inf
    return Hessian(H, div)


def hessian_min_eigenvalue(dist: DegreeDistribution,
                           rule: QuadratureRule | None = None) -> float:
    """Smallest eigenvalue of the Hessian expressed in a well-conditioned basis.

    aᵀHa = 2 int (-log(1-t))/p'^3 q(t)^2 dt with q = sum_i a_i i t^(i-1), i.e.
    the Hessian is the Gram matrix of the polynomials of degree < d under a
    positive weight.  In the monomial basis that matrix is Hilbert-like and its
    smallest eigenvalue drowns in rounding; we use shifted Legendre
    polynomials instead, which is a congruence (same inertia).
    """
    _require_finite_objective(dist)
    if dist.min_degree > 1:
        raise DivergenceError("Hessian has infinite entries when p_1 = 0")
    rule = rule or default_rule()
    pp = dist.p_prime(rule.nodes)
    L = np.polynomial.legendre.legvander(2.0 * rule.nodes - 1.0, dist.d - 1)
    G = 2.0 * (L.T * (rule.weights / pp**3)) @ L
    return float(np.linalg.eigvalsh(0.5 * (G + G.T))[0])


# --------------------------------------------------------------------------- #
# asymptotic decoding curve
# --------------------------------------------------------------------------- #

class _CurveSolver:
    """g on a fixed u-grid, reused for many s(r, p) queries."""

    def __init__(self, dist: DegreeDistribution):
        self.dist = dist
        self.u = _U_GRID
        self.t = -np.expm1(-self.u)
        pp = dist.p_prime(self.t)
        if np.any(pp <= 0.0):
            raise DivergenceError("p'(t) vanishes on (0, 1)")
        self.g = self.u / pp
        self.cummax = np.maximum.accumulate(self.g)
        self.pp_one = float(dist.p_prime(1.0))

    def h(self, u, r):
        # r p'(t) + log(1-t) expressed in u
        return r * self.dist.p_prime(-np.expm1(-u)) - u

    def crossing_u(self, r: float) -> float:
        """u* with s(r, p) = 1 - e^{-u*}; returns 0 if s = 0."""
        if r <= 0.0:
            return 0.0
        j = int(np.searchsorted(self.cummax, r, side="right"))
        if j >= self.u.size:
            # beyond the grid p'(t) equals p'(1) to double precision
            return max(r * self.pp_one, float(self.u[-1]))
        lo = 0.0 if j == 0 else float(self.u[j - 1])
        hi = float(self.u[j])
        for _ in range(200):
            if (hi - lo) * np.exp(-lo) < S_TOL * 0.1 or hi - lo < 1e-15 * max(hi, 1.0):
                break
            mid = 0.5 * (lo + hi)
            if self.h(mid, r) < 0.0:
                hi = mid
            else:
                lo = mid
        return 0.5 * (lo + hi)

    def s(self, r: float) -> float:
        return float(-np.expm1(-self.crossing_u(r)))

    def undecoded(self, r: float) -> float:
        return float(np.exp(-self.crossing_u(r)))


def decoding_fraction_s(dist: DegreeDistribution, r: float) -> float:
    """Asymptotic fraction of decoded symbols after r k received symbols."""
    r = float(r)
    if np.isnan(r) or r < 0.0:
        raise DomainError("r must be a non-negative real")
    if np.isinf(r):
        return 1.0
    if r == 0.0:
        return 0.0
    return _CurveSolver(dist).s(r)


def default_r_max(dist: DegreeDistribution, undecoded_tol: float = 1e-8) -> float:
    """Smallest power-of-two r with 1 - s(r, p) < ``undecoded_tol``."""
    solver = _CurveSolver(dist)
    r = 1.0
    while solver.undecoded(r) >= undecoded_tol:
        r *= 2.0
        if r > 1e12:
            raise DivergenceError("decoding curve does not reach zero")
    return r


def _plateau_correction(dist: DegreeDistribution, solver: _CurveSolver) -> float:
    """int_0^1 (cummax g - g) dt, the excess of the layer-cake area over f(p)."""
    g_grid, u = solver.g, solver.u
    excess = solver.cummax > g_grid * (1.0 + 1e-13)
    if not np.any(excess):
        return 0.0
    total = 0.0
    idx = np.flatnonzero(excess)
    runs = np.split(idx, np.flatnonzero(np.diff(idx) > 1) + 1)

    def gu(x):
        return x / float(dist.p_prime(-np.expm1(-x)))

    for run in runs:
        a, b = run[0], run[-1]
        # local maximum of g lies in [u[a-2], u[a]]
        lo = u[max(a - 2, 0)]
        res = optimize.minimize_scalar(lambda x: -gu(x), bounds=(lo, u[a]),
                                       method="bounded", options={"xatol": 1e-12})
        u_peak = float(res.x)
        level = max(gu(u_peak), solver.cummax[a - 1] if a > 0 else 0.0)
        if b + 1 >= u.size:
            # past the grid g = u / p'(1) to double precision
            u_end = max(level * solver.pp_one, float(u[-1]))
        else:
            u_end = optimize.brentq(lambda x: gu(x) - level, u[b], u[b + 1], xtol=1e-14)
        # in u: dt = e^{-u} du
        val, _ = integrate.quad(lambda x: (level - gu(x)) * np.exp(-x), u_peak, u_end,
                                epsabs=1e-15, epsrel=1e-12, limit=200)
        total += val
    return total


def curve_area(dist: DegreeDistribution, rule: QuadratureRule | None = None) -> float:
    """int_0^inf (1 - s(r, p)) dr, computed as int_0^1 cummax_t g dt."""
    f = objective_f(dist, rule)
    return f + _plateau_correction(dist, _CurveSolver(dist))


def decoding_curve(dist: DegreeDistribution, r_max: float | None = None,
                   n_points: int = 501, rule: QuadratureRule | None = None) -> DecodingCurve:
    """Sample r -> 1 - s(r, p) on a uniform grid over [0, r_max]."""
    if n_points < 2:
        raise ValidationError("n_points must be at least 2")
    if r_max is None:
        r_max = default_r_max(dist)
    if not r_max > 0:
        raise ValidationError("r_max must be positive")
    solver = _CurveSolver(dist)
    r = np.linspace(0.0, float(r_max), int(n_points))
    und = np.array([solver.undecoded(x) for x in r])
    und = np.minimum.accumulate(und)
    area = objective_f(dist, rule) + _plateau_correction(dist, solver)
    monotone = dist[1] > 0.0 and check_g_monotone(dist).is_strictly_increasing
    return DecodingCurve(r_grid=r, undecoded_fraction=und, area=float(area),
                         monotone=bool(monotone), dist=dist)


def check_g_monotone(dist: DegreeDistribution, n_grid: int = 10_000,
                     tol: float = MONOTONE_TOL) -> MonotonicityReport:
    """Minimum of g'(t, p) over [0, 1), grid search refined to 1e-10 in t."""
    if objective_diverges(dist):
        raise DivergenceError("g is unbounded near t = 0 when p_1 = p_2 = 0")
    t = np.linspace(0.0, 1.0, n_grid + 1)[:-1]
    if dist[1] == 0.0:
        t = t[1:]
    gp = g_prime(dist, t)
    j = int(np.argmin(gp))
    t_min, v_min = float(t[j]), float(gp[j])
    lo = t[max(j - 1, 0)]
    hi = t[j + 1] if j + 1 < t.size else 1.0 - 1e-12
    if hi > lo:
        res = optimize.minimize_scalar(lambda x: float(g_prime(dist, x)),
                                       bounds=(lo, hi), method="bounded",
                                       options={"xatol": 1e-10})
        if res.fun < v_min:
            t_min, v_min = float(res.x), float(res.fun)
    return MonotonicityReport(is_strictly_increasing=bool(v_min > tol),
                              min_derivative=v_min, argmin_t=t_min, tolerance=tol)


def theorem2_conditions(dist: DegreeDistribution, threshold: float = 0.0) -> bool:
    """p_1 > 0 and g(., p) strictly increasing on (0, 1)."""
    if dist[1] <= threshold:
        return False
    return check_g_monotone(dist).is_strictly_increasing
