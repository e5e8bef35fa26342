"""Minimize f(p) over the probability simplex and certify the optimum.

Two phases:

1. entropic mirror descent (multiplicative updates with backtracking) until
   the Frank-Wolfe gap  max_i(-df/dp_i) - f(p)  drops below ``phase1_tol``;
   this only has to get the support roughly right;
2. active-set Newton: Newton's method on the face of the simplex spanned by
   the current support, dropping indices that hit zero and adding the index
   with the most negative multiplier until the optimality conditions

       -df/dp_i = f(p)  on the support,   -df/dp_i <= f(p)  off it

   hold to ``kkt_tol``.

Note that  -sum_i p_i df/dp_i = f(p)  for every p, so the multiplier of the
simplex constraint always equals the objective value.
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .asymptotics import (check_g_monotone, extension_derivative, gradient_f,
                          objective_f)
from .core import REPORT_THRESHOLD, DegreeDistribution
from .errors import DivergenceError, ValidationError
from .quadrature import QuadratureRule, build_composite_rule

log = logging.getLogger(__name__)

KKT_TOL = 1e-10
SLACKNESS_TOL = 1e-12
EXTENSION_MARGIN = 1e-12
_CACHE_ENTRIES = 25_000_000


@dataclass(frozen=True)
class SolverConfig:
    quad_order: int = 16
    kkt_tol: float = KKT_TOL
    phase1_tol: float = 1e-4
    phase1_max_iter: int = 50_000
    phase2_max_changes: int = 100
    newton_max_iter: int = 200
    report_threshold: float = REPORT_THRESHOLD
    # Phase-1 start: "uniform", "degree2", or an explicit weight list
    initial: str | tuple = "uniform"
    # mixing weight of the uniform distribution into the start point, so that
    # multiplicative updates can reach every coordinate
    initial_mix: float = 1e-3
    seed_threshold: float = 1e-3

    def rule(self) -> QuadratureRule:
        return build_composite_rule(self.quad_order)

    def to_dict(self) -> dict:
        out = asdict(self)
        if isinstance(self.initial, tuple):
            out["initial"] = list(self.initial)
        return out


@dataclass(frozen=True)
class KKTCertificate:
    lam: float
    objective: float
    residual_support: float
    residual_off_support: float
    mu: np.ndarray = field(repr=False)
    support: tuple
    complementary_slackness: float
    divergent: tuple = ()
    tol: float = KKT_TOL

    @property
    def passing(self) -> bool:
        return (self.residual_support < self.tol
                and self.residual_off_support < self.tol)

    @property
    def lambda_gap(self) -> float:
        """|lambda - f(p)|; zero up to rounding for every p."""
        return abs(self.lam - self.objective)


@dataclass(frozen=True)
class OptimizationResult:
    dist: DegreeDistribution
    objective: float
    support: tuple
    certificate: KKTCertificate
    theorem2_ok: bool
    converged: bool
    config: SolverConfig
    phase1_iterations: int = 0
    phase1_gap: float = math.nan
    active_set_changes: int = 0
    min_g_prime: float = math.nan
    argmin_g_prime: float = math.nan
    message: str = ""

    @property
    def d(self) -> int:
        return self.dist.d

    @property
    def residual(self) -> float:
        c = self.certificate
        return max(c.residual_support, c.residual_off_support)

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "support": list(self.support),
            "p": {str(i): self.dist[i] for i in self.dist.support()},
            "objective": self.objective,
            "residual_support": self.certificate.residual_support,
            "residual_off_support": self.certificate.residual_off_support,
            "theorem2_ok": self.theorem2_ok,
            "converged": self.converged,
            "min_g_prime": self.min_g_prime,
            "argmin_g_prime": self.argmin_g_prime,
            "report_threshold": self.config.report_threshold,
            "config": self.config.to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def result_dist_from_dict(data: dict) -> DegreeDistribution:
    """Distribution stored in a result JSON (``p`` is a sparse degree -> value map)."""
    d = int(data["d"])
    probs = np.zeros(d)
    for k, v in data["p"].items():
        probs[int(k) - 1] = float(v)
    return DegreeDistribution(probs)


# --------------------------------------------------------------------------- #
# objective model with a cached power matrix
# --------------------------------------------------------------------------- #

class _Model:
    """f, grad f and Hessian blocks on a fixed rule for dimension d."""

    def __init__(self, d: int, rule: QuadratureRule):
        self.d = d
        self.rule = rule
        self.w = rule.weights
        self.deg = np.arange(1, d + 1, dtype=float)
        self.logt = rule.log_nodes
        self.T = None
        if rule.size * d <= _CACHE_ENTRIES:
            self.T = np.exp(np.outer(self.logt, self.deg - 1.0))

    def cols(self, idx):
        if self.T is not None:
            return self.T[:, idx]
        return np.exp(np.outer(self.logt, self.deg[idx] - 1.0))

    def pprime(self, p):
        nz = np.flatnonzero(p)
        return self.cols(nz) @ (self.deg[nz] * p[nz])

    def f(self, pp):
        return float(self.w @ (1.0 / pp))

    def grad(self, pp, idx=None):
        wv = self.w / pp**2
        if idx is None:
            if self.T is not None:
                return -self.deg * (wv @ self.T)
            out = np.empty(self.d)
            for lo in range(0, self.d, 256):
                sl = np.arange(lo, min(lo + 256, self.d))
                out[sl] = -self.deg[sl] * (wv @ self.cols(sl))
            return out
        return -self.deg[idx] * (wv @ self.cols(idx))

    def hess(self, pp, idx):
        V = self.cols(idx) * self.deg[idx]
        H = 2.0 * (V.T * (self.w / pp**3)) @ V
        return 0.5 * (H + H.T)


# --------------------------------------------------------------------------- #
# phase 1: entropic mirror descent
# --------------------------------------------------------------------------- #

def _initial_point(d: int, config: SolverConfig) -> np.ndarray:
    if isinstance(config.initial, str):
        if config.initial == "uniform":
            p = np.full(d, 1.0 / d)
        elif config.initial == "degree2":
            p = np.zeros(d)
            p[1] = 1.0
        else:
            raise ValidationError(f"unknown initial point {config.initial!r}")
    else:
        p = np.asarray(config.initial, dtype=float)
        if p.size > d:
            raise ValidationError("initial point longer than d")
        p = np.concatenate([p, np.zeros(d - p.size)])
        if np.any(p < 0) or p.sum() <= 0:
            raise ValidationError("initial point must be non-negative and non-zero")
        p = p / p.sum()
    mix = config.initial_mix
    return (1.0 - mix) * p + mix / d


def _mirror_descent(model: _Model, p: np.ndarray, config: SolverConfig):
    pp = model.pprime(p)
    f = model.f(pp)
    g = model.grad(pp)
    eta = 1.0
    gap = float(np.max(-g) - f)
    it = 0
    while it < config.phase1_max_iter and gap > config.phase1_tol:
        it += 1
        for _ in range(60):
            z = -eta * (g - g.min())
            q = p * np.exp(z)
            q /= q.sum()
            qq = model.pprime(q)
            fq = model.f(qq)
            mask = q > 0
            kl = float(np.sum(q[mask] * np.log(q[mask] / p[mask])))
            if fq <= f + float(g @ (q - p)) + kl / eta + 1e-15:
                break
            eta *= 0.5
        p, pp, f = q, qq, fq
        g = model.grad(pp)
        gap = float(np.max(-g) - f)
        eta *= 1.5
    return p, it, gap


# --------------------------------------------------------------------------- #
# phase 2: active-set Newton
# --------------------------------------------------------------------------- #

def _face_newton(model: _Model, p: np.ndarray, S: list[int], config: SolverConfig):
    """Minimize f over {p >= 0, sum p = 1, p_i = 0 off S} (S holds 0-based indices).

    Returns (p, S, dropped) where ``dropped`` counts indices removed because
    the Newton path hit the boundary.
    """
    dropped = 0
    target = min(config.kkt_tol, 1e-10) * 1e-3
    for _ in range(config.newton_max_iter):
        idx = np.asarray(S)
        pp = model.pprime(p)
        f = model.f(pp)
        gS = model.grad(pp, idx)
        res = float(np.max(np.abs(-gS - f)))
        if res < target:
            break
        H = model.hess(pp, idx)
        m = idx.size
        K = np.zeros((m + 1, m + 1))
        K[:m, :m] = H
        K[:m, m] = 1.0
        K[m, :m] = 1.0
        rhs = np.concatenate([-gS, [0.0]])
        try:
            step = np.linalg.solve(K, rhs)[:m]
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(K, rhs, rcond=None)[0][:m]
        step -= step.mean()
        x = p[idx]
        neg = step < 0
        alpha_max = 1.0
        block = -1
        if np.any(neg):
            ratios = -x[neg] / step[neg]
            k = int(np.argmin(ratios))
            if ratios[k] < 1.0:
                alpha_max = float(ratios[k])
                block = int(idx[neg][k])
        slope = float(gS @ step)
        alpha = alpha_max
        while True:
            q = p.copy()
            q[idx] = x + alpha * step
            if alpha == alpha_max and block >= 0:
                q[block] = 0.0
            q = np.maximum(q, 0.0)
            qq = model.pprime(q)
            if np.all(qq > 0):
                fq = model.f(qq)
                if fq <= f + 1e-4 * alpha * slope + 1e-15 or alpha < 1e-14:
                    break
            alpha *= 0.5
        p = q / q.sum()
        if alpha == alpha_max and block >= 0:
            S = [i for i in S if i != block]
            dropped += 1
            if not S:
                raise ValidationError("active set became empty")
    return p, S, dropped


def optimize_degree_distribution(d: int, config: SolverConfig | None = None) -> OptimizationResult:
    """Optimal degree distribution with maximum degree ``d`` and its certificate."""
    config = config or SolverConfig()
    d = int(d)
    if d < 2:
        raise ValidationError("d must be at least 2")
    rule = config.rule()
    model = _Model(d, rule)

    p = _initial_point(d, config)
    p, it1, gap1 = _mirror_descent(model, p, config)
    log.debug("d=%d phase 1: %d iterations, FW gap %.3g", d, it1, gap1)

    seed = {1, 2, d} | {int(i) + 1 for i in np.flatnonzero(p > config.seed_threshold)}
    S = sorted(seed)
    x = np.zeros(d)
    x[np.asarray(S) - 1] = np.maximum(p[np.asarray(S) - 1], 1e-6)
    x /= x.sum()

    changes = 0
    converged = False
    message = ""
    while True:
        x, S, dropped = _face_newton(model, x, [i - 1 for i in S], config)
        S = [i + 1 for i in S]
        changes += dropped
        pp = model.pprime(x)
        f = model.f(pp)
        g = model.grad(pp)
        mu = g + f
        off = np.ones(d, dtype=bool)
        off[np.asarray(S) - 1] = False
        viol = np.where(off, -mu, -np.inf)
        j = int(np.argmax(viol))
        if viol[j] < config.kkt_tol * 1e-2:
            converged = True
            break
        if changes >= config.phase2_max_changes:
            message = "active-set budget exhausted"
            break
        S = sorted(set(S) | {j + 1})
        changes += 1

    dist = DegreeDistribution(x / x.sum())
    cert = kkt_certificate(dist, rule=rule, tol=config.kkt_tol)
    converged = converged and cert.passing
    if not converged and not message:
        message = "KKT residuals above tolerance"
    support = tuple(dist.support(config.report_threshold))
    mono = check_g_monotone(dist)
    theorem2_ok = bool(dist[1] > config.report_threshold and mono.is_strictly_increasing)
    return OptimizationResult(
        dist=dist, objective=cert.objective, support=support, certificate=cert,
        theorem2_ok=theorem2_ok, converged=converged, config=config,
        phase1_iterations=it1, phase1_gap=gap1, active_set_changes=changes,
        min_g_prime=mono.min_derivative, argmin_g_prime=mono.argmin_t,
        message=message)


def kkt_certificate(dist: DegreeDistribution, rule: QuadratureRule | None = None,
                    tol: float = KKT_TOL) -> KKTCertificate:
    """Check  -df/dp_i = f on supp(p)  and  -df/dp_i <= f  elsewhere."""
    f = objective_f(dist, rule)
    grad = gradient_f(dist, rule)
    p = dist.probs
    on = p > 0.0
    if np.any(grad.divergent & on):
        raise DivergenceError("gradient diverges on the support")
    lam = float(-np.dot(p[on], grad.values[on]))
    mu = grad.values + lam
    res_on = float(np.max(np.abs(mu[on])))
    off = ~on
    res_off = float(np.max(np.maximum(0.0, -mu[off]))) if np.any(off) else 0.0
    slack = float(np.max(np.abs(mu[on] * p[on])))
    return KKTCertificate(
        lam=lam, objective=f, residual_support=res_on, residual_off_support=res_off,
        mu=mu, support=tuple(int(i) + 1 for i in np.flatnonzero(on)),
        complementary_slackness=slack,
        divergent=tuple(int(i) + 1 for i in np.flatnonzero(grad.divergent)), tol=tol)


def support_extension_test(result: OptimizationResult, D: int,
                           rule: QuadratureRule | None = None) -> bool:
    """True iff allowing degree D strictly improves on the stored optimum.

    That is  -df/dp_D (p* padded with zeros) > f(p*) + 1e-12.
    """
    D = int(D)
    if D < 1:
        raise ValidationError("D must be positive")
    rule = rule or result.config.rule()
    return extension_derivative(result.dist, D, rule) > result.objective + EXTENSION_MARGIN


def harmonic_extension_bound(dist: DegreeDistribution, D: int) -> float:
    """H_D / max_t p'(t)^2, a lower bound on -df/dp_D for the padded p."""
    H = float(np.sum(1.0 / np.arange(int(D), 0, -1)))
    m_p = float(dist.p_prime(1.0)) ** 2
    return H / m_p


def sweep(d_values, config: SolverConfig | None = None) -> list[OptimizationResult]:
    """Independent optima for each d (no warm starts, so rows are reproducible)."""
    return [optimize_degree_distribution(int(d), config) for d in d_values]
