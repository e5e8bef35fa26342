"""Degree distributions of LT codes / binary fully symmetric generator matrices.

A distribution over column weights 1..d is stored as a dense vector
``probs[i-1] = P(weight = i)``.  Trailing zeros are allowed so that a
distribution can be embedded in a larger maximum degree.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ValidationError

SUM_TOL = 1e-12
REPORT_THRESHOLD = 1e-9


def _horner(coeffs, t):
    """Evaluate sum_k coeffs[k] * t**k."""
    t = np.asarray(t, dtype=float)
    acc = np.zeros_like(t)
    for c in coeffs[::-1]:
        acc = acc * t + c
    return acc


def _check_unit_interval(t):
    arr = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise DomainError(f"t must lie in [0, 1], got {t!r}")
    return arr


@dataclass(frozen=True, eq=False)
class DegreeDistribution:
    """Probability vector (p_1, ..., p_d) on the simplex.

    Construction validates but never rescales; use :func:`make_distribution`
    to normalize raw weights.
    """

    probs: np.ndarray

    def __post_init__(self):
        p = np.array(self.probs, dtype=float).ravel()
        if p.size < 1:
            raise ValidationError("a degree distribution needs at least one entry")
        if not np.all(np.isfinite(p)):
            raise ValidationError("probabilities must be finite")
        if np.any(p < 0.0):
            raise ValidationError("probabilities must be non-negative")
        if abs(p.sum() - 1.0) > SUM_TOL:
            raise ValidationError(f"probabilities sum to {p.sum()!r}, not 1")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @property
    def d(self) -> int:
        return int(self.probs.size)

    def __len__(self):
        return self.d

    def __getitem__(self, degree: int) -> float:
        """1-based access: ``dist[1]`` is p_1."""
        if not 1 <= degree <= self.d:
            return 0.0
        return float(self.probs[degree - 1])

    def __eq__(self, other):
        if not isinstance(other, DegreeDistribution):
            return NotImplemented
        return self.d == other.d and np.array_equal(self.probs, other.probs)

    def __hash__(self):
        return hash(self.probs.tobytes())

    def __repr__(self):
        sup = self.support()
        body = ", ".join(f"p{i}={self[i]:.6g}" for i in sup[:8])
        more = ", ..." if len(sup) > 8 else ""
        return f"DegreeDistribution(d={self.d}, {body}{more})"

    def support(self, threshold: float = 0.0) -> list[int]:
        """1-based degrees with probability above ``threshold``."""
        return [int(i) + 1 for i in np.flatnonzero(self.probs > threshold)]

    @property
    def min_degree(self) -> int:
        return int(np.flatnonzero(self.probs > 0.0)[0]) + 1

    def mean_degree(self) -> float:
        return float(np.dot(np.arange(1, self.d + 1), self.probs))

    def p(self, t):
        """p(t) = sum_i p_i t^i."""
        return _horner(np.concatenate(([0.0], self.probs)), t)

    def p_prime(self, t):
        """p'(t) = sum_i i p_i t^(i-1)."""
        return _horner(np.arange(1, self.d + 1) * self.probs, t)

    def p_double_prime(self, t):
        """p''(t) = sum_i i (i-1) p_i t^(i-2)."""
        if self.d < 2:
            return np.zeros_like(np.asarray(t, dtype=float))
        i = np.arange(2, self.d + 1)
        return _horner(i * (i - 1) * self.probs[1:], t)

    def embed(self, D: int) -> "DegreeDistribution":
        """Same distribution viewed in dimension ``D >= d`` (zero padded)."""
        if D < self.d:
            raise ValidationError(f"cannot embed d={self.d} into D={D}")
        return DegreeDistribution(np.concatenate([self.probs, np.zeros(D - self.d)]))

    def to_dict(self, sparse: bool | None = None) -> dict:
        if sparse is None:
            sparse = self.d > 64
        if sparse:
            sup = self.support()
            return {"d": self.d, "support": sup, "values": [self[i] for i in sup]}
        return {"d": self.d, "p": [float(x) for x in self.probs]}

    @classmethod
    def from_dict(cls, data: dict, normalize: bool = False) -> "DegreeDistribution":
        """Inverse of :meth:`to_dict`; accepts the dense and the sparse form."""
        if not isinstance(data, dict):
            raise ValidationError("distribution must be a JSON object")
        if "p" in data:
            probs = np.asarray(data["p"], dtype=float)
            if "d" in data and int(data["d"]) != probs.size:
                raise ValidationError(
                    f"field 'd'={data['d']} does not match len(p)={probs.size}")
        elif "support" in data and "values" in data:
            sup = [int(i) for i in data["support"]]
            vals = [float(v) for v in data["values"]]
            if len(sup) != len(vals):
                raise ValidationError("'support' and 'values' differ in length")
            if any(i < 1 for i in sup):
                raise ValidationError("support indices are 1-based degrees")
            d = int(data.get("d", max(sup)))
            if sup and max(sup) > d:
                raise ValidationError(f"support index {max(sup)} exceeds d={d}")
            probs = np.zeros(d)
            probs[np.asarray(sup) - 1] = vals
        else:
            raise ValidationError("expected field 'p' or fields 'support'/'values'")
        if normalize:
            return make_distribution(probs)
        return cls(probs)

    def to_json(self, sparse: bool | None = None) -> str:
        return json.dumps(self.to_dict(sparse))

    @classmethod
    def from_json(cls, text: str, normalize: bool = False) -> "DegreeDistribution":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(
                f"malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
            ) from exc
        return cls.from_dict(data, normalize=normalize)


def make_distribution(weights) -> DegreeDistribution:
    """Normalize non-negative weights into a :class:`DegreeDistribution`."""
    w = np.asarray(weights, dtype=float).ravel()
    if w.size == 0:
        raise ValidationError("empty weight vector")
    if not np.all(np.isfinite(w)):
        raise ValidationError("weights must be finite")
    if np.any(w < 0.0):
        raise ValidationError("weights must be non-negative")
    total = w.sum()
    if total <= 0.0:
        raise ValidationError("at least one weight must be positive")
    return DegreeDistribution(w / total)


def eval_p(dist: DegreeDistribution, t):
    return dist.p(_check_unit_interval(t))


def eval_p_prime(dist: DegreeDistribution, t):
    return dist.p_prime(_check_unit_interval(t))


def eval_p_double_prime(dist: DegreeDistribution, t):
    return dist.p_double_prime(_check_unit_interval(t))


def perturb(dist: DegreeDistribution, delta: float) -> DegreeDistribution:
    """Move a fraction ``delta`` of the mass of every degree onto degree 1.

    q_1 = p_1 + delta (1 - p_1),  q_i = (1 - delta) p_i  for i > 1.
    """
    delta = float(delta)
    if not 0.0 <= delta < 1.0:
        raise ValidationError(f"delta must lie in [0, 1), got {delta}")
    q = (1.0 - delta) * dist.probs
    q[0] = dist.probs[0] + delta * (1.0 - dist.probs[0])
    return DegreeDistribution(q)


def uniform_distribution(d: int) -> DegreeDistribution:
    return DegreeDistribution(np.full(d, 1.0 / d))


def point_mass(degree: int, d: int | None = None) -> DegreeDistribution:
    """All mass on a single degree."""
    d = degree if d is None else d
    p = np.zeros(d)
    p[degree - 1] = 1.0
    return DegreeDistribution(p)
