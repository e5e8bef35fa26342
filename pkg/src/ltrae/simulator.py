"""Finite-k Monte Carlo of an LT code read by a peeling decoder.

Coded symbols arrive one at a time (sequential model: draws with replacement)
or according to a rate-k Poisson process (Poissonized model).  Each trial has
its own Philox stream derived from (seed, trial index), so results do not
depend on how trials are distributed over workers.
"""
from __future__ import annotations

import json
import math
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import DegreeDistribution
from .errors import ConfigurationError, ValidationError

RNG_ALGORITHM = "numpy-philox4x64-10+seedsequence"
ARRIVAL_MODELS = ("sequential", "poissonized")
DEFAULT_DRAW_FACTOR = 20


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent, reproducible stream for one trial."""
    return np.random.Generator(np.random.Philox(
        np.random.SeedSequence(int(seed), spawn_key=(int(trial),))))


@dataclass(frozen=True)
class CodedSymbol:
    support: tuple  # distinct information-symbol indices in [0, k)

    @property
    def degree(self) -> int:
        return len(self.support)


class LTEncoder:
    """Draws coded symbols: a degree by inverse CDF, then a uniform subset.

    The subset comes from a partial Fisher-Yates shuffle of a persistent
    permutation; starting from any permutation the first w entries after w
    swap steps are a uniformly random w-subset.
    """

    def __init__(self, dist: DegreeDistribution, k: int, rng: np.random.Generator,
                 batch: int = 4096):
        if k < 1:
            raise ConfigurationError("k must be positive")
        if dist.d > k:
            raise ConfigurationError(f"maximum degree d={dist.d} exceeds k={k}")
        self.k = int(k)
        self.d = dist.d
        self.cdf = np.cumsum(dist.probs)
        self.rng = rng
        self.batch = batch
        self.perm = list(range(self.k))
        self._buf = []
        self._pos = 0

    def _uniform(self) -> float:
        if self._pos >= len(self._buf):
            self._buf = self.rng.random(self.batch).tolist()
            self._pos = 0
        u = self._buf[self._pos]
        self._pos += 1
        return u

    def degree(self) -> int:
        j = int(np.searchsorted(self.cdf, self._uniform(), side="right"))
        return min(j, self.d - 1) + 1

    def sample(self) -> tuple:
        w = self.degree()
        perm, k = self.perm, self.k
        for i in range(w):
            j = i + int(self._uniform() * (k - i))
            perm[i], perm[j] = perm[j], perm[i]
        return tuple(perm[:w])


def sample_coded_symbol(dist: DegreeDistribution, k: int,
                        rng: np.random.Generator) -> CodedSymbol:
    return CodedSymbol(LTEncoder(dist, k, rng, batch=64).sample())


class PeelingState:
    """Incremental peeling decoder.

    Each received symbol keeps a residual degree and the XOR of the indices of
    its still-undecoded neighbours, so a degree-1 symbol names its neighbour
    directly.  With ``track_values`` the decoder also carries XOR payloads.
    """

    def __init__(self, k: int, track_values: bool = False):
        self.k = int(k)
        self.decoded = [False] * self.k
        self.decoded_count = 0
        self.adjacency = [[] for _ in range(self.k)]
        self.residual_degree = []
        self._index_xor = []
        self.ripple = deque()
        self.track_values = track_values
        self._payload = [] if track_values else None
        self.values = [None] * self.k if track_values else None
        self.received = 0

    def add(self, support, value=None) -> int:
        """Insert one coded symbol and peel to exhaustion; returns #newly decoded."""
        self.received += 1
        decoded = self.decoded
        residual = [i for i in support if not decoded[i]]
        if self.track_values:
            if value is None:
                raise ValidationError("value required when tracking payloads")
            for i in support:
                if decoded[i]:
                    value ^= self.values[i]
        if not residual:
            return 0
        cid = len(self.residual_degree)
        acc = 0
        for i in residual:
            self.adjacency[i].append(cid)
            acc ^= i
        self.residual_degree.append(len(residual))
        self._index_xor.append(acc)
        if self.track_values:
            self._payload.append(value)
        if len(residual) == 1:
            self.ripple.append(cid)
            return self._cascade()
        return 0

    def _cascade(self) -> int:
        before = self.decoded_count
        deg, xr, adj, decoded = self.residual_degree, self._index_xor, self.adjacency, self.decoded
        ripple = self.ripple
        while ripple:
            c = ripple.popleft()
            if deg[c] != 1:
                continue
            j = xr[c]
            decoded[j] = True
            self.decoded_count += 1
            if self.track_values:
                vj = self._payload[c]
                self.values[j] = vj
            for c2 in adj[j]:
                deg[c2] -= 1
                xr[c2] ^= j
                if self.track_values:
                    self._payload[c2] ^= vj
                if deg[c2] == 1:
                    ripple.append(c2)
            adj[j] = []
        return self.decoded_count - before

    @property
    def complete(self) -> bool:
        return self.decoded_count == self.k


def peel_incremental(state: PeelingState, symbol) -> PeelingState:
    support = symbol.support if isinstance(symbol, CodedSymbol) else symbol
    state.add(support)
    return state


# --------------------------------------------------------------------------- #
# single trials
# --------------------------------------------------------------------------- #

def _run_draws(dist, k, rng, max_draws, stop_when_complete=True, watch=0):
    """Decoded counts after m = 0..M draws, and the draw that decoded ``watch``."""
    enc = LTEncoder(dist, k, rng)
    dec = PeelingState(k)
    counts = [0]
    tau = None
    for m in range(1, max_draws + 1):
        dec.add(enc.sample())
        counts.append(dec.decoded_count)
        if tau is None and dec.decoded[watch]:
            tau = m
        if stop_when_complete and dec.decoded_count == k:
            break
    return np.asarray(counts), tau


def _check_arrival(arrival_model):
    if arrival_model not in ARRIVAL_MODELS:
        raise ValidationError(f"arrival model must be one of {ARRIVAL_MODELS}")


def simulate_trajectory(dist: DegreeDistribution, k: int, r_grid, rng: np.random.Generator,
                        arrival_model: str = "sequential") -> np.ndarray:
    """Undecoded fraction 1 - z_k(r) of a single trial at each r in ``r_grid``.

    sequential:  after floor(r k) draws;
    poissonized: after N(r) draws, N a Poisson process of rate k.
    """
    _check_arrival(arrival_model)
    r_grid = np.asarray(r_grid, dtype=float)
    if np.any(r_grid < 0):
        raise ValidationError("r values must be non-negative")
    r_max = float(r_grid.max()) if r_grid.size else 0.0
    if arrival_model == "sequential":
        n_at = np.floor(r_grid * k + 1e-9).astype(int)
        counts, _ = _run_draws(dist, k, rng, int(math.ceil(r_max * k)),
                               stop_when_complete=True)
    else:
        enc = LTEncoder(dist, k, rng)
        dec = PeelingState(k)
        counts = [0]
        arrival_times = []
        t = 0.0
        while True:
            t += rng.exponential(1.0 / k)
            if t > r_max or dec.complete:
                break
            arrival_times.append(t)
            dec.add(enc.sample())
            counts.append(dec.decoded_count)
        counts = np.asarray(counts)
        n_at = np.searchsorted(np.asarray(arrival_times), r_grid, side="right")
    n_at = np.minimum(n_at, counts.size - 1)
    return 1.0 - counts[n_at] / k


# --------------------------------------------------------------------------- #
# many trials
# --------------------------------------------------------------------------- #

@dataclass(frozen=True, eq=False)
class TrajectoryStats:
    k: int
    trials: int
    seed: int
    arrival: str
    r_grid: np.ndarray = field(repr=False)
    mean_undecoded: np.ndarray = field(repr=False)
    stderr_undecoded: np.ndarray = field(repr=False)
    rae: float = math.nan
    stderr: float = math.nan
    rae_stopping: float = math.nan
    stderr_stopping: float = math.nan
    stall_prob: float = 0.0
    trajectories: np.ndarray | None = field(default=None, repr=False)
    rng: str = RNG_ALGORITHM

    def to_dict(self) -> dict:
        return {"k": self.k, "trials": self.trials, "seed": self.seed, "rng": self.rng,
                "arrival": self.arrival, "rae": self.rae, "stderr": self.stderr,
                "rae_stopping": self.rae_stopping, "stderr_stopping": self.stderr_stopping,
                "stall_prob": self.stall_prob}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _rae_trial(args):
    dist, k, seed, trial, max_draws, r_grid = args
    rng = trial_rng(seed, trial)
    counts, tau = _run_draws(dist, k, rng, max_draws, stop_when_complete=True)
    stalled = counts[-1] < k
    # exact integral of the step function r -> 1 - z_k(r), r = m/k
    area = float(np.sum(1.0 - counts[:-1] / k)) / k if counts.size > 1 else 0.0
    if stalled:
        area += (1.0 - counts[-1] / k) / k
    tau_r = (tau if tau is not None else counts.size - 1) / k
    idx = np.minimum(np.floor(r_grid * k + 1e-9).astype(int), counts.size - 1)
    return area, tau_r, stalled, 1.0 - counts[idx] / k


def _map(fn, jobs, workers):
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(fn, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    return [fn(j) for j in jobs]


def _stderr(x):
    x = np.asarray(x, dtype=float)
    return float(x.std(ddof=1) / math.sqrt(x.size)) if x.size > 1 else math.nan


def estimate_rae(dist: DegreeDistribution, k: int, trials: int, seed: int,
                 r_grid=None, max_draw_factor: int = DEFAULT_DRAW_FACTOR,
                 keep_trajectories: bool = False, workers: int = 1) -> TrajectoryStats:
    """Relative random access expectation T_k(p)/k under sequential draws.

    Two estimators are reported: the area under each trial's decoding
    trajectory (tail-sum formula) and the normalized number of draws until
    information symbol 0 is decodable (its stopping time).  A trial is cut
    off after ``max_draw_factor * k`` draws; ``stall_prob`` is the fraction
    of trials that reached the cutoff undecoded.
    """
    if trials < 1:
        raise ValidationError("trials must be at least 1")
    if dist.d > k:
        raise ConfigurationError(f"maximum degree d={dist.d} exceeds k={k}")
    r_grid = np.linspace(0.0, 3.0, 301) if r_grid is None else np.asarray(r_grid, float)
    max_draws = int(max_draw_factor * k)
    jobs = [(dist, k, seed, t, max_draws, r_grid) for t in range(trials)]
    out = _map(_rae_trial, jobs, workers)
    areas = np.array([o[0] for o in out])
    taus = np.array([o[1] for o in out])
    stalls = np.array([o[2] for o in out])
    traj = np.vstack([o[3] for o in out])
    return TrajectoryStats(
        k=k, trials=trials, seed=seed, arrival="sequential", r_grid=r_grid,
        mean_undecoded=traj.mean(axis=0),
        stderr_undecoded=traj.std(axis=0, ddof=1) / math.sqrt(trials) if trials > 1
        else np.full(r_grid.size, math.nan),
        rae=float(areas.mean()), stderr=_stderr(areas),
        rae_stopping=float(taus.mean()), stderr_stopping=_stderr(taus),
        stall_prob=float(stalls.mean()),
        trajectories=traj if keep_trajectories else None)


def _curve_trial(args):
    dist, k, seed, trial, r_grid, arrival = args
    return simulate_trajectory(dist, k, r_grid, trial_rng(seed, trial), arrival)


def average_decoding_curve(dist: DegreeDistribution, k: int, trials: int, r_grid,
                           seed: int, arrival_model: str = "poissonized",
                           keep_trajectories: bool = False,
                           workers: int = 1) -> TrajectoryStats:
    """Pointwise mean of ``trials`` decoding trajectories (estimate of 1 - Z_k(r, p)).

    ``rae`` is the trapezoid area under the mean curve over ``r_grid``.
    """
    _check_arrival(arrival_model)
    if trials < 1:
        raise ValidationError("trials must be at least 1")
    if dist.d > k:
        raise ConfigurationError(f"maximum degree d={dist.d} exceeds k={k}")
    r_grid = np.asarray(r_grid, dtype=float)
    jobs = [(dist, k, seed, t, r_grid, arrival_model) for t in range(trials)]
    traj = np.vstack(_map(_curve_trial, jobs, workers))
    mean = traj.mean(axis=0)
    se = traj.std(axis=0, ddof=1) / math.sqrt(trials) if trials > 1 else np.full(mean.size, math.nan)
    return TrajectoryStats(
        k=k, trials=trials, seed=seed, arrival=arrival_model, r_grid=r_grid,
        mean_undecoded=mean, stderr_undecoded=se,
        rae=float(np.trapezoid(mean, r_grid)), stderr=float(np.trapezoid(se, r_grid)),
        trajectories=traj if keep_trajectories else None)
