"""Core phase-oscillator model of a bulk-synchronous parallel program.

Each process is a phase oscillator advancing at the intrinsic rate
``2*pi / (t_comp + t_comm)`` (one revolution per compute-communicate
iteration) and coupled to the processes it exchanges messages with:

    dtheta_i/dt = omega_i + zeta_i(t)
                  + (v_p / N) * sum_j T_ij * V(theta_j(t - tau) - theta_i(t))

``T`` is a sparse 0/1 connection matrix, ``V`` an interaction potential of
the pairwise phase difference, and ``v_p = beta * kappa / (t_comp + t_comm)``
ties the coupling strength to the message protocol (eager beta=1,
rendezvous beta=2) and to the communication distances (kappa).

Phases are kept unwrapped: the non-periodic potentials make absolute
phase differences meaningful (a process cannot slip a whole iteration
against a neighbour it depends on), so no modular reduction is applied
anywhere in the dynamics.  Wrapping happens only at display time.

Sign convention: potentials take ``dphi = theta_j - theta_i`` (neighbour
minus self) and are positive for large positive ``dphi``, so an oscillator
behind its neighbours is pulled forward.  All three kinds are odd, which
makes the convention self-consistent for both edge directions.
"""

from __future__ import annotations

import bisect
import functools
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import ConfigError, HistoryUnderrunError
from .events import DelaySpec, NoiseSpec

TWO_PI = 2.0 * math.pi

KAPPA_SUM = "sum"  # kappa = sum of |d| over communication distances
KAPPA_LONGEST = "longest"  # kappa = max |d| (grouped wait on all requests)


# ---------------------------------------------------------------------------
# interaction potentials

@dataclass(frozen=True)
class Kuramoto:
    """Plain periodic sine coupling (classic mean-field oscillator model)."""


@dataclass(frozen=True)
class Scalable:
    """tanh coupling: attractive at every distance, no phase slips.

    Mimics resource-scalable programs, which resynchronize after any
    disturbance.
    """


@dataclass(frozen=True)
class Bottlenecked:
    """Short-range repulsive, long-range attractive coupling.

    ``sigma`` is the interaction horizon: beyond it the pull is constant,
    inside it the potential is -sin(3*pi/(2*sigma) * dphi), which repels
    nearly-aligned oscillators and has its stable zero at 2*sigma/3.
    Mimics resource-bottlenecked programs, which settle into a staggered
    (desynchronized) steady state.
    """

    sigma: float

    def __post_init__(self):
        if not (self.sigma > 0):
            raise ConfigError(f"interaction horizon sigma must be > 0, got {self.sigma}")


PotentialKind = Union[Kuramoto, Scalable, Bottlenecked]


def eval_potential(kind: PotentialKind, dphi):
    """Evaluate the interaction potential at phase difference(s) dphi.

    ``dphi = theta_j - theta_i``.  Accepts scalars or arrays; the result
    is dimensionless and bounded by 1 in magnitude.
    """
    arr = np.asarray(dphi, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ConfigError("potential argument must be finite")
    if isinstance(kind, Kuramoto):
        out = np.sin(arr)
    elif isinstance(kind, Scalable):
        out = np.tanh(arr)
    elif isinstance(kind, Bottlenecked):
        sigma = kind.sigma
        inside = np.abs(arr) < sigma
        out = np.where(inside, -np.sin((3.0 * np.pi / (2.0 * sigma)) * arr), np.sign(arr))
    else:
        raise ConfigError(f"unknown potential kind {kind!r}")
    return out if np.ndim(dphi) else float(out)


# ---------------------------------------------------------------------------
# topology

@dataclass(frozen=True)
class Topology:
    """Sparse 0/1 connection matrix as an explicit edge set.

    ``edges`` holds directed pairs (i, j) meaning T_ij = 1: process i
    interacts with (waits on) process j.  ``distances`` optionally records
    the signed communication distances the matrix was built from, which is
    what the coupling-strength kappa is computed from.
    """

    n: int
    edges: tuple[tuple[int, int], ...]
    distances: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ConfigError(f"topology dimension must be >= 1, got {self.n}")
        pairs = tuple((int(i), int(j)) for i, j in self.edges)
        seen = set()
        for i, j in pairs:
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ConfigError(f"edge ({i}, {j}) out of range for n={self.n}")
            if i == j:
                raise ConfigError(f"self-connection ({i}, {i}) is not allowed")
            if (i, j) in seen:
                raise ConfigError(f"duplicate edge ({i}, {j})")
            seen.add((i, j))
        object.__setattr__(self, "edges", tuple(sorted(pairs)))
        if self.distances is not None:
            object.__setattr__(self, "distances", tuple(int(d) for d in self.distances))

    def matrix(self) -> np.ndarray:
        """Dense n x n 0/1 matrix T."""
        mat = np.zeros((self.n, self.n))
        for i, j in self.edges:
            mat[i, j] = 1.0
        return mat

    def neighbors(self, i: int) -> tuple[int, ...]:
        return tuple(j for (a, j) in self.edges if a == i)


@functools.lru_cache(maxsize=256)
def _edge_arrays(top: Topology) -> tuple[np.ndarray, np.ndarray]:
    """Edge list as (target i, source j) index arrays for vectorised sums."""
    if not top.edges:
        empty = np.zeros(0, dtype=np.intp)
        return empty, empty
    dst = np.fromiter((i for i, _ in top.edges), dtype=np.intp, count=len(top.edges))
    src = np.fromiter((j for _, j in top.edges), dtype=np.intp, count=len(top.edges))
    dst.flags.writeable = False
    src.flags.writeable = False
    return dst, src


# ---------------------------------------------------------------------------
# phase state and lag history

class History:
    """Bounded record of past (t, theta) samples for lagged phase lookups.

    Linear interpolation between stored samples; queries before the first
    retained sample return the initial phases (constant pre-history), and
    queries past the newest sample extrapolate linearly from the last two
    entries.  ``lookups`` counts how often the buffer was consulted, which
    lets tests verify the zero-lag fast path never touches it.
    """

    def __init__(self, t0: float, theta0: np.ndarray):
        self._times: list[float] = [float(t0)]
        self._thetas: list[np.ndarray] = [np.array(theta0, dtype=float)]
        self._pruned = False
        self.lookups = 0

    @property
    def times(self) -> tuple[float, ...]:
        return tuple(self._times)

    @property
    def newest(self) -> float:
        return self._times[-1]

    @property
    def oldest(self) -> float:
        return self._times[0]

    def append(self, t: float, theta: np.ndarray) -> None:
        if t <= self._times[-1]:
            raise ConfigError("history timestamps must be strictly increasing")
        self._times.append(float(t))
        self._thetas.append(np.array(theta, dtype=float))

    def prune(self, min_time: float) -> None:
        """Drop samples no longer needed for lags back to ``min_time``.

        Keeps one sample at or before the cutoff so interpolation across it
        stays possible.
        """
        cut = 0
        while cut + 1 < len(self._times) and self._times[cut + 1] <= min_time:
            cut += 1
        if cut:
            del self._times[:cut]
            del self._thetas[:cut]
            self._pruned = True

    def sample(self, t: float) -> np.ndarray:
        self.lookups += 1
        times = self._times
        if t <= times[0]:
            if self._pruned and t < times[0]:
                raise HistoryUnderrunError(
                    f"lagged phase at t={t:.6g} requested but history starts at "
                    f"{times[0]:.6g} after pruning")
            return self._thetas[0]
        if t >= times[-1]:
            if len(times) == 1 or t == times[-1]:
                return self._thetas[-1]
            # extrapolate from the last two points (stage times can lie a
            # fraction of a step beyond the newest accepted sample)
            t0, t1 = times[-2], times[-1]
            w = (t - t0) / (t1 - t0)
            return self._thetas[-2] + w * (self._thetas[-1] - self._thetas[-2])
        k = bisect.bisect_right(times, t)
        t0, t1 = times[k - 1], times[k]
        w = (t - t0) / (t1 - t0)
        return self._thetas[k - 1] + w * (self._thetas[k] - self._thetas[k - 1])


@dataclass(frozen=True)
class PhaseState:
    """Unwrapped oscillator phases at a simulation time."""

    t: float
    theta: np.ndarray
    history: History | None = None

    def __post_init__(self):
        theta = np.array(self.theta, dtype=float)
        theta.flags.writeable = False
        object.__setattr__(self, "theta", theta)

    @property
    def n(self) -> int:
        return len(self.theta)


# ---------------------------------------------------------------------------
# model specification

@dataclass(frozen=True)
class ModelSpec:
    """Full parameterisation of the coupled-oscillator system."""

    n: int
    t_comp: float  # computation phase duration, seconds
    t_comm: float  # communication phase duration, seconds
    topology: Topology
    potential: PotentialKind = field(default_factory=Scalable)
    protocol_beta: int = 1  # eager = 1, rendezvous = 2
    kappa_mode: str = KAPPA_SUM  # "sum" | "longest"
    kappa_override: float | None = None  # explicit kappa (topology from file)
    coupling_override: float | None = None  # use directly as v_p (Kuramoto-style K)
    local_noise: NoiseSpec = field(default_factory=NoiseSpec.none)
    interaction_delay: DelaySpec = field(default_factory=DelaySpec.none)
    freq_offsets: tuple[float, ...] | None = None  # per-process omega deviations, rad/s

    def __post_init__(self):
        if self.n < 1:
            raise ConfigError(f"n must be >= 1, got {self.n}")
        if self.t_comp < 0 or self.t_comm < 0 or self.t_comp + self.t_comm <= 0:
            raise ConfigError("t_comp and t_comm must be >= 0 with a positive sum")
        if self.protocol_beta not in (1, 2):
            raise ConfigError(f"protocol_beta must be 1 or 2, got {self.protocol_beta}")
        if self.kappa_mode not in (KAPPA_SUM, KAPPA_LONGEST):
            raise ConfigError(f"kappa_mode must be '{KAPPA_SUM}' or '{KAPPA_LONGEST}'")
        if self.topology.n != self.n:
            raise ConfigError(
                f"topology dimension {self.topology.n} does not match n={self.n}")
        if self.freq_offsets is not None:
            offs = tuple(float(x) for x in self.freq_offsets)
            if len(offs) != self.n:
                raise ConfigError("freq_offsets length must equal n")
            object.__setattr__(self, "freq_offsets", offs)

    @property
    def period(self) -> float:
        """Duration of one compute-communicate iteration."""
        return self.t_comp + self.t_comm

    @property
    def omega(self) -> float:
        """Intrinsic angular frequency, one revolution per iteration."""
        return TWO_PI / self.period

    def intrinsic_rates(self) -> np.ndarray:
        base = np.full(self.n, self.omega)
        if self.freq_offsets is not None:
            base += np.asarray(self.freq_offsets)
        return base


def coupling_strength(spec: ModelSpec) -> float:
    """Coupling strength v_p = beta * kappa / (t_comp + t_comm) in rad/s.

    ``coupling_override`` short-circuits the protocol formula (used to run
    the plain Kuramoto system with an explicit K).
    """
    if spec.coupling_override is not None:
        return float(spec.coupling_override)
    if spec.kappa_override is not None:
        kappa = float(spec.kappa_override)
    else:
        dists = spec.topology.distances
        if dists is None:
            raise ConfigError(
                "kappa requires communication distances on the topology "
                "(or kappa_override / coupling_override)")
        mags = [abs(d) for d in dists]
        kappa = float(sum(mags) if spec.kappa_mode == KAPPA_SUM else max(mags))
    return spec.protocol_beta * kappa / spec.period


def rhs(state: PhaseState, spec: ModelSpec,
        noise_sample: np.ndarray | None = None,
        lag: float | None = None) -> np.ndarray:
    """Right-hand side dtheta/dt of the coupled system, in rad/s.

    ``noise_sample`` is the per-oscillator jitter vector for the current
    noise segment (zeros when omitted).  ``lag`` is the realised
    interaction delay; when omitted it is taken from the spec (a random
    delay spec has no single value and must be resolved by the caller).
    Pure function: neither state nor spec is modified.
    """
    theta = state.theta
    if len(theta) != spec.n:
        raise ConfigError(f"state has {len(theta)} phases, spec.n={spec.n}")
    out = spec.intrinsic_rates()
    if noise_sample is not None:
        noise_sample = np.asarray(noise_sample, dtype=float)
        if noise_sample.shape != (spec.n,):
            raise ConfigError("noise_sample must have one entry per oscillator")
        out = out + noise_sample
    if lag is None:
        delay = spec.interaction_delay
        if delay.kind == "random_uniform":
            raise ConfigError("random interaction delay must be resolved to a "
                              "concrete lag by the caller")
        lag = delay.max_lag
    v_p = coupling_strength(spec)
    dst, src = _edge_arrays(spec.topology)
    if v_p == 0.0 or len(dst) == 0:
        return out
    if lag > 0.0:
        if state.history is None:
            raise HistoryUnderrunError("lagged coupling requires a history buffer")
        theta_lag = state.history.sample(state.t - lag)
    else:
        theta_lag = theta
    coupling = np.zeros(spec.n)
    np.add.at(coupling, dst, eval_potential(spec.potential, theta_lag[src] - theta[dst]))
    return out + (v_p / spec.n) * coupling
