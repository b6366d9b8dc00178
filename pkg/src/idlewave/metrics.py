"""Observables over sampled trajectories.

Everything here is a pure function of a Trajectory: lagger-normalised
phases, the synchronisation order parameter, resynchronisation detection,
the staggered-state (desynchronisation) spread, and idle-wave front
fitting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (ConfigError, InsufficientSignalError,
                     UnsupportedMetricError)
from .integrate import Trajectory

_TIME_EPS = 1e-12


def normalize_to_lagger(traj: Trajectory, t: float) -> np.ndarray:
    """Phases at time t rebased to the slowest ("lagger") process.

    Subtracting the minimum removes the common drift omega*t, so the
    result is the per-process headstart over the lagger: non-negative,
    with at least one zero entry.
    """
    theta = traj.phase_at(t)
    return theta - theta.min()


def normalize_to_lagger_series(traj: Trajectory) -> np.ndarray:
    """Lagger-normalised phases for every sample, shape (S, N)."""
    return traj.phases - traj.phases.min(axis=1, keepdims=True)


def order_parameter(phases) -> float:
    """Magnitude of the mean unit phasor: 1 = in phase, 0 = fully spread."""
    theta = np.asarray(phases, dtype=float)
    if theta.size == 0:
        raise ConfigError("order parameter needs at least one phase")
    return float(abs(np.exp(1j * theta).mean()))


def order_parameter_series(traj: Trajectory) -> np.ndarray:
    return np.abs(np.exp(1j * traj.phases).mean(axis=1))


def detect_sync(traj: Trajectory, eps: float, window: float) -> float | None:
    """Earliest time from which the phase spread stays below eps for ``window``.

    Spread is the max pairwise |theta_i - theta_j| per sample.  Returns
    None if no such time exists within the trajectory (the confirmation
    window must fit before the final sample).
    """
    if eps <= 0:
        raise ConfigError("eps must be > 0")
    if window < 0:
        raise ConfigError("window must be >= 0")
    times = traj.times
    spread = traj.phases.max(axis=1) - traj.phases.min(axis=1)
    ok = spread < eps
    # earliest k such that every sample in [t_k, t_k + window] is ok
    last_bad = -math.inf
    candidate = None
    for k in range(len(times)):
        if not ok[k]:
            last_bad = times[k]
            candidate = None
            continue
        if candidate is None and times[k] > last_bad:
            candidate = k
        if candidate is not None and times[k] - times[candidate] >= window - _TIME_EPS:
            return float(times[candidate])
    return None


def _adjacent_pairs(traj: Trajectory) -> list[tuple[int, int]]:
    """Topology edges at ring distance 1, as undirected (i, i+1) pairs."""
    n = traj.n
    edges = set(traj.spec.topology.edges)
    pairs = []
    for i in range(n):
        j = (i + 1) % n
        if j == i:
            continue
        if (i, j) in edges or (j, i) in edges:
            pairs.append((i, j))
    return pairs


def detect_desync_spread(traj: Trajectory, tail_fraction: float) -> tuple[float, float]:
    """Mean and std of |theta_{i+1} - theta_i| over the trajectory tail.

    "Adjacent" means topology edges with |d| = 1; raises
    UnsupportedMetricError when the topology has none.  The statistics run
    over all adjacent pairs and all samples in the final ``tail_fraction``
    of the trajectory.
    """
    if not 0 < tail_fraction <= 1:
        raise ConfigError("tail_fraction must be in (0, 1]")
    pairs = _adjacent_pairs(traj)
    if not pairs:
        raise UnsupportedMetricError("topology has no |d|=1 edges")
    n_tail = max(1, int(math.ceil(tail_fraction * len(traj.times))))
    tail = traj.phases[-n_tail:]
    diffs = np.abs(np.stack([tail[:, j] - tail[:, i] for i, j in pairs], axis=1))
    return float(diffs.mean()), float(diffs.std())


@dataclass(frozen=True)
class WaveFit:
    """Idle-wave front fit: per-process arrival times and a speed estimate."""

    front_arrival: np.ndarray  # (N,) first threshold crossing, NaN if never
    speed: float  # processes per second (slope of distance vs arrival)
    r_squared: float

    def __post_init__(self):
        arr = np.asarray(self.front_arrival, dtype=float)
        arr.flags.writeable = False
        object.__setattr__(self, "front_arrival", arr)


def _ring_distance(i: int, source: int, n: int) -> int:
    d = abs(i - source) % n
    return min(d, n - d)


def measure_wave_speed(traj: Trajectory, source: int, threshold: float) -> WaveFit:
    """Fit the propagation speed of the idle wave emitted at ``source``.

    Arrival at process i is the first sample after the disturbance where
    the deviation from that process's pre-event course exceeds
    ``threshold``.  Pre-event deviations are baseline-subtracted: each
    process is extrapolated from its own last pre-event sample at its
    pre-event drift rate, so existing spread does not register as an
    arrival.  The speed is the least-squares slope of ring distance from
    the source versus arrival time.
    """
    if threshold <= 0:
        raise ConfigError("threshold must be > 0")
    event_times = [t for (t, ev) in traj.events_applied if ev.process == source]
    if not event_times:
        raise ConfigError(f"no delay event occurred at process {source}")
    t_ev = min(event_times)
    times = traj.times
    n = traj.n
    pre = np.nonzero(times < t_ev - _TIME_EPS)[0]
    if len(pre) == 0:
        raise ConfigError("no samples before the event; start the event later")
    i0 = pre[-1]
    base = traj.phases[i0]
    if len(pre) >= 2:
        i_prev = pre[-2]
        drift = (base - traj.phases[i_prev]) / (times[i0] - times[i_prev])
    else:
        drift = traj.spec.intrinsic_rates()
    dev = traj.phases - base[None, :] - np.outer(times - times[i0], np.ones(n)) * drift
    after = times > t_ev + _TIME_EPS
    arrival = np.full(n, np.nan)
    for p in range(n):
        hit = np.nonzero(after & (np.abs(dev[:, p]) > threshold))[0]
        if len(hit):
            arrival[p] = times[hit[0]]
    reached = np.nonzero(np.isfinite(arrival))[0]
    if len(reached) < 3:
        raise InsufficientSignalError(
            f"wave reached only {len(reached)} processes (need >= 3)")
    t_arr = arrival[reached]
    dist = np.array([_ring_distance(int(p), source, n) for p in reached], dtype=float)
    A = np.column_stack([t_arr, np.ones_like(t_arr)])
    coef, *_ = np.linalg.lstsq(A, dist, rcond=None)
    resid = dist - A @ coef
    ss_res = float(np.sum(resid**2))
    ss_tot = float(np.sum((dist - dist.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else max(0.0, 1.0 - ss_res / ss_tot)
    return WaveFit(front_arrival=arrival, speed=float(coef[0]), r_squared=r2)
