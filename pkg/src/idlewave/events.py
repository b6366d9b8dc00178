"""Stochastic terms and one-off disturbances.

Local frequency jitter and interaction delay are piecewise-constant
processes resampled every ``segment_len`` seconds.  Realizations are keyed
by (seed, stream, segment index) through ``numpy.random.SeedSequence``, so
any segment value can be recomputed independently of integration order:
identical seeds give identical noise, and the integrator never has to
carry generator state across steps.

One-off disturbances model a process falling behind: an instantaneous
phase kick (non-positive, computation cannot be skipped) or a temporary
reduction of the intrinsic frequency over a time window.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import ConfigError

# stream tags for SeedSequence spawn keys
_STREAM_LOCAL_NOISE = 0
_STREAM_DELAY = 1
_STREAM_INIT = 2


def _segment_rng(seed: int, stream: int, segment: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(stream, segment))
    return np.random.default_rng(ss)


@dataclass(frozen=True)
class NoiseSpec:
    """Process-local frequency jitter, piecewise constant per segment."""

    kind: str = "none"  # "none" | "gaussian" | "uniform"
    std: float = 0.0  # gaussian std, rad/s
    halfwidth: float = 0.0  # uniform halfwidth, rad/s
    segment_len: float = 1.0  # resample interval, seconds
    enabled: tuple[int, ...] | None = None  # subset of processes; None = all

    def __post_init__(self):
        if self.kind not in ("none", "gaussian", "uniform"):
            raise ConfigError(f"unknown noise kind {self.kind!r}")
        if self.std < 0 or self.halfwidth < 0:
            raise ConfigError("noise amplitude must be >= 0")
        if self.segment_len <= 0:
            raise ConfigError("noise segment_len must be > 0")
        if self.enabled is not None:
            object.__setattr__(self, "enabled", tuple(int(i) for i in self.enabled))

    @classmethod
    def none(cls) -> "NoiseSpec":
        return cls(kind="none")

    @classmethod
    def gaussian(cls, std: float, segment_len: float = 1.0,
                 enabled: Sequence[int] | None = None) -> "NoiseSpec":
        return cls(kind="gaussian", std=std, segment_len=segment_len,
                   enabled=None if enabled is None else tuple(enabled))

    @classmethod
    def uniform(cls, halfwidth: float, segment_len: float = 1.0,
                enabled: Sequence[int] | None = None) -> "NoiseSpec":
        return cls(kind="uniform", halfwidth=halfwidth, segment_len=segment_len,
                   enabled=None if enabled is None else tuple(enabled))

    @property
    def active(self) -> bool:
        if self.kind == "none":
            return False
        if self.kind == "gaussian":
            return self.std > 0
        return self.halfwidth > 0


@dataclass(frozen=True)
class DelaySpec:
    """Interaction delay tau applied uniformly to all lagged phase lookups."""

    kind: str = "none"  # "none" | "fixed" | "random_uniform"
    tau: float = 0.0  # fixed lag, seconds
    max_tau: float = 0.0  # upper bound for random lag, seconds
    segment_len: float = 1.0  # resample interval for the random lag

    def __post_init__(self):
        if self.kind not in ("none", "fixed", "random_uniform"):
            raise ConfigError(f"unknown delay kind {self.kind!r}")
        if self.tau < 0 or self.max_tau < 0:
            raise ConfigError("delay must be >= 0")
        if self.segment_len <= 0:
            raise ConfigError("delay segment_len must be > 0")

    @classmethod
    def none(cls) -> "DelaySpec":
        return cls(kind="none")

    @classmethod
    def fixed(cls, tau: float) -> "DelaySpec":
        return cls(kind="fixed", tau=tau)

    @classmethod
    def random_uniform(cls, max_tau: float, segment_len: float = 1.0) -> "DelaySpec":
        return cls(kind="random_uniform", max_tau=max_tau, segment_len=segment_len)

    @property
    def max_lag(self) -> float:
        if self.kind == "fixed":
            return self.tau
        if self.kind == "random_uniform":
            return self.max_tau
        return 0.0

    @property
    def active(self) -> bool:
        return self.max_lag > 0


@dataclass(frozen=True)
class PhaseKick:
    """Instantaneous phase drop; dtheta <= 0 because work cannot be skipped."""

    dtheta: float

    def __post_init__(self):
        if not math.isfinite(self.dtheta) or self.dtheta > 0:
            raise ConfigError(f"phase kick must be <= 0, got {self.dtheta}")


@dataclass(frozen=True)
class SlowDown:
    """Temporary intrinsic-frequency reduction (total deficit dfreq*duration)."""

    dfreq: float  # rad/s reduction, >= 0
    duration: float  # seconds, > 0

    def __post_init__(self):
        if self.dfreq < 0:
            raise ConfigError("slowdown dfreq must be >= 0")
        if self.duration <= 0:
            raise ConfigError("slowdown duration must be > 0")


@dataclass(frozen=True)
class DelayEvent:
    process: int
    t_start: float
    magnitude: Union[PhaseKick, SlowDown]

    def __post_init__(self):
        if self.t_start < 0:
            raise ConfigError("event t_start must be >= 0")
        if not isinstance(self.magnitude, (PhaseKick, SlowDown)):
            raise ConfigError("event magnitude must be PhaseKick or SlowDown")


EventList = Sequence[DelayEvent]


def validate_events(events: EventList, n: int, horizon: float) -> tuple[DelayEvent, ...]:
    """Check indices and times against the run, return the events sorted by t_start."""
    out = sorted(events, key=lambda ev: ev.t_start)
    for ev in out:
        if not 0 <= ev.process < n:
            raise ConfigError(f"event process {ev.process} out of range [0, {n})")
        if ev.t_start > horizon:
            raise ConfigError(f"event at t={ev.t_start} beyond horizon {horizon}")
    return tuple(out)


def sample_local_noise(spec: NoiseSpec, n: int, seed: int, t: float) -> np.ndarray:
    """Per-oscillator frequency jitter (rad/s) at time t.

    Piecewise constant over segments of ``spec.segment_len``; values are
    independent across oscillators and segments and reproducible from the
    seed alone.
    """
    out = np.zeros(n)
    if not spec.active:
        return out
    segment = int(math.floor(t / spec.segment_len))
    rng = _segment_rng(seed, _STREAM_LOCAL_NOISE, segment)
    if spec.kind == "gaussian":
        values = rng.normal(0.0, spec.std, n)
    else:
        values = rng.uniform(-spec.halfwidth, spec.halfwidth, n)
    if spec.enabled is None:
        out[:] = values
    else:
        idx = list(spec.enabled)
        out[idx] = values[idx]
    return out


def realized_lag(spec: DelaySpec, seed: int, t: float) -> float:
    """Interaction delay tau(t) in seconds, piecewise constant per segment."""
    if spec.kind == "none":
        return 0.0
    if spec.kind == "fixed":
        return spec.tau
    segment = int(math.floor(t / spec.segment_len))
    rng = _segment_rng(seed, _STREAM_DELAY, segment)
    return float(rng.uniform(0.0, spec.max_tau))


def slowdown_offsets(events: EventList, t: float, n: int) -> np.ndarray:
    """Summed active frequency reductions (rad/s, <= 0 entries) at time t.

    A slowdown is active on [t_start, t_start + duration).
    """
    out = np.zeros(n)
    for ev in events:
        mag = ev.magnitude
        if isinstance(mag, SlowDown) and ev.t_start <= t < ev.t_start + mag.duration:
            out[ev.process] -= mag.dfreq
    return out


def apply_event(state, ev: DelayEvent):
    """Apply a one-off disturbance to a phase state.

    Phase kicks modify the target phase instantly; slowdowns leave the
    phases untouched (the integrator accounts for them through
    ``slowdown_offsets`` while the window is active).  Returns a new state.
    """
    n = len(state.theta)
    if not 0 <= ev.process < n:
        raise ConfigError(f"event process {ev.process} out of range [0, {n})")
    if isinstance(ev.magnitude, PhaseKick):
        theta = np.array(state.theta, dtype=float)
        theta[ev.process] += ev.magnitude.dtheta
        return dataclasses.replace(state, theta=theta)
    return state


def initial_condition_rng(seed: int) -> np.random.Generator:
    """Dedicated RNG stream for seeded desynchronized initial conditions."""
    return _segment_rng(seed, _STREAM_INIT, 0)
