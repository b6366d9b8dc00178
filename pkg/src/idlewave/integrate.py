"""Time integration of the coupled system.

``integrate`` advances the phases with the embedded Dormand-Prince 5(4)
pair (seven stages, weighted-RMS error norm, standard I-controller with
safety 0.9 and growth clamp [0.2, 5]).  ``reference_integrate`` is a
deliberately independent fixed-step classical RK4 used as a verification
oracle in the tests.

Both steppers share the same discontinuity handling: steps are clamped so
that sample instants, one-off events, slowdown window edges, and noise or
delay segment boundaries always coincide with step boundaries and are
never stepped across.  Phase kicks are applied between steps and the
adaptive stepper restarts from ``h_init`` afterwards.

With an interaction delay the system becomes a delay differential
equation; lagged phases come from linear interpolation in a pruned
history buffer, and the embedded error estimate then controls only the
non-delayed part of the dynamics (documented heuristic).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigError, StiffnessError
from .events import (DelayEvent, EventList, PhaseKick, SlowDown, apply_event,
                     realized_lag, sample_local_noise, slowdown_offsets,
                     validate_events)
from .model import (History, ModelSpec, PhaseState, _edge_arrays,
                    coupling_strength, eval_potential)

# Dormand-Prince 5(4) tableau.  E = b5 - b4 gives the embedded error weights.
_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_DP_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_DP_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920,
                  -17253 / 339200, 22 / 525, -1 / 40])

_SAFETY = 0.9
_FACTOR_MIN = 0.2
_FACTOR_MAX = 5.0
_H_UNDERFLOW = 1e-14  # relative to t_end
_TIME_EPS = 1e-12


@dataclass(frozen=True)
class IntegratorConfig:
    t_end: float
    sample_dt: float
    rtol: float = 1e-6
    atol: float = 1e-9
    h_init: float = 1e-3
    h_max: float = math.inf
    seed: int = 0

    def __post_init__(self):
        if self.t_end < 0:
            raise ConfigError(f"t_end must be >= 0, got {self.t_end}")
        if self.sample_dt <= 0:
            raise ConfigError(f"sample_dt must be > 0, got {self.sample_dt}")
        if self.rtol <= 0 or self.atol <= 0:
            raise ConfigError("rtol and atol must be > 0")
        if not (0 < self.h_init <= self.h_max):
            raise ConfigError("need 0 < h_init <= h_max")


@dataclass(frozen=True)
class Trajectory:
    """Phases sampled on the regular grid k * sample_dt."""

    times: np.ndarray  # (S,)
    phases: np.ndarray  # (S, N)
    events_applied: tuple[tuple[float, DelayEvent], ...]
    spec: ModelSpec

    def __post_init__(self):
        for name in ("times", "phases"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return self.phases.shape[1]

    def phase_at(self, t: float) -> np.ndarray:
        """Phases at time t, linearly interpolated between samples."""
        times = self.times
        if not times[0] - _TIME_EPS <= t <= times[-1] + _TIME_EPS:
            raise ConfigError(f"t={t} outside trajectory range "
                              f"[{times[0]}, {times[-1]}]")
        k = int(np.searchsorted(times, t, side="right")) - 1
        k = min(max(k, 0), len(times) - 1)
        if k == len(times) - 1 or abs(times[k] - t) <= _TIME_EPS:
            return np.array(self.phases[k])
        w = (t - times[k]) / (times[k + 1] - times[k])
        return (1 - w) * self.phases[k] + w * self.phases[k + 1]


class _RunContext:
    """Shared step-boundary machinery for both steppers."""

    def __init__(self, spec: ModelSpec, init: PhaseState, events: EventList,
                 cfg: IntegratorConfig):
        if init.n != spec.n:
            raise ConfigError(f"initial state has {init.n} phases, spec.n={spec.n}")
        if abs(init.t) > _TIME_EPS:
            raise ConfigError("integration must start at t=0")
        self.spec = spec
        self.cfg = cfg
        self.events = validate_events(events, spec.n, cfg.t_end)
        self.v_p = coupling_strength(spec)
        self.dst, self.src = _edge_arrays(spec.topology)
        self.base_rates = spec.intrinsic_rates()
        self.has_slowdowns = any(isinstance(ev.magnitude, SlowDown)
                                 for ev in self.events)
        self.slowdown_edges = sorted(
            {ev.t_start + ev.magnitude.duration for ev in self.events
             if isinstance(ev.magnitude, SlowDown)})
        self.noise = spec.local_noise
        self.delay = spec.interaction_delay
        self.track_history = self.delay.active
        theta0 = np.array(init.theta, dtype=float)
        if self.track_history:
            self.history = init.history if init.history is not None \
                else History(0.0, theta0)
        else:
            self.history = init.history  # untouched; must never be consulted
        self.theta = theta0
        self.t = 0.0
        # sample grid: k * sample_dt for k = 0 .. floor(t_end / sample_dt)
        n_samples = int(math.floor(cfg.t_end / cfg.sample_dt + _TIME_EPS))
        self.sample_times = np.arange(n_samples + 1) * cfg.sample_dt
        self.samples = np.empty((n_samples + 1, spec.n))
        self.next_sample = 0
        self.event_idx = 0
        self.applied: list[tuple[float, DelayEvent]] = []
        self.log_applied_at_zero_and_record()

    # -- boundary handling ---------------------------------------------------

    def log_applied_at_zero_and_record(self) -> None:
        self.apply_due_events()
        self.record_if_sample()

    def apply_due_events(self) -> None:
        while (self.event_idx < len(self.events)
               and self.events[self.event_idx].t_start <= self.t + _TIME_EPS):
            ev = self.events[self.event_idx]
            if isinstance(ev.magnitude, PhaseKick):
                state = PhaseState(self.t, self.theta)
                self.theta = np.array(apply_event(state, ev).theta)
            # slowdowns act through rate offsets while their window is active
            self.applied.append((self.t, ev))
            self.event_idx += 1

    def record_if_sample(self) -> None:
        while (self.next_sample < len(self.sample_times)
               and self.sample_times[self.next_sample] <= self.t + _TIME_EPS):
            self.samples[self.next_sample] = self.theta
            self.next_sample += 1

    def next_boundary(self) -> float:
        """Earliest upcoming time a step must not cross."""
        cands = [self.cfg.t_end]
        if self.next_sample < len(self.sample_times):
            cands.append(float(self.sample_times[self.next_sample]))
        if self.event_idx < len(self.events):
            cands.append(self.events[self.event_idx].t_start)
        for edge in self.slowdown_edges:
            if edge > self.t + _TIME_EPS:
                cands.append(edge)
                break
        if self.noise.active:
            seg = self.noise.segment_len
            cands.append((math.floor(self.t / seg + _TIME_EPS) + 1) * seg)
        if self.delay.kind == "random_uniform":
            seg = self.delay.segment_len
            cands.append((math.floor(self.t / seg + _TIME_EPS) + 1) * seg)
        return min(c for c in cands if c > self.t + _TIME_EPS)

    def advance_bookkeeping(self, t_new: float, theta_new: np.ndarray) -> bool:
        """Commit an accepted step; returns True if an event fired at t_new."""
        self.t = t_new
        self.theta = theta_new
        if self.track_history:
            self.history.append(t_new, theta_new)
            keep_back = self.delay.max_lag + 2 * self.cfg.sample_dt
            self.history.prune(t_new - keep_back)
        self.record_if_sample()
        before = len(self.applied)
        self.apply_due_events()
        fired = len(self.applied) != before
        if fired and self.track_history:
            # history continues from the post-kick value at the next step
            pass
        return fired

    # -- per-step right-hand side ---------------------------------------------

    def make_step_rhs(self) -> Callable[[float, np.ndarray], np.ndarray]:
        """RHS valid until the next boundary (noise, lag, slowdowns frozen)."""
        rates = self.base_rates
        if self.noise.active:
            rates = rates + sample_local_noise(self.noise, self.spec.n,
                                               self.cfg.seed, self.t + _TIME_EPS)
        if self.has_slowdowns:
            rates = rates + slowdown_offsets(self.events, self.t + _TIME_EPS,
                                             self.spec.n)
        if self.v_p == 0.0 or len(self.dst) == 0:
            return lambda t, theta: np.array(rates)
        lag = realized_lag(self.delay, self.cfg.seed, self.t + _TIME_EPS)
        v_over_n = self.v_p / self.spec.n
        dst, src, kind = self.dst, self.src, self.spec.potential
        if lag > 0.0:
            history = self.history

            def f(t: float, theta: np.ndarray) -> np.ndarray:
                theta_lag = history.sample(t - lag)
                coupling = np.zeros(len(theta))
                np.add.at(coupling, dst,
                          eval_potential(kind, theta_lag[src] - theta[dst]))
                return rates + v_over_n * coupling
        else:

            def f(t: float, theta: np.ndarray) -> np.ndarray:
                coupling = np.zeros(len(theta))
                np.add.at(coupling, dst,
                          eval_potential(kind, theta[src] - theta[dst]))
                return rates + v_over_n * coupling
        return f

    def finish(self) -> Trajectory:
        if self.next_sample != len(self.sample_times):
            raise AssertionError("internal error: sample grid not filled")
        return Trajectory(times=self.sample_times, phases=self.samples,
                          events_applied=tuple(self.applied), spec=self.spec)


def _error_norm(err: np.ndarray, y0: np.ndarray, y1: np.ndarray,
                rtol: float, atol: float) -> float:
    scale = atol + rtol * np.maximum(np.abs(y0), np.abs(y1))
    return float(np.sqrt(np.mean((err / scale) ** 2)))


def integrate(spec: ModelSpec, init: PhaseState, events: EventList,
              cfg: IntegratorConfig) -> Trajectory:
    """Adaptive Dormand-Prince 5(4) integration to t_end.

    The local error per step is held below ``atol + rtol * |theta|`` in the
    weighted RMS norm.  Deterministic: a given (spec, init, events, cfg)
    always produces the bit-identical trajectory.
    """
    run = _RunContext(spec, init, events, cfg)
    if cfg.t_end == 0.0:
        return run.finish()
    h = min(cfg.h_init, cfg.h_max, cfg.t_end)
    h_floor = _H_UNDERFLOW * cfg.t_end
    k = np.empty((7, spec.n))
    while run.t < cfg.t_end - _TIME_EPS:
        boundary = run.next_boundary()
        f = run.make_step_rhs()
        while True:
            h_step = min(h, boundary - run.t)
            if h_step < h_floor:
                raise StiffnessError(run.t, h_step)
            t0, y0 = run.t, run.theta
            for s in range(7):
                y_s = y0 if s == 0 else y0 + h_step * (k[:s].T @ _DP_A[s])
                k[s] = f(t0 + _DP_C[s] * h_step, y_s)
            y1 = y0 + h_step * (k.T @ _DP_B5)
            err = h_step * (k.T @ _DP_E)
            norm = _error_norm(err, y0, y1, cfg.rtol, cfg.atol)
            if norm <= 1.0:
                factor = _FACTOR_MAX if norm == 0.0 else \
                    min(_FACTOR_MAX, max(_FACTOR_MIN, _SAFETY * norm ** -0.2))
                h = min(h_step * factor, cfg.h_max)
                t_new = boundary if boundary - (t0 + h_step) <= _TIME_EPS \
                    else t0 + h_step
                fired = run.advance_bookkeeping(t_new, y1)
                if fired:
                    h = min(cfg.h_init, cfg.h_max)  # restart after a kick
                break
            factor = max(_FACTOR_MIN, _SAFETY * norm ** -0.2)
            h = h_step * factor
    return run.finish()


def reference_integrate(spec: ModelSpec, init: PhaseState, events: EventList,
                        cfg: IntegratorConfig, h: float) -> Trajectory:
    """Fixed-step classical RK4 with the same boundary clamping.

    Verification oracle: no step-size control, no embedded estimate; the
    only shared machinery with ``integrate`` is the boundary bookkeeping.
    """
    if h <= 0:
        raise ConfigError(f"step size must be > 0, got {h}")
    run = _RunContext(spec, init, events, cfg)
    while run.t < cfg.t_end - _TIME_EPS:
        boundary = run.next_boundary()
        f = run.make_step_rhs()
        while run.t < boundary - _TIME_EPS:
            h_step = min(h, boundary - run.t)
            t0, y0 = run.t, run.theta
            k1 = f(t0, y0)
            k2 = f(t0 + 0.5 * h_step, y0 + 0.5 * h_step * k1)
            k3 = f(t0 + 0.5 * h_step, y0 + 0.5 * h_step * k2)
            k4 = f(t0 + h_step, y0 + h_step * k3)
            y1 = y0 + (h_step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            t_new = boundary if boundary - (t0 + h_step) <= _TIME_EPS else t0 + h_step
            if run.advance_bookkeeping(t_new, y1):
                break  # events fired; rebuild the per-step RHS
    return run.finish()
