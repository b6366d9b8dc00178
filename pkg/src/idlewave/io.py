"""Scenario files, run outputs, and presets.

A scenario is a single YAML document with sections ``model``,
``topology``, ``integrator``, ``noise``, ``events``, ``initial`` and
``outputs``.  Parsing is strict: unknown keys are configuration errors,
and every diagnostic names the offending section and field.  Emitting a
scenario back to YAML is canonical (sorted keys, repr-exact floats), so
``load(save(s)) == s``.

``run_scenario`` drives a full run from a config file into an output
directory: trajectory CSV, optional phase-difference / potential-value
CSVs, circle-diagram snapshots, and a JSON summary of the standard
observables.  Exit status: 0 success, 2 configuration error, 3 numerical
failure.
"""

from __future__ import annotations

import dataclasses
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Union

import numpy as np
import yaml

from .errors import (ConfigError, IdlewaveError, InsufficientSignalError,
                     StiffnessError, UnsupportedMetricError)
from .events import (DelayEvent, DelaySpec, NoiseSpec, PhaseKick, SlowDown,
                     initial_condition_rng, realized_lag, sample_local_noise,
                     slowdown_offsets)
from .integrate import IntegratorConfig, Trajectory, integrate
from .metrics import (detect_desync_spread, detect_sync, measure_wave_speed,
                      order_parameter_series)
from .model import (Bottlenecked, Kuramoto, ModelSpec, PhaseState,
                    PotentialKind, Scalable, Topology, _edge_arrays,
                    coupling_strength, eval_potential)
from . import topology as topo

SUMMARY_SYNC_EPS = 1e-3  # rad; well below the smallest desync fixed point
SUMMARY_SYNC_WINDOW_ITERS = 10.0
SUMMARY_TAIL_FRACTION = 0.25
SUMMARY_WAVE_THRESHOLD = 0.02  # rad

_FLOAT_FMT = "%.17g"


# ---------------------------------------------------------------------------
# scenario data model

@dataclass(frozen=True)
class SynchronizedInit:
    pass


@dataclass(frozen=True)
class DesynchronizedInit:
    """Seeded uniform phase spread in [-spread/2, spread/2)."""

    spread: float

    def __post_init__(self):
        if self.spread <= 0:
            raise ConfigError("desynchronized spread must be > 0")


@dataclass(frozen=True)
class ExplicitInit:
    theta: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "theta", tuple(float(x) for x in self.theta))


InitialCondition = Union[SynchronizedInit, DesynchronizedInit, ExplicitInit]


@dataclass(frozen=True)
class TopologyRecipe:
    kind: str  # "distances" | "all_to_all" | "file"
    distances: tuple[int, ...] | None = None
    boundary: str = topo.PERIODIC
    path: str | None = None

    def __post_init__(self):
        if self.kind not in ("distances", "all_to_all", "file"):
            raise ConfigError(f"topology kind must be distances/all_to_all/file, "
                              f"got {self.kind!r}")
        if self.kind == "distances" and not self.distances:
            raise ConfigError("topology kind 'distances' needs a distances list")
        if self.kind == "file" and not self.path:
            raise ConfigError("topology kind 'file' needs a path")
        if self.distances is not None:
            object.__setattr__(self, "distances",
                               tuple(int(d) for d in self.distances))

    def build(self, n: int) -> Topology:
        if self.kind == "distances":
            dset = topo.DistanceSet(self.distances, boundary=self.boundary)
            return topo.build_from_distances(n, dset)
        if self.kind == "all_to_all":
            return topo.build_all_to_all(n)
        loaded = topo.load_from_file(self.path)
        if loaded.n != n:
            raise ConfigError(f"topology file has n={loaded.n}, model has n={n}")
        return loaded


@dataclass(frozen=True)
class OutputSelection:
    phases: bool = True
    phase_diffs: bool = False
    potentials: bool = False
    circle_snapshots: tuple[float, ...] = ()
    summary: bool = True

    def __post_init__(self):
        object.__setattr__(self, "circle_snapshots",
                           tuple(float(t) for t in self.circle_snapshots))


@dataclass(frozen=True)
class Scenario:
    name: str
    model: ModelSpec
    topology_recipe: TopologyRecipe
    integrator: IntegratorConfig
    events: tuple[DelayEvent, ...] = ()
    initial: InitialCondition = dataclasses.field(default_factory=SynchronizedInit)
    outputs: OutputSelection = dataclasses.field(default_factory=OutputSelection)

    def initial_state(self) -> PhaseState:
        n = self.model.n
        if isinstance(self.initial, SynchronizedInit):
            theta = np.zeros(n)
        elif isinstance(self.initial, DesynchronizedInit):
            rng = initial_condition_rng(self.integrator.seed)
            half = self.initial.spread / 2.0
            theta = rng.uniform(-half, half, n)
        else:
            theta = np.asarray(self.initial.theta, dtype=float)
            if len(theta) != n:
                raise ConfigError(f"explicit initial condition has {len(theta)} "
                                  f"phases, model has n={n}")
        return PhaseState(t=0.0, theta=theta)

    def run(self) -> Trajectory:
        return integrate(self.model, self.initial_state(), self.events,
                         self.integrator)


# ---------------------------------------------------------------------------
# strict mapping helpers

_MISSING = object()


def _as_mapping(value, where: str) -> dict:
    if not isinstance(value, dict):
        raise ConfigError(f"{where}: expected a mapping, got {type(value).__name__}")
    return dict(value)


def _take(section: dict, where: str, key: str, default=_MISSING):
    if key in section:
        return section.pop(key)
    if default is _MISSING:
        raise ConfigError(f"{where}: missing required key '{key}'")
    return default


def _check_empty(section: dict, where: str) -> None:
    if section:
        raise ConfigError(f"{where}: unknown key '{sorted(section)[0]}'")


def _as_float(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    return float(value)


def _as_int(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{where}: expected an integer, got {value!r}")
    return value


def _as_bool(value, where: str) -> bool:
    if not isinstance(value, bool):
        raise ConfigError(f"{where}: expected a boolean, got {value!r}")
    return value


def _as_str(value, where: str) -> str:
    if not isinstance(value, str):
        raise ConfigError(f"{where}: expected a string, got {value!r}")
    return value


def _as_list(value, where: str) -> list:
    if not isinstance(value, list):
        raise ConfigError(f"{where}: expected a list, got {value!r}")
    return value


# ---------------------------------------------------------------------------
# loading

def _parse_potential(value, where: str) -> PotentialKind:
    sec = _as_mapping(value, where)
    kind = _as_str(_take(sec, where, "kind"), f"{where}.kind")
    if kind == "kuramoto":
        pot = Kuramoto()
    elif kind == "scalable":
        pot = Scalable()
    elif kind == "bottlenecked":
        sigma = _as_float(_take(sec, where, "sigma"), f"{where}.sigma")
        pot = Bottlenecked(sigma=sigma)
    else:
        raise ConfigError(f"{where}.kind: unknown potential {kind!r}")
    _check_empty(sec, where)
    return pot


def _parse_noise(value, where: str) -> NoiseSpec:
    sec = _as_mapping(value, where)
    kind = _as_str(_take(sec, where, "kind", "none"), f"{where}.kind")
    segment_len = _as_float(_take(sec, where, "segment_len", 1.0),
                            f"{where}.segment_len")
    enabled = _take(sec, where, "enabled", None)
    if enabled is not None:
        enabled = tuple(_as_int(v, f"{where}.enabled[]")
                        for v in _as_list(enabled, f"{where}.enabled"))
    if kind == "none":
        spec = NoiseSpec(kind="none", segment_len=segment_len, enabled=enabled)
    elif kind == "gaussian":
        std = _as_float(_take(sec, where, "std"), f"{where}.std")
        spec = NoiseSpec(kind="gaussian", std=std, segment_len=segment_len,
                         enabled=enabled)
    elif kind == "uniform":
        hw = _as_float(_take(sec, where, "halfwidth"), f"{where}.halfwidth")
        spec = NoiseSpec(kind="uniform", halfwidth=hw, segment_len=segment_len,
                         enabled=enabled)
    else:
        raise ConfigError(f"{where}.kind: unknown noise kind {kind!r}")
    _check_empty(sec, where)
    return spec


def _parse_delay(value, where: str) -> DelaySpec:
    sec = _as_mapping(value, where)
    kind = _as_str(_take(sec, where, "kind", "none"), f"{where}.kind")
    if kind == "none":
        spec = DelaySpec.none()
    elif kind == "fixed":
        tau = _as_float(_take(sec, where, "tau"), f"{where}.tau")
        spec = DelaySpec.fixed(tau)
    elif kind == "random_uniform":
        max_tau = _as_float(_take(sec, where, "max_tau"), f"{where}.max_tau")
        seg = _as_float(_take(sec, where, "segment_len", 1.0),
                        f"{where}.segment_len")
        spec = DelaySpec.random_uniform(max_tau, segment_len=seg)
    else:
        raise ConfigError(f"{where}.kind: unknown delay kind {kind!r}")
    _check_empty(sec, where)
    return spec


def _parse_event(value, where: str) -> DelayEvent:
    sec = _as_mapping(value, where)
    process = _as_int(_take(sec, where, "process"), f"{where}.process")
    t_start = _as_float(_take(sec, where, "t_start"), f"{where}.t_start")
    kind = _as_str(_take(sec, where, "kind"), f"{where}.kind")
    if kind == "phase_kick":
        mag = PhaseKick(dtheta=_as_float(_take(sec, where, "dtheta"),
                                         f"{where}.dtheta"))
    elif kind == "slow_down":
        mag = SlowDown(dfreq=_as_float(_take(sec, where, "dfreq"), f"{where}.dfreq"),
                       duration=_as_float(_take(sec, where, "duration"),
                                          f"{where}.duration"))
    else:
        raise ConfigError(f"{where}.kind: unknown event kind {kind!r}")
    _check_empty(sec, where)
    return DelayEvent(process=process, t_start=t_start, magnitude=mag)


def _parse_initial(value, where: str) -> InitialCondition:
    sec = _as_mapping(value, where)
    kind = _as_str(_take(sec, where, "kind", "synchronized"), f"{where}.kind")
    if kind == "synchronized":
        init: InitialCondition = SynchronizedInit()
    elif kind == "desynchronized":
        spread = _as_float(_take(sec, where, "spread"), f"{where}.spread")
        init = DesynchronizedInit(spread=spread)
    elif kind == "explicit":
        theta = _as_list(_take(sec, where, "theta"), f"{where}.theta")
        init = ExplicitInit(theta=tuple(_as_float(v, f"{where}.theta[]")
                                        for v in theta))
    else:
        raise ConfigError(f"{where}.kind: unknown initial kind {kind!r}")
    _check_empty(sec, where)
    return init


def scenario_from_mapping(doc: dict, base_dir: Path | None = None) -> Scenario:
    root = _as_mapping(doc, "config")
    name = _as_str(_take(root, "config", "name"), "name")

    tsec = _as_mapping(_take(root, "config", "topology"), "topology")
    tkind = _as_str(_take(tsec, "topology", "kind"), "topology.kind")
    distances = _take(tsec, "topology", "distances", None)
    if distances is not None:
        distances = tuple(_as_int(v, "topology.distances[]")
                          for v in _as_list(distances, "topology.distances"))
    boundary = _as_str(_take(tsec, "topology", "boundary", topo.PERIODIC),
                       "topology.boundary")
    path = _take(tsec, "topology", "path", None)
    if path is not None:
        path = _as_str(path, "topology.path")
        if base_dir is not None and not Path(path).is_absolute():
            path = str(base_dir / path)
    _check_empty(tsec, "topology")
    recipe = TopologyRecipe(kind=tkind, distances=distances, boundary=boundary,
                            path=path)

    msec = _as_mapping(_take(root, "config", "model"), "model")
    n = _as_int(_take(msec, "model", "n"), "model.n")
    t_comp = _as_float(_take(msec, "model", "t_comp"), "model.t_comp")
    t_comm = _as_float(_take(msec, "model", "t_comm"), "model.t_comm")
    beta = _as_int(_take(msec, "model", "protocol_beta", 1), "model.protocol_beta")
    kappa_mode = _as_str(_take(msec, "model", "kappa_mode", "sum"),
                         "model.kappa_mode")
    potential = _parse_potential(_take(msec, "model", "potential",
                                       {"kind": "scalable"}), "model.potential")
    kappa_override = _take(msec, "model", "kappa_override", None)
    if kappa_override is not None:
        kappa_override = _as_float(kappa_override, "model.kappa_override")
    coupling_override = _take(msec, "model", "coupling_override", None)
    if coupling_override is not None:
        coupling_override = _as_float(coupling_override, "model.coupling_override")
    freq_offsets = _take(msec, "model", "freq_offsets", None)
    if freq_offsets is not None:
        freq_offsets = tuple(_as_float(v, "model.freq_offsets[]")
                             for v in _as_list(freq_offsets, "model.freq_offsets"))
    _check_empty(msec, "model")

    nsec = _as_mapping(_take(root, "config", "noise", {}), "noise")
    local = _parse_noise(_take(nsec, "noise", "local", {"kind": "none"}),
                         "noise.local")
    delay = _parse_delay(_take(nsec, "noise", "delay", {"kind": "none"}),
                         "noise.delay")
    _check_empty(nsec, "noise")

    isec = _as_mapping(_take(root, "config", "integrator"), "integrator")
    t_end = _as_float(_take(isec, "integrator", "t_end"), "integrator.t_end")
    sample_dt = _as_float(_take(isec, "integrator", "sample_dt"),
                          "integrator.sample_dt")
    rtol = _as_float(_take(isec, "integrator", "rtol", 1e-6), "integrator.rtol")
    atol = _as_float(_take(isec, "integrator", "atol", 1e-9), "integrator.atol")
    h_init = _as_float(_take(isec, "integrator", "h_init", 1e-3),
                       "integrator.h_init")
    h_max = _as_float(_take(isec, "integrator", "h_max", math.inf),
                      "integrator.h_max")
    seed = _as_int(_take(isec, "integrator", "seed", 0), "integrator.seed")
    _check_empty(isec, "integrator")

    events = tuple(_parse_event(item, f"events[{k}]")
                   for k, item in enumerate(_as_list(
                       _take(root, "config", "events", []), "events")))
    initial = _parse_initial(_take(root, "config", "initial",
                                   {"kind": "synchronized"}), "initial")

    osec = _as_mapping(_take(root, "config", "outputs", {}), "outputs")
    outputs = OutputSelection(
        phases=_as_bool(_take(osec, "outputs", "phases", True), "outputs.phases"),
        phase_diffs=_as_bool(_take(osec, "outputs", "phase_diffs", False),
                             "outputs.phase_diffs"),
        potentials=_as_bool(_take(osec, "outputs", "potentials", False),
                            "outputs.potentials"),
        circle_snapshots=tuple(
            _as_float(v, "outputs.circle_snapshots[]")
            for v in _as_list(_take(osec, "outputs", "circle_snapshots", []),
                              "outputs.circle_snapshots")),
        summary=_as_bool(_take(osec, "outputs", "summary", True),
                         "outputs.summary"))
    _check_empty(osec, "outputs")
    _check_empty(root, "config")

    model = ModelSpec(n=n, t_comp=t_comp, t_comm=t_comm,
                      topology=recipe.build(n), potential=potential,
                      protocol_beta=beta, kappa_mode=kappa_mode,
                      kappa_override=kappa_override,
                      coupling_override=coupling_override,
                      local_noise=local, interaction_delay=delay,
                      freq_offsets=freq_offsets)
    integrator = IntegratorConfig(t_end=t_end, sample_dt=sample_dt, rtol=rtol,
                                  atol=atol, h_init=h_init, h_max=h_max, seed=seed)
    return Scenario(name=name, model=model, topology_recipe=recipe,
                    integrator=integrator, events=events, initial=initial,
                    outputs=outputs)


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        loc = f" at line {mark.line + 1}" if mark is not None else ""
        raise ConfigError(f"config parse error{loc}: {exc}") from exc
    return scenario_from_mapping(doc, base_dir=path.parent)


# ---------------------------------------------------------------------------
# emission

def _potential_mapping(pot: PotentialKind) -> dict:
    if isinstance(pot, Kuramoto):
        return {"kind": "kuramoto"}
    if isinstance(pot, Scalable):
        return {"kind": "scalable"}
    return {"kind": "bottlenecked", "sigma": pot.sigma}


def _event_mapping(ev: DelayEvent) -> dict:
    if isinstance(ev.magnitude, PhaseKick):
        return {"process": ev.process, "t_start": ev.t_start,
                "kind": "phase_kick", "dtheta": ev.magnitude.dtheta}
    return {"process": ev.process, "t_start": ev.t_start, "kind": "slow_down",
            "dfreq": ev.magnitude.dfreq, "duration": ev.magnitude.duration}


def scenario_to_mapping(s: Scenario) -> dict:
    model = s.model
    noise_local: dict[str, Any] = {"kind": model.local_noise.kind,
                                   "segment_len": model.local_noise.segment_len}
    if model.local_noise.kind == "gaussian":
        noise_local["std"] = model.local_noise.std
    elif model.local_noise.kind == "uniform":
        noise_local["halfwidth"] = model.local_noise.halfwidth
    if model.local_noise.enabled is not None:
        noise_local["enabled"] = list(model.local_noise.enabled)
    delay = model.interaction_delay
    noise_delay: dict[str, Any] = {"kind": delay.kind}
    if delay.kind == "fixed":
        noise_delay["tau"] = delay.tau
    elif delay.kind == "random_uniform":
        noise_delay["max_tau"] = delay.max_tau
        noise_delay["segment_len"] = delay.segment_len

    topo_map: dict[str, Any] = {"kind": s.topology_recipe.kind}
    if s.topology_recipe.kind == "distances":
        topo_map["distances"] = list(s.topology_recipe.distances)
        topo_map["boundary"] = s.topology_recipe.boundary
    elif s.topology_recipe.kind == "file":
        topo_map["path"] = s.topology_recipe.path

    if isinstance(s.initial, SynchronizedInit):
        initial: dict[str, Any] = {"kind": "synchronized"}
    elif isinstance(s.initial, DesynchronizedInit):
        initial = {"kind": "desynchronized", "spread": s.initial.spread}
    else:
        initial = {"kind": "explicit", "theta": list(s.initial.theta)}

    model_map: dict[str, Any] = {
        "n": model.n, "t_comp": model.t_comp, "t_comm": model.t_comm,
        "protocol_beta": model.protocol_beta, "kappa_mode": model.kappa_mode,
        "potential": _potential_mapping(model.potential),
    }
    if model.kappa_override is not None:
        model_map["kappa_override"] = model.kappa_override
    if model.coupling_override is not None:
        model_map["coupling_override"] = model.coupling_override
    if model.freq_offsets is not None:
        model_map["freq_offsets"] = list(model.freq_offsets)

    return {
        "name": s.name,
        "model": model_map,
        "topology": topo_map,
        "integrator": {
            "t_end": s.integrator.t_end, "sample_dt": s.integrator.sample_dt,
            "rtol": s.integrator.rtol, "atol": s.integrator.atol,
            "h_init": s.integrator.h_init, "h_max": s.integrator.h_max,
            "seed": s.integrator.seed,
        },
        "noise": {"local": noise_local, "delay": noise_delay},
        "events": [_event_mapping(ev) for ev in s.events],
        "initial": initial,
        "outputs": {
            "phases": s.outputs.phases, "phase_diffs": s.outputs.phase_diffs,
            "potentials": s.outputs.potentials,
            "circle_snapshots": list(s.outputs.circle_snapshots),
            "summary": s.outputs.summary,
        },
    }


def save_scenario(s: Scenario, path) -> None:
    """Write the canonical YAML form (sorted keys, round-trip exact)."""
    text = yaml.safe_dump(scenario_to_mapping(s), sort_keys=True,
                          default_flow_style=False)
    Path(path).write_text(text, encoding="utf-8", newline="\n")


# ---------------------------------------------------------------------------
# run outputs

def write_trajectory_csv(path, traj: Trajectory) -> None:
    """Schema: header ``t,theta_0,...,theta_{N-1}``, 17-significant-digit
    decimals, LF line endings.  Stable across runs for identical inputs."""
    n = traj.n
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("t," + ",".join(f"theta_{i}" for i in range(n)) + "\n")
        for t, row in zip(traj.times, traj.phases):
            fh.write((_FLOAT_FMT % t) + ","
                     + ",".join(_FLOAT_FMT % v for v in row) + "\n")


def read_trajectory_csv(path) -> tuple[np.ndarray, np.ndarray]:
    data = np.genfromtxt(path, delimiter=",", skip_header=1)
    data = np.atleast_2d(data)
    return data[:, 0], data[:, 1:]


def _directed_edges(spec: ModelSpec) -> list[tuple[int, int]]:
    return list(spec.topology.edges)


def write_phase_diffs_csv(path, traj: Trajectory) -> None:
    """Per-edge phase differences theta_j - theta_i for every T_ij = 1."""
    edges = _directed_edges(traj.spec)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("t," + ",".join(f"dphi_{i}_{j}" for i, j in edges) + "\n")
        for t, row in zip(traj.times, traj.phases):
            vals = (row[j] - row[i] for i, j in edges)
            fh.write((_FLOAT_FMT % t) + ","
                     + ",".join(_FLOAT_FMT % v for v in vals) + "\n")


def write_potentials_csv(path, traj: Trajectory) -> None:
    """Per-edge potential values V(theta_j - theta_i) over time."""
    edges = _directed_edges(traj.spec)
    kind = traj.spec.potential
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("t," + ",".join(f"V_{i}_{j}" for i, j in edges) + "\n")
        for t, row in zip(traj.times, traj.phases):
            vals = (eval_potential(kind, row[j] - row[i]) for i, j in edges)
            fh.write((_FLOAT_FMT % t) + ","
                     + ",".join(_FLOAT_FMT % v for v in vals) + "\n")


def instantaneous_frequencies(traj: Trajectory, t: float, seed: int) -> np.ndarray:
    """dtheta/dt at a sampled time, reconstructed from the trajectory.

    Recomputes the right-hand side with the realised noise (keyed by the
    run's seed), active slowdown windows, and, for lagged interaction,
    phases interpolated from the trajectory itself.
    """
    spec = traj.spec
    theta = traj.phase_at(t)
    rates = spec.intrinsic_rates()
    rates = rates + sample_local_noise(spec.local_noise, spec.n, seed, t)
    events = [ev for _, ev in traj.events_applied]
    rates = rates + slowdown_offsets(events, t, spec.n)
    v_p = coupling_strength(spec)
    dst, src = _edge_arrays(spec.topology)
    if v_p == 0.0 or len(dst) == 0:
        return rates
    lag = realized_lag(spec.interaction_delay, seed, t)
    theta_lag = traj.phase_at(max(t - lag, traj.times[0])) if lag > 0 else theta
    coupling = np.zeros(spec.n)
    np.add.at(coupling, dst, eval_potential(spec.potential,
                                            theta_lag[src] - theta[dst]))
    return rates + (v_p / spec.n) * coupling


def write_circle_snapshot_csv(path, traj: Trajectory, t: float, seed: int) -> None:
    """Circle-diagram data: wrapped angle plus an instantaneous-frequency
    column for colour-coding (rendering maps fast to blue, slow to yellow)."""
    theta = traj.phase_at(t)
    freq = instantaneous_frequencies(traj, t, seed)
    angle = np.mod(theta, 2.0 * np.pi)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("process,t,angle,frequency\n")
        for p in range(traj.n):
            fh.write(f"{p}," + (_FLOAT_FMT % t) + ","
                     + (_FLOAT_FMT % angle[p]) + ","
                     + (_FLOAT_FMT % freq[p]) + "\n")


def summarize(traj: Trajectory, name: str = "") -> dict:
    """Standard observables of a finished run (JSON-serialisable)."""
    spec = traj.spec
    window = SUMMARY_SYNC_WINDOW_ITERS * spec.period
    resync_time = detect_sync(traj, SUMMARY_SYNC_EPS, window)
    try:
        spread_mean, spread_std = detect_desync_spread(traj, SUMMARY_TAIL_FRACTION)
    except UnsupportedMetricError:
        spread_mean = spread_std = None
    wave_speed = wave_r2 = None
    if traj.events_applied:
        source = traj.events_applied[0][1].process
        try:
            fit = measure_wave_speed(traj, source, SUMMARY_WAVE_THRESHOLD)
            wave_speed, wave_r2 = fit.speed, fit.r_squared
        except (InsufficientSignalError, ConfigError):
            pass
    r_series = order_parameter_series(traj)
    return {
        "name": name,
        "n": spec.n,
        "t_end": float(traj.times[-1]),
        "resync_time": resync_time,
        "desync_spread_mean": spread_mean,
        "desync_spread_std": spread_std,
        "wave_speed": wave_speed,
        "wave_r_squared": wave_r2,
        "order_parameter_start": float(r_series[0]),
        "order_parameter_end": float(r_series[-1]),
        "events_applied": len(traj.events_applied),
    }


def write_outputs(scenario: Scenario, traj: Trajectory, out_dir) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    sel = scenario.outputs
    if sel.phases:
        p = out / "trajectory.csv"
        write_trajectory_csv(p, traj)
        written.append(p)
    if sel.phase_diffs:
        p = out / "phase_diffs.csv"
        write_phase_diffs_csv(p, traj)
        written.append(p)
    if sel.potentials:
        p = out / "potentials.csv"
        write_potentials_csv(p, traj)
        written.append(p)
    for k, t in enumerate(sel.circle_snapshots):
        p = out / f"circle_{k:03d}.csv"
        write_circle_snapshot_csv(p, traj, t, scenario.integrator.seed)
        written.append(p)
    if sel.summary:
        p = out / "summary.json"
        with open(p, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(summarize(traj, scenario.name), fh, indent=2, sort_keys=True)
            fh.write("\n")
        written.append(p)
    return written


def run_scenario(config_path, out_dir, *, seed: int | None = None,
                 t_end: float | None = None) -> int:
    """Load a scenario file, integrate, and write the selected outputs.

    Returns the exit status: 0 on success, 2 on configuration errors, 3 on
    numerical failure.  ``seed`` and ``t_end`` override the corresponding
    config values.
    """
    try:
        scenario = load_scenario(config_path)
        if seed is not None or t_end is not None:
            integ = dataclasses.replace(
                scenario.integrator,
                **({"seed": seed} if seed is not None else {}),
                **({"t_end": t_end} if t_end is not None else {}))
            scenario = dataclasses.replace(scenario, integrator=integ)
        traj = scenario.run()
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except StiffnessError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    write_outputs(scenario, traj, out_dir)
    return 0
