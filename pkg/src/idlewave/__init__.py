"""Coupled-oscillator simulation of parallel-program dynamics.

Bulk-synchronous processes are modelled as phase oscillators coupled
through the program's communication topology.  The interaction potential
selects the collective behaviour: an always-attractive coupling
resynchronises after disturbances (resource-scalable codes), a
short-range-repulsive one settles into a staggered steady state
(resource-bottlenecked codes).  A small discrete-event simulator of the
same compute-communicate cycles serves as an independent qualitative
cross-check.
"""

from .bsp import (BOTH_DESYNC, BOTH_RESYNC, INCONCLUSIVE, MISMATCH, BspResult,
                  BspSpec, Saturating, classify_bsp, classify_model,
                  compare_with_model, simulate_bsp, write_completions_csv)
from .errors import (ConfigError, HistoryUnderrunError, IdlewaveError,
                     InsufficientSignalError, StiffnessError,
                     UnsupportedMetricError)
from .events import (DelayEvent, DelaySpec, NoiseSpec, PhaseKick, SlowDown,
                     apply_event, realized_lag, sample_local_noise,
                     slowdown_offsets, validate_events)
from .integrate import (IntegratorConfig, Trajectory, integrate,
                        reference_integrate)
from .io import (DesynchronizedInit, ExplicitInit, OutputSelection, Scenario,
                 SynchronizedInit, TopologyRecipe, load_scenario, run_scenario,
                 save_scenario, summarize, write_trajectory_csv)
from .metrics import (WaveFit, detect_desync_spread, detect_sync,
                      measure_wave_speed, normalize_to_lagger,
                      normalize_to_lagger_series, order_parameter,
                      order_parameter_series)
from .model import (Bottlenecked, History, Kuramoto, ModelSpec, PhaseState,
                    PotentialKind, Scalable, Topology, coupling_strength,
                    eval_potential, rhs)
from .presets import PRESETS, fig2a, fig2b, preset_scenario
from .topology import (OPEN, PERIODIC, DistanceSet, build_all_to_all,
                       build_from_distances, load_from_file, ring,
                       save_to_file)

__version__ = "0.1.0"

__all__ = [
    "BOTH_DESYNC", "BOTH_RESYNC", "INCONCLUSIVE", "MISMATCH",
    "Bottlenecked", "BspResult", "BspSpec", "ConfigError", "DelayEvent",
    "DelaySpec", "DesynchronizedInit", "DistanceSet", "ExplicitInit",
    "History", "HistoryUnderrunError", "IdlewaveError", "InsufficientSignalError",
    "IntegratorConfig", "Kuramoto", "ModelSpec", "NoiseSpec", "OPEN",
    "OutputSelection", "PERIODIC", "PRESETS", "PhaseKick", "PhaseState",
    "PotentialKind", "Saturating", "Scalable", "Scenario", "SlowDown",
    "StiffnessError", "SynchronizedInit", "Topology", "TopologyRecipe",
    "Trajectory", "UnsupportedMetricError", "WaveFit", "apply_event",
    "build_all_to_all", "build_from_distances", "classify_bsp",
    "classify_model", "compare_with_model", "coupling_strength",
    "detect_desync_spread", "detect_sync", "eval_potential", "fig2a", "fig2b",
    "integrate", "load_from_file", "load_scenario", "measure_wave_speed",
    "normalize_to_lagger", "normalize_to_lagger_series", "order_parameter",
    "order_parameter_series", "preset_scenario", "realized_lag",
    "reference_integrate", "rhs", "ring", "run_scenario", "sample_local_noise",
    "save_scenario", "save_to_file", "simulate_bsp", "slowdown_offsets",
    "summarize", "validate_events", "write_completions_csv",
    "write_trajectory_csv",
]
