"""Minimal command-line runner: scenario file (or preset) -> output files.

Exit status: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
import tempfile
from pathlib import Path

from .errors import ConfigError
from .io import run_scenario, save_scenario
from .presets import PRESETS, preset_scenario


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="idlewave",
        description="Run a simulation scenario and write its output files.")
    parser.add_argument("config", nargs="?", help="scenario YAML file")
    parser.add_argument("--preset", choices=sorted(PRESETS),
                        help="run a built-in scenario instead of a config file")
    parser.add_argument("-o", "--output-dir", required=True,
                        help="directory for CSV/JSON outputs")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the integrator seed")
    parser.add_argument("--t-end", type=float, default=None,
                        help="override the simulation horizon")
    parser.add_argument("--plots", action="store_true",
                        help="also render the plot files from the outputs")
    args = parser.parse_args(argv)

    if (args.config is None) == (args.preset is None):
        parser.error("give exactly one of: a config file, or --preset")

    if args.preset is not None:
        workdir = tempfile.mkdtemp(prefix="idlewave-preset-")
        config_path = Path(workdir) / f"{args.preset}.yaml"
        save_scenario(preset_scenario(args.preset), config_path)
    else:
        config_path = Path(args.config)

    status = run_scenario(config_path, args.output_dir,
                          seed=args.seed, t_end=args.t_end)
    if status == 0 and args.plots:
        from .plots import emit_plots

        try:
            emit_plots(args.output_dir)
        except ConfigError as exc:
            print(f"plot error: {exc}", file=sys.stderr)
            return 2
    return status


if __name__ == "__main__":
    sys.exit(main())
