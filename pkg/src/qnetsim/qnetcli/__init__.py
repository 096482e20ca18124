################################################################################
# Copyright (c) 2025 Hackerbot Industries LLC
#
# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.
#
# Created By: Allen Chien
# Created:    October 2026
# Updated:    2026.10.19
#
# This module contains the qnetsim command line: run, mc, sweep, presets and
# validate, with exit codes 0 (ok), 1 (usage), 2 (config) and 3 (numerical
# guard).
#
# Special thanks to the following for their code contributions to this codebase:
# Allen Chien - https://github.com/AllenChienXXX
################################################################################


import argparse
from dataclasses import replace
import logging
import os
import sys

from qnetsim import QNetSim
from qnetsim.scenarios import parameter_unit
from qnetsim.scenarios.presets import preset_names
from qnetsim.utils.errors import NumericalGuardError, QNetError, ScenarioStageError, UnitMismatchError
from qnetsim.utils.units import parse_quantity

from .config import apply_override, build_config, load_config, parse_config, read_document, serialize_config
from .outputs import emit_outputs

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

DEFAULT_OUTDIR = "qnetsim-out"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_source(parser):
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--config", help="YAML scenario file")
    source.add_argument("--preset", choices=preset_names(), help="Named scenario preset")
    parser.add_argument("--set", dest="overrides", action="append", default=[], metavar="PATH=VALUE",
                        help="Override a config value, e.g. --set chain.separation='100 km'")


def _add_run_options(parser):
    parser.add_argument("--out", help="Output directory (default: $QNETSIM_OUTDIR or ./qnetsim-out)")
    parser.add_argument("--seed", type=int, help="Override the config seed")


def build_parser():
    parser = _Parser(prog="qnetsim", description="Satellite relay quantum network link simulator")
    parser.add_argument("-v", "--verbose", action="store_true", help="Log progress and errors")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = commands.add_parser("run", help="Run one scenario")
    _add_source(run)
    _add_run_options(run)

    mc = commands.add_parser("mc", help="Monte Carlo ensemble over chain errors or turbulence")
    _add_source(mc)
    _add_run_options(mc)
    mc.add_argument("--trials", type=int, default=50, help="Number of trials (default 50)")

    sweep = commands.add_parser("sweep", help="Sweep one numeric parameter")
    _add_source(sweep)
    _add_run_options(sweep)
    sweep.add_argument("--param", required=True, help="Dotted parameter path, e.g. total_distance")
    sweep.add_argument("--grid", required=True, nargs="+",
                       help="Increasing values, plain numbers in the parameter's unit or quantities like '4000 km'")

    commands.add_parser("presets", help="List the scenario presets")

    validate = commands.add_parser("validate", help="Parse a config and report problems")
    _add_source(validate)
    return parser


def exit_code(error):
    """Exit code for an error raised while running a command."""
    while isinstance(error, ScenarioStageError):
        error = error.cause
    if isinstance(error, NumericalGuardError):
        return EXIT_NUMERICAL
    return EXIT_CONFIG


def _grid_values(config, path, raw_values):
    unit = parameter_unit(config, path)
    values = []
    for raw in raw_values:
        try:
            values.append(float(raw))
        except ValueError:
            if not unit:
                raise UnitMismatchError(f"--grid {path}", f"expected plain numbers, got {raw!r}")
            values.append(parse_quantity(raw, unit, f"--grid {path}"))
    return values


def _output_dir(args):
    return args.out or os.environ.get("QNETSIM_OUTDIR") or DEFAULT_OUTDIR


def _execute(args, sim):
    if args.command == "presets":
        for name in preset_names():
            print(name)
        return EXIT_OK

    config = load_config(args.config, args.preset, args.overrides)
    if args.command == "validate":
        print("ok")
        return EXIT_OK

    if args.seed is not None:
        config = replace(config, seed=args.seed)
    if args.command == "run":
        report = sim.run(config)
    elif args.command == "mc":
        report = sim.monte_carlo(config, args.trials, config.seed)
    else:
        report = sim.sweep(config, args.param, _grid_values(config, args.param, args.grid))

    emit_outputs(report, _output_dir(args))
    print(report.summary())
    return EXIT_OK


def main(argv=None):
    """
    :param argv: argument list without the program name, defaults to sys.argv[1:]
    :return: process exit code
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE

    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    sim = QNetSim(verbose_mode=args.verbose)
    try:
        return _execute(args, sim)
    except QNetError as e:
        sim.log_error(f"Error in qnetcli:{args.command}: {e}")
        print(f"qnetsim: {type(e).__name__}: {e}", file=sys.stderr)
        return exit_code(e)


__all__ = [
    "apply_override",
    "build_config",
    "build_parser",
    "emit_outputs",
    "exit_code",
    "load_config",
    "main",
    "parse_config",
    "read_document",
    "serialize_config",
]
