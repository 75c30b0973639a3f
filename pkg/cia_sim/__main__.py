"""Command line interface: `cia-sim run` and `cia-sim validate`."""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from . import CONFIG_SCHEMA, load_configuration, setup_logging
from .config_flow import validate_input
from .const import (
    CONF_CP,
    CONF_FORMAT,
    CONF_LOGGER,
    CONF_LOGGER_DEFAULT,
    CONF_N,
    CONF_OUT,
    CONF_PDP,
    CONF_PRECODERS,
    CONF_PRIMARY_INTERFERENCE,
    CONF_PRIMARY_POWER,
    CONF_SECONDARY_POWER,
    CONF_SEED,
    CONF_SNR,
    CONF_TAPS,
    CONF_TRIALS,
    CONF_WORKERS,
    DOMAIN,
    ENV_WORKERS,
    PDP_PRESETS,
    PrecoderKind,
    ResultFormat,
)
from .exceptions import CiaSimError, InvalidConfig
from .results import emit_results
from .simulation import run_experiment
from .validation import run_validation

_LOGGER = logging.getLogger(__name__)

# argparse destination -> configuration key
RUN_FLAGS = {
    "n": CONF_N,
    "cp": CONF_CP,
    "taps": CONF_TAPS,
    "pdp": CONF_PDP,
    "precoders": CONF_PRECODERS,
    "snr": CONF_SNR,
    "trials": CONF_TRIALS,
    "seed": CONF_SEED,
    "with_primary_interference": CONF_PRIMARY_INTERFERENCE,
    "primary_power": CONF_PRIMARY_POWER,
    "secondary_power": CONF_SECONDARY_POWER,
    "workers": CONF_WORKERS,
    "format": CONF_FORMAT,
    "out": CONF_OUT,
}


class ReportingParser(argparse.ArgumentParser):
    """Argument parser that raises InvalidConfig instead of exiting on bad input."""

    def error(self, message: str):
        """Raise the usage error so it is reported like any other."""
        raise InvalidConfig(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    """Return the argument parser of the cia-sim command."""
    parser = ReportingParser(
        prog="cia-sim",
        description="Cognitive interference alignment for OFDM two-tiered networks",
    )
    parser.add_argument("--config", help="YAML configuration file")
    parser.add_argument("-v", "--verbose", action="store_true", help="Log at info level")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="Run a Monte Carlo SNR sweep")
    run.add_argument("--n", type=int, help="Subcarriers N (default 128)")
    run.add_argument("--cp", type=int, help="Cyclic prefix length L (default 32)")
    run.add_argument("--taps", type=int, help="Channel order l (default 32)")
    run.add_argument("--pdp", choices=list(PDP_PRESETS), help="Power delay profile")
    run.add_argument(
        "--precoders",
        help=f"Comma separated subset of {','.join(PrecoderKind)}",
    )
    run.add_argument("--snr", help="SNR sweep start:stop:step in dB (default 0:30:5)")
    run.add_argument("--trials", type=int, help="Monte Carlo trials (default 500)")
    run.add_argument("--seed", type=int, help="Master seed (default 1)")
    run.add_argument(
        "--with-primary-interference",
        help="Include the primary interference at the SUE (true/false)",
    )
    run.add_argument("--primary-power", type=float, help="Primary power per symbol P_p")
    run.add_argument("--secondary-power", type=float, help="Secondary power per symbol P_s")
    run.add_argument("--workers", type=int, help=f"Worker threads, {ENV_WORKERS} overrides")
    run.add_argument("--format", choices=list(ResultFormat), help="Result file format")
    run.add_argument("--out", help="Result file path")

    validate = commands.add_parser("validate", help="Run the invariant suite on N=16, L=4")
    validate.add_argument("--seed", type=int, default=0, help="Seed of the suite")
    validate.add_argument(
        "--realizations", type=int, default=20, help="Channel draws per check"
    )
    return parser


def _workers_override(workers: int) -> int:
    value = os.environ.get(ENV_WORKERS)
    if value is None:
        return workers
    try:
        override = int(value)
    except ValueError as err:
        raise InvalidConfig(f"{ENV_WORKERS} must be an integer, got {value!r}") from err
    if override < 1:
        raise InvalidConfig(f"{ENV_WORKERS} must be positive, got {override}")
    return override


def _run(args: argparse.Namespace, conf: dict) -> dict:
    flags = {
        key: getattr(args, dest)
        for dest, key in RUN_FLAGS.items()
        if getattr(args, dest) is not None
    }
    outputs = []
    for experiment in conf[DOMAIN] or [{}]:
        ec, workers = validate_input({**experiment, **flags})
        result = run_experiment(ec, _workers_override(workers))
        emit_results(result, ec.result_format, ec.output_path)
        outputs.append(ec.output_path)
    return {"ok": True, "outputs": outputs}


def main(argv: list[str] | None = None) -> int:
    """Entry point of the cia-sim command."""
    try:
        args = build_parser().parse_args(argv)
        conf = load_configuration(args.config) if args.config else CONFIG_SCHEMA({})
        logger_conf = dict(conf[CONF_LOGGER])
        if args.verbose:
            logger_conf[CONF_LOGGER_DEFAULT] = "info"
        setup_logging(logger_conf)

        if args.command == "validate":
            report = run_validation(seed=args.seed, realizations=args.realizations)
        else:
            report = _run(args, conf)
    except CiaSimError as err:
        _LOGGER.error("%s", err)
        report = {"ok": False, **err.as_report()}

    print(json.dumps(report, indent=2))
    return 0 if report["ok"] else 1


if __name__ == "__main__":
    sys.exit(main())
