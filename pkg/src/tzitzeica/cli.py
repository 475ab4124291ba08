"""Command-line front end.

Exit codes: 0 success, 1 configuration or usage error, 2 numerical or
stage failure, 3 validation failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import asymptotics as asy
from . import harness
from .config import default_config, help_text, parse_config, with_output
from .errors import ConfigError, TzitzeicaError

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERIC = 2
EXIT_VALIDATION = 3

COMMANDS = ("scatter", "evolve", "asymptotics", "compare", "validate")

log = logging.getLogger("tzitzeica")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


EPILOG = (
    "commands:\n"
    "  scatter      reflection table -> reflection.csv\n"
    "  evolve       PDE snapshots -> field_t{time}.csv, snapshots.csv\n"
    "  asymptotics  asymptotic curves -> asymptotic_t{time}.csv\n"
    "  compare      full comparison -> report.csv, fit.csv, overlay_t{time}.csv\n"
    "  validate     invariant suites -> validation.csv (exit 3 on any failure)\n\n"
    "exit codes: 0 ok, 1 config/usage error, 2 numerical failure, 3 validation failure\n\n"
)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="tzitzeica", description="Scattering, asymptotics and PDE comparison "
                "for u_tt - u_xx = e^{-2u} - e^u.", epilog=EPILOG + help_text(),
                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("-c", "--config", help="configuration file (default: all defaults)")
    p.add_argument("-o", "--output", help="output directory (overrides output.dir)")
    p.add_argument("-v", "--verbose", action="count", default=0, help="more log output")
    return p


@dataclass(frozen=True)
class CliCommand:
    command: str
    config: object
    output: Path
    verbosity: int = 0


def _scatter(cmd: CliCommand) -> int:
    cfg = cmd.config
    data = harness.build_data(cfg)
    table, samples = harness.build_table(cfg, data, validate=True, return_samples=True)
    path = table.to_csv(cmd.output / "reflection.csv")
    log.info("wrote %s (max |r| = %.6g)", path, table.max_abs())
    return EXIT_OK


def _evolve(cmd: CliCommand) -> int:
    cfg = cmd.config
    data = harness.build_data(cfg)
    times = sorted(cfg.compare.times)
    _, snaps = harness.evolve(cfg, data, times)
    from .csvio import write_csv
    for s in snaps:
        s.to_csv(cmd.output)
    write_csv(cmd.output / "snapshots.csv", ["t_requested", "t", "file"],
              [[s.t_requested for s in snaps], [s.t for s in snaps],
               [f"field_t{s.t_requested:g}.csv" for s in snaps]])
    log.info("wrote %d snapshots to %s", len(snaps), cmd.output)
    return EXIT_OK


def _asymptotics(cmd: CliCommand) -> int:
    cfg = cmd.config
    data = harness.build_data(cfg)
    table = harness.build_table(cfg, data, validate=False)
    a = cfg.asym
    for t in sorted(cfg.compare.times):
        half = a.extent * t
        n = int(round(half / a.dx))
        x = a.dx * np.arange(-n, n + 1)
        try:
            asy.write_asymptotic_curve(cmd.output / f"asymptotic_t{t:g}.csv", x, t, table,
                                       a.inner, a.outer, a.nu_floor)
        except TzitzeicaError as exc:
            raise harness.StageError("asymptotics", exc) from exc
    return EXIT_OK


def _compare(cmd: CliCommand) -> int:
    report = harness.run_comparison(cmd.config)
    report.write(cmd.output)
    for r in report.records:
        log.info("t=%g max_err=%.3e rel_rms=%.3f", r.t, r.max_abs_err, r.rel_rms)
    for name, ok in report.flags.items():
        log.info("%s: %s", name, "pass" if ok else "FAIL")
    return EXIT_OK if report.passed else EXIT_VALIDATION


def _validate(cmd: CliCommand) -> int:
    suite = harness.run_validation(cmd.config)
    suite.write(cmd.output / "validation.csv")
    for c in suite.checks:
        log.info("%-12s %-24s %.3e  (%s)", c.group, c.name, c.value,
                 "pass" if c.passed else "FAIL")
    return EXIT_OK if suite.passed else EXIT_VALIDATION


HANDLERS = {"scatter": _scatter, "evolve": _evolve, "asymptotics": _asymptotics,
            "compare": _compare, "validate": _validate}


def dispatch(cmd: CliCommand) -> int:
    """Run one command and map every outcome onto a documented exit code."""
    try:
        cmd.output.mkdir(parents=True, exist_ok=True)
        return HANDLERS[cmd.command](cmd)
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except TzitzeicaError as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERIC
    except Exception as exc:  # noqa: BLE001 - exit-code contract is exhaustive
        log.error("failure: %s: %s", type(exc).__name__, exc)
        return EXIT_NUMERIC


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose + 1, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(message)s", stream=sys.stderr,
                        force=True)
    try:
        cfg = parse_config(args.config) if args.config else default_config()
        if args.output:
            cfg = with_output(cfg, args.output)
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    cmd = CliCommand(args.command, cfg, Path(cfg.output_dir), args.verbose)
    return dispatch(cmd)


if __name__ == "__main__":
    sys.exit(main())
