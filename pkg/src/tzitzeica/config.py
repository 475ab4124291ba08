"""Line-based ``key = value`` configuration with dotted keys.

Blank lines and ``#`` comments are ignored.  Every key has a documented
default and unit; unknown or repeated keys are errors reported with their
line number.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Callable

from .errors import ConfigError
from .harness import (AsymSpec, AuditSpec, CompareSpec, DataSpec, ExperimentConfig, GridSpec,
                      PDESpec, ScatterSpec)

AUTO = "auto"


def _float(s: str) -> float:
    v = float(s)
    if v != v or v in (float("inf"), float("-inf")):
        raise ValueError("not a finite number")
    return v


def _int(s: str) -> int:
    return int(s)


def _opt_float(s: str):
    return None if s.lower() == AUTO else _float(s)


def _opt_int(s: str):
    return None if s.lower() == AUTO else _int(s)


def _float_list(s: str) -> tuple:
    return tuple(_float(p) for p in s.split(",") if p.strip())


def _str(s: str) -> str:
    return s


def _positive(v):
    return v is None or v > 0


def _nonneg(v):
    return v >= 0


def _choice(*opts):
    def ok(v):
        return v in opts
    ok.__doc__ = f"one of {', '.join(opts)}"
    return ok


@dataclass(frozen=True)
class Key:
    name: str
    parse: Callable[[str], Any]
    default: str
    unit: str
    help: str
    check: Callable[[Any], bool] = lambda v: True
    requirement: str = ""


SCHEMA = [
    Key("data.kind", _str, "gaussian", "-", "initial datum: gaussian, zero or file",
        _choice("gaussian", "zero", "file"), "one of gaussian, zero, file"),
    Key("data.amplitude", _float, "-0.1", "field", "Gaussian amplitude"),
    Key("data.width", _float, "1", "length", "Gaussian standard deviation", _positive, "> 0"),
    Key("data.file", _str, "", "path", "CSV with columns x,u0,u1 (data.kind = file)"),
    Key("data.dx", _float, "0.01", "length", "sample spacing of the datum", _positive, "> 0"),
    Key("data.x_max", _opt_float, AUTO, "length",
        "truncation half-width X; auto = negligible-tail point + 2", _positive, "> 0"),
    Key("data.tail_tol", _float, "1e-10", "field", "max |u0|,|u1| at the truncation ends",
        _positive, "> 0"),
    Key("grid.lambda_min", _float, "0.02", "spectral", "smallest |lambda| sampled",
        _positive, "> 0"),
    Key("grid.lambda_max", _float, "30", "spectral", "largest |lambda| sampled",
        _positive, "> 0"),
    Key("grid.count", _int, "400", "points", "samples per sign", lambda v: v >= 4, ">= 4"),
    Key("grid.spacing", _str, "log", "-", "log or linear", _choice("log", "linear"),
        "one of log, linear"),
    Key("scatter.rtol", _float, "1e-9", "-", "relative tolerance of the Jost integrator",
        _positive, "> 0"),
    Key("scatter.atol", _float, "1e-10", "-", "absolute tolerance of the Jost integrator",
        _positive, "> 0"),
    Key("scatter.soliton_tol", _float, "1e-3", "-", "smallest admissible |s11|",
        _positive, "> 0"),
    Key("pde.dx", _float, "0.02", "length", "PDE grid spacing (dt = pde.cfl * pde.dx)",
        _positive, "> 0"),
    Key("pde.cfl", _float, "0.9", "-", "Courant number dt/dx", lambda v: 0 < v <= 1,
        "in (0, 1]"),
    Key("pde.t_max", _opt_float, AUTO, "time", "final time; auto = largest comparison time",
        _positive, "> 0"),
    Key("pde.support_radius", _float, "12", "length", "datum support used for domain sizing",
        _nonneg, ">= 0"),
    Key("pde.margin", _float, "5", "length", "extra half-width beyond t_max + support",
        _nonneg, ">= 0"),
    Key("pde.blowup_guard", _float, "50", "field", "largest admissible |u|", _positive, "> 0"),
    Key("asym.inner", _float, "0.85", "-", "|x/t| bound of the oscillatory sector",
        lambda v: 0 < v < 1, "in (0, 1)"),
    Key("asym.outer", _float, "3", "-", "|x/t| bound between the two outer sectors",
        lambda v: v >= 1, ">= 1"),
    Key("asym.nu_floor", _float, "1e-10", "-", "exponents below this contribute zero",
        _positive, "> 0"),
    Key("asym.dx", _float, "0.05", "length", "sampling of the asymptotic-curve export",
        _positive, "> 0"),
    Key("asym.extent", _float, "1.5", "-", "curve export covers |x| <= extent * t",
        _positive, "> 0"),
    Key("compare.times", _float_list, "20,30,40,50", "time", "comparison times",
        lambda v: len(v) > 0 and all(t > 0 for t in v), "non-empty, positive"),
    Key("compare.window", _float, "0.8", "-", "window |x| <= window * t",
        lambda v: 0 < v < 1, "in (0, 1)"),
    Key("compare.rel_rms_bound", _float, "0.03", "-", "acceptance bound on rel. RMS error",
        _positive, "> 0"),
    Key("audit.support_radius", _float, "10", "length", "light-cone audit support radius",
        _nonneg, ">= 0"),
    Key("audit.threshold", _float, "1e-6", "field", "max |u| beyond the light cone",
        _positive, "> 0"),
    Key("output.dir", _str, "out", "path", "directory for CSV outputs"),
    Key("parallel.workers", _opt_int, AUTO, "processes",
        "worker processes for the lambda sweep; auto = available cores",
        lambda v: v is None or v >= 1, ">= 1"),
]

KEYS = {k.name: k for k in SCHEMA}


def help_text() -> str:
    """One line per key: ``name = default  [unit]  description``."""
    width = max(len(k.name) for k in SCHEMA)
    lines = ["configuration keys (key = default  [unit]  description):"]
    for k in SCHEMA:
        default = k.default if k.default != "" else '""'
        lines.append(f"  {k.name:<{width}} = {default:<12} [{k.unit}]  {k.help}")
    return "\n".join(lines)


def _convert(key: Key, raw: str, line: int | None):
    try:
        v = key.parse(raw)
    except ValueError as exc:
        raise ConfigError(f"cannot parse '{raw}': {exc}", key=key.name, line=line) from None
    if not key.check(v):
        raise ConfigError(f"value {raw} out of range ({key.requirement})", key=key.name,
                          line=line)
    return v


def parse_lines(lines, source: str = "<config>") -> dict:
    """Parse ``key = value`` lines into a dict of converted values (defaults filled in)."""
    values = {}
    lines_of = {}
    for no, text in enumerate(lines, start=1):
        body = text.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"expected 'key = value', got '{body}'", line=no)
        name, raw = (p.strip() for p in body.split("=", 1))
        if name not in KEYS:
            raise ConfigError("unknown key", key=name, line=no)
        if name in values:
            raise ConfigError(f"repeated key (first on line {lines_of[name]})", key=name,
                              line=no)
        values[name] = _convert(KEYS[name], raw, no)
        lines_of[name] = no
    for k in SCHEMA:
        if k.name not in values:
            values[k.name] = _convert(k, k.default, None)
    return _build(values, lines_of)


def _build(v: dict, lines_of: dict) -> ExperimentConfig:
    def err(msg, key):
        return ConfigError(msg, key=key, line=lines_of.get(key))

    if v["grid.lambda_min"] >= v["grid.lambda_max"]:
        raise err("must exceed grid.lambda_min", "grid.lambda_max")
    if v["data.kind"] == "file" and not v["data.file"]:
        raise err("required when data.kind = file", "data.file")
    times = tuple(sorted(v["compare.times"]))
    if len(set(times)) != len(times):
        raise err("times must be distinct", "compare.times")
    if v["pde.t_max"] is not None and max(times) > v["pde.t_max"]:
        raise err("comparison time exceeds pde.t_max", "compare.times")
    if v["compare.window"] >= v["asym.inner"]:
        raise err("window must be below asym.inner", "compare.window")
    return ExperimentConfig(
        data=DataSpec(v["data.kind"], v["data.amplitude"], v["data.width"], v["data.file"],
                      v["data.dx"], v["data.x_max"], v["data.tail_tol"]),
        grid=GridSpec(v["grid.lambda_min"], v["grid.lambda_max"], v["grid.count"],
                      v["grid.spacing"]),
        scatter=ScatterSpec(v["scatter.rtol"], v["scatter.atol"], v["scatter.soliton_tol"]),
        pde=PDESpec(v["pde.dx"], v["pde.cfl"], v["pde.t_max"], v["pde.support_radius"],
                    v["pde.margin"], v["pde.blowup_guard"]),
        asym=AsymSpec(v["asym.inner"], v["asym.outer"], v["asym.nu_floor"], v["asym.dx"],
                      v["asym.extent"]),
        compare=CompareSpec(times, v["compare.window"], v["compare.rel_rms_bound"]),
        audit=AuditSpec(v["audit.support_radius"], v["audit.threshold"]),
        output_dir=v["output.dir"],
        workers=v["parallel.workers"] or (os.cpu_count() or 1),
    )


def parse_config(path) -> ExperimentConfig:
    """Read and validate a configuration file.

    Raises
    ------
    ConfigError
        Missing file, malformed line, unknown key or out-of-range value.
    """
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {p}: {exc.strerror}") from None
    return parse_lines(text.splitlines(), str(p))


def default_config() -> ExperimentConfig:
    return parse_lines([])


def with_output(config: ExperimentConfig, directory) -> ExperimentConfig:
    return replace(config, output_dir=str(directory))
