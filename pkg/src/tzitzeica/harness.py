"""End-to-end comparison of the asymptotic formula with the PDE, plus invariant suites."""

from __future__ import annotations

import logging
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import asymptotics as asy
from . import pde_solver as pde
from . import scattering as scat
from . import spectral_core as sc
from .csvio import write_csv
from .errors import ConfigError, FitError, StageError, TzitzeicaError

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class DataSpec:
    kind: str = "gaussian"
    amplitude: float = -0.1
    width: float = 1.0
    file: str = ""
    dx: float = 0.01
    x_max: float | None = None
    tail_tol: float = scat.DEFAULT_TAIL_TOL

    def build(self) -> scat.InitialData:
        if self.kind == "gaussian":
            return scat.InitialData.gaussian(self.amplitude, self.width, X=self.x_max,
                                             dx=self.dx, tail_tol=self.tail_tol)
        if self.kind == "zero":
            return scat.InitialData.zero(X=self.x_max or 10.0, dx=self.dx)
        if self.kind == "file":
            return scat.InitialData.from_file(self.file, tail_tol=self.tail_tol)
        raise ConfigError(f"unknown data kind '{self.kind}'", key="data.kind")


@dataclass(frozen=True)
class GridSpec:
    lambda_min: float = 0.02
    lambda_max: float = 30.0
    count: int = 400
    spacing: str = "log"

    def grid(self) -> scat.LambdaGrid:
        return scat.LambdaGrid(self.lambda_min, self.lambda_max, self.count, self.spacing)


@dataclass(frozen=True)
class ScatterSpec:
    rtol: float = scat.DEFAULT_RTOL
    atol: float = scat.DEFAULT_ATOL
    soliton_tol: float = scat.DEFAULT_SOLITON_TOL


@dataclass(frozen=True)
class PDESpec:
    dx: float = 0.02
    cfl: float = 0.9
    t_max: float | None = None
    support_radius: float = 12.0
    margin: float = 5.0
    blowup_guard: float = 50.0

    def config(self, times: Sequence[float]) -> pde.PDEConfig:
        t_max = self.t_max if self.t_max is not None else max(times, default=0.0)
        return pde.PDEConfig(dx=self.dx, cfl_safety=self.cfl, t_max=t_max,
                             support_radius=self.support_radius, margin=self.margin,
                             blowup_guard=self.blowup_guard)


@dataclass(frozen=True)
class AsymSpec:
    inner: float = sc.DEFAULT_INNER
    outer: float = sc.DEFAULT_OUTER
    nu_floor: float = asy.DEFAULT_NU_FLOOR
    dx: float = 0.05
    extent: float = 1.5


@dataclass(frozen=True)
class CompareSpec:
    times: tuple = (20.0, 30.0, 40.0, 50.0)
    window: float = 0.8
    rel_rms_bound: float = 0.03
    exponent_min: float = -1.4
    exponent_max: float = -0.6


@dataclass(frozen=True)
class AuditSpec:
    support_radius: float = 10.0
    threshold: float = 1e-6


@dataclass(frozen=True)
class ExperimentConfig:
    """Complete description of one experiment.

    Invariants: every comparison time is at most the PDE ``t_max`` and the
    window fraction lies below the inner sector threshold.
    """

    data: DataSpec = field(default_factory=DataSpec)
    grid: GridSpec = field(default_factory=GridSpec)
    scatter: ScatterSpec = field(default_factory=ScatterSpec)
    pde: PDESpec = field(default_factory=PDESpec)
    asym: AsymSpec = field(default_factory=AsymSpec)
    compare: CompareSpec = field(default_factory=CompareSpec)
    audit: AuditSpec = field(default_factory=AuditSpec)
    output_dir: str = "out"
    workers: int = field(default_factory=lambda: os.cpu_count() or 1)

    def __post_init__(self):
        times = self.compare.times
        if not times:
            raise ConfigError("at least one comparison time is required", key="compare.times")
        if any(t <= 0 for t in times):
            raise ConfigError("comparison times must be positive", key="compare.times")
        if self.pde.t_max is not None and max(times) > self.pde.t_max:
            raise ConfigError("comparison time exceeds pde.t_max", key="compare.times")
        if not 0 < self.compare.window < self.asym.inner:
            raise ConfigError("window must lie in (0, asym.inner)", key="compare.window")

    @property
    def pde_config(self) -> pde.PDEConfig:
        return self.pde.config(self.compare.times)


# ---------------------------------------------------------------------------
# stages


def _stage(name):
    def wrap(fn):
        def inner(*a, **k):
            try:
                return fn(*a, **k)
            except StageError:
                raise
            except TzitzeicaError as exc:
                raise StageError(name, exc) from exc
        inner.__name__ = fn.__name__
        inner.__doc__ = fn.__doc__
        return inner
    return wrap


@_stage("data")
def build_data(config: ExperimentConfig) -> scat.InitialData:
    return config.data.build()


@_stage("scatter")
def build_table(config: ExperimentConfig, data: scat.InitialData, validate: bool = True,
                return_samples: bool = False):
    s = config.scatter
    return scat.build_reflection_table(data, config.grid.grid(), validate=validate,
                                       workers=config.workers, rtol=s.rtol, atol=s.atol,
                                       soliton_tol=s.soliton_tol, return_samples=return_samples)


@_stage("evolve")
def evolve(config: ExperimentConfig, data: scat.InitialData, times: Sequence[float],
           energy_every: int = 0):
    cfg = config.pde_config
    state = pde.init_state(cfg, data.u0_fn, data.u1_fn)
    t_end = max(times, default=state.t)
    return pde.run_until(state, t_end, list(times), energy_every=energy_every)


# ---------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class ComparisonRecord:
    t: float
    t_grid: float
    max_abs_err: float
    rms_err: float
    rms_signal: float
    rel_rms: float


@dataclass(frozen=True)
class DecayFit:
    """Fit of the maximum error against ``ln t / t``.

    ``C`` is the least-squares coefficient through the origin,
    ``exponent_check`` the slope of ``log err`` against ``log t``.  The two
    ``rms_log_resid_*`` fields compare one-parameter fits
    ``err = C ln t / t`` and ``err = C t^-1/2`` in log space.
    """

    C: float
    exponent_check: float
    exponent_ok: bool
    rms_log_resid_lnt: float
    rms_log_resid_sqrt: float

    @property
    def sqrt_rejected(self) -> bool:
        return self.rms_log_resid_sqrt > self.rms_log_resid_lnt


def fit_error_decay(records, exponent_min: float = -1.4, exponent_max: float = -0.6) -> DecayFit:
    """Fit ``err(t)`` to ``C ln t / t``.

    Parameters
    ----------
    records : sequence of ComparisonRecord, or of ``(t, err)`` pairs.

    Raises
    ------
    FitError
        Fewer than 3 points, repeated times, ``t <= 1`` or non-positive errors.
    """
    pairs = [(r.t, r.max_abs_err) if isinstance(r, ComparisonRecord) else tuple(r)
             for r in records]
    if len(pairs) < 3:
        raise FitError("need at least 3 records")
    t = np.array([p[0] for p in pairs], dtype=float)
    e = np.array([p[1] for p in pairs], dtype=float)
    if np.unique(t).size != t.size:
        raise FitError("comparison times must be distinct")
    if np.any(t <= 1):
        raise FitError("times must exceed 1 so that ln t / t is positive")
    if np.any(e <= 0) or not np.all(np.isfinite(e)):
        raise FitError("errors must be positive and finite")
    phi = np.log(t) / t
    C = float(phi @ e / (phi @ phi))
    slope = float(np.polyfit(np.log(t), np.log(e), 1)[0])

    def log_resid(basis):
        r = np.log(e) - np.log(basis)
        r = r - r.mean()
        return float(np.sqrt(np.mean(r * r)))

    return DecayFit(C, slope, bool(exponent_min <= slope <= exponent_max),
                    log_resid(phi), log_resid(t ** -0.5))


@dataclass(frozen=True)
class ConeEntry:
    t: float
    sup_outside: float
    x_at_sup: float
    margin: float


@dataclass(frozen=True)
class LightConeAudit:
    """Field magnitude beyond ``|x| = t + support_radius + 2``."""

    entries: tuple
    threshold: float
    passed: bool
    shrinking: bool

    @property
    def min_margin(self) -> float:
        return min((e.margin for e in self.entries), default=math.inf)

    @property
    def violations(self) -> list:
        return [e for e in self.entries if not e.sup_outside < self.threshold]


NOISE_FLOOR = 1e-20


def light_cone_audit(snapshots, support_radius: float = 10.0,
                     threshold: float = 1e-6) -> LightConeAudit:
    """Check that the field beyond the light cone stays below ``threshold``.

    ``shrinking`` requires the supremum to be non-increasing in time once it
    rises above a round-off floor of 1e-20.
    """
    entries = []
    for s in sorted(snapshots, key=lambda s: s.t):
        mask = np.abs(s.x) > s.t + support_radius + 2.0
        if np.any(mask):
            a = np.abs(s.u[mask])
            i = int(np.argmax(a))
            sup, xs = float(a[i]), float(s.x[mask][i])
        else:
            sup, xs = 0.0, math.nan
        entries.append(ConeEntry(float(s.t), sup, xs,
                                 math.inf if sup == 0 else threshold / sup))
    ok = all(e.sup_outside < threshold for e in entries)
    shrink = all(b.sup_outside <= max(a.sup_outside, NOISE_FLOOR)
                 for a, b in zip(entries, entries[1:]))
    return LightConeAudit(tuple(entries), threshold, bool(ok and shrink), bool(shrink))


@dataclass
class Overlay:
    t: float
    x: np.ndarray
    u_numeric: np.ndarray
    u_asymptotic: np.ndarray

    @property
    def abs_err(self) -> np.ndarray:
        return np.abs(self.u_numeric - self.u_asymptotic)


@dataclass
class ComparisonReport:
    """Per-time error records, the decay fit and pass flags."""

    records: list
    fit: DecayFit | None
    light_cone: LightConeAudit
    trivial: bool
    flags: dict
    overlays: list = field(default_factory=list, repr=False)
    table: scat.ReflectionTable | None = field(default=None, repr=False)

    @property
    def passed(self) -> bool:
        return all(self.flags.values())

    def write(self, directory) -> list:
        """Write ``report.csv``, ``fit.csv`` and one ``overlay_t{time}.csv`` per time."""
        d = Path(directory)
        paths = [write_report_csv(d / "report.csv", self.records)]
        paths.append(write_fit_csv(d / "fit.csv", self.fit))
        for ov in self.overlays:
            paths.append(write_csv(d / f"overlay_t{ov.t:g}.csv",
                                   ["x", "u_numeric", "u_asymptotic", "abs_err"],
                                   [ov.x, ov.u_numeric, ov.u_asymptotic, ov.abs_err]))
        return paths


def write_report_csv(path, records) -> Path:
    cols = ["t", "t_grid", "max_abs_err", "rms_err", "rms_signal", "rel_rms"]
    return write_csv(path, cols, [[getattr(r, c) for r in records] for c in cols])


def write_fit_csv(path, fit: DecayFit | None) -> Path:
    cols = ["C", "exponent_check", "exponent_ok", "rms_log_resid_lnt", "rms_log_resid_sqrt"]
    if fit is None:
        vals = [[0.0], [math.nan], [False], [math.nan], [math.nan]]
    else:
        vals = [[getattr(fit, c)] for c in cols]
    return write_csv(path, cols, vals)


def _rms(a):
    return float(np.sqrt(np.mean(a * a))) if a.size else 0.0


def run_comparison(config: ExperimentConfig, table: scat.ReflectionTable | None = None,
                   data: scat.InitialData | None = None) -> ComparisonReport:
    """Evolve the PDE and compare with the asymptotic field on ``|x| <= w t``.

    A precomputed ``table`` (and the ``data`` it came from) may be passed to
    skip the scattering stage.

    Raises
    ------
    StageError
        Naming the failing stage.
    """
    data = data if data is not None else build_data(config)
    if table is None:
        log.info("building reflection table")
        table = build_table(config, data, validate=False)
    times = sorted(float(t) for t in config.compare.times)
    log.info("evolving PDE to t = %g", max(times))
    _, snaps = evolve(config, data, times)
    a = config.asym
    records, overlays = [], []
    for snap in snaps:
        mask = np.abs(snap.x) <= config.compare.window * snap.t_requested
        x = snap.x[mask]
        un = snap.u[mask]
        try:
            ua = asy.u_asymptotic(x, snap.t, table, a.inner, a.outer, a.nu_floor)
        except TzitzeicaError as exc:
            raise StageError("asymptotics", exc) from exc
        err = np.abs(un - ua)
        rms_e, rms_s = _rms(err), _rms(un)
        rel = rms_e / rms_s if rms_s > 0 else (0.0 if rms_e == 0 else math.inf)
        records.append(ComparisonRecord(snap.t_requested, snap.t, float(err.max(initial=0.0)),
                                        rms_e, rms_s, rel))
        overlays.append(Overlay(snap.t_requested, x, un, ua))
    audit = light_cone_audit(snaps, config.audit.support_radius, config.audit.threshold)
    trivial = all(r.rms_signal == 0 for r in records)
    fit = None
    flags = {"light_cone": audit.passed}
    if trivial:
        flags["errors_zero"] = all(r.max_abs_err == 0 for r in records)
    else:
        flags["error_decreases"] = records[-1].max_abs_err < records[0].max_abs_err
        flags["rel_rms_bound"] = records[-1].rel_rms <= config.compare.rel_rms_bound
        if len(records) >= 3:
            c = config.compare
            fit = fit_error_decay(records, c.exponent_min, c.exponent_max)
            flags["exponent_in_range"] = fit.exponent_ok
            flags["sqrt_law_rejected"] = fit.sqrt_rejected
    return ComparisonReport(records, fit, audit, trivial, flags, overlays, table)


# ---------------------------------------------------------------------------
# invariant suite


@dataclass(frozen=True)
class Check:
    group: str
    name: str
    value: float
    threshold: float
    passed: bool


@dataclass
class ValidationSuite:
    checks: list = field(default_factory=list)

    def add(self, group, name, value, threshold, passed=None):
        value = float(value)
        ok = (value < threshold) if passed is None else bool(passed)
        self.checks.append(Check(group, name, value, float(threshold), ok))

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> list:
        return [c for c in self.checks if not c.passed]

    def write(self, path) -> Path:
        c = self.checks
        return write_csv(path, ["group", "check", "value", "threshold", "passed"],
                         [[k.group for k in c], [k.name for k in c], [k.value for k in c],
                          [k.threshold for k in c], [k.passed for k in c]])


def _spectral_checks(suite: ValidationSuite, rng):
    lam = rng.normal(size=1000) + 1j * rng.normal(size=1000)
    suite.add("spectral", "trace_free_l", np.abs(sc.exponents_l(lam).sum(-1)).max(), 1e-12)
    suite.add("spectral", "trace_free_z", np.abs(sc.exponents_z(lam).sum(-1)).max(), 1e-12)
    u, w = rng.uniform(-1, 1, 200), rng.uniform(-1, 1, 200)
    lam = lam[:200]
    L = sc.lax_L(u, w, lam)
    Lw = sc.lax_L(u, w, sc.OMEGA * lam)
    Ainv = np.linalg.inv(sc.A_MAT)
    suite.add("spectral", "z3_symmetry", np.abs(L - Ainv @ Lw @ sc.A_MAT).max(), 1e-12)
    Lc = np.conj(sc.lax_L(u, w, np.conj(lam)))
    Binv = np.linalg.inv(sc.B_MAT)
    suite.add("spectral", "z2_symmetry", np.abs(L - sc.B_MAT @ Lc @ Binv).max(), 1e-12)
    us = np.linspace(-2, 2, 101)
    G = sc.gauge_G(us)
    row = np.array([sc.OMEGA, sc.OMEGA2, 1.0])
    res = np.abs(row @ G - np.exp(us)[:, None] * row).max()
    suite.add("spectral", "gauge_eigen_row", res, 1e-12)
    suite.add("spectral", "gauge_det", np.abs(np.linalg.det(G) - 1).max(), 1e-10)
    suite.add("spectral", "gauge_cyclic", np.abs(Ainv @ G @ sc.A_MAT - G).max(), 1e-12)
    suite.add("spectral", "gauge_reflection",
              np.abs(sc.B_MAT @ np.conj(G) @ sc.B_MAT - G).max(), 1e-12)
    h = 1e-5
    worst = 0.0
    for x, t in [(0.0, 20.0), (12.0, 20.0), (-30.0, 50.0), (5.0, 7.0)]:
        l0 = sc.critical_lambda0(x, t)
        d = (sc.phase_theta21(l0 + h, x, t) - sc.phase_theta21(l0 - h, x, t)) / (2 * h)
        worst = max(worst, abs(d) / max(1.0, t))
    suite.add("spectral", "stationarity", worst, 1e-8)


def _scattering_checks(suite, config, data, table, samples):
    v = scat.validate_scattering(samples)
    suite.add("scattering", "det_residual", v.max_det_residual, 1e-8)
    suite.add("scattering", "sym_residual", v.max_sym_residual, 1e-6)
    suite.add("scattering", "decay_margin", min(v.decay_margins.values()), 1.0,
              passed=min(v.decay_margins.values()) >= 1.0)
    s11_min = min(abs(s.s11 if s.lam > 0 else s.sA11) for s in samples)
    suite.add("scattering", "min_abs_s11", s11_min, config.scatter.soliton_tol,
              passed=s11_min > config.scatter.soliton_tol)
    s = config.scatter
    worst = 0.0
    for lam in (0.5, 1.0, 2.0):
        s11, s12 = scat.compute_s(data, lam, rtol=s.rtol, atol=s.atol)
        ref = scat.transfer_matrix_s(data, lam)
        worst = max(worst, abs(s11 - ref[0, 0]), abs(s12 - ref[0, 1]))
    suite.add("scattering", "transfer_matrix_oracle", worst, 1e-6)
    worst = 0.0
    for lam in (-0.5, -1.0, -2.0):
        a11, a12 = scat.compute_sA(data, lam, rtol=s.rtol, atol=s.atol)
        ref = scat.transfer_matrix_s_inverse(data, lam).T
        worst = max(worst, abs(a11 - ref[0, 0]), abs(a12 - ref[0, 1]))
    suite.add("scattering", "cofactor_oracle", worst, 1e-6)


def _asymptotic_checks(suite, table):
    worst = 0.0
    for nu in (0.01, 0.1, 0.5, 1.0, 2.0):
        y = math.sqrt(-math.expm1(-2 * math.pi * nu)) * np.exp(0.7j)
        for b in (asy.beta_plus(y, nu), asy.beta_minus(y, nu)):
            worst = max(worst, abs(abs(b.beta12 * b.beta21) - nu))
    suite.add("asymptotics", "beta_product", worst, 1e-12)
    worst = 0.0
    for nu in (0.01, 0.1, 0.3, 0.5, 1.0, 2.0):
        g2 = abs(np.exp(asy.log_gamma_complex(1j * nu))) ** 2
        worst = max(worst, abs(g2 - math.pi / (nu * math.sinh(math.pi * nu))) / g2)
    suite.add("asymptotics", "gamma_reflection", worst, 1e-12)
    if table.max_abs() > 0:
        a = asy.phase_constants(table, 1.0)
        b = asy.phase_constants_adaptive(table, 1.0)
        suite.add("asymptotics", "phase_oracle", max(abs(a.s1 - b.s1), abs(a.s2 - b.s2)), 1e-6)


def _pde_checks(suite, config, data):
    cfg = config.pde_config
    zero = pde.init_state(cfg, lambda x: 0 * x, lambda x: 0 * x)
    st = zero
    for _ in range(1000):
        st = pde.step(st)
    suite.add("pde", "zero_equilibrium", np.abs(st.u).max(), 1e-300,
              passed=not np.any(st.u))
    state = pde.init_state(cfg, data.u0_fn, data.u1_fn)
    final, snaps, energies = pde.run_until(state, cfg.t_max, [cfg.t_max], energy_every=10)
    drift = max(e.drift_rel for e in energies)
    suite.add("pde", "energy_drift", drift, 1e-6)
    st = state
    for _ in range(1000):
        st = pde.step(st)
    back = st.reversed()
    for _ in range(999):
        back = pde.step(back)
    suite.add("pde", "time_reversal", np.abs(back.u - state.u).max(), 1e-8)
    audit = light_cone_audit(snaps, config.audit.support_radius, config.audit.threshold)
    suite.add("pde", "light_cone_margin", audit.min_margin, 1e2,
              passed=audit.passed and audit.min_margin >= 1e2)


def run_validation(config: ExperimentConfig, seed: int = 0) -> ValidationSuite:
    """Run the invariant suites of every module on the configured datum."""
    rng = np.random.default_rng(seed)
    suite = ValidationSuite()
    _spectral_checks(suite, rng)
    data = build_data(config)
    table, samples = build_table(config, data, validate=True, return_samples=True)
    _scattering_checks(suite, config, data, table, samples)
    _asymptotic_checks(suite, table)
    try:
        _pde_checks(suite, config, data)
    except TzitzeicaError as exc:
        raise StageError("evolve", exc) from exc
    return suite
