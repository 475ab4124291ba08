"""Forward scattering: Jost functions, scattering matrices and reflection tables.

The Jost matrix ``Phi_+`` solves ``Phi' = [Lf, Phi] + L1 Phi`` with
``Phi_+(+X) = I``, where ``Lf = diag(l_1, l_2, l_3)``.  Integrating it
backward to ``x = -X`` gives the scattering matrix by the readout
``s_ij = exp(X (l_i - l_j)) Phi_+,ij(-X)``.  On ``lambda > 0`` only columns
1 and 2 are stable backward, so those are all that is integrated in the
production path.  The cofactor matrix ``Phi^A = (Phi^-1)^T`` obeys
``Phi^A' = -[Lf, Phi^A] - L1^T Phi^A`` and serves ``lambda < 0`` the same way.

Many spectral parameters are integrated together as one vector ODE so that
the potential spline is evaluated once per stage for the whole batch.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline

from . import spectral_core as sc
from .csvio import read_csv, write_csv
from .errors import DomainError, IntegrationError, SolitonSuspicionError

DEFAULT_RTOL = 1e-9
DEFAULT_ATOL = 1e-10
DEFAULT_SOLITON_TOL = 1e-3
DEFAULT_TAIL_TOL = 1e-10
CHUNK_SIZE = 40


# ---------------------------------------------------------------------------
# initial data


def _centered_derivative(f: np.ndarray, dx: float) -> np.ndarray:
    """Fourth-order centred difference in the interior, second order near the ends."""
    d = np.gradient(f, dx, edge_order=2)
    if f.size >= 5:
        d[2:-2] = (f[:-4] - 8.0 * f[1:-3] + 8.0 * f[3:-1] - f[4:]) / (12.0 * dx)
    return d


@dataclass(frozen=True, eq=False)
class InitialData:
    """Sampled Cauchy data ``(u0, u1)`` on a uniform grid over ``[-X, X]``.

    ``w = u0_x + u1`` is precomputed by centred differences.

    Parameters
    ----------
    x : ndarray
        Uniform, increasing grid with at least 16 samples.
    u0, u1 : ndarray
        Field and time derivative at ``t = 0``.
    tail_tol : float
        Both fields must be below this in magnitude at the grid ends.
    """

    x: np.ndarray
    u0: np.ndarray
    u1: np.ndarray
    tail_tol: float = DEFAULT_TAIL_TOL
    w: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        u0 = np.asarray(self.u0, dtype=float)
        u1 = np.asarray(self.u1, dtype=float)
        if x.ndim != 1 or x.size < 16:
            raise DomainError("initial data needs at least 16 samples")
        if u0.shape != x.shape or u1.shape != x.shape:
            raise DomainError("x, u0, u1 must have the same length")
        if not (np.all(np.isfinite(u0)) and np.all(np.isfinite(u1))):
            raise DomainError("initial data has non-finite samples")
        dx = np.diff(x)
        if np.any(dx <= 0) or np.ptp(dx) > 1e-9 * abs(dx[0]):
            raise DomainError("grid must be uniform and increasing")
        ends = np.abs(np.r_[u0[[0, -1]], u1[[0, -1]]])
        if np.any(ends >= self.tail_tol):
            raise DomainError(
                f"data not negligible at the truncation ends (max {ends.max():.3e} "
                f">= tail_tol {self.tail_tol:g}); enlarge X"
            )
        for name, val in (("x", x), ("u0", u0), ("u1", u1)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)
        w = _centered_derivative(u0, float(x[1] - x[0])) + u1
        w.setflags(write=False)
        object.__setattr__(self, "w", w)

    @property
    def X(self) -> float:
        """Truncation half-width."""
        return float(max(-self.x[0], self.x[-1]))

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def is_zero(self) -> bool:
        return not (np.any(self.u0) or np.any(self.u1))

    @cached_property
    def potential(self) -> CubicSpline:
        """Cubic spline of ``(u0, w)`` used by the Jost integrators."""
        return CubicSpline(self.x, np.stack([self.u0, self.w], axis=1))

    @cached_property
    def _u_splines(self):
        return CubicSpline(self.x, self.u0), CubicSpline(self.x, self.u1)

    def u0_fn(self, x) -> np.ndarray:
        """Interpolated ``u0``; zero outside ``[-X, X]``."""
        return self._eval(self._u_splines[0], x)

    def u1_fn(self, x) -> np.ndarray:
        """Interpolated ``u1``; zero outside ``[-X, X]``."""
        return self._eval(self._u_splines[1], x)

    def _eval(self, spl, x):
        x = np.asarray(x, dtype=float)
        inside = (x >= self.x[0]) & (x <= self.x[-1])
        return np.where(inside, spl(np.clip(x, self.x[0], self.x[-1])), 0.0)

    # constructors -----------------------------------------------------

    @classmethod
    def from_functions(cls, u0_fn: Callable, u1_fn: Callable, X: float | None = None,
                       dx: float = 0.01, margin: float = 2.0, negligible: float = 1e-12,
                       tail_tol: float = DEFAULT_TAIL_TOL) -> "InitialData":
        """Sample callables on ``[-X, X]``.

        When ``X`` is None it is the smallest integer beyond which
        ``|u0| + |u1| < negligible``, plus ``margin``.
        """
        if X is None:
            X = support_extent(u0_fn, u1_fn, negligible) + margin
        n = int(round(2 * X / dx)) + 1
        x = np.linspace(-X, X, n)
        return cls(x, np.asarray(u0_fn(x), float) * np.ones_like(x),
                   np.asarray(u1_fn(x), float) * np.ones_like(x), tail_tol=tail_tol)

    @classmethod
    def gaussian(cls, amplitude: float = -0.1, width: float = 1.0, X: float | None = None,
                 dx: float = 0.01, tail_tol: float = DEFAULT_TAIL_TOL) -> "InitialData":
        """``u0 = amplitude * exp(-x^2 / (2 width^2))``, ``u1 = 0``."""
        return cls.from_functions(
            lambda x: amplitude * np.exp(-0.5 * (np.asarray(x) / width) ** 2),
            lambda x: np.zeros_like(np.asarray(x, float)),
            X=X, dx=dx, tail_tol=tail_tol,
        )

    @classmethod
    def zero(cls, X: float = 10.0, dx: float = 0.01) -> "InitialData":
        n = int(round(2 * X / dx)) + 1
        x = np.linspace(-X, X, n)
        return cls(x, np.zeros(n), np.zeros(n))

    @classmethod
    def from_file(cls, path, tail_tol: float = DEFAULT_TAIL_TOL) -> "InitialData":
        """Read a CSV with columns ``x,u0,u1``."""
        try:
            cols = read_csv(path)
        except (OSError, IndexError, UnicodeDecodeError) as exc:
            raise DomainError(f"cannot read initial data from {path}: {exc}") from None
        missing = {"x", "u0", "u1"} - set(cols)
        if missing:
            raise DomainError(f"{path}: missing columns {sorted(missing)}")
        return cls(cols["x"], cols["u0"], cols["u1"], tail_tol=tail_tol)

    def to_file(self, path) -> Path:
        return write_csv(path, ["x", "u0", "u1"], [self.x, self.u0, self.u1])


def support_extent(u0_fn, u1_fn, negligible: float = 1e-12, search: float = 200.0) -> float:
    """Smallest integer ``R`` with ``|u0| + |u1| < negligible`` for ``|x| > R`` on a probe grid."""
    xs = np.linspace(-search, search, 400001)
    mag = np.abs(np.asarray(u0_fn(xs), float)) + np.abs(np.asarray(u1_fn(xs), float))
    big = np.nonzero(mag * np.ones_like(xs) >= negligible)[0]
    if big.size == 0:
        return 0.0
    return float(math.ceil(np.max(np.abs(xs[big]))))


# ---------------------------------------------------------------------------
# batched Jost integration

_U1_DIAG = np.diag([sc.OMEGA2, sc.OMEGA, 1.0 + 0j])
_U1_OFF = np.array([[0, 1, sc.OMEGA], [1, 0, sc.OMEGA2], [sc.OMEGA, sc.OMEGA2, 0]])


def _potential_evaluator(data: InitialData):
    """Fast scalar evaluation of the ``(u0, w)`` spline (avoids per-call array overhead)."""
    spl = data.potential
    knots = spl.x.tolist()
    c = spl.c  # shape (4, n - 1, 2)
    last = len(knots) - 2

    def evaluate(x):
        i = min(max(bisect_right(knots, x) - 1, 0), last)
        h = x - knots[i]
        v = ((c[0, i] * h + c[1, i]) * h + c[2, i]) * h + c[3, i]
        return float(v[0]), float(v[1])

    return evaluate


def _jost_batch(data: InitialData, lams, cols: Sequence[int], cofactor: bool = False,
                rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL,
                x_eval=None, method: str = "DOP853"):
    """Integrate selected columns of ``Phi_+`` (or ``Phi_+^A``) from ``+X`` to ``-X``.

    Parameters
    ----------
    lams : array_like of nonzero (possibly complex) spectral parameters.
    cols : zero-based column indices to advance.
    cofactor : integrate the cofactor flow instead of the Jost flow.
    x_eval : optional decreasing abscissae at which to also return ``Phi``.

    Returns
    -------
    phi : ndarray, shape (B, 3, k)
        Columns at ``x = -X``.
    dense : ndarray or None
        Shape ``(len(x_eval), B, 3, k)`` if ``x_eval`` is given.
    """
    lams = np.atleast_1d(np.asarray(lams, dtype=complex))
    cols = list(cols)
    B, k = lams.size, len(cols)
    X = data.X
    l = sc.exponents_l(lams)
    diff = (l[:, :, None] - l[:, None, :])[:, :, cols]
    sgn = -1.0 if cofactor else 1.0
    evaluate = _potential_evaluator(data)
    inv_lam = (1.0 / lams)[:, None, None]
    # L1 = a/6 * Da/lam + b/6 * Db/lam - J^2/(2 lam) + w * P, with (a, b, w) from the data
    Da, Db, P = _U1_DIAG, _U1_OFF, sc._U0_PATTERN * (1j * sc.SQRT3 / 6.0)
    C = -0.5 * sc.J2
    if cofactor:
        Da, Db, P, C = Da.T, Db.T, P.T, C.T
    Da_l, Db_l, C_l = Da * inv_lam, Db * inv_lam, C * inv_lam

    def rhs(x, y):
        phi = y.reshape(B, 3, k)
        u, w = evaluate(x)
        eu, em = math.exp(u), math.exp(-2.0 * u)
        M = ((2.0 * eu + em) / 6.0) * Da_l + ((em - eu) / 6.0) * Db_l + C_l + w * P
        return (sgn * (diff * phi + M @ phi)).ravel()

    y0 = np.zeros((B, 3, k), dtype=complex)
    for c, j in enumerate(cols):
        y0[:, j, c] = 1.0
    n = y0.size
    scale = math.sqrt(n)
    max_step = 0.1 / max(1.0, float(np.max(np.abs(lams))))
    te = None
    if x_eval is not None:
        te = np.r_[np.asarray(x_eval, dtype=float), -X]
    sol = solve_ivp(rhs, (X, -X), y0.ravel(), method=method, rtol=rtol / scale,
                    atol=atol / scale, max_step=max_step, t_eval=te)
    if sol.status != 0 or not np.all(np.isfinite(sol.y[:, -1])):
        raise IntegrationError(f"Jost integration failed: {sol.message}", lambdas=lams.real)
    phi = sol.y[:, -1].reshape(B, 3, k)
    dense = None
    if x_eval is not None:
        dense = sol.y[:, :-1].T.reshape(len(x_eval), B, 3, k)
    return phi, dense


def _readout(phi: np.ndarray, lams, cols, X: float, cofactor: bool) -> np.ndarray:
    """Scattering entries ``s_ij`` (or ``s^A_ij``) from columns at ``x = -X``."""
    l = sc.exponents_l(np.asarray(lams, dtype=complex))
    diff = (l[:, :, None] - l[:, None, :])[:, :, list(cols)]
    sign = -1.0 if cofactor else 1.0
    # entries outside the stable block may overflow for small |lam|; they are never read
    with np.errstate(over="ignore", invalid="ignore"):
        return phi * np.exp(sign * X * diff)


def _check_real(lam, positive: bool):
    lam = float(lam)
    if positive and not lam > 0:
        raise DomainError(f"need lambda > 0, got {lam}")
    if not positive and not lam < 0:
        raise DomainError(f"need lambda < 0, got {lam}")
    return lam


def jost_plus_columns(data: InitialData, lam: float, rtol: float = DEFAULT_RTOL,
                      atol: float = DEFAULT_ATOL):
    """Columns 1 and 2 of ``Phi_+`` at ``x = -X`` for real nonzero ``lam``.

    Returns
    -------
    c1, c2 : ndarray of shape (3,)
    """
    lam = float(lam)
    if lam == 0:
        raise DomainError("spectral parameter at essential singularity (lambda = 0)")
    phi, _ = _jost_batch(data, [lam], (0, 1), rtol=rtol, atol=atol)
    return phi[0, :, 0].copy(), phi[0, :, 1].copy()


def compute_s(data: InitialData, lam: float, rtol: float = DEFAULT_RTOL,
              atol: float = DEFAULT_ATOL):
    """``(s11, s12)`` for ``lam > 0``."""
    lam = _check_real(lam, True)
    phi, _ = _jost_batch(data, [lam], (0, 1), rtol=rtol, atol=atol)
    s = _readout(phi, [lam], (0, 1), data.X, False)[0]
    return complex(s[0, 0]), complex(s[0, 1])


def compute_sA(data: InitialData, lam: float, rtol: float = DEFAULT_RTOL,
               atol: float = DEFAULT_ATOL):
    """``(sA11, sA12)`` for ``lam < 0``."""
    lam = _check_real(lam, False)
    phi, _ = _jost_batch(data, [lam], (0, 1), cofactor=True, rtol=rtol, atol=atol)
    s = _readout(phi, [lam], (0, 1), data.X, True)[0]
    return complex(s[0, 0]), complex(s[0, 1])


def _guard(s11, lam, soliton_tol):
    if abs(s11) < soliton_tol:
        raise SolitonSuspicionError(
            f"|s11| = {abs(s11):.3e} < soliton_tol at lambda = {lam}", lambdas=[lam]
        )


def reflection_r1(data: InitialData, lam: float, soliton_tol: float = DEFAULT_SOLITON_TOL,
                  **kw) -> complex:
    """``r1 = s12 / s11`` for ``lam > 0``."""
    s11, s12 = compute_s(data, lam, **kw)
    _guard(s11, lam, soliton_tol)
    return s12 / s11


def reflection_r2(data: InitialData, lam: float, soliton_tol: float = DEFAULT_SOLITON_TOL,
                  **kw) -> complex:
    """``r2 = sA12 / sA11`` for ``lam < 0``."""
    sA11, sA12 = compute_sA(data, lam, **kw)
    _guard(sA11, lam, soliton_tol)
    return sA12 / sA11


# ---------------------------------------------------------------------------
# samples and validation


@dataclass(frozen=True)
class ScatteringSample:
    """Scattering data at one real ``lam``.

    On ``lam > 0`` the primary entries are ``s11, s12`` and ``sA11, sA12`` are
    NaN; on ``lam < 0`` it is the other way round.  ``det_residual`` is
    ``|det s - 1|`` (or ``|det s^A - 1|``) and ``sym_residual`` measures the
    reflection symmetry ``s = B conj(s) B^-1`` on the computed 2x2 block.
    """

    lam: float
    s11: complex
    s12: complex
    sA11: complex
    sA12: complex
    det_residual: float
    sym_residual: float

    @property
    def r(self) -> complex:
        if self.lam > 0:
            return self.s12 / self.s11
        return self.sA12 / self.sA11


def _sweep_chunk(args):
    data, lams, validate, rtol, atol = args
    lams = np.asarray(lams, dtype=float)
    positive = lams[0] > 0
    cof = not positive
    cols = (0, 1)
    phi, _ = _jost_batch(data, lams, cols, cofactor=cof, rtol=rtol, atol=atol)
    s = _readout(phi, lams, cols, data.X, cof)
    s11, s12, s21, s22 = s[:, 0, 0], s[:, 0, 1], s[:, 1, 0], s[:, 1, 1]
    if validate:
        # column 3 of the opposite flow is stable where columns 1-2 of this one are;
        # its (3,3) entry closes the cofactor identity det M = C33(M) / M^A_33
        phi3, _ = _jost_batch(data, lams, (2,), cofactor=not cof, rtol=rtol, atol=atol)
        other33 = phi3[:, 2, 0]
        det = (s11 * s22 - s12 * s21) / other33
        det_res = np.abs(det - 1.0)
        sym_res = np.maximum(np.abs(s22 - np.conj(s11)), np.abs(s21 - np.conj(s12)))
    else:
        det_res = np.full(lams.size, np.nan)
        sym_res = np.maximum(np.abs(s22 - np.conj(s11)), np.abs(s21 - np.conj(s12)))
    return s11, s12, det_res, sym_res


class LambdaGrid:
    """Spectral sampling ``count`` points in ``[lambda_min, lambda_max]`` per sign."""

    def __init__(self, lambda_min: float = 0.02, lambda_max: float = 30.0, count: int = 400,
                 spacing: str = "log"):
        if not (0 < lambda_min < lambda_max):
            raise DomainError("need 0 < lambda_min < lambda_max")
        if count < 4:
            raise DomainError("need at least 4 grid points")
        if spacing not in ("log", "linear"):
            raise DomainError("spacing must be 'log' or 'linear'")
        self.lambda_min = float(lambda_min)
        self.lambda_max = float(lambda_max)
        self.count = int(count)
        self.spacing = spacing

    def nodes(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.lambda_min, self.lambda_max, self.count)
        return np.linspace(self.lambda_min, self.lambda_max, self.count)

    def refined(self) -> "LambdaGrid":
        """Grid with halved spacing (``2 count - 1`` points, same ends)."""
        return LambdaGrid(self.lambda_min, self.lambda_max, 2 * self.count - 1, self.spacing)

    def __repr__(self):
        return (f"LambdaGrid({self.lambda_min}, {self.lambda_max}, {self.count}, "
                f"'{self.spacing}')")


def scattering_sweep(data: InitialData, lams, validate: bool = True, workers: int = 1,
                     rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL,
                     soliton_tol: float = DEFAULT_SOLITON_TOL) -> list[ScatteringSample]:
    """Scattering samples on real ``lams`` of a single sign.

    Chunks of consecutive parameters share one adaptive integration.  The
    chunking does not depend on ``workers``, so results are bit-identical for
    any degree of parallelism.
    """
    lams = np.asarray(lams, dtype=float)
    if lams.size == 0:
        return []
    if not (np.all(lams > 0) or np.all(lams < 0)):
        raise DomainError("a sweep must not mix signs or contain zero")
    order = np.argsort(np.abs(lams))
    chunks = [lams[order[i:i + CHUNK_SIZE]] for i in range(0, lams.size, CHUNK_SIZE)]
    jobs = [(data, c, validate, rtol, atol) for c in chunks]
    results = []
    failed = []
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outs = list(pool.map(_safe_chunk, jobs))
    else:
        outs = [_safe_chunk(j) for j in jobs]
    for c, out in zip(chunks, outs):
        if isinstance(out, Exception):
            failed.extend(c.tolist())
            continue
        results.append((c, out))
    if failed:
        raise IntegrationError(f"integration failed for {len(failed)} lambda values",
                               lambdas=failed)
    samples = {}
    positive = lams[0] > 0
    nan = complex(np.nan, np.nan)
    for c, (s11, s12, det_res, sym_res) in results:
        for i, lam in enumerate(c):
            a, b = complex(s11[i]), complex(s12[i])
            if positive:
                samples[lam] = ScatteringSample(float(lam), a, b, nan, nan,
                                                float(det_res[i]), float(sym_res[i]))
            else:
                samples[lam] = ScatteringSample(float(lam), nan, nan, a, b,
                                                float(det_res[i]), float(sym_res[i]))
    out = [samples[lam] for lam in lams]
    bad = [smp.lam for smp in out
           if abs(smp.s11 if positive else smp.sA11) < soliton_tol]
    if bad:
        raise SolitonSuspicionError(
            f"|s11| below soliton_tol={soliton_tol:g} at {len(bad)} lambda values", lambdas=bad
        )
    return out


def _safe_chunk(job):
    try:
        return _sweep_chunk(job)
    except IntegrationError as exc:
        return exc


# ---------------------------------------------------------------------------
# reflection table


@dataclass(frozen=True, eq=False)
class ReflectionTable:
    """Sampled ``r1`` on ``(0, Lmax]`` and ``r2`` on ``[-Lmax, 0)``.

    Between samples both are interpolated by cubic splines of the real and
    imaginary parts; outside the sampled range they are taken as zero.
    """

    lambda_pos: np.ndarray
    r1: np.ndarray
    lambda_neg: np.ndarray
    r2: np.ndarray
    det_residual_pos: np.ndarray | None = None
    sym_residual_pos: np.ndarray | None = None
    det_residual_neg: np.ndarray | None = None
    sym_residual_neg: np.ndarray | None = None

    def __post_init__(self):
        for name in ("lambda_pos", "lambda_neg"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        for name in ("r1", "r2"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=complex))
        lp, ln = self.lambda_pos, self.lambda_neg
        if lp.size < 4 or ln.size < 4:
            raise DomainError("reflection table needs at least 4 samples per sign")
        if np.any(lp <= 0) or np.any(np.diff(lp) <= 0):
            raise DomainError("lambda_pos must be positive and increasing")
        if np.any(ln >= 0) or np.any(np.diff(ln) <= 0):
            raise DomainError("lambda_neg must be negative and increasing")
        if lp.shape != self.r1.shape or ln.shape != self.r2.shape:
            raise DomainError("grid and coefficient lengths differ")
        if np.any(np.abs(self.r1) >= 1) or np.any(np.abs(self.r2) >= 1):
            raise DomainError("|r| >= 1 on the table: not a solitonless datum")

    @classmethod
    def zero(cls, grid: LambdaGrid | None = None) -> "ReflectionTable":
        nodes = (grid or LambdaGrid()).nodes()
        z = np.zeros(nodes.size, dtype=complex)
        return cls(nodes, z, -nodes[::-1], z.copy(), np.zeros(nodes.size),
                   np.zeros(nodes.size), np.zeros(nodes.size), np.zeros(nodes.size))

    @property
    def lambda_max(self) -> float:
        return float(min(self.lambda_pos[-1], -self.lambda_neg[0]))

    @property
    def lambda_min(self) -> float:
        return float(max(self.lambda_pos[0], -self.lambda_neg[-1]))

    def max_abs(self) -> float:
        return float(max(np.max(np.abs(self.r1)), np.max(np.abs(self.r2))))

    @cached_property
    def _splines(self):
        sp = CubicSpline(self.lambda_pos, np.stack([self.r1.real, self.r1.imag], 1))
        sn = CubicSpline(self.lambda_neg, np.stack([self.r2.real, self.r2.imag], 1))
        return sp, sp.derivative(), sn, sn.derivative()

    def _interp(self, which: int, lam):
        lam = np.asarray(lam, dtype=float)
        grid = self.lambda_pos if which == 0 else self.lambda_neg
        spl = self._splines[2 * which]
        inside = (lam >= grid[0]) & (lam <= grid[-1])
        v = spl(np.clip(lam, grid[0], grid[-1]))
        out = np.where(inside, v[..., 0] + 1j * v[..., 1], 0.0)
        return out if out.ndim else complex(out)

    def r1_at(self, lam):
        """Interpolated ``r1``; zero outside the sampled range."""
        return self._interp(0, lam)

    def r2_at(self, lam):
        """Interpolated ``r2`` (``lam < 0``); zero outside the sampled range."""
        return self._interp(1, lam)

    def g_prime(self, which: int, lam) -> np.ndarray:
        """Derivative of ``g = ln(1 - |r|^2)`` from the interpolant (0: r1, 1: r2)."""
        lam = np.asarray(lam, dtype=float)
        grid = self.lambda_pos if which == 0 else self.lambda_neg
        spl, dspl = self._splines[2 * which], self._splines[2 * which + 1]
        inside = (lam >= grid[0]) & (lam <= grid[-1])
        lc = np.clip(lam, grid[0], grid[-1])
        v, dv = spl(lc), dspl(lc)
        abs2 = v[..., 0] ** 2 + v[..., 1] ** 2
        dabs2 = 2.0 * (v[..., 0] * dv[..., 0] + v[..., 1] * dv[..., 1])
        return np.where(inside, -dabs2 / (1.0 - abs2), 0.0)

    def to_csv(self, path) -> Path:
        """Write ``lambda,re_r,im_r,abs_r,det_residual,sym_residual`` (negative half first)."""
        lam = np.r_[self.lambda_neg, self.lambda_pos]
        r = np.r_[self.r2, self.r1]
        nanp = np.full(self.lambda_pos.size, np.nan)
        nann = np.full(self.lambda_neg.size, np.nan)
        det = np.r_[_or(self.det_residual_neg, nann), _or(self.det_residual_pos, nanp)]
        sym = np.r_[_or(self.sym_residual_neg, nann), _or(self.sym_residual_pos, nanp)]
        return write_csv(path, ["lambda", "re_r", "im_r", "abs_r", "det_residual",
                                "sym_residual"], [lam, r.real, r.imag, np.abs(r), det, sym])

    @classmethod
    def from_csv(cls, path) -> "ReflectionTable":
        c = read_csv(path)
        lam = c["lambda"]
        r = c["re_r"] + 1j * c["im_r"]
        neg, pos = lam < 0, lam > 0
        return cls(lam[pos], r[pos], lam[neg], r[neg], c["det_residual"][pos],
                   c["sym_residual"][pos], c["det_residual"][neg], c["sym_residual"][neg])


def _or(a, default):
    return default if a is None else np.asarray(a, dtype=float)


def build_reflection_table(data: InitialData, grid: LambdaGrid | None = None,
                           validate: bool = True, workers: int = 1,
                           rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL,
                           soliton_tol: float = DEFAULT_SOLITON_TOL,
                           return_samples: bool = False):
    """Reflection coefficients on a symmetric grid of spectral parameters.

    Raises
    ------
    SolitonSuspicionError
        If ``|s11|`` or ``|sA11|`` drops below ``soliton_tol`` anywhere; the
        exception lists every offending ``lambda``.
    IntegrationError
        If any chunk fails; lists the affected ``lambda``.
    """
    grid = grid or LambdaGrid()
    nodes = grid.nodes()
    kw = dict(validate=validate, workers=workers, rtol=rtol, atol=atol, soliton_tol=soliton_tol)
    bad = []
    try:
        pos = scattering_sweep(data, nodes, **kw)
    except SolitonSuspicionError as exc:
        bad.extend(exc.lambdas)
        pos = None
    try:
        neg = scattering_sweep(data, -nodes[::-1], **kw)
    except SolitonSuspicionError as exc:
        bad.extend(exc.lambdas)
        neg = None
    if bad:
        raise SolitonSuspicionError(
            f"|s11| below soliton_tol={soliton_tol:g} at lambda = {bad}", lambdas=bad
        )
    table = ReflectionTable(
        nodes, np.array([s.r for s in pos]), -nodes[::-1], np.array([s.r for s in neg]),
        np.array([s.det_residual for s in pos]), np.array([s.sym_residual for s in pos]),
        np.array([s.det_residual for s in neg]), np.array([s.sym_residual for s in neg]),
    )
    if return_samples:
        return table, pos + neg
    return table


@dataclass
class ScatteringValidation:
    """Outcome of :func:`validate_scattering`."""

    max_det_residual: float
    max_sym_residual: float
    det_failures: list
    sym_failures: list
    decay_margins: dict
    det_tol: float
    sym_tol: float
    decay_tol: float

    @property
    def flagged(self) -> list:
        return sorted(set(self.det_failures) | set(self.sym_failures))

    @property
    def passed(self) -> bool:
        return (not self.flagged) and all(m >= 1.0 for m in self.decay_margins.values())


def validate_scattering(samples: Sequence[ScatteringSample], det_tol: float = 1e-8,
                        sym_tol: float = 1e-6, decay_tol: float = 1e-6) -> ScatteringValidation:
    """Residual report over real-lambda samples.

    ``decay_margins`` maps ``'pos_low'``, ``'pos_high'``, ``'neg_low'``,
    ``'neg_high'`` to ``decay_tol / |r|`` at the grid ends (a margin of at
    least 1 passes); ends absent from ``samples`` are omitted.
    """
    det = np.array([s.det_residual for s in samples], dtype=float)
    sym = np.array([s.sym_residual for s in samples], dtype=float)
    lams = [s.lam for s in samples]
    det_fail = [lam for lam, d in zip(lams, det) if not (np.isnan(d) or d < det_tol)]
    sym_fail = [lam for lam, d in zip(lams, sym) if not d < sym_tol]
    margins = {}
    for tag, sel in (("pos", [s for s in samples if s.lam > 0]),
                     ("neg", [s for s in samples if s.lam < 0])):
        if not sel:
            continue
        sel = sorted(sel, key=lambda s: abs(s.lam))
        for end, smp in (("low", sel[0]), ("high", sel[-1])):
            ra = abs(smp.r)
            margins[f"{tag}_{end}"] = math.inf if ra == 0 else decay_tol / ra
    finite_det = det[~np.isnan(det)]
    return ScatteringValidation(
        max_det_residual=float(finite_det.max()) if finite_det.size else 0.0,
        max_sym_residual=float(sym.max()) if sym.size else 0.0,
        det_failures=det_fail, sym_failures=sym_fail, decay_margins=margins,
        det_tol=det_tol, sym_tol=sym_tol, decay_tol=decay_tol,
    )


# ---------------------------------------------------------------------------
# independent cross-check routes


def transfer_matrix(data: InitialData, lam: complex, cofactor: bool = False,
                    rtol: float = 1e-12, atol: float = 1e-14) -> np.ndarray:
    """Fundamental matrix ``T`` of ``phi' = L phi`` (or ``phi' = -L^T phi``) from ``-X`` to ``+X``.

    ``T(-X) = I``; the full unnormalised ``L`` is integrated forward, unlike
    the production path which advances normalised Jost columns backward.
    """
    lam = complex(lam)
    spl = data.potential
    X = data.X

    def rhs(x, y):
        u, w = spl(x)
        L = sc.lax_L(u, w, lam)
        if cofactor:
            L = -L.T
        return (L @ y.reshape(3, 3)).ravel()

    sol = solve_ivp(rhs, (-X, X), np.eye(3, dtype=complex).ravel(), method="DOP853",
                    rtol=rtol, atol=atol, max_step=0.05 / max(1.0, abs(lam)))
    if sol.status != 0:
        raise IntegrationError(sol.message, lambdas=[lam])
    return sol.y[:, -1].reshape(3, 3)


def transfer_matrix_s(data: InitialData, lam: float, **kw) -> np.ndarray:
    """Scattering matrix ``s`` for ``lam > 0`` from the adjoint fundamental matrix.

    ``s = exp(X Lf) T_A^T exp(X Lf)``.  Only columns 1-2 are accurate; the
    third column involves exponentially large factors.
    """
    lam = _check_real(lam, True)
    TA = transfer_matrix(data, lam, cofactor=True, **kw)
    e = np.exp(data.X * sc.exponents_l(lam))
    return e[:, None] * TA.T * e[None, :]


def transfer_matrix_s_inverse(data: InitialData, lam: float, **kw) -> np.ndarray:
    """``s^-1`` for ``lam < 0`` from the forward fundamental matrix.

    ``s^-1 = exp(-X Lf) T exp(-X Lf)``; columns 1-2 are accurate, so
    ``s^A = (s^-1)^T`` is accurate on its rows 1-2.
    """
    lam = _check_real(lam, False)
    T = transfer_matrix(data, lam, cofactor=False, **kw)
    e = np.exp(-data.X * sc.exponents_l(lam))
    return e[:, None] * T * e[None, :]


def jost_columns_rk4(data: InitialData, lam: complex, h: float = 0.005,
                     cols: Sequence[int] = (0, 1), cofactor: bool = False) -> np.ndarray:
    """Fixed-step classical RK4 integration of Jost columns from ``+X`` to ``-X``.

    Cross-check for the adaptive integrator; returns shape ``(3, len(cols))``.
    """
    lam = complex(lam)
    X = data.X
    n = int(math.ceil(2 * X / h))
    h = 2 * X / n
    l = sc.exponents_l(lam)
    diff = (l[:, None] - l[None, :])[:, list(cols)]
    sgn = -1.0 if cofactor else 1.0
    spl = data.potential

    def f(x, phi):
        u, w = spl(x)
        L1 = sc.build_L1(u, w, lam)
        if cofactor:
            L1 = L1.T
        return sgn * (diff * phi + L1 @ phi)

    phi = np.eye(3, dtype=complex)[:, list(cols)]
    x = X
    for _ in range(n):
        k1 = f(x, phi)
        k2 = f(x - h / 2, phi - h / 2 * k1)
        k3 = f(x - h / 2, phi - h / 2 * k2)
        k4 = f(x - h, phi - h * k3)
        phi = phi - h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        x -= h
    return phi
