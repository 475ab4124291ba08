"""Leading-order long-time waveform inside the light cone.

For ``|x/t| <= inner`` the field oscillates with amplitude ``O(t^-1/2)``
around zero with a phase fixed by the reflection data at the stationary
points ``+-lambda0``.  Elsewhere the leading term vanishes and the value is
zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np
from scipy import integrate, special

from . import spectral_core as sc
from .csvio import write_csv
from .errors import DomainError, ValidityError
from .scattering import ReflectionTable

DEFAULT_NU_FLOOR = 1e-10
_LN4 = np.log(4.0)
_SQRT2PI = np.sqrt(2.0 * np.pi)


def nu_from_r(r_abs):
    """``nu = -ln(1 - |r|^2) / (2 pi)``.

    Raises
    ------
    DomainError
        If ``r_abs`` is outside ``[0, 1)``.
    """
    r = np.asarray(r_abs, dtype=float)
    if np.any(r < 0) or np.any(r >= 1) or np.any(~np.isfinite(r)):
        raise DomainError("|r| must lie in [0, 1) for a solitonless datum")
    out = -np.log1p(-r * r) / (2.0 * np.pi)
    return out if out.ndim else float(out)


def log_gamma_complex(z):
    """Principal branch of ``log Gamma(z)``.

    Raises
    ------
    DomainError
        Within ``1e-12`` of a pole ``z = 0, -1, -2, ...``.
    """
    z = np.asarray(z, dtype=complex)
    n = np.round(z.real)
    near = (n <= 0) & (np.abs(z - n) < 1e-12)
    if np.any(near):
        raise DomainError("log-gamma evaluated at a pole")
    out = special.loggamma(z)
    return out if out.ndim else complex(out)


@dataclass(frozen=True)
class ModelCoefficients:
    """First-moment coefficients of the local model problem at ``+lambda0`` or ``-lambda0``."""

    beta12: complex
    beta21: complex
    which: str
    nu: float


def _check_y_nu(y, nu, tol):
    y = complex(y)
    a = abs(y)
    if not 0 < a < 1:
        raise DomainError("need 0 < |y| < 1")
    if not nu > 0:
        raise DomainError("need nu > 0")
    expect = nu_from_r(a)
    if abs(expect - nu) > tol * max(1.0, abs(expect)):
        raise DomainError(f"nu = {nu} inconsistent with |y| (expected {expect})")
    return y


def beta_plus(y: complex, nu: float, tol: float = 1e-10) -> ModelCoefficients:
    """Coefficients at ``+lambda0``; ``|beta12|^2 = nu`` and ``beta21 = conj(beta12)``."""
    y = _check_y_nu(y, nu, tol)
    g_p = np.exp(log_gamma_complex(1j * nu))
    g_m = np.exp(log_gamma_complex(-1j * nu))
    damp = np.exp(-np.pi * nu / 2)
    b12 = -_SQRT2PI * np.exp(1j * np.pi / 4) * damp / (np.conj(y) * g_p)
    b21 = -_SQRT2PI * np.exp(-1j * np.pi / 4) * damp / (y * g_m)
    return ModelCoefficients(complex(b12), complex(b21), "+", float(nu))


def beta_minus(y: complex, nu: float, tol: float = 1e-10) -> ModelCoefficients:
    """Coefficients at ``-lambda0``; ``|beta12 beta21| = nu``."""
    y = _check_y_nu(y, nu, tol)
    g_p = np.exp(log_gamma_complex(1j * nu))
    g_m = np.exp(log_gamma_complex(-1j * nu))
    b12 = -_SQRT2PI * np.exp(-1j * np.pi / 4) * np.exp(-2.5 * np.pi * nu) / (y * g_m)
    b21 = -_SQRT2PI * np.exp(1j * np.pi / 4) * np.exp(1.5 * np.pi * nu) / (np.conj(y) * g_p)
    return ModelCoefficients(complex(b12), complex(b21), "-", float(nu))


# ---------------------------------------------------------------------------
# phase constants


def _graded_rule(order: int = 16, refine: int = 0, levels: int = 45):
    """Composite Gauss-Legendre rule on [0, 1] graded geometrically towards 1.

    Uniform panels of width 1/16 cover [0, 15/16]; panels
    ``[1 - 2^-j, 1 - 2^-(j+1)]`` follow for ``j = 4 .. levels``.  Each
    ``refine`` halves every panel.
    """
    br = np.r_[np.arange(16) / 16.0, 1.0 - 2.0 ** -np.arange(5, levels + 1), 1.0]
    for _ in range(refine):
        br = np.sort(np.r_[br, 0.5 * (br[:-1] + br[1:])])
    t, w = np.polynomial.legendre.leggauss(order)
    a, b = br[:-1, None], br[1:, None]
    nodes = (0.5 * (b - a) * t + 0.5 * (a + b)).ravel()
    weights = (0.5 * (b - a) * w).ravel()
    return nodes, weights


class PhaseConstants(NamedTuple):
    s1: float | np.ndarray
    s2: float | np.ndarray
    degenerate: bool | np.ndarray


def _stieltjes_terms(table: ReflectionTable, lam0: np.ndarray, refine: int = 0,
                     chunk: int = 256):
    """The two log-ratio integrals entering each phase constant.

    Returns ``(i1, i2)`` where ``s1 = -(...) + i1`` and ``s2 = -(...) + i2``.
    """
    sigma, wts = _graded_rule(refine=refine)
    w0 = sc.OMEGA
    i1 = np.empty(lam0.size)
    i2 = np.empty(lam0.size)
    for lo in range(0, lam0.size, chunk):
        l0 = lam0[lo:lo + chunk, None]
        sp = l0 * sigma  # s in [0, lam0], singular end at lam0
        sn = -l0 * sigma  # s in [-lam0, 0], singular end at -lam0
        g1 = table.g_prime(0, sp)
        g2 = table.g_prime(1, sn)
        # (1/pi) int_0^{-l0} ln(|s - w l0| / |s - l0|) dg2, reversed orientation
        f_a = np.log(np.abs(sn - w0 * l0) / np.abs(sn - l0)) * g2
        # (1/pi) int_0^{l0} ln(|s - l0| / |s - w l0|) dg1
        f_b = np.log(np.abs(sp - l0) / np.abs(sp - w0 * l0)) * g1
        # (1/pi) int_0^{l0} ln(|s + w l0| / |s + l0|) dg1
        f_c = np.log(np.abs(sp + w0 * l0) / np.abs(sp + l0)) * g1
        # (1/pi) int_0^{-l0} ln(|s + l0| / |s + w l0|) dg2, reversed orientation
        f_d = np.log(np.abs(sn + l0) / np.abs(sn + w0 * l0)) * g2
        scale = l0[:, 0] / np.pi
        i1[lo:lo + chunk] = scale * ((f_b - f_a) @ wts)
        i2[lo:lo + chunk] = scale * ((f_c - f_d) @ wts)
    return i1, i2


def _check_range(table: ReflectionTable, lam0: np.ndarray):
    if np.any(lam0 < table.lambda_pos[0]) or np.any(lam0 > table.lambda_pos[-1]):
        raise DomainError("lambda0 outside the positive range of the reflection table")
    if np.any(-lam0 < table.lambda_neg[0]) or np.any(-lam0 > table.lambda_neg[-1]):
        raise DomainError("-lambda0 outside the negative range of the reflection table")


def phase_constants(table: ReflectionTable, lambda0, nu_floor: float = DEFAULT_NU_FLOOR,
                    refine: int = 0) -> PhaseConstants:
    """Phase constants ``s1``, ``s2`` at the stationary point ``lambda0``.

    ``y1 = r1(lambda0)`` and ``y2 = r2(-lambda0)``.  The Stieltjes integrals
    are integrated against ``g'(s)`` from the table interpolant with a
    composite Gauss-Legendre rule graded towards the logarithmic endpoint.
    A constant is returned as 0 and flagged degenerate when its own
    exponent is at most ``nu_floor``.
    """
    lam0 = np.atleast_1d(np.asarray(lambda0, dtype=float))
    if np.any(lam0 <= 0):
        raise DomainError("lambda0 must be positive")
    _check_range(table, lam0)
    y1 = table.r1_at(lam0)
    y2 = table.r2_at(-lam0)
    nu1 = nu_from_r(np.abs(y1))
    nu4 = nu_from_r(np.abs(y2))
    ok1, ok4 = nu1 > nu_floor, nu4 > nu_floor
    s1 = np.zeros(lam0.size)
    s2 = np.zeros(lam0.size)
    live = ok1 | ok4
    if np.any(live):
        i1, i2 = _stieltjes_terms(table, lam0[live], refine=refine)
        a1 = np.angle(y1[live]) + np.imag(log_gamma_complex(-1j * np.maximum(nu1[live], nu_floor)))
        a2 = np.angle(y2[live]) + np.imag(log_gamma_complex(-1j * np.maximum(nu4[live], nu_floor)))
        s1[live] = np.where(ok1[live], -(a1 + nu4[live] * _LN4) + i1, 0.0)
        s2[live] = np.where(ok4[live], -(a2 + nu1[live] * _LN4) + i2, 0.0)
    degenerate = ~(ok1 & ok4)
    if np.ndim(lambda0) == 0:
        return PhaseConstants(float(s1[0]), float(s2[0]), bool(degenerate[0]))
    return PhaseConstants(s1, s2, degenerate)


def phase_constants_adaptive(table: ReflectionTable, lambda0: float,
                             nu_floor: float = DEFAULT_NU_FLOOR) -> PhaseConstants:
    """Cross-check of :func:`phase_constants` by adaptive QUADPACK quadrature.

    Each knot interval of the interpolant is integrated separately; the
    logarithmic endpoint singularities are handled by the algebraic-
    logarithmic weight rule rather than by grading.
    """
    l0 = float(lambda0)
    _check_range(table, np.array([l0]))
    w0 = sc.OMEGA
    y1, y2 = table.r1_at(l0), table.r2_at(-l0)
    nu1, nu4 = nu_from_r(abs(y1)), nu_from_r(abs(y2))
    g1 = lambda s: float(table.g_prime(0, s))  # noqa: E731
    g2 = lambda s: float(table.g_prime(1, s))  # noqa: E731
    kw = dict(limit=200, epsabs=1e-12, epsrel=1e-10)
    # the interpolant is piecewise cubic, so every knot interval is integrated separately
    pos, neg = table.lambda_pos, table.lambda_neg

    def breaks(knots, a, b):
        return np.r_[a, knots[(knots > a) & (knots < b)], b]

    def q(f, knots, a, b):
        br = breaks(knots, a, b)
        return sum(integrate.quad(f, lo, hi, **kw)[0] for lo, hi in zip(br[:-1], br[1:]))

    def q_log(f, knots, a, b, right):
        # int ln|s - end| f ds with end = b (right) or a; the weight rule handles the end piece
        br = breaks(knots, a, b)
        end = b if right else a
        inner = zip(br[:-2], br[1:-1]) if right else zip(br[1:-1], br[2:])
        tot = sum(integrate.quad(lambda s: np.log(abs(s - end)) * f(s), lo, hi, **kw)[0]
                  for lo, hi in inner)
        lo, hi = (br[-2], br[-1]) if right else (br[0], br[1])
        weight = "alg-logb" if right else "alg-loga"
        return tot + integrate.quad(f, lo, hi, weight=weight, wvar=(0.0, 0.0), **kw)[0]

    # int_{-l0}^0 ln(|s - w l0| / |s - l0|) g2 ds (smooth)
    ia = q(lambda s: np.log(abs(s - w0 * l0) / abs(s - l0)) * g2(s), neg, -l0, 0.0)
    ib = q_log(g1, pos, 0.0, l0, right=True)
    ib -= q(lambda s: np.log(abs(s - w0 * l0)) * g1(s), pos, 0.0, l0)
    ic = q(lambda s: np.log(abs(s + w0 * l0) / abs(s + l0)) * g1(s), pos, 0.0, l0)
    idd = q_log(g2, neg, -l0, 0.0, right=False)
    idd -= q(lambda s: np.log(abs(s + w0 * l0)) * g2(s), neg, -l0, 0.0)
    i1 = (ib - ia) / np.pi
    i2 = (ic - idd) / np.pi
    ok1, ok4 = nu1 > nu_floor, nu4 > nu_floor
    s1 = -(np.angle(y1) + np.imag(log_gamma_complex(-1j * max(nu1, nu_floor))) + nu4 * _LN4) + i1
    s2 = -(np.angle(y2) + np.imag(log_gamma_complex(-1j * max(nu4, nu_floor))) + nu1 * _LN4) + i2
    return PhaseConstants(float(s1) if ok1 else 0.0, float(s2) if ok4 else 0.0,
                          not (ok1 and ok4))


@dataclass(frozen=True)
class AsymptoticParams:
    """Inputs of the leading-order waveform at one stationary point."""

    lambda0: float
    nu1: float
    nu4: float
    s1: float
    s2: float
    degenerate: bool = False


def asymptotic_params(table: ReflectionTable, lambda0: float,
                      nu_floor: float = DEFAULT_NU_FLOOR) -> AsymptoticParams:
    lam0 = float(lambda0)
    pc = phase_constants(table, lam0, nu_floor)
    nu1 = nu_from_r(abs(table.r1_at(lam0)))
    nu4 = nu_from_r(abs(table.r2_at(-lam0)))
    return AsymptoticParams(lam0, nu1, nu4, pc.s1, pc.s2, pc.degenerate)


# ---------------------------------------------------------------------------
# waveform


def waveform_from_params(p_lambda0, nu1, nu4, s1, s2, t):
    """Leading-order field from stationary-point data (vectorised)."""
    l0 = np.asarray(p_lambda0, dtype=float)
    phase = 2.0 * sc.SQRT3 * t * l0 / (1.0 + l0 * l0)
    logarg = np.log(3.0 * phase)
    a1 = 5.0 * np.pi / 12.0 - phase - nu1 * logarg + s1
    a4 = 13.0 * np.pi / 12.0 - phase - nu4 * logarg + s2
    amp = 3.0 ** -0.25 * np.sqrt(2.0 * (1.0 + l0 * l0) / (t * l0))
    arg = 1.0 + amp * (np.sqrt(nu1) * np.cos(a1) - np.sqrt(nu4) * np.cos(a4))
    if np.any(arg <= 0):
        raise ValidityError("amplitude exceeds validity: logarithm argument is not positive")
    return np.log(arg)


def u_asymptotic(x, t: float, table: ReflectionTable, inner: float = sc.DEFAULT_INNER,
                 outer: float = sc.DEFAULT_OUTER, nu_floor: float = DEFAULT_NU_FLOOR,
                 refine: int = 0):
    """Leading-order asymptotic field at ``(x, t)``.

    Zero outside the inner sector; inside it the oscillatory waveform built
    from ``nu1, nu4, s1, s2`` at ``lambda0(x, t)``.  Terms whose exponent is
    at most ``nu_floor`` contribute exactly zero.

    Raises
    ------
    ValidityError
        If the logarithm argument is not positive.
    DomainError
        If ``lambda0`` leaves the table range.
    """
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    t = float(t)
    sectors = sc.classify_sectors(x, t, inner, outer)
    out = np.zeros(x.size)
    idx = np.nonzero(sectors == "IV")[0]
    if idx.size:
        l0 = np.asarray(sc.critical_lambda0(x[idx], t), dtype=float).reshape(-1)
        _check_range(table, l0)
        nu1 = nu_from_r(np.abs(table.r1_at(l0)))
        nu4 = nu_from_r(np.abs(table.r2_at(-l0)))
        nu1 = np.where(nu1 > nu_floor, nu1, 0.0)
        nu4 = np.where(nu4 > nu_floor, nu4, 0.0)
        live = (nu1 > 0) | (nu4 > 0)
        if np.any(live):
            li = l0[live]
            pc = phase_constants(table, li, nu_floor, refine=refine)
            out[idx[live]] = waveform_from_params(li, nu1[live], nu4[live], pc.s1, pc.s2, t)
    return float(out[0]) if scalar else out


def write_asymptotic_curve(path, x, t: float, table: ReflectionTable,
                           inner: float = sc.DEFAULT_INNER, outer: float = sc.DEFAULT_OUTER,
                           nu_floor: float = DEFAULT_NU_FLOOR) -> Path:
    """Evaluate and write ``x,t,sector,u_asym``; points exactly on the cone are skipped."""
    x = np.asarray(x, dtype=float)
    x = x[np.abs(x) != t]
    u = u_asymptotic(x, t, table, inner, outer, nu_floor)
    sectors = sc.classify_sectors(x, t, inner, outer)
    return write_csv(path, ["x", "t", "sector", "u_asym"],
                     [x, np.full(x.size, float(t)), list(sectors), u])
