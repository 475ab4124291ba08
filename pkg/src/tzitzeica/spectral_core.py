"""Algebraic skeleton of the 3x3 Lax pair.

Constant matrices, eigen-exponents, the phase function, the gauge matrix,
the stationary point of the phase and the sector classification.  Every
matrix builder broadcasts over array arguments and returns arrays with a
trailing ``(3, 3)`` shape.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

OMEGA = np.exp(2j * np.pi / 3)
OMEGA2 = OMEGA * OMEGA
SQRT3 = np.sqrt(3.0)

#: J = diag(omega, omega^2, 1)
J = np.diag([OMEGA, OMEGA2, 1.0 + 0j])
J2 = np.diag([OMEGA2, OMEGA, 1.0 + 0j])  # J @ J, with omega^4 written as omega

#: cyclic symmetry operator: L(lambda) = A^{-1} L(omega lambda) A
A_MAT = np.array([[0, 1, 0], [0, 0, 1], [1, 0, 0]], dtype=complex)
#: reflection symmetry operator: L(lambda) = B conj(L(conj lambda)) B^{-1}
B_MAT = np.array([[0, 1, 0], [1, 0, 0], [0, 0, 1]], dtype=complex)

_U0_PATTERN = np.array([[0, 1, -1], [-1, 0, 1], [1, -1, 0]], dtype=float)
_OMEGA_POW = OMEGA ** np.arange(1, 4)


def check_finite(m, name: str = "matrix") -> np.ndarray:
    """Return ``m`` as a complex array after asserting all entries are finite."""
    m = np.asarray(m, dtype=complex)
    if not np.all(np.isfinite(m)):
        raise DomainError(f"{name} has non-finite entries")
    return m


def _nonzero(lam):
    lam = np.asarray(lam, dtype=complex)
    if np.any(lam == 0):
        raise DomainError("spectral parameter at essential singularity (lambda = 0)")
    return lam


@dataclass(frozen=True)
class EigenExponents:
    """Spatial and temporal exponents of the free problem.

    Attributes
    ----------
    l, z : ndarray, shape (3,)
        ``l_j = (w^j lam + (w^j lam)^-1)/2`` and
        ``z_j = (w^j lam - (w^j lam)^-1)/2`` for ``j = 1, 2, 3``.
    lam : complex
        Spectral parameter.
    """

    l: np.ndarray
    z: np.ndarray
    lam: complex


def exponents_l(lam) -> np.ndarray:
    """Vectorised ``l_j``; returns shape ``lam.shape + (3,)``."""
    lam = _nonzero(lam)
    k = _OMEGA_POW * lam[..., None]
    return 0.5 * (k + 1.0 / k)


def exponents_z(lam) -> np.ndarray:
    """Vectorised ``z_j``; returns shape ``lam.shape + (3,)``."""
    lam = _nonzero(lam)
    k = _OMEGA_POW * lam[..., None]
    return 0.5 * (k - 1.0 / k)


def eigen_exponents(lam: complex) -> EigenExponents:
    """Eigen-exponents ``l_j``, ``z_j`` of the zero-potential Lax pair.

    Raises
    ------
    DomainError
        If ``lam == 0``.
    """
    lam = complex(lam)
    return EigenExponents(l=exponents_l(lam), z=exponents_z(lam), lam=lam)


def build_U0(w) -> np.ndarray:
    """``U0 = i*sqrt(3)*w/6 * [[0,1,-1],[-1,0,1],[1,-1,0]]`` with ``w = u_x + u_t``."""
    w = np.asarray(w, dtype=float)
    return (1j * SQRT3 / 6.0) * w[..., None, None] * _U0_PATTERN


def build_U1(u) -> np.ndarray:
    """Potential matrix built from ``a = 2e^u + e^-2u`` and ``b = e^-2u - e^u``."""
    u = np.asarray(u, dtype=float)
    eu = np.exp(u)
    em2u = np.exp(-2.0 * u)
    a = (2.0 * eu + em2u)[..., None, None]
    b = (em2u - eu)[..., None, None]
    diag = np.array([[OMEGA2, 0, 0], [0, OMEGA, 0], [0, 0, 1]])
    off = np.array([[0, 1, OMEGA], [1, 0, OMEGA2], [OMEGA, OMEGA2, 0]])
    return (a / 6.0) * diag + (b / 6.0) * off


def build_L1(u, w, lam) -> np.ndarray:
    """Perturbation ``L1 = U0 + (U1 - J^2/2)/lam``, so that ``L = lam J/2 + L1 + J^2/(2 lam)``."""
    lam = _nonzero(lam)
    return build_U0(w) + (build_U1(u) - 0.5 * J2) / lam[..., None, None]


def free_L(lam) -> np.ndarray:
    """Zero-potential matrix ``diag(l_1, l_2, l_3)``."""
    l = exponents_l(lam)
    return l[..., :, None] * np.eye(3)


def lax_L(u, w, lam) -> np.ndarray:
    """Full spatial Lax matrix ``lam J/2 + U0 + U1/lam``."""
    lam = _nonzero(lam)
    return 0.5 * lam[..., None, None] * J + build_U0(w) + build_U1(u) / lam[..., None, None]


def gauge_G(u) -> np.ndarray:
    """Gauge matrix with eigen-row ``(w, w^2, 1) G = e^u (w, w^2, 1)``."""
    u = np.asarray(u, dtype=float)
    eu = np.exp(u)
    pref = (1.0 + eu + eu * eu) / (3.0 * eu)
    p = OMEGA * (eu - 1.0) / (eu - OMEGA2)
    q = OMEGA2 * (eu - 1.0) / (eu - OMEGA)
    one = np.ones_like(p)
    g = np.stack(
        [np.stack([one, p, q], -1), np.stack([q, one, p], -1), np.stack([p, q, one], -1)], -2
    )
    return pref[..., None, None] * g


def phase_theta21(lam, x, t):
    """``theta_21 = (l_2 - l_1) x + (z_2 - z_1) t``.

    Equals ``(w^2 - w)/2 * [(lam - 1/lam) x + (lam + 1/lam) t]``; purely
    imaginary for real ``lam``.
    """
    lam = _nonzero(lam)
    c = 0.5 * (OMEGA2 - OMEGA)
    out = c * ((lam - 1.0 / lam) * x + (lam + 1.0 / lam) * t)
    return out if out.ndim else complex(out)


def critical_lambda0(x, t):
    """Positive stationary point ``sqrt(|x - t| / |x + t|)`` of ``theta_21``.

    Raises
    ------
    DomainError
        If ``t <= 0`` or ``|x| == t``.
    """
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise DomainError("time must be positive")
    if np.any(np.abs(x) == t):
        raise DomainError("light-cone boundary; lambda0 degenerates to 0 or infinity")
    out = np.sqrt(np.abs(x - t) / np.abs(x + t))
    return out if out.ndim else float(out)


class Sector(str, enum.Enum):
    """Asymptotic sector of the (x, t) half-plane."""

    I = "I"
    II = "II"
    III = "III"
    IV = "IV"


DEFAULT_INNER = 0.85
DEFAULT_OUTER = 3.0


def _check_thresholds(inner, outer):
    if not (0.0 < inner < 1.0 <= outer):
        raise DomainError(f"need 0 < inner < 1 <= outer, got inner={inner}, outer={outer}")


def classify_sector(x: float, t: float, inner: float = DEFAULT_INNER,
                    outer: float = DEFAULT_OUTER) -> Sector:
    """Sector label: IV for ``|x/t| <= inner``, III up to the cone, II up to ``outer``, else I."""
    _check_thresholds(inner, outer)
    if t <= 0:
        raise DomainError("time must be positive")
    r = abs(x / t)
    if r <= inner:
        return Sector.IV
    if r < 1.0:
        return Sector.III
    if r <= outer:
        return Sector.II
    return Sector.I


def classify_sectors(x, t: float, inner: float = DEFAULT_INNER,
                     outer: float = DEFAULT_OUTER) -> np.ndarray:
    """Vectorised :func:`classify_sector`; returns an array of labels ``'I'..'IV'``."""
    _check_thresholds(inner, outer)
    if t <= 0:
        raise DomainError("time must be positive")
    r = np.abs(np.asarray(x, dtype=float) / t)
    return np.select(
        [r <= inner, r < 1.0, r <= outer], ["IV", "III", "II"], default="I"
    ).astype(object)
