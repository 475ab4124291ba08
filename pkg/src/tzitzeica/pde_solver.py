"""Explicit leapfrog integration of ``u_tt - u_xx = e^{-2u} - e^u``.

Second-order centred differences in space and time on ``[-L, L]`` with
homogeneous Dirichlet ends.  The half-width is sized so that, by finite
propagation speed, nothing reaches the ends before ``t_max``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .csvio import write_csv
from .errors import DomainError, StabilityError


def forcing(u):
    """``e^{-2u} - e^u``."""
    return np.exp(-2.0 * u) - np.exp(u)


def potential(u):
    """``V(u) = e^u + e^{-2u}/2 - 3/2``; ``V >= 0`` with equality only at 0."""
    return np.exp(u) + 0.5 * np.exp(-2.0 * u) - 1.5


def potential_dd(u):
    """``V''(u) = e^u + 2 e^{-2u}``."""
    return np.exp(u) + 2.0 * np.exp(-2.0 * u)


@dataclass(frozen=True)
class PDEConfig:
    """Resolution and domain sizing.

    Attributes
    ----------
    dx : float
        Grid spacing.
    cfl_safety : float
        ``dt = cfl_safety * dx`` unless ``dt`` is given; an explicit ``dt``
        above ``cfl_safety * dx`` is rejected.
    t_max : float
        Latest time the run must support.
    support_radius, margin : float
        Default half-width is ``t_max + support_radius + margin``.
    half_width : float, optional
        Explicit half-width; must not be smaller than the default.
    blowup_guard : float
        Largest admissible ``|u|``.
    """

    dx: float = 0.02
    cfl_safety: float = 0.9
    dt: float | None = None
    t_max: float = 50.0
    support_radius: float = 12.0
    margin: float = 5.0
    half_width: float | None = None
    blowup_guard: float = 50.0

    @property
    def time_step(self) -> float:
        return self.cfl_safety * self.dx if self.dt is None else float(self.dt)

    @property
    def required_half_width(self) -> float:
        return self.t_max + self.support_radius + self.margin


@dataclass(frozen=True, eq=False)
class FieldState:
    """Two consecutive time levels on a uniform grid.

    ``t = t0 + n dt`` is kept as an integer step count so that long runs do
    not accumulate rounding in the clock.
    """

    x: np.ndarray
    u: np.ndarray
    u_prev: np.ndarray
    dt: float
    dx: float
    n: int = 0
    t0: float = 0.0
    blowup_guard: float = 50.0

    @property
    def t(self) -> float:
        return self.t0 + self.n * self.dt

    def reversed(self) -> "FieldState":
        """State whose next step goes back in time (levels swapped)."""
        return replace(self, u=self.u_prev, u_prev=self.u, n=0, t0=self.t)


def _laplacian(u: np.ndarray, dx: float) -> np.ndarray:
    d = np.zeros_like(u)
    d[1:-1] = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / (dx * dx)
    return d


def make_grid(config: PDEConfig) -> np.ndarray:
    L = config.half_width if config.half_width is not None else config.required_half_width
    n = int(math.ceil(L / config.dx - 1e-9))
    return config.dx * np.arange(-n, n + 1, dtype=float)


def init_state(config: PDEConfig, u0_fn: Callable, u1_fn: Callable) -> FieldState:
    """Sample the Cauchy data and build the previous level by a Taylor start.

    ``u(-dt) = u0 - dt u1 + dt^2/2 (u0_xx + e^{-2 u0} - e^{u0})``.

    Raises
    ------
    DomainError
        On a CFL violation or a domain too small for ``t_max``.
    """
    dx, dt = float(config.dx), float(config.time_step)
    if not dx > 0:
        raise DomainError("dx must be positive")
    if not 0 < config.cfl_safety <= 1:
        raise DomainError("cfl_safety must lie in (0, 1]")
    if not 0 < dt <= config.cfl_safety * dx * (1 + 1e-12):
        raise DomainError(f"CFL violation: dt = {dt} exceeds {config.cfl_safety} * dx")
    if config.half_width is not None and config.half_width < config.required_half_width:
        raise DomainError(
            f"domain half-width {config.half_width} too small for t_max = {config.t_max} "
            f"(need >= {config.required_half_width})"
        )
    x = make_grid(config)
    u0 = np.asarray(u0_fn(x), dtype=float) * np.ones_like(x)
    u1 = np.asarray(u1_fn(x), dtype=float) * np.ones_like(x)
    u0[0] = u0[-1] = 0.0
    u1[0] = u1[-1] = 0.0
    u_prev = u0 - dt * u1 + 0.5 * dt * dt * (_laplacian(u0, dx) + forcing(u0))
    u_prev[0] = u_prev[-1] = 0.0
    state = FieldState(x, u0, u_prev, dt, dx, 0, 0.0, config.blowup_guard)
    _check(state.u, state)
    return state


def _advance(state: FieldState) -> np.ndarray:
    u = state.u
    nxt = 2.0 * u - state.u_prev + state.dt ** 2 * (_laplacian(u, state.dx) + forcing(u))
    nxt[0] = nxt[-1] = 0.0
    return nxt


def _check(u: np.ndarray, state: FieldState):
    bad = ~np.isfinite(u) | (np.abs(u) > state.blowup_guard)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise StabilityError(
            f"field left the admissible range near t = {state.t:.6g}, x = {state.x[i]:.6g} "
            f"(|u| = {abs(u[i]):.3g}, guard {state.blowup_guard})"
        )


def step(state: FieldState) -> FieldState:
    """Advance one leapfrog step.

    Raises
    ------
    StabilityError
        If the new level is non-finite or exceeds the blow-up guard.
    """
    nxt = _advance(state)
    new = replace(state, u=nxt, u_prev=state.u, n=state.n + 1)
    _check(nxt, new)
    return new


def time_derivative(state: FieldState) -> np.ndarray:
    """Centred ``u_t`` at the current level."""
    return (_advance(state) - state.u_prev) / (2.0 * state.dt)


@dataclass(frozen=True)
class EnergyReport:
    """Conserved energy of the scheme.

    ``energy`` includes the ``O(dt^2)`` correction that makes it a conserved
    quantity of the leapfrog map to ``O(dt^4)``; ``plain_energy`` is the
    uncorrected discrete energy.
    """

    t: float
    energy: float
    drift_rel: float
    plain_energy: float


def energy(state: FieldState, reference: float | None = None) -> EnergyReport:
    """Discrete energy at the current level.

    ``H = dx sum(p^2/2 + V(u)) + dx sum((D+ u)^2 / 2)`` with ``p`` the centred
    time difference and ``D+`` the difference across each cell.  The reported
    ``energy`` is ``H - dt^2 c`` with the modified-equation correction
    ``c = dx sum(F^2)/24 - dx sum((D+ p)^2 + V''(u) p^2)/12`` and
    ``F = -u_xx - f(u)``.

    Parameters
    ----------
    reference : float, optional
        Energy at the start of the run; defaults to this state's own energy
        (drift 0).
    """
    dx, dt = state.dx, state.dt
    u = state.u
    p = time_derivative(state)
    plain = dx * np.sum(0.5 * p * p + potential(u)) + 0.5 * dx * np.sum((np.diff(u) / dx) ** 2)
    F = -_laplacian(u, dx) - forcing(u)
    F[0] = F[-1] = 0.0
    c = dx * np.sum(F * F) / 24.0 - (
        dx * np.sum((np.diff(p) / dx) ** 2) + dx * np.sum(potential_dd(u) * p * p)
    ) / 12.0
    e = float(plain - dt * dt * c)
    ref = e if reference is None else float(reference)
    drift = abs(e - ref) / max(abs(ref), np.finfo(float).tiny)
    return EnergyReport(state.t, e, float(drift), float(plain))


@dataclass(frozen=True, eq=False)
class Snapshot:
    """Field at the grid time nearest to a requested time."""

    t_requested: float
    t: float
    x: np.ndarray
    u: np.ndarray
    ut: np.ndarray

    def to_csv(self, directory) -> Path:
        return write_csv(Path(directory) / snapshot_name(self.t_requested), ["x", "u", "ut"],
                         [self.x, self.u, self.ut])


def snapshot_name(t: float) -> str:
    return f"field_t{t:g}.csv"


def _steps_to(state: FieldState, t: float) -> int:
    return state.n + int(round((t - state.t) / state.dt))


def run_until(state: FieldState, t_target: float, snapshot_times: Sequence[float] = (),
              energy_every: int = 0):
    """Step to the grid time nearest ``t_target``, recording snapshots.

    Parameters
    ----------
    snapshot_times : requested times in ``[state.t, t_target]``; each is taken
        at the nearest grid time, which is recorded exactly.
    energy_every : if positive, also return an energy report every that many
        steps (drift relative to the initial state).

    Returns
    -------
    state : FieldState
    snapshots : list of Snapshot, in the order requested
    energies : list of EnergyReport (only if ``energy_every > 0``)
    """
    if t_target < state.t - 0.5 * state.dt:
        raise DomainError("t_target precedes the current time")
    for ts in snapshot_times:
        if not state.t - 0.5 * state.dt <= ts <= t_target + 0.5 * state.dt:
            raise DomainError(f"snapshot time {ts} outside [{state.t}, {t_target}]")
    n_end = _steps_to(state, t_target)
    wanted = {}
    for i, ts in enumerate(snapshot_times):
        wanted.setdefault(_steps_to(state, ts), []).append(i)
    snaps: list = [None] * len(snapshot_times)
    energies = []
    e0 = energy(state).energy if energy_every > 0 else None
    n_start = state.n

    def record(s):
        for i in wanted.get(s.n, ()):
            snaps[i] = Snapshot(float(snapshot_times[i]), s.t, s.x, s.u.copy(),
                                time_derivative(s))
        if energy_every > 0 and (s.n - n_start) % energy_every == 0:
            energies.append(energy(s, e0))

    record(state)
    while state.n < n_end:
        state = step(state)
        record(state)
    if energy_every > 0:
        return state, snaps, energies
    return state, snaps
