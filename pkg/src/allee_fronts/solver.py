"""Explicit monotone finite differences for ``u_t = u_xx + f(u)`` on a growing domain.

Forward Euler in time with centred second differences in space is monotone
as long as ``dt <= dx**2 / 2`` (and ``dt * Lip(f)`` stays small), so the
discrete solution inherits the comparison principle.  The left end is held
at the plateau value; the right end follows the reaction-only ODE
``du/dt = f(u)``.  When the far field starts to move, the domain grows
rightward by a fixed fraction, and the new nodes are filled with the datum
advanced by that same ODE.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError, DomainError, NumericalStabilityError, ResourceError
from .levelsets import LevelTrajectory, extract_level
from .model import NonlinearityModel

log = logging.getLogger(__name__)

_ROUNDING = 1e-12


@dataclass(frozen=True)
class SolverConfig:
    dx: float = 0.25
    cfl: float = 0.4
    t_end: float = 10.0
    snapshot_dt: float = 1.0
    keep_every: int = 1
    margin: float = 50.0
    left_pad: float = 50.0
    trigger_frac: float = 0.2
    trigger_ratio: float = 2.0
    trigger_floor: float = 1e-12
    growth: float = 0.5
    max_nodes: int = 20_000_000
    left_bc: str = "dirichlet"
    right_bc: str = "reaction"
    invasion_level: float = 0.9

    def __post_init__(self):
        if self.dx <= 0:
            raise ConfigError("solver.dx must be positive")
        if not 0 < self.cfl <= 0.5:
            raise ConfigError("solver.cfl must lie in (0, 0.5] for the explicit scheme to be monotone")
        if self.t_end < 0:
            raise ConfigError("solver.t_end must be non-negative")
        if self.snapshot_dt <= 0:
            raise ConfigError("solver.snapshot_dt must be positive")
        if self.keep_every < 0:
            raise ConfigError("solver.keep_every must be >= 0")
        if self.margin <= 0 or self.left_pad < 50:
            raise ConfigError("solver.margin must be positive and solver.left_pad >= 50")
        if not 0 < self.trigger_frac < 1 or self.growth <= 0 or self.trigger_ratio <= 1:
            raise ConfigError("invalid expansion trigger settings")
        if self.left_bc != "dirichlet" or self.right_bc != "reaction":
            raise ConfigError("supported boundary policies: left_bc='dirichlet', right_bc='reaction'")

    @property
    def dt(self) -> float:
        """Largest step <= ``cfl*dx**2`` that divides ``snapshot_dt`` evenly."""
        per = math.ceil(self.snapshot_dt / (self.cfl * self.dx**2) - 1e-9)
        return self.snapshot_dt / per

    @property
    def steps_per_snapshot(self) -> int:
        return math.ceil(self.snapshot_dt / (self.cfl * self.dx**2) - 1e-9)


@dataclass(frozen=True)
class GridState:
    t: float
    dx: float
    x_left: float
    values: np.ndarray
    steps: int = 0

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def x_right(self) -> float:
        return self.x_left + (self.n - 1) * self.dx

    @property
    def x(self) -> np.ndarray:
        return self.x_left + self.dx * np.arange(self.n)


@dataclass
class RunResult:
    snapshots: list[GridState]
    trajectories: dict[float, LevelTrajectory]
    times: np.ndarray
    invasion_speed: float | None
    expansions: int = 0
    final: GridState | None = None
    front_positions: np.ndarray = field(default_factory=lambda: np.empty(0))

    def trajectory(self, lam: float) -> LevelTrajectory:
        return self.trajectories[lam]


def grid_nodes(x_left: float, x_right: float, dx: float) -> int:
    """Node count of a uniform grid covering ``[x_left, x_right]`` (both ends included)."""
    return int(math.ceil((x_right - x_left) / dx - 1e-9)) + 1


def init_grid(profile, config: SolverConfig) -> GridState:
    """Sample the datum on ``[x_glue - left_pad, x0 + margin]``."""
    x_left = profile.x_glue - config.left_pad
    x_right = profile.x0 + config.margin
    if not x_left < profile.x_glue < profile.x0 < x_right:
        raise ConfigError("domain too small to contain the glue region")
    n = grid_nodes(x_left, x_right, config.dx)
    x = x_left + config.dx * np.arange(n)
    return GridState(t=0.0, dx=config.dx, x_left=x_left, values=np.asarray(profile(x), dtype=float))


def _check_range(u: np.ndarray, t: float) -> None:
    lo, hi = float(u.min()), float(u.max())
    if lo < -_ROUNDING or hi > 1 + _ROUNDING:
        i = int(np.argmin(u)) if lo < -_ROUNDING else int(np.argmax(u))
        raise NumericalStabilityError(
            f"discrete maximum principle violated at t={t:.6g}: u[{i}] = {u[i]:.17g}",
            {"t": t, "index": i, "value": float(u[i]), "min": lo, "max": hi},
        )
    if lo < 0 or hi > 1:
        np.clip(u, 0.0, 1.0, out=u)


def _advance(u: np.ndarray, mu: float, dt: float, model: NonlinearityModel) -> np.ndarray:
    new = np.empty_like(u)
    reac = model.rate(u)
    new[1:-1] = u[1:-1] + mu * (u[:-2] - 2.0 * u[1:-1] + u[2:]) + dt * reac[1:-1]
    new[0] = u[0]
    new[-1] = u[-1] + dt * reac[-1]
    return new


def step(state: GridState, model: NonlinearityModel, config: SolverConfig) -> GridState:
    """One forward-Euler step; raises on a discrete maximum-principle violation."""
    dt = config.dt
    mu = dt / state.dx**2
    new = _advance(state.values, mu, dt, model)
    t = (state.steps + 1) * dt
    _check_range(new, t)
    return replace(state, t=t, values=new, steps=state.steps + 1)


def reaction_flow(u: np.ndarray, model: NonlinearityModel, dt: float, steps: int) -> np.ndarray:
    """Forward-Euler ``du/dt = f(u)`` for ``steps`` steps (same map as the right end)."""
    u = np.array(u, dtype=float)
    for _ in range(steps):
        u = u + dt * model.rate(u)
    return u


def _maybe_expand(u, x_left, steps, profile, model, config, dt):
    n = len(u)
    idx = n - 1 - int(round(config.trigger_frac * (n - 1)))
    x_probe = x_left + idx * config.dx
    ref = float(profile(x_probe))
    if u[idx] <= max(config.trigger_ratio * ref, config.trigger_floor):
        return None
    extra = max(1, int(math.ceil(config.growth * (n - 1))))
    if n + extra > config.max_nodes:
        raise ResourceError(
            f"domain expansion to {n + extra} nodes exceeds the cap of {config.max_nodes}")
    x_new = x_left + config.dx * np.arange(n, n + extra)
    fill = reaction_flow(profile(x_new), model, dt, steps)
    _check_range(fill, steps * dt)
    return np.concatenate([u, fill])


def _invasion_front(state: GridState, level: float) -> float:
    below = np.flatnonzero(state.values < level)
    if below.size == 0:
        return state.x_right
    return state.x_left + below[0] * state.dx


def run(profile, model: NonlinearityModel, config: SolverConfig, lambdas=(0.5,)) -> RunResult:
    """Integrate to ``t_end`` recording level trajectories at every snapshot."""
    lambdas = tuple(float(lam) for lam in lambdas)
    for lam in lambdas:
        if not 0 < lam < 1:
            raise DomainError(f"levels must lie in (0, 1), got {lam}")
    state = init_grid(profile, config)
    dt = config.dt
    mu = dt / config.dx**2
    per = config.steps_per_snapshot
    total = int(math.ceil(config.t_end / dt - 1e-9)) if config.t_end > 0 else 0

    times, fronts = [], []
    samples = {lam: [] for lam in lambdas}
    kept: list[GridState] = []
    snap_index = 0

    def record(st: GridState, force_keep: bool = False):
        nonlocal snap_index
        times.append(st.t)
        fronts.append(_invasion_front(st, config.invasion_level))
        for lam in lambdas:
            crossing = extract_level(st, lam)
            samples[lam].append((st.t, *(crossing if crossing else (np.nan, np.nan))))
        if force_keep or (config.keep_every and snap_index % config.keep_every == 0):
            kept.append(st)
        snap_index += 1

    record(state, force_keep=True)
    u, x_left = state.values, state.x_left
    expansions = 0
    for k in range(1, total + 1):
        u = _advance(u, mu, dt, model)
        t = k * dt
        _check_range(u, t)
        grown = _maybe_expand(u, x_left, k, profile, model, config, dt)
        if grown is not None:
            expansions += 1
            log.debug("t=%.4g: domain grown to %d nodes", t, len(grown))
            u = grown
        if k % per == 0 or k == total:
            st = GridState(t=t, dx=config.dx, x_left=x_left, values=u, steps=k)
            record(st, force_keep=(k == total))
    final = GridState(t=total * dt, dx=config.dx, x_left=x_left, values=u, steps=total)
    if kept[-1].steps != total:
        kept.append(final)

    times_arr = np.asarray(times)
    trajectories = {
        lam: LevelTrajectory.from_samples(lam, samples[lam]) for lam in lambdas
    }
    return RunResult(
        snapshots=kept,
        trajectories=trajectories,
        times=times_arr,
        invasion_speed=_invasion_speed(times_arr, np.asarray(fronts)),
        expansions=expansions,
        final=final,
        front_positions=np.asarray(fronts),
    )


def _invasion_speed(times: np.ndarray, fronts: np.ndarray) -> float | None:
    """Largest ``v`` with ``v t`` behind the invaded region over the final third."""
    if times.size < 3 or times[-1] <= 0:
        return None
    sel = times >= times[-1] * 2.0 / 3.0
    sel &= times > 0
    if not np.any(sel):
        return None
    v = float(np.min(fronts[sel] / times[sel]))
    return max(v, 0.0)
