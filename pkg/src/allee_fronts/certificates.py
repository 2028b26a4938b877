"""Residual scans certifying the explicit sub- and supersolutions.

Every derivative is analytic.  For ``w`` solving ``w_t = rho w**beta`` from
``u0`` one has ``w_x = u0' (w/u0)**beta`` and hence
``w_xx = g w**beta + beta h w**(2 beta - 1)`` with the tail coefficients
``g, h`` of :func:`allee_fronts.theory.tail_coeffs_gh`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DomainError
from .model import InitialProfile, NonlinearityModel
from .theory import (
    BumpConstants,
    blowup_horizon,
    classify_regime,
    tail_coeffs_gh,
    w_from_data,
    y_theta,
)

SUPER_TW_TOL = 1e-12
BUMP_TOL = 1e-10
GLOBAL_TOL = 1e-10
SCAN_X_MAX = 1e6

# samples past the blow-up horizon carry inf and are masked out afterwards
_quiet = np.errstate(invalid="ignore", over="ignore")


@dataclass
class ResidualReport:
    construction: str
    samples: dict
    max_residual: float
    location: dict
    tolerance: float
    passed: bool
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "construction": self.construction,
            "samples": self.samples,
            "max_residual": self.max_residual,
            "location": self.location,
            "tolerance": self.tolerance,
            "pass": self.passed,
            **({"extra": self.extra} if self.extra else {}),
        }


def traveling_residual(z, K: float, c: float, model: NonlinearityModel):
    """``w'' + c w' + f(w)`` for ``w = K/z**p``, ``p = 1/(beta-1)``."""
    p = 1.0 / (model.beta - 1.0)
    z = np.asarray(z, dtype=float)
    w = K / z**p
    return p * (p + 1) * K / z ** (p + 2) - c * p * K / z ** (p + 1) + model.rate(w)


def check_traveling_supersolution(K: float, c: float, model: NonlinearityModel,
                                  z_range: tuple[float, float] | None = None,
                                  n: int = 10_000) -> ResidualReport:
    """Scan the travelling-wave supersolution inequality on a log grid."""
    if not model.beta > 1:
        raise DomainError("beta must exceed 1")
    p = 1.0 / (model.beta - 1.0)
    z0 = K ** (1.0 / p)
    lo, hi = (z0, SCAN_X_MAX) if z_range is None else z_range
    if lo < z0 * (1 - 1e-12):
        raise DomainError(f"scan starts at z = {lo:g}, below z0 = {z0:g}")
    z = np.logspace(math.log10(lo), math.log10(hi), n)
    res = traveling_residual(z, K, c, model)
    i = int(np.argmax(res))
    return ResidualReport(
        construction="traveling_supersolution",
        samples={"z_min": lo, "z_max": hi, "count": n, "spacing": "log"},
        max_residual=float(res[i]),
        location={"z": float(z[i])},
        tolerance=SUPER_TW_TOL,
        passed=bool(res[i] <= SUPER_TW_TOL),
        extra={"K": K, "c": c, "p": p, "z0": z0},
    )


@dataclass(frozen=True)
class SampleSpec:
    n_t: int = 120
    n_x: int = 120
    t_min: float = 1e-2
    t_max: float | None = None
    x_max: float = SCAN_X_MAX
    n_left: int = 400


def _grid(lo, hi, n_t, n_x, t_lo, t_hi):
    x = np.logspace(math.log10(lo), math.log10(hi), n_x)
    t = np.logspace(math.log10(t_lo), math.log10(t_hi), n_t)
    return np.meshgrid(t, x, indexing="ij")


@_quiet
def bump_residual(c: BumpConstants, model: NonlinearityModel, profile: InitialProfile, t, x):
    """``L v = v_t - v_xx - f(v)`` for ``v = w - A w**(1+delta)`` (where positive)."""
    beta, d, A, rho = c.beta, c.delta_eff, c.A, c.rho
    u0 = profile(x)
    w = w_from_data(u0, rho, beta, t)
    g, h = tail_coeffs_gh(profile, beta, x)
    v = w - A * w ** (1 + d)
    dphi = 1 - A * (1 + d) * w**d
    d2phi = -A * (1 + d) * d * w ** (d - 1)
    wt = rho * w**beta
    wxx = g * w**beta + beta * h * w ** (2 * beta - 1)
    wx2 = h * w ** (2 * beta)
    lv = dphi * wt - (dphi * wxx + d2phi * wx2) - model.rate(np.clip(v, 0.0, 1.0))
    return lv, v, w, g, h


@_quiet
def check_bump_subsolution(constants: BumpConstants, model: NonlinearityModel,
                           profile: InitialProfile, sample_spec: SampleSpec | None = None
                           ) -> ResidualReport:
    """Certify that ``max(0, w - A w**(1+delta))`` is a subsolution."""
    spec = sample_spec or SampleSpec()
    c = constants
    beta, d, A = c.beta, c.delta_eff, c.A
    t_max = spec.t_max
    if t_max is None:
        t_max = float(blowup_horizon(profile(spec.x_max), c.rho, beta))
    T, X = _grid(c.x1, spec.x_max, spec.n_t, spec.n_x, spec.t_min, t_max)
    lv, v, w, g, h = bump_residual(c, model, profile, T, X)
    alive = (T < blowup_horizon(profile(X), c.rho, beta)) & (v > 0) & (w < 1)
    if not np.any(alive):
        raise DomainError("no samples with a positive bump; widen the sample spec")

    # nothing may be positive left of x1
    xl = np.linspace(profile.x_glue, c.x1, spec.n_left, endpoint=False)
    tl = np.logspace(math.log10(spec.t_min), math.log10(t_max), spec.n_t)
    TL, XL = np.meshgrid(tl, xl, indexing="ij")
    wl = w_from_data(profile(XL), c.rho, beta, TL)
    vl = np.where(np.isfinite(wl), wl - A * wl ** (1 + d), 0.0)
    left_bad = int(np.count_nonzero(vl > 0))

    res = np.where(alive, lv, -np.inf)
    i = np.unravel_index(int(np.argmax(res)), res.shape)
    max_res = float(res[i])

    ag, ah = np.abs(g[alive]), np.abs(h[alive])
    r, rho = c.r_eff, c.rho
    first = rho - r + ag + beta * ah
    second = A * (1 + d) * (-rho + r * beta / (1 + d) + ag + (d + beta) * ah) + r
    chain_ok = bool(np.all(first <= (rho - r) / 2 + 1e-15) and np.all(second <= 1e-12))
    passed = max_res <= BUMP_TOL and left_bad == 0
    return ResidualReport(
        construction="bump_subsolution",
        samples={"t_min": spec.t_min, "t_max": t_max, "x_min": c.x1, "x_max": spec.x_max,
                 "grid": [spec.n_t, spec.n_x], "active": int(alive.sum()), "spacing": "log"},
        max_residual=max_res,
        location={"t": float(T[i]), "x": float(X[i])},
        tolerance=BUMP_TOL,
        passed=passed,
        extra={
            "left_of_x1_violations": left_bad,
            "first_bracket_max": float(first.max()),
            "second_bracket_max": float(second.max()),
            "chain_ok": chain_ok,
        },
    )


@dataclass(frozen=True)
class GlobalSuperSetup:
    x0: float
    C_bar: float
    rho: float
    adjusted: bool


def global_super_setup(profile: InitialProfile, model: NonlinearityModel, epsilon: float,
                       x0: float | None = None, C_bar: float | None = None) -> GlobalSuperSetup:
    """Enlarge ``x0`` until the far-field bound holds, then set ``C_bar = x0**alpha``."""
    if profile.tail_kind != "algebraic":
        raise ConfigError("the global supersolution needs an algebraic tail")
    alpha, beta = profile.alpha, model.beta
    if classify_regime(alpha, beta).regime != "acceleration":
        raise ConfigError("the global supersolution needs beta < 1 + 1/alpha")
    if not epsilon > 0:
        raise ConfigError("epsilon must be positive")
    x0 = profile.x0 if x0 is None else float(x0)
    C_bar = profile.C_bar if C_bar is None else float(C_bar)
    need = math.sqrt(alpha * (alpha + 1 + 2 * beta * alpha) / (epsilon / 2))
    new_x0 = max(x0, need)
    if C_bar / new_x0**alpha >= 1:
        new_x0 = C_bar ** (1 / alpha) * (1 + 1e-9)
    new_C = new_x0**alpha
    return GlobalSuperSetup(x0=new_x0, C_bar=new_C, rho=model.upper_rate + epsilon / 2,
                            adjusted=(new_x0 != x0 or new_C != C_bar))


def global_profile(setup: GlobalSuperSetup, alpha: float) -> InitialProfile:
    return InitialProfile("algebraic", C=setup.C_bar, alpha=alpha, x0=setup.x0)


@_quiet
def global_residual(setup: GlobalSuperSetup, alpha: float, model: NonlinearityModel, t, x):
    """``w_t - w_xx - f(w)`` for the reaction-only profile from ``C_bar/x**alpha``."""
    beta = model.beta
    prof = global_profile(setup, alpha)
    w = w_from_data(prof(x), setup.rho, beta, t)
    g, h = tail_coeffs_gh(prof, beta, x)
    wt = setup.rho * w**beta
    wxx = g * w**beta + beta * h * w ** (2 * beta - 1)
    return wt - wxx - model.rate(np.clip(w, 0.0, 1.0)), w


def check_global_supersolution(profile: InitialProfile, model: NonlinearityModel, epsilon: float,
                               x0: float | None = None, C_bar: float | None = None,
                               t_range: tuple[float, float] | None = None,
                               n_t: int = 120, n_x: int = 120) -> ResidualReport:
    """Certify ``min(1, w)`` with ``rho = r_bar + eps/2`` as a supersolution on ``x > x0``."""
    setup = global_super_setup(profile, model, epsilon, x0, C_bar)
    alpha, beta = profile.alpha, model.beta
    prof = global_profile(setup, alpha)
    if t_range is None:
        t_range = (1e-2, float(blowup_horizon(prof(SCAN_X_MAX), setup.rho, beta)))
    T, X = _grid(setup.x0 * (1 + 1e-9), SCAN_X_MAX, n_t, n_x, *t_range)
    res, w = global_residual(setup, alpha, model, T, X)
    alive = (T < blowup_horizon(prof(X), setup.rho, beta)) & (w < 1)
    if not np.any(alive):
        raise DomainError("no samples with w < 1; widen t_range")
    neg = np.where(alive, -res, -np.inf)
    i = np.unravel_index(int(np.argmax(neg)), neg.shape)
    worst = float(-neg[i])
    return ResidualReport(
        construction="global_supersolution",
        samples={"t_min": t_range[0], "t_max": t_range[1], "x_min": setup.x0, "x_max": SCAN_X_MAX,
                 "grid": [n_t, n_x], "active": int(alive.sum()), "spacing": "log"},
        # for a supersolution the binding quantity is the most negative residual
        max_residual=-worst,
        location={"t": float(T[i]), "x": float(X[i])},
        tolerance=GLOBAL_TOL,
        passed=bool(worst >= -GLOBAL_TOL),
        extra={"min_residual": worst, "x0": setup.x0, "C_bar": setup.C_bar, "rho": setup.rho,
               "adjusted": setup.adjusted,
               "far_field_bound": alpha * (alpha + 1 + 2 * beta * alpha) / setup.x0**2},
    )


@dataclass
class OrderingReport:
    tolerance: float
    margins: list[dict]
    worst_sub: float
    worst_super: float
    worst_theta: float

    @property
    def sub_ok(self) -> bool:
        return self.worst_sub >= -self.tolerance

    @property
    def super_ok(self) -> bool:
        return self.worst_super >= -self.tolerance

    @property
    def theta_ok(self) -> bool:
        return self.worst_theta >= -self.tolerance

    @property
    def passed(self) -> bool:
        return self.sub_ok and self.super_ok and self.theta_ok

    def to_dict(self) -> dict:
        return {
            "tolerance": self.tolerance,
            "worst_sub_margin": self.worst_sub,
            "worst_super_margin": self.worst_super,
            "worst_theta_margin": self.worst_theta,
            "sub_ok": self.sub_ok, "super_ok": self.super_ok, "theta_ok": self.theta_ok,
            "pass": self.passed,
            "per_snapshot": self.margins,
        }


@_quiet
def bump_value(c: BumpConstants, profile, t, x):
    w = w_from_data(profile(x), c.rho, c.beta, t)
    v = w - c.A * w ** (1 + c.delta_eff)
    return np.where(np.isfinite(w) & (v > 0), v, 0.0)


def super_value(setup: GlobalSuperSetup, alpha: float, beta: float, t, x):
    prof = global_profile(setup, alpha)
    w = w_from_data(prof(x), setup.rho, beta, t)
    return np.minimum(1.0, w)


def check_ordering(snapshots, constants: BumpConstants, profile: InitialProfile,
                   model: NonlinearityModel, epsilon: float, allowance: float = 0.0,
                   base_tol: float = 1e-3) -> OrderingReport:
    """Compare grid snapshots with the bump, the capped supersolution and ``Theta``.

    ``snapshots`` is a run result or any iterable of grid states; each must
    expose ``t``, ``x`` and ``values``.
    """
    snapshots = getattr(snapshots, "snapshots", snapshots)
    tol = base_tol + allowance
    setup = global_super_setup(profile, model, epsilon)
    alpha, beta = profile.alpha, model.beta
    margins = []
    ws = wp = wt = math.inf
    for st in snapshots:
        x, u = st.x, np.asarray(st.values)
        sub = float(np.min(u - bump_value(constants, profile, st.t, x)))
        right = x >= setup.x0
        sup = float(np.min(super_value(setup, alpha, beta, st.t, x[right]) - u[right])) \
            if np.any(right) else math.inf
        yt = y_theta(constants, profile.C, alpha, beta, st.t)
        left = x <= yt
        th = float(np.min(u[left] - constants.Theta_bound)) if np.any(left) else math.inf
        # measured value of u where the lower level-set bound sits
        u_y = float(np.interp(yt, x, u)) if x[0] <= yt <= x[-1] else math.nan
        margins.append({"t": st.t, "sub": sub, "super": sup, "theta": th, "y_theta": yt,
                        "u_at_y_theta": u_y})
        ws, wp, wt = min(ws, sub), min(wp, sup), min(wt, th)
    return OrderingReport(tolerance=tol, margins=margins, worst_sub=ws, worst_super=wp, worst_theta=wt)
