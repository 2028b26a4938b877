"""Closed forms and constant recipes for the Allee-vs-heavy-tail dichotomy.

The sharp threshold is the hyperbola ``beta = 1 + 1/alpha``: on or above it
algebraic tails propagate linearly, strictly below it level sets accelerate
like ``t**(1/(alpha(beta-1)))``.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import ConstructionError, DomainError, PastBlowupError, UnsupportedProfileError
from .model import InitialProfile, NonlinearityModel

BOUNDARY_TOL = 1e-12
X1_SEARCH_MAX = 1e8


@dataclass(frozen=True)
class RegimeVerdict:
    regime: str
    gap: float
    boundary: bool

    @property
    def accelerates(self) -> bool:
        return self.regime == "acceleration"


def classify_regime(alpha: float, beta: float) -> RegimeVerdict:
    if not alpha > 0:
        raise DomainError("alpha must be positive")
    if not beta > 1:
        raise DomainError("beta must exceed 1")
    gap = beta - (1.0 + 1.0 / alpha)
    boundary = abs(gap) < BOUNDARY_TOL
    regime = "no_acceleration" if gap >= 0 or boundary else "acceleration"
    return RegimeVerdict(regime, gap, boundary)


def predicted_exponent(alpha: float, beta: float) -> float:
    return 1.0 / (alpha * (beta - 1.0))


@dataclass(frozen=True)
class EnvelopeParams:
    alpha: float
    beta: float
    r: float
    r_bar: float
    C: float
    C_bar: float
    epsilon: float

    def validate(self) -> None:
        if classify_regime(self.alpha, self.beta).regime != "acceleration":
            raise DomainError("envelopes are only defined when beta < 1 + 1/alpha")
        if not 0 < self.epsilon < self.r:
            raise DomainError("need 0 < epsilon < r")
        if self.C > self.C_bar or self.r > self.r_bar:
            raise DomainError("need C <= C_bar and r <= r_bar")


def _envelope(rate: float, amp: float, p: EnvelopeParams, t):
    p.validate()
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("envelopes need t >= 0")
    b1 = p.beta - 1.0
    out = (rate * amp**b1 * b1 * t) ** (1.0 / (p.alpha * b1))
    return float(out) if out.ndim == 0 else out


def envelope_lower(params: EnvelopeParams, t):
    """``x-(t) = ((r - eps) C**(beta-1) (beta-1) t)**(1/(alpha(beta-1)))``."""
    return _envelope(params.r - params.epsilon, params.C, params, t)


def envelope_upper(params: EnvelopeParams, t):
    """``x+(t) = ((r_bar + eps) C_bar**(beta-1) (beta-1) t)**(1/(alpha(beta-1)))``."""
    return _envelope(params.r_bar + params.epsilon, params.C_bar, params, t)


def blowup_horizon(u0, rho: float, beta: float):
    """Existence time ``T = 1 / (rho (beta-1) u0**(beta-1))`` of ``w' = rho w**beta``."""
    return 1.0 / (rho * (beta - 1.0) * np.asarray(u0, dtype=float) ** (beta - 1.0))


def w_from_data(u0, rho: float, beta: float, t):
    """``w(t) = (u0**-(beta-1) - rho (beta-1) t)**(-1/(beta-1))``; ``inf`` past blow-up."""
    u0 = np.asarray(u0, dtype=float)
    t = np.asarray(t, dtype=float)
    b1 = beta - 1.0
    base = u0 ** (-b1) - rho * b1 * t
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(base > 0, np.abs(base) ** (-1.0 / b1), np.inf)
    return out


def closed_form_w(profile, rho: float, beta: float, t: float, x: float) -> tuple[float, float]:
    """Value of the reaction-only profile ``w(t, x)`` and its blow-up horizon ``T(x)``."""
    u0 = float(profile(x))
    horizon = float(blowup_horizon(u0, rho, beta))
    if t < 0:
        raise DomainError("t must be non-negative")
    if t >= horizon:
        raise PastBlowupError(f"t = {t:g} is past the blow-up horizon T(x) = {horizon:g}", horizon)
    return float(w_from_data(u0, rho, beta, t)), horizon


def _gh_from_derivatives(u, du, d2u, beta):
    g = d2u / u**beta - beta * du**2 / u ** (beta + 1)
    h = du**2 / u ** (2 * beta)
    return g, h


def tail_coeffs_gh(profile: InitialProfile, beta: float, x):
    """``g = u0''/u0**beta - beta u0'**2/u0**(beta+1)`` and ``h = u0'**2/u0**(2 beta)``."""
    if not isinstance(profile, InitialProfile) or profile.tail_kind == "tabulated":
        raise UnsupportedProfileError("g and h need a built-in tail with closed-form derivatives")
    xa = np.asarray(x, dtype=float)
    if np.any(xa < profile.x0):
        raise DomainError(f"closed-form derivatives are only available for x >= x0 = {profile.x0:g}")
    g, h = _gh_from_derivatives(*profile.tail_derivatives(xa), beta)
    if np.ndim(x) == 0:
        return float(g), float(h)
    return g, h


@dataclass(frozen=True)
class BumpConstants:
    epsilon: float
    rho: float
    x1: float
    kappa: float
    A: float
    theta: float
    Theta_bound: float
    delta_eff: float
    r_eff: float
    s0_eff: float = 0.5
    beta: float = 2.0
    relaxed: bool = False

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def bump_max(self) -> float:
        """``max_w (w - A w**(1+delta))``."""
        d = self.delta_eff
        return d / (1 + d) / (self.A * (1 + d)) ** (1 / d)


def _loin_excess(profile, beta, r, rho, delta, x):
    g, h = tail_coeffs_gh(profile, beta, x)
    g, h = np.abs(g), np.abs(h)
    first = g + beta * h - (r - rho) / 2
    second = g + (delta + beta) * h - (rho - r * beta / (1 + delta)) / 2
    return np.maximum(first, second)


def _relaxed_s0(model: NonlinearityModel, r_eff: float, delta_eff: float) -> float:
    s = np.logspace(-8, 0, 20001)[:-1]
    ok = model.rate(s) >= r_eff * s**model.beta * (1 - s**delta_eff)
    bad = np.flatnonzero(~ok)
    if bad.size == 0:
        return float(min(s[-1], 0.99))
    if bad[0] == 0:
        raise ConstructionError("no s0* found for the relaxed lower bound")
    return float(s[bad[0] - 1])


def _find_x1(profile, beta, r, rho, delta) -> float:
    excess = lambda x: float(_loin_excess(profile, beta, r, rho, delta, x))  # noqa: E731
    lo = profile.x0
    if excess(lo) <= 0:
        hi = lo
    else:
        hi = lo
        while excess(hi) > 0:
            lo, hi = hi, hi * 2.0
            if hi > X1_SEARCH_MAX:
                raise ConstructionError(f"no x1 <= {X1_SEARCH_MAX:g} satisfies the far-field bounds")
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if excess(mid) > 0:
                lo = mid
            else:
                hi = mid
            if hi - lo <= 1e-12 * hi:
                break
    check = np.logspace(math.log10(hi), math.log10(X1_SEARCH_MAX), 4000)
    if np.any(_loin_excess(profile, beta, r, rho, delta, check) > 0):
        raise ConstructionError("far-field bounds fail somewhere beyond the bisected x1")
    return hi


def bump_constants(model: NonlinearityModel, profile: InitialProfile, epsilon: float) -> BumpConstants:
    """Deterministic constant ledger for the small accelerating bump subsolution."""
    beta = model.beta
    if classify_regime(profile.alpha, beta).regime != "acceleration":
        raise DomainError("the bump construction needs beta < 1 + 1/alpha")
    if not 0 < epsilon < model.r:
        raise DomainError("need 0 < epsilon < r")

    if beta < 1 + model.delta:
        delta, r, s0, relaxed = model.delta, model.r, model.s0, False
    else:
        delta, r, relaxed = beta, model.r - epsilon / 2, True
        s0 = _relaxed_s0(model, r, delta)

    lo = max(beta * r / (1 + delta), r - epsilon)
    if not lo < r:
        raise ConstructionError(f"empty admissible interval for rho: ({lo:g}, {r:g})")
    rho = 0.5 * (lo + r)

    x1 = _find_x1(profile, beta, r, rho, delta)
    kappa = profile.infimum_left_of(x1)
    if not 0 < kappa <= 1:
        raise ConstructionError(f"kappa = {kappa:g} outside (0, 1]")

    A = 1.01 * max(kappa**-delta, (2 * r / (1 + delta)) / (rho - r * beta / (1 + delta)))
    if delta / (1 + delta) / (A * (1 + delta)) ** (1 / delta) > s0:
        A = 1.01 * (delta / ((1 + delta) * s0)) ** delta / (1 + delta)

    theta = 0.5 * A ** (-1 / delta)
    y0 = (profile.C / theta) ** (1 / profile.alpha)
    Theta = min(theta - A * theta ** (1 + delta), profile.infimum_left_of(y0))
    return BumpConstants(
        epsilon=epsilon, rho=rho, x1=x1, kappa=kappa, A=A, theta=theta, Theta_bound=Theta,
        delta_eff=delta, r_eff=r, s0_eff=s0, beta=beta, relaxed=relaxed,
    )


def bump_violations(c: BumpConstants, profile: InitialProfile, n: int = 4000) -> list[str]:
    """Post-hoc check of every ledger invariant; returns the failed ones."""
    out = []
    b, d, r, rho = c.beta, c.delta_eff, c.r_eff, c.rho
    if not max(b * r / (1 + d), r - c.epsilon) < rho < r:
        out.append("rho outside its admissible interval")
    xs = np.logspace(math.log10(c.x1), math.log10(X1_SEARCH_MAX), n)
    g, h = tail_coeffs_gh(profile, b, xs)
    g, h = np.abs(g), np.abs(h)
    if np.any(g + b * h > (r - rho) / 2 + 1e-15):
        out.append("first far-field bound fails beyond x1")
    if np.any(g + (d + b) * h > (rho - r * b / (1 + d)) / 2 + 1e-15):
        out.append("second far-field bound fails beyond x1")
    if not 0 < c.kappa <= 1 or abs(c.kappa - profile.infimum_left_of(c.x1)) > 1e-12:
        out.append("kappa is not the infimum of u0 left of x1")
    bound = max(c.kappa**-d, (2 * r / (1 + d)) / (rho - r * b / (1 + d)))
    if not c.A > bound:
        out.append("A does not exceed its lower bound")
    if c.bump_max > c.s0_eff:
        out.append("bump maximum exceeds s0")
    if not 0 < c.theta < c.A ** (-1 / d):
        out.append("theta outside (0, A^(-1/delta))")
    if not 0 < c.Theta_bound <= c.theta - c.A * c.theta ** (1 + d) + 1e-15:
        out.append("Theta_bound is not a positive lower proxy")
    return out


def y_theta(constants: BumpConstants, C: float, alpha: float, beta: float, t):
    """Position where ``w(t, .)`` equals ``theta`` on an exact ``C/x**alpha`` tail."""
    t = np.asarray(t, dtype=float)
    b1 = beta - 1.0
    out = ((C / constants.theta) ** b1 + constants.rho * C**b1 * b1 * t) ** (1.0 / (alpha * b1))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class NoAccSpeed:
    c: float
    K: float
    p: float
    z0: float
    base_bound: float
    iterations: int

    def to_dict(self) -> dict:
        return asdict(self)


def noacc_speed(model: NonlinearityModel, profile: InitialProfile, growth: float = 1.5,
                max_iter: int = 200) -> NoAccSpeed:
    """Speed of a ``K/z**p`` travelling supersolution blocking acceleration.

    Starts at 1.05 times the far-field bound ``r (beta-1) K**(beta-1)`` and
    grows geometrically until the residual scan passes on ``[z0, 1e6]``.
    """
    from .certificates import check_traveling_supersolution

    if profile.tail_kind != "algebraic":
        raise DomainError("noacc_speed needs an algebraic tail")
    if classify_regime(profile.alpha, model.beta).regime != "no_acceleration":
        raise DomainError("noacc_speed needs beta >= 1 + 1/alpha")
    K = max(1.0, profile.C_bar)
    p = 1.0 / (model.beta - 1.0)
    z0 = K ** (1.0 / p)
    base = model.r * (model.beta - 1.0) * K ** (model.beta - 1.0)
    c = 1.05 * base
    for it in range(max_iter):
        if check_traveling_supersolution(K, c, model).passed:
            return NoAccSpeed(c=c, K=K, p=p, z0=z0, base_bound=base, iterations=it)
        c *= growth
    raise ConstructionError("no admissible speed found")
