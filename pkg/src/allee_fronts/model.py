"""Reaction terms and front-like initial data.

Two value types live here: :class:`NonlinearityModel` (the reaction term
``f`` with its Allee parameters) and :class:`InitialProfile` (a plateau glued
to a heavy tail).  Both are frozen and vectorised over numpy arrays.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError, InsufficientDataError, UnsupportedProfileError

TAIL_KINDS = ("algebraic", "stretched_exponential", "log_linear", "log_algebraic", "tabulated")

# f'(0) heuristic for tabulated reaction terms
_FPRIME_PROBE = 1e-4
_FPRIME_TOL = 1e-2


@dataclass(frozen=True)
class NonlinearityModel:
    """Monostable reaction term.

    ``canonical`` means ``f(s) = r s**beta (1 - s**delta)``.  ``tabulated``
    interpolates ``table_f`` on the increasing grid ``table_s``; the scalar
    parameters then only describe the bounds the table is supposed to obey.
    """

    kind: str = "canonical"
    r: float = 1.0
    beta: float = 2.0
    delta: float = 1.0
    s0: float = 0.5
    r_bar: float | None = None
    table_s: tuple[float, ...] | None = None
    table_f: tuple[float, ...] | None = None

    def __post_init__(self):
        for name in ("r", "beta", "delta", "s0"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if self.r_bar is not None:
            object.__setattr__(self, "r_bar", float(self.r_bar))
        if self.kind not in ("canonical", "tabulated"):
            raise DomainError(f"unknown nonlinearity kind {self.kind!r}")
        if self.r <= 0:
            raise DomainError("r must be positive")
        if self.beta <= 0:
            raise DomainError("beta must be positive")
        if self.delta <= 0:
            raise DomainError("delta must be positive")
        if not 0 < self.s0 < 1:
            raise DomainError("s0 must lie in (0, 1)")
        if self.r_bar is not None and self.r_bar <= 0:
            raise DomainError("r_bar must be positive")
        if self.kind == "tabulated":
            if self.table_s is None or self.table_f is None:
                raise DomainError("tabulated nonlinearity needs table_s and table_f")
            s = np.asarray(self.table_s, dtype=float)
            if len(s) != len(self.table_f) or len(s) < 2:
                raise DomainError("table_s and table_f must have equal length >= 2")
            if s[0] != 0.0 or s[-1] != 1.0 or np.any(np.diff(s) <= 0):
                raise DomainError("table_s must increase strictly from 0 to 1")
            object.__setattr__(self, "table_s", tuple(float(v) for v in s))
            object.__setattr__(self, "table_f", tuple(float(v) for v in self.table_f))

    @classmethod
    def zero(cls, beta: float = 2.0) -> "NonlinearityModel":
        """``f == 0``: pure diffusion, used for heat-kernel regressions."""
        return cls(kind="tabulated", beta=beta, table_s=(0.0, 1.0), table_f=(0.0, 0.0))

    @property
    def upper_rate(self) -> float:
        """``r_bar`` if given, else the tight bound ``sup f(s)/s**beta``."""
        if self.r_bar is not None:
            return self.r_bar
        if self.kind == "canonical":
            return self.r
        s = np.logspace(-8, 0, 4001)
        return float(np.max(self.rate(s) / s**self.beta))

    def rate(self, s):
        """Vectorised ``f(s)`` without domain checks (hot path of the solver)."""
        if self.kind == "canonical":
            return self.r * s**self.beta * (1.0 - s**self.delta)
        return np.interp(s, self.table_s, self.table_f)

    def lower_bound(self, s, r: float | None = None, delta: float | None = None):
        r = self.r if r is None else r
        delta = self.delta if delta is None else delta
        return r * s**self.beta * (1.0 - s**delta)


def eval_nonlinearity(model: NonlinearityModel, s):
    arr = np.asarray(s, dtype=float)
    if np.any(arr < 0) or np.any(arr > 1) or np.any(np.isnan(arr)):
        raise DomainError(f"f is only defined on [0, 1], got {s!r}")
    out = model.rate(arr)
    return float(out) if np.ndim(out) == 0 else out


@dataclass
class Check:
    name: str
    passed: bool
    witness: float | None = None
    detail: str = ""


@dataclass
class ValidationReport:
    checks: list[Check] = field(default_factory=list)
    tight_r_bar: float | None = None

    @property
    def valid(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def reasons(self) -> list[str]:
        return [c.detail or c.name for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {
            "valid": self.valid,
            "tight_r_bar": self.tight_r_bar,
            "checks": [
                {"name": c.name, "passed": c.passed, "witness": c.witness, "detail": c.detail}
                for c in self.checks
            ],
        }


def validate_model(model: NonlinearityModel, samples: int = 1000) -> ValidationReport:
    """Check the degenerate-monostable assumptions and the sandwich bounds.

    Failures are collected in the report rather than raised.
    """
    if samples < 100:
        raise DomainError("validate_model needs at least 100 samples")
    report = ValidationReport()
    add = report.checks.append

    f0 = float(model.rate(0.0))
    add(Check("f(0) = 0", f0 == 0.0, 0.0 if f0 != 0 else None,
              "" if f0 == 0.0 else f"f(0) = {f0:g} ≠ 0"))
    f1 = float(model.rate(1.0))
    add(Check("f(1) = 0", abs(f1) <= 1e-14, 1.0 if abs(f1) > 1e-14 else None,
              "" if abs(f1) <= 1e-14 else f"f(1) = {f1:g} ≠ 0"))

    s = np.linspace(0.0, 1.0, samples + 2)[1:-1]
    fs = model.rate(s)
    bad = np.flatnonzero(fs <= 0)
    add(Check("f > 0 on (0,1)", bad.size == 0, float(s[bad[0]]) if bad.size else None,
              "" if not bad.size else f"f({s[bad[0]]:.6g}) = {fs[bad[0]]:g} ≤ 0"))

    if model.kind == "canonical":
        if model.beta > 1:
            add(Check("f'(0) = 0", True, detail=""))
        else:
            slope = model.r if model.beta == 1 else math.inf
            add(Check("f'(0) = 0", False, 0.0, f"f'(0) = {slope:g} ≠ 0"))
    else:
        quotient = (float(model.rate(_FPRIME_PROBE)) - f0) / _FPRIME_PROBE
        ok = abs(quotient) < _FPRIME_TOL
        add(Check("f'(0) = 0", ok, None if ok else 0.0,
                  "" if ok else f"f'(0) ≈ {quotient:g} ≠ 0 (difference quotient at s={_FPRIME_PROBE:g}, "
                  f"tolerance {_FPRIME_TOL:g})"))

    lo = np.linspace(0.0, model.s0, samples)
    gap = model.rate(lo) - model.lower_bound(lo)
    bad = np.flatnonzero(gap < -1e-14)
    add(Check("f(s) >= r s^beta (1 - s^delta) on [0, s0]", bad.size == 0,
              float(lo[bad[0]]) if bad.size else None,
              "" if not bad.size else f"lower bound violated at s = {lo[bad[0]]:.6g}"))

    if model.beta > 0:
        r_bar = model.upper_rate
        full = np.linspace(0.0, 1.0, samples)
        gap = r_bar * full**model.beta - model.rate(full)
        bad = np.flatnonzero(gap < -1e-14)
        add(Check("f(s) <= r_bar s^beta on [0, 1]", bad.size == 0,
                  float(full[bad[0]]) if bad.size else None,
                  "" if not bad.size else f"upper bound violated at s = {full[bad[0]]:.6g}"))
    if model.kind == "canonical":
        report.tight_r_bar = model.r
    else:
        sp = s[s > 0]
        report.tight_r_bar = float(np.max(model.rate(sp) / sp**model.beta))
    return report


def _hermite(x, xa, xb, ya, yb, ma, mb):
    h = xb - xa
    s = (x - xa) / h
    h00 = 2 * s**3 - 3 * s**2 + 1
    h10 = s**3 - 2 * s**2 + s
    h01 = -2 * s**3 + 3 * s**2
    h11 = s**3 - s**2
    return h00 * ya + h10 * h * ma + h01 * yb + h11 * h * mb


@dataclass(frozen=True)
class InitialProfile:
    """Front-like datum: plateau ``eta``, cubic glue on ``[x0 - 1, x0]``, heavy tail.

    Tail formulas for ``x >= x0``:

    * ``algebraic``: ``C/x**alpha + (C_bar - C) x0 / x**(alpha + 1)``, squeezed
      between ``C/x**alpha`` and ``C_bar/x**alpha`` and exactly ``C/x**alpha``
      when ``C == C_bar``.
    * ``stretched_exponential``: ``C exp(-a x**b)``.
    * ``log_linear``: ``C exp(-a x / ln x)``.
    * ``log_algebraic``: ``C / (ln x)**b``.
    * ``tabulated``: linear interpolation of ``(table_x, table_u)``.
    """

    tail_kind: str = "algebraic"
    C: float = 1.0
    C_bar: float | None = None
    alpha: float = 1.0
    x0: float = 2.0
    eta: float = 1.0
    a: float = 1.0
    b: float = 0.5
    table_x: tuple[float, ...] | None = None
    table_u: tuple[float, ...] | None = None

    def __post_init__(self):
        for name in ("C", "alpha", "x0", "eta", "a", "b"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if self.C_bar is not None:
            object.__setattr__(self, "C_bar", float(self.C_bar))
        if self.tail_kind not in TAIL_KINDS:
            raise DomainError(f"unknown tail kind {self.tail_kind!r}")
        if self.C_bar is None:
            object.__setattr__(self, "C_bar", self.C)
        if self.C <= 0 or self.C_bar < self.C:
            raise DomainError("need 0 < C <= C_bar")
        if self.alpha <= 0:
            raise DomainError("alpha must be positive")
        # log tails need ln(x0) > 0; the algebraic tail is fine from x0 = 1 on
        if self.x0 < 1 or (self.x0 == 1 and self.tail_kind != "algebraic"):
            raise DomainError("x0 must exceed 1")
        if not 0 < self.eta <= 1:
            raise DomainError("eta must lie in (0, 1]")
        if self.tail_kind in ("stretched_exponential", "log_linear") and self.a <= 0:
            raise DomainError("a must be positive")
        if self.tail_kind in ("stretched_exponential", "log_algebraic", "log_linear") and self.b <= 0:
            raise DomainError("b must be positive")
        if self.tail_kind == "stretched_exponential" and self.b >= 1:
            raise DomainError("stretched exponential tails need 0 < b < 1")
        if self.tail_kind == "log_linear" and self.x0 < math.e:
            raise DomainError("log_linear tails need x0 >= e to be non-increasing")
        if self.tail_kind == "tabulated":
            if self.table_x is None or self.table_u is None:
                raise DomainError("tabulated profile needs table_x and table_u")
            tx = np.asarray(self.table_x, dtype=float)
            tu = np.asarray(self.table_u, dtype=float)
            if tx.shape != tu.shape or tx.size < 2 or np.any(np.diff(tx) <= 0):
                raise DomainError("table_x must increase strictly and match table_u")
            if np.any(tu <= 0) or np.any(tu > 1):
                raise DomainError("tabulated values must lie in (0, 1]")
            object.__setattr__(self, "table_x", tuple(tx.tolist()))
            object.__setattr__(self, "table_u", tuple(tu.tolist()))
            object.__setattr__(self, "eta", float(tu[0]))
        else:
            u_x0 = float(self._tail(np.array([self.x0]))[0])
            if not 0 < u_x0 <= 1 + 1e-15:
                raise DomainError(f"tail value at x0 must lie in (0, 1], got {u_x0:g}")

    @property
    def x_glue(self) -> float:
        if self.tail_kind == "tabulated":
            return self.table_x[0]
        return self.x0 - 1.0

    @property
    def tail_exact(self) -> bool:
        return self.tail_kind == "algebraic" and self.C == self.C_bar

    # -- tail pieces -------------------------------------------------------
    def _tail(self, x):
        k = self.tail_kind
        if k == "algebraic":
            d = (self.C_bar - self.C) * self.x0
            return self.C * x ** (-self.alpha) + d * x ** (-self.alpha - 1)
        if k == "stretched_exponential":
            return self.C * np.exp(-self.a * x**self.b)
        if k == "log_linear":
            return self.C * np.exp(-self.a * x / np.log(x))
        if k == "log_algebraic":
            return self.C * np.log(x) ** (-self.b)
        raise UnsupportedProfileError("tabulated profiles have no closed-form tail")

    def tail_derivatives(self, x):
        """``(u0, u0', u0'')`` from closed forms; valid for ``x >= x0``."""
        x = np.asarray(x, dtype=float)
        k = self.tail_kind
        al, C = self.alpha, self.C
        if k == "algebraic":
            d = (self.C_bar - C) * self.x0
            u = C * x**-al + d * x ** (-al - 1)
            du = -al * C * x ** (-al - 1) - (al + 1) * d * x ** (-al - 2)
            d2u = al * (al + 1) * C * x ** (-al - 2) + (al + 1) * (al + 2) * d * x ** (-al - 3)
        elif k == "stretched_exponential":
            u = C * np.exp(-self.a * x**self.b)
            k1 = self.a * self.b * x ** (self.b - 1)
            du = -k1 * u
            d2u = u * (k1**2 - self.a * self.b * (self.b - 1) * x ** (self.b - 2))
        elif k == "log_linear":
            lx = np.log(x)
            u = C * np.exp(-self.a * x / lx)
            p1 = self.a * (lx - 1) / lx**2
            p2 = self.a * (2 - lx) / (x * lx**3)
            du = -p1 * u
            d2u = (p1**2 - p2) * u
        elif k == "log_algebraic":
            lx = np.log(x)
            bb = self.b
            u = C * lx**-bb
            du = -bb * C * lx ** (-bb - 1) / x
            d2u = bb * C * ((bb + 1) * lx ** (-bb - 2) + lx ** (-bb - 1)) / x**2
        else:
            raise UnsupportedProfileError("tabulated profiles do not expose derivatives")
        return u, du, d2u

    def _glue_slope(self) -> float:
        _, m1, _ = self.tail_derivatives(np.array([self.x0]))
        m1 = float(m1[0])
        rise = float(self._tail(np.array([self.x0]))[0]) - self.eta
        # Fritsch-Carlson limit keeps the glue monotone (and hence <= eta <= 1)
        if rise < 0:
            return max(m1, 3.0 * rise)
        return 0.0

    def __call__(self, x):
        scalar = np.ndim(x) == 0
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if self.tail_kind == "tabulated":
            out = np.interp(x, self.table_x, self.table_u)
        else:
            out = np.full(x.shape, self.eta)
            tail = x >= self.x0
            if np.any(tail):
                out[tail] = self._tail(x[tail])
            glue = (x > self.x_glue) & ~tail
            if np.any(glue):
                y1 = float(self._tail(np.array([self.x0]))[0])
                out[glue] = _hermite(x[glue], self.x_glue, self.x0, self.eta, y1, 0.0,
                                     self._glue_slope())
        return float(out[0]) if scalar else out

    def infimum_left_of(self, x_right: float, n: int = 2001) -> float:
        """``inf u0`` over ``(-inf, x_right)``; built-in tails are non-increasing."""
        if self.tail_kind == "tabulated":
            xs = np.array([t for t in self.table_x if t < x_right] + [x_right])
            return float(min(self.eta, np.min(self(xs))))
        pts = [self.eta]
        hi = min(x_right, self.x0)
        if hi > self.x_glue:
            pts.append(float(np.min(self(np.linspace(self.x_glue, hi, n)))))
        if x_right > self.x0:
            pts.append(float(self(x_right)))
        return min(pts)


@dataclass(frozen=True)
class FunctionProfile:
    """Arbitrary datum given by a vectorised callable (test modes, heat kernel)."""

    func: Callable
    x_glue: float = 0.0
    x0: float = 1.0
    eta: float = 1.0

    def __call__(self, x):
        scalar = np.ndim(x) == 0
        out = np.asarray(self.func(np.atleast_1d(np.asarray(x, dtype=float))), dtype=float)
        out = np.broadcast_to(out, np.atleast_1d(x).shape).copy()
        return float(out[0]) if scalar else out


def eval_initial(profile: InitialProfile, x):
    return profile(x)


@dataclass(frozen=True)
class TailClass:
    name: str
    alpha: float | None = None

    def __str__(self):
        return f"algebraic({self.alpha:g})" if self.name == "algebraic" else self.name


LIGHTER = "lighter_than_algebraic"
ALGEBRAIC = "algebraic"
HEAVIER = "heavier_than_algebraic"


def classify_tail(profile: InitialProfile, rel_tol: float = 0.05) -> TailClass:
    """Place the tail relative to the algebraic family.

    Tabulated tails are classified from the log-log slope over the last
    decade of samples: a steepening slope means lighter than algebraic, a
    flattening one heavier.
    """
    kind = profile.tail_kind
    if kind in ("stretched_exponential", "log_linear"):
        return TailClass(LIGHTER)
    if kind == "algebraic":
        return TailClass(ALGEBRAIC, profile.alpha)
    if kind == "log_algebraic":
        return TailClass(HEAVIER)

    tx = np.asarray(profile.table_x)
    tu = np.asarray(profile.table_u)
    beyond = tx > profile.x0
    if np.count_nonzero(beyond) < 10:
        raise InsufficientDataError("need at least 10 tabulated samples beyond x0")
    xs, us = tx[beyond], tu[beyond]
    decade = xs >= xs[-1] / 10.0
    if np.count_nonzero(decade) < 10:
        decade = np.zeros_like(decade)
        decade[-10:] = True
    lx, lu = np.log(xs[decade]), np.log(us[decade])
    half = len(lx) // 2
    s1 = np.polyfit(lx[: half + 1], lu[: half + 1], 1)[0]
    s2 = np.polyfit(lx[half:], lu[half:], 1)[0]
    ref = max(abs(s1), abs(s2), 1e-300)
    if abs(s2 - s1) <= rel_tol * ref:
        slope = np.polyfit(lx, lu, 1)[0]
        return TailClass(ALGEBRAIC, float(-slope))
    return TailClass(LIGHTER if abs(s2) > abs(s1) else HEAVIER)
