"""Acceptance suite: one check per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` or standalone with
``python tests/test_acceptance.py``.
"""
from __future__ import annotations

import csv
import functools
import tempfile
import time
from pathlib import Path

import numpy as np
import pytest
from scipy.special import erfc

from allee_fronts.certificates import (
    check_bump_subsolution,
    check_global_supersolution,
    check_ordering,
    check_traveling_supersolution,
)
from allee_fronts.config import DEFAULT_PHASE_GRID, build_config
from allee_fronts.experiments import sweep_phase_diagram
from allee_fronts.levelsets import fit_growth
from allee_fronts.model import FunctionProfile, InitialProfile, NonlinearityModel
from allee_fronts.solver import SolverConfig, run
from allee_fronts.theory import (
    EnvelopeParams,
    bump_constants,
    envelope_lower,
    envelope_upper,
    noacc_speed,
    tail_coeffs_gh,
    w_from_data,
)


def report(number: int, passed: bool, detail: str) -> None:
    line = f"{'PASS' if passed else 'FAIL'} criterion {number}: {detail}"
    print(line, flush=True)
    return line


# -- shared accelerating run --------------------------------------------------

ACC_MODEL = NonlinearityModel(r=1, beta=1.5, delta=1)
ACC_PROFILE = InitialProfile("algebraic", C=1, C_bar=1, alpha=1, x0=2)
ACC_LEVEL = 0.1
ACC_EPS = 0.2 * ACC_MODEL.r


@functools.lru_cache(maxsize=None)
def accelerating_run():
    t0 = time.perf_counter()
    res = run(ACC_PROFILE, ACC_MODEL, SolverConfig(dx=0.5, t_end=200.0), (ACC_LEVEL,))
    return res, time.perf_counter() - t0


# -- criteria -------------------------------------------------------------------

def criterion_1():
    t0 = time.perf_counter()
    datum = FunctionProfile(lambda x: 0.5 * erfc(x / 2.0), x_glue=0.0, x0=1.0)
    res = run(datum, NonlinearityModel.zero(), SolverConfig(dx=0.05, t_end=1.0))
    st = res.final
    err = float(np.max(np.abs(st.values - 0.5 * erfc(st.x / (2 * np.sqrt(2.0))))))
    elapsed = time.perf_counter() - t0
    ok = err <= 1e-3 and elapsed <= 30 and st.t == pytest.approx(1.0)
    return ok, f"heat kernel max error {err:.3e} (<= 1e-3) in {elapsed:.1f}s"


def criterion_2():
    t0 = time.perf_counter()
    model = NonlinearityModel(r=1, r_bar=1, beta=2, delta=1)
    profile = InitialProfile("algebraic", C=1, C_bar=1, alpha=2, x0=2)
    res = run(profile, model, SolverConfig(dx=0.25, t_end=150.0), (0.3,))
    traj = res.trajectory(0.3)
    fit = fit_growth(traj, (50.0, 150.0))
    c = noacc_speed(model, profile).c
    win = (traj.t >= 50) & (traj.t <= 150)
    below = bool(np.all(traj.x_right[win] < c * traj.t[win]))
    pos = traj.t > 0
    ratio = traj.x_right[pos] / traj.t[pos]
    first = float(traj.t[pos][np.argmax(np.minimum.accumulate((ratio < c)[::-1])[::-1])])
    elapsed = time.perf_counter() - t0
    ok = 0.90 <= fit.q <= 1.10 and fit.r2_power >= 0.995 and below and elapsed <= 180
    return ok, (f"q = {fit.q:.4f} in [0.90, 1.10], R^2 = {fit.r2_power:.5f} (>= 0.995), "
                f"x_right < {c:.4g} t on [50, 150]: {below} (holds from t = {first:g}), "
                f"{elapsed:.1f}s")


def criterion_3():
    res, elapsed = accelerating_run()
    traj = res.trajectory(ACC_LEVEL)
    t_end = float(traj.t[-1])
    fit = fit_growth(traj, (t_end / 10, t_end))
    env = EnvelopeParams(alpha=1, beta=1.5, r=1, r_bar=1, C=1, C_bar=1, epsilon=ACC_EPS)
    sel = traj.t >= 20
    t = traj.t[sel]
    lo, hi = envelope_lower(env, t), envelope_upper(env, t)
    inside = (traj.x_left[sel] > lo) & (traj.x_right[sel] < hi)
    bad = t[~inside]
    first_ok = float(t[np.flatnonzero(~inside)[-1] + 1]) if bad.size and (~inside)[-1] == 0 else None
    q_ok = 1.7 <= fit.q <= 2.3
    detail = (f"q = {fit.q:.4f} in [1.7, 2.3]: {q_ok}; level set inside (x-, x+) for t >= 20: "
              f"{bool(inside.all())}")
    if bad.size:
        i = np.flatnonzero(~inside)[0]
        detail += (f" (first miss t = {t[i]:g}: x_right = {traj.x_right[sel][i]:.2f} vs "
                   f"x+ = {hi[i]:.2f}; {bad.size} snapshots outside, containment from t = {first_ok})")
    detail += f"; {elapsed:.1f}s"
    return q_ok and bool(inside.all()) and elapsed <= 300, detail


def criterion_4():
    t0 = time.perf_counter()
    model = NonlinearityModel(r=1, beta=2, delta=1)
    profile = InitialProfile("stretched_exponential", C=1, a=1, b=0.5, x0=2)
    res = run(profile, model, SolverConfig(dx=0.25, t_end=150.0), (0.3,))
    fit = fit_growth(res.trajectory(0.3), (50.0, 150.0))
    elapsed = time.perf_counter() - t0
    ok = 0.90 <= fit.q <= 1.10 and elapsed <= 180
    return ok, f"q = {fit.q:.4f} in [0.90, 1.10] (R^2 = {fit.r2_power:.5f}), {elapsed:.1f}s"


def criterion_5():
    t0 = time.perf_counter()
    quad = NonlinearityModel(r=1, beta=2, delta=1, s0=0.5)
    speed = noacc_speed(quad, InitialProfile(C=1, alpha=2))
    tw = check_traveling_supersolution(1.0, speed.c, quad)
    neg = check_traveling_supersolution(1.0, 0.5 * speed.base_bound, quad)
    constants = bump_constants(ACC_MODEL, ACC_PROFILE, 0.1)
    bump = check_bump_subsolution(constants, ACC_MODEL, ACC_PROFILE)
    glob = check_global_supersolution(ACC_PROFILE, ACC_MODEL, 0.2)
    elapsed = time.perf_counter() - t0
    sizes_ok = (tw.samples["count"] >= 10_000 and bump.samples["active"] >= 10_000
                and glob.samples["active"] >= 10_000)
    ok = (tw.passed and tw.max_residual <= 1e-10 and bump.passed and glob.passed
          and not neg.passed and sizes_ok and elapsed <= 60)
    return ok, (f"traveling c = {speed.c:.4g} max R = {tw.max_residual:.2e}; "
                f"bump max Lv = {bump.max_residual:.2e}; global min residual = "
                f"{glob.extra['min_residual']:.2e}; negative control (c = {0.5 * speed.base_bound:g}) "
                f"fails: {not neg.passed}; samples >= 1e4: {sizes_ok}; {elapsed:.1f}s")


def criterion_6():
    res, _ = accelerating_run()
    t0 = time.perf_counter()
    constants = bump_constants(ACC_MODEL, ACC_PROFILE, ACC_EPS)
    rep = check_ordering(res, constants, ACC_PROFILE, ACC_MODEL, ACC_EPS, allowance=0.0)
    elapsed = time.perf_counter() - t0
    return rep.passed, (f"tol {rep.tolerance:g}; worst margins sub {rep.worst_sub:.2e}, "
                        f"super {rep.worst_super:.2e}, theta {rep.worst_theta:.2e} over "
                        f"{len(rep.margins)} snapshots, {elapsed:.1f}s")


def criterion_7():
    t0 = time.perf_counter()
    flat = {"solver.dx": 0.5, "solver.t_end": 100.0, "kind": "sweep",
            "sweep.grid": [list(c) for c in DEFAULT_PHASE_GRID], "sweep.level": 0.5}
    base = build_config(flat)
    with tempfile.TemporaryDirectory() as tmp:
        sweep_phase_diagram(base.sweep["grid"], base, tmp, jobs=4)
        rows = list(csv.DictReader(open(Path(tmp) / "phase_diagram.csv")))
    elapsed = time.perf_counter() - t0
    alphas = sorted({float(r["alpha"]) for r in rows})
    dist_ok = all(abs(float(r["beta"]) - 1 - 1 / float(r["alpha"])) >= 0.2 for r in rows)
    shape_ok = len(rows) == 16 and len(alphas) == 4
    rate = sum(r["agree"] == "true" for r in rows) / max(len(rows), 1)
    ok = rate >= 0.9 and dist_ok and shape_ok and elapsed <= 1800
    return ok, (f"{len(rows)} cells ({len(alphas)} alpha rows x 4 beta), distance >= 0.2: {dist_ok}, "
                f"agreement {rate:.0%} (>= 90%), {elapsed:.1f}s with 4 jobs")


def criterion_8():
    t0 = time.perf_counter()
    checks = {}
    # discrete comparison
    model = NonlinearityModel(beta=1.5)
    hi = InitialProfile(C=1, alpha=1, x0=2)
    lo = InitialProfile(C=0.5, alpha=1, x0=2, eta=0.5)
    cfg = SolverConfig(dx=0.5, t_end=20)
    a, b = run(lo, model, cfg), run(hi, model, cfg)
    checks["comparison"] = all(
        np.all(sa.values[: min(sa.n, sb.n)] <= sb.values[: min(sa.n, sb.n)] + 1e-10)
        for sa, sb in zip(a.snapshots, b.snapshots))
    # w solves its ODE
    worst = 0.0
    for beta, rho, x, frac in [(1.5, 0.9, 10, 0.3), (2.0, 1.1, 300, 0.8), (1.2, 0.5, 5e3, 0.5)]:
        u0 = hi(x)
        T = 1 / (rho * (beta - 1) * u0 ** (beta - 1))
        t, h = frac * T, 1e-5 * min(frac, 1 - frac) * T
        w = lambda s: float(w_from_data(u0, rho, beta, s))  # noqa: E731
        fd = (w(t + h) - w(t - h)) / (2 * h)
        worst = max(worst, abs(fd / (rho * w(t) ** beta) - 1))
    checks["w_ode"] = worst <= 1e-6
    # g, h against finite differences
    gh_err = 0.0
    for x in (10.0, 100.0, 1000.0):
        s = 1e-4 * x
        u, up, um = hi(x), hi(x + s), hi(x - s)
        du, d2u = (up - um) / (2 * s), (up - 2 * u + um) / s**2
        g, hh = tail_coeffs_gh(hi, 1.5, x)
        g_fd = d2u / u**1.5 - 1.5 * du**2 / u**2.5
        h_fd = du**2 / u**3
        gh_err = max(gh_err, abs(g / g_fd - 1), abs(hh / h_fd - 1))
    checks["gh"] = gh_err <= 1e-4
    # envelope scaling
    scale_err = 0.0
    for alpha, beta in [(1, 1.5), (2, 1.3), (0.5, 2.5)]:
        env = EnvelopeParams(alpha, beta, 1, 1, 1, 1, 0.1)
        k = 2 ** (1 / (alpha * (beta - 1)))
        for t in (0.5, 10.0, 1e3):
            scale_err = max(scale_err, abs(envelope_lower(env, 2 * t) / envelope_lower(env, t) / k - 1))
    checks["scaling"] = scale_err <= 1e-12
    # determinism
    c = run(lo, model, cfg)
    checks["determinism"] = all(np.array_equal(sa.values, sc.values)
                                for sa, sc in zip(a.snapshots, c.snapshots))
    elapsed = time.perf_counter() - t0
    return all(checks.values()), (", ".join(f"{k}: {v}" for k, v in checks.items())
                                  + f" (w rel err {worst:.1e}, g/h rel err {gh_err:.1e}, "
                                  f"scaling err {scale_err:.1e}), {elapsed:.1f}s")


CRITERIA = {1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4,
            5: criterion_5, 6: criterion_6, 7: criterion_7, 8: criterion_8}


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, capsys):
    passed, detail = CRITERIA[number]()
    with capsys.disabled():
        print()
        report(number, passed, detail)
    assert passed, detail


if __name__ == "__main__":
    results = {}
    for n, fn in CRITERIA.items():
        ok, detail = fn()
        report(n, ok, detail)
        results[n] = ok
    raise SystemExit(0 if all(results.values()) else 1)
