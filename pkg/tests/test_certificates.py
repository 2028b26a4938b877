from dataclasses import replace

import numpy as np
import pytest

from allee_fronts.certificates import (
    SampleSpec,
    bump_residual,
    bump_value,
    check_bump_subsolution,
    check_global_supersolution,
    check_ordering,
    check_traveling_supersolution,
    global_super_setup,
    traveling_residual,
)
from allee_fronts.errors import ConfigError, DomainError
from allee_fronts.model import InitialProfile, NonlinearityModel
from allee_fronts.solver import SolverConfig, run
from allee_fronts.theory import bump_constants, noacc_speed

QUAD = NonlinearityModel(r=1, beta=2, delta=1, s0=0.5)
ACC = NonlinearityModel(r=1, beta=1.5, delta=1)
P1 = InitialProfile("algebraic", C=1, alpha=1, x0=2)


def test_traveling_residual_hand_value():
    assert traveling_residual(10.0, 1.0, 2.0, QUAD) == pytest.approx(-0.009, abs=1e-15)


def test_traveling_scan_with_constructed_speed():
    c = noacc_speed(QUAD, InitialProfile(C=1, alpha=2)).c
    rep = check_traveling_supersolution(1.0, c, QUAD)
    assert rep.passed and rep.max_residual <= 1e-12
    assert rep.samples["count"] >= 10_000
    assert rep.to_dict()["pass"] is True


def test_traveling_scan_slow_speed_fails_far_out():
    rep = check_traveling_supersolution(1.0, 0.5, QUAD)
    assert not rep.passed
    # with c below r(beta-1)K^(beta-1) the sign flips on the whole far field
    z = np.logspace(2, 6, 50)
    assert np.all(traveling_residual(z, 1.0, 0.5, QUAD) > 0)


@pytest.mark.parametrize("c", [0.1, 1.0, 5.0])
def test_traveling_pure_diffusion(c):
    zero = NonlinearityModel.zero(beta=2.0)
    rep = check_traveling_supersolution(1.0, c, zero, z_range=(max(1.0, 2 / c + 1), 1e6))
    assert rep.passed


def test_traveling_scan_below_z0():
    with pytest.raises(DomainError):
        check_traveling_supersolution(4.0, 5.0, QUAD, z_range=(1.0, 1e6))


def test_traveling_refinement_stable():
    a = check_traveling_supersolution(1.0, 2.3625, QUAD, n=10_000)
    b = check_traveling_supersolution(1.0, 2.3625, QUAD, n=20_000)
    assert abs(a.max_residual - b.max_residual) < 1e-10


@pytest.fixture(scope="module")
def acc_constants():
    return bump_constants(ACC, P1, 0.1)


def test_bump_scan_passes(acc_constants):
    rep = check_bump_subsolution(acc_constants, ACC, P1)
    assert rep.passed
    assert rep.max_residual <= 1e-10
    assert rep.samples["active"] >= 10_000
    assert rep.extra["left_of_x1_violations"] == 0
    assert rep.extra["chain_ok"]
    assert rep.extra["first_bracket_max"] <= (acc_constants.rho - acc_constants.r_eff) / 2 + 1e-15


def test_bump_refinement_stable(acc_constants):
    a = check_bump_subsolution(acc_constants, ACC, P1)
    b = check_bump_subsolution(acc_constants, ACC, P1, SampleSpec(n_t=240, n_x=240))
    assert abs(a.max_residual - b.max_residual) < 1e-10


def test_bump_vanishes_where_w_is_large(acc_constants):
    c = acc_constants
    # at x = x1 and t close to blow-up, w exceeds A^(-1/delta) and the bump is cut
    x = np.array([c.x1, 2 * c.x1])
    T = 1 / (c.rho * 0.5 * P1(x) ** 0.5)
    assert np.all(bump_value(c, P1, 0.999 * T, x) == 0.0)


def test_bump_at_theta_level(acc_constants):
    c = acc_constants
    x_theta = 1 / c.theta   # u0 = 1/x equals theta here
    v = bump_value(c, P1, 0.0, x_theta)
    assert v == pytest.approx(c.theta - c.A * c.theta ** (1 + c.delta_eff), rel=1e-12)


def test_bump_residual_shape(acc_constants):
    lv, v, w, g, h = bump_residual(acc_constants, ACC, P1, np.array([1.0]), np.array([100.0]))
    assert lv.shape == (1,) and w[0] > P1(100.0)


def test_global_setup_preconditions():
    p = InitialProfile("algebraic", C=1, alpha=1, x0=10)
    s = global_super_setup(p, ACC, 0.1)
    # alpha (alpha + 1 + 2 beta alpha) / x0^2 = 0.05 <= eps/2 holds exactly at x0 = 10
    assert s.x0 == pytest.approx(10.0)
    assert s.C_bar == pytest.approx(10.0)
    assert s.rho == pytest.approx(1.05)


def test_global_setup_enlarges_x0():
    s = global_super_setup(P1, ACC, 0.2)
    assert s.x0 == pytest.approx(np.sqrt(50.0))
    assert s.C_bar == pytest.approx(s.x0) and s.adjusted


def test_global_scan_passes():
    rep = check_global_supersolution(P1, ACC, 0.2)
    assert rep.passed
    assert rep.extra["min_residual"] >= -1e-10
    assert rep.samples["active"] >= 10_000


def test_global_and_bump_signs_are_opposite(acc_constants):
    bump = check_bump_subsolution(acc_constants, ACC, P1)
    sup = check_global_supersolution(P1, ACC, 0.1)
    assert bump.max_residual <= 1e-10 and sup.extra["min_residual"] >= -1e-10


def test_global_scan_regime_mismatch():
    with pytest.raises(ConfigError):
        check_global_supersolution(InitialProfile(alpha=2), QUAD, 0.2)


@pytest.fixture(scope="module")
def acc_run():
    return run(P1, ACC, SolverConfig(dx=0.5, t_end=30), (0.1,))


@pytest.fixture(scope="module")
def ordering_constants():
    return bump_constants(ACC, P1, 0.2)


def test_ordering_holds(acc_run, ordering_constants):
    rep = check_ordering(acc_run, ordering_constants, P1, ACC, 0.2)
    assert rep.passed
    assert rep.margins[0]["t"] == 0.0
    assert any(m["t"] == pytest.approx(20.0) for m in rep.margins)
    assert rep.to_dict()["pass"] is True


def test_ordering_initial_snapshot(acc_run, ordering_constants):
    rep = check_ordering(acc_run.snapshots[:1], ordering_constants, P1, ACC, 0.2, base_tol=0.0)
    assert rep.worst_super >= 0
    assert rep.worst_theta >= 0
    assert rep.worst_sub >= 0


def test_ordering_halved_run_breaks_subsolution(acc_run, ordering_constants):
    snaps = [replace(s, values=0.5 * s.values) for s in acc_run.snapshots]
    rep = check_ordering(snaps, ordering_constants, P1, ACC, 0.2)
    assert not rep.sub_ok and rep.super_ok and not rep.passed


def test_ordering_quartered_run_breaks_theta(acc_run, ordering_constants):
    snaps = [replace(s, values=0.25 * s.values) for s in acc_run.snapshots]
    rep = check_ordering(snaps, ordering_constants, P1, ACC, 0.2)
    assert not rep.sub_ok and not rep.theta_ok
