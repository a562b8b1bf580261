import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from chronon.ald import (
    AldState,
    abraham_vector,
    acceleration_magnitude,
    fit_exponential_rate,
    integrate_ald,
    integrate_al_nonrel,
    pre_pulse_rate,
    pulse_physical_solution,
    reaction_force,
    runaway,
)
from chronon.fields import no_field, uniform_field
from chronon.kinematics import UnitSystem, chronon_theta0, four_velocity, minkowski_dot

NAT = UnitSystem.natural()
THETA0 = chronon_theta0(NAT)


@given(st.lists(st.floats(-0.7, 0.7), min_size=3, max_size=3), st.lists(st.floats(-5, 5), min_size=4, max_size=4))
def test_abraham_vector_orthogonal_to_velocity(v, u2):
    u = four_velocity(np.asarray(v) / np.sqrt(3))
    G = abraham_vector(u, u2)
    assert minkowski_dot(G, u) == pytest.approx(0.0, abs=1e-12 * (1 + np.abs(u2).max()))


def test_reaction_force_coefficient():
    assert reaction_force([3.0, 0, 0])[0] == pytest.approx(2.0)
    units = UnitSystem.natural(e=2.0)
    np.testing.assert_allclose(reaction_force([1.0, 1.0, 0], units), [8 / 3, 8 / 3, 0])


def test_initial_state_checked():
    with pytest.raises(ValueError, match="normalized"):
        integrate_ald(AldState(0.0, np.zeros(4), np.array([2.0, 0, 0, 0]), np.zeros(4)), no_field(), 1.0)
    with pytest.raises(ValueError, match="orthogonal"):
        integrate_ald(AldState(0.0, np.zeros(4), np.array([1.0, 0, 0, 0]), np.array([1.0, 0, 0, 0])), no_field(), 1.0)


@pytest.mark.parametrize("relativistic", [True, False])
def test_runaway_matches_exponential(relativistic):
    traj = runaway(a0=1e-6, duration_efolds=10, relativistic=relativistic)
    ref = oracles.runaway_acceleration(1e-6, THETA0, traj.tau)
    np.testing.assert_allclose(acceleration_magnitude(traj), ref, rtol=1e-7)
    rate = fit_exponential_rate(traj.tau, acceleration_magnitude(traj))
    assert rate * THETA0 == pytest.approx(1.0, rel=1e-2)


def test_runaway_overflow_is_recorded():
    traj = runaway(a0=1.0, duration_efolds=400, step=THETA0 / 10)
    assert traj.termination == "overflow"
    assert "representable" in traj.message
    assert np.all(np.isfinite(traj.a))
    assert len(traj) < 4001


def test_relativistic_runaway_keeps_constraints():
    traj = runaway(a0=1e-2, duration_efolds=5)
    uu = minkowski_dot(traj.u, traj.u)
    ua = minkowski_dot(traj.u, traj.a)
    # RK4 does not preserve the constraints exactly; they drift at truncation level
    assert np.max(np.abs(uu + 1)) < 1e-6
    assert np.max(np.abs(ua)) < 1e-6 * np.max(np.abs(traj.a))


@pytest.mark.parametrize("relativistic", [True, False])
def test_pulse_pre_acceleration(relativistic):
    E, tau_on = 0.01, 5.0
    traj = pulse_physical_solution(E, tau_on, before=10, after=5, relativistic=relativistic)
    assert traj.tau[0] == pytest.approx(tau_on - 10 * THETA0)
    assert traj.tau[-1] == pytest.approx(tau_on + 5 * THETA0)
    mag = acceleration_magnitude(traj)
    ref = oracles.preacceleration(E, THETA0, traj.tau, tau_on)
    pre = traj.tau < tau_on
    np.testing.assert_allclose(mag[pre], ref[pre], rtol=1e-6)
    np.testing.assert_allclose(mag[~pre], E, rtol=1e-6)
    rate = pre_pulse_rate(traj, tau_on, window=5)
    assert abs(rate * THETA0 - 1.0) < 0.05


def test_pulse_accepts_vector_field():
    traj = pulse_physical_solution([0.0, 0.02, 0.0], 1.0)
    a = traj.a[-1]
    assert abs(a[1]) < 1e-12 and a[2] == pytest.approx(0.02, rel=1e-9)


def test_zero_pulse_is_inertial():
    traj = pulse_physical_solution(0.0, 1.0)
    assert np.all(acceleration_magnitude(traj) == 0.0)


def test_backwards_run_sorted():
    state = AldState(1.0, np.zeros(4), np.array([1.0, 0, 0, 0]), np.zeros(4))
    traj = integrate_ald(state, uniform_field([0.1, 0, 0]), -0.5).sorted()
    assert np.all(np.diff(traj.tau) > 0)
    assert traj.tau[-1] == 1.0


def test_nonrel_layout():
    traj = integrate_al_nonrel(np.zeros(3), [0.1, 0, 0], np.zeros(3), no_field(), 1.0)
    np.testing.assert_allclose(traj.u[:, 0], 1.0)
    np.testing.assert_allclose(traj.u[:, 1], 0.1)
    np.testing.assert_allclose(traj.x[-1], [traj.tau[-1], 0.1 * traj.tau[-1], 0, 0], rtol=1e-12)
    assert traj.relativistic is False


def test_fit_exponential_rate():
    t = np.linspace(0, 3, 30)
    assert fit_exponential_rate(t, 5 * np.exp(-2.5 * t)) == pytest.approx(-2.5)
    with pytest.raises(ValueError):
        fit_exponential_rate(t, np.zeros_like(t))


def test_step_validation():
    with pytest.raises(ValueError):
        runaway(step=0.0)
