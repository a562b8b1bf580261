"""Continuous radiation-reaction reference dynamics.

Relativistic form, in proper time ``tau`` (``s = c tau``)::

    m0 du/dtau = f + Gamma,
    Gamma = (2 k e**2 / (3 c)) (u'' + u (u . u'') / c**2),   u'' = d2u/ds2

With ``theta0 = (2/3) k e**2 / (m0 c**3)`` and ``u . du/dtau = 0`` the
acceleration obeys the first-order system

    da/dtau = (a - f/m0) / theta0 + u (a . a) / c**2,

which is what the integrator advances. The non-relativistic version uses lab
time ``t`` and reads ``da/dt = (a - (e/m0)(E + v x B / c)) / theta0``; where the
two are compared ``t`` is identified with ``tau``.

Integration uses the classical fixed-step RK4 scheme. A negative duration
runs backwards, which is how the non-runaway solution is selected.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from chronon.fields import FieldSpec, lorentz_force
from chronon.kinematics import UnitSystem, chronon_theta0, minkowski_dot

log = logging.getLogger(__name__)

_NATURAL = UnitSystem.natural()
_OVERFLOW = 1e150
# fraction of a step kept between stage times and the step edges
_EDGE = 1e-9


@dataclass(frozen=True)
class AldState:
    """Position, velocity and ``du/dtau`` at one proper time."""

    tau: float
    x: np.ndarray
    u: np.ndarray
    a: np.ndarray

    def check(self, c: float = 1.0, tol: float = 1e-9) -> None:
        if abs(minkowski_dot(self.u, self.u) + c * c) > tol * c * c:
            raise ValueError("initial velocity is not normalized")
        if abs(minkowski_dot(self.u, self.a)) > tol * c * max(1.0, float(np.max(np.abs(self.a)))):
            raise ValueError("initial acceleration is not orthogonal to the velocity")


@dataclass
class AldTrajectory:
    tau: np.ndarray
    x: np.ndarray
    u: np.ndarray
    a: np.ndarray
    termination: str = "completed"
    message: str | None = None
    relativistic: bool = True
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.tau)

    def sorted(self) -> AldTrajectory:
        """Copy ordered by increasing time (backward runs come out reversed)."""
        idx = np.argsort(self.tau, kind="stable")
        return AldTrajectory(self.tau[idx], self.x[idx], self.u[idx], self.a[idx],
                             self.termination, self.message, self.relativistic, dict(self.meta))


def abraham_vector(u, u2, units: UnitSystem = _NATURAL) -> np.ndarray:
    """``(2 k e**2 / 3c) (u2 + u (u . u2) / c**2)`` for ``u2 = d2u/ds2``."""
    u = np.asarray(u, dtype=float)
    u2 = np.asarray(u2, dtype=float)
    c = units.c
    pref = 2.0 * units.k * units.e**2 / (3.0 * c)
    return pref * (u2 + u * (minkowski_dot(u, u2) / (c * c))[..., None])


def reaction_force(jerk, units: UnitSystem = _NATURAL) -> np.ndarray:
    """Non-relativistic reaction force ``(2/3)(k e**2/c**3) d2v/dt2``."""
    return (2.0 / 3.0) * units.k * units.e**2 / units.c**3 * np.asarray(jerk, dtype=float)


def _rk4(rhs, y0, t0, h, steps, edge_times):
    """Fixed-step RK4; ``edge_times(t, h)`` maps the nominal stage times into the step interior."""
    ys = [y0]
    ts = [t0]
    y = y0
    t = t0
    status, msg = "completed", None
    for i in range(steps):
        ta, tm, tb = edge_times(t, h)
        with np.errstate(over="ignore", invalid="ignore"):
            k1 = rhs(ta, y)
            k2 = rhs(tm, y + 0.5 * h * k1)
            k3 = rhs(tm, y + 0.5 * h * k2)
            k4 = rhs(tb, y + h * k3)
            y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        t = t0 + (i + 1) * h
        if not np.all(np.isfinite(y)) or np.max(np.abs(y)) > _OVERFLOW:
            status, msg = "overflow", f"state left the representable range at t = {t:.6g}"
            log.info("integration stopped: %s", msg)
            break
        ys.append(y)
        ts.append(t)
    return np.array(ts), np.array(ys), status, msg


def _interior(t, h):
    d = _EDGE * h
    return t + d, t + 0.5 * h, t + h - d


def _steps(duration, step):
    if step == 0 or not math.isfinite(step):
        raise ValueError("step must be nonzero and finite")
    n = int(round(abs(duration) / abs(step)))
    h = math.copysign(abs(step), duration) if duration != 0 else step
    return n, h


def integrate_ald(
    initial: AldState,
    field: FieldSpec,
    duration: float,
    step: float | None = None,
    units: UnitSystem = _NATURAL,
) -> AldTrajectory:
    """Integrate the relativistic reaction equation over ``duration`` of proper time.

    ``step`` defaults to ``theta0/50``; the sign of ``duration`` sets the
    direction. Stages sample the field just inside the step, so a field that
    switches on exactly at a grid time acts only on the steps after it.
    """
    c, m0, e = units.c, units.m0, units.e
    theta0 = chronon_theta0(units)
    step = theta0 / 50.0 if step is None else step
    initial.check(c)
    n, h = _steps(duration, step)

    def rhs(tau, y):
        x, u, a = y[:4], y[4:8], y[8:]
        f = lorentz_force(field.tensor(tau, x), u, e, c)
        da = (a - f / m0) / theta0 + u * (minkowski_dot(a, a) / (c * c))
        return np.concatenate((u, a, da))

    y0 = np.concatenate((initial.x, initial.u, initial.a)).astype(float)
    ts, ys, status, msg = _rk4(rhs, y0, initial.tau, h, n, _interior)
    return AldTrajectory(ts, ys[:, :4], ys[:, 4:8], ys[:, 8:], status, msg, True, {"theta0": theta0, "step": h})


def integrate_al_nonrel(
    r0,
    v0,
    a0,
    field: FieldSpec,
    duration: float,
    step: float | None = None,
    units: UnitSystem = _NATURAL,
    t0: float = 0.0,
) -> AldTrajectory:
    """Integrate ``m0 dv/dt - (2/3)(k e**2/c**3) d2v/dt2 = e (E + v x B / c)``.

    The returned arrays use the 4-vector layout of the relativistic
    trajectory: ``x = (c t, r)``, ``u = (c, v)``, ``a = (0, dv/dt)``.
    """
    c, m0, e = units.c, units.m0, units.e
    theta0 = chronon_theta0(units)
    step = theta0 / 50.0 if step is None else step
    n, h = _steps(duration, step)

    def rhs(t, y):
        r, v, a = y[:3], y[3:6], y[6:]
        E, B = field(t, np.concatenate(([c * t], r)))
        force = (e / m0) * (np.asarray(E) + np.cross(v, B) / c)
        return np.concatenate((v, a, (a - force) / theta0))

    y0 = np.concatenate([np.asarray(z, dtype=float) for z in (r0, v0, a0)])
    ts, ys, status, msg = _rk4(rhs, y0, t0, h, n, _interior)
    k = len(ts)
    x = np.column_stack((c * ts, ys[:, :3]))
    u = np.column_stack((np.full(k, c), ys[:, 3:6]))
    a = np.column_stack((np.zeros(k), ys[:, 6:]))
    return AldTrajectory(ts, x, u, a, status, msg, False, {"theta0": theta0, "step": h})


def fit_exponential_rate(t, y) -> float:
    """Least-squares slope of ``log|y|`` against ``t``."""
    t = np.asarray(t, dtype=float)
    y = np.abs(np.asarray(y, dtype=float))
    keep = y > 0
    if keep.sum() < 2:
        raise ValueError("need at least two nonzero samples to fit a rate")
    slope, _ = np.polyfit(t[keep], np.log(y[keep]), 1)
    return float(slope)


def acceleration_magnitude(traj: AldTrajectory) -> np.ndarray:
    """``sqrt(a . a)`` (relativistic) or ``|dv/dt|``; both are the spatial norm for ``a0 = 0``."""
    a = traj.a
    return np.sqrt(np.maximum(minkowski_dot(a, a), 0.0))


def runaway(a0: float = 1e-6, duration_efolds: float = 10.0, step: float | None = None,
            units: UnitSystem = _NATURAL, relativistic: bool = True) -> AldTrajectory:
    """Free particle with a small seeded acceleration along x, starting from rest."""
    from chronon.fields import no_field

    theta0 = chronon_theta0(units)
    c = units.c
    if relativistic:
        state = AldState(0.0, np.zeros(4), np.array([c, 0.0, 0.0, 0.0]), np.array([0.0, a0, 0.0, 0.0]))
        return integrate_ald(state, no_field(), duration_efolds * theta0, step, units)
    return integrate_al_nonrel(np.zeros(3), np.zeros(3), [a0, 0.0, 0.0], no_field(), duration_efolds * theta0, step, units)


def pulse_physical_solution(
    E,
    tau_on: float,
    before: float = 10.0,
    after: float = 5.0,
    step: float | None = None,
    units: UnitSystem = _NATURAL,
    rapidity_end: float = 0.0,
    relativistic: bool = True,
) -> AldTrajectory:
    """Non-runaway response to a uniform field ``E`` switched on at ``tau_on``.

    ``E`` is a 3-vector or a scalar along x. Integration starts ``after``
    half-chronons past the onset on the uniformly accelerated solution
    (rapidity rate ``e |E| / (m0 c)``) and runs backwards to ``before``
    half-chronons ahead of it. Returned in increasing time order.
    """
    from chronon.fields import step_pulse

    E = np.array([E, 0.0, 0.0]) if np.ndim(E) == 0 else np.asarray(E, dtype=float)
    size = float(np.linalg.norm(E))
    ehat = E / size if size > 0 else np.array([1.0, 0.0, 0.0])
    theta0 = chronon_theta0(units)
    c, m0, e = units.c, units.m0, units.e
    spec = step_pulse(E, tau_on)
    t_end = tau_on + after * theta0
    duration = -(after + before) * theta0
    if relativistic:
        alpha = e * size / (m0 * c)
        phi = rapidity_end
        u = c * np.concatenate(([math.cosh(phi)], math.sinh(phi) * ehat))
        a = alpha * c * np.concatenate(([math.sinh(phi)], math.cosh(phi) * ehat))
        traj = integrate_ald(AldState(t_end, np.zeros(4), u, a), spec, duration, step, units)
    else:
        traj = integrate_al_nonrel(np.zeros(3), np.zeros(3), e * E / m0, spec, duration, step, units, t0=t_end)
    out = traj.sorted()
    out.meta.update({"tau_on": tau_on, "E": E.tolist()})
    return out


def pre_pulse_rate(traj: AldTrajectory, tau_on: float, window: float = 5.0) -> float:
    """Fitted growth rate of the acceleration over ``window`` half-chronons before onset."""
    theta0 = traj.meta["theta0"]
    mask = (traj.tau < tau_on) & (traj.tau >= tau_on - window * theta0)
    return fit_exponential_rate(traj.tau[mask], acceleration_magnitude(traj)[mask])
