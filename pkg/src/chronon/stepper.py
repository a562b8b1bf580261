"""Finite-difference (chronon) integrators for a charge in an external field.

Velocities change only at lattice points ``tau_n = n tau0``. Three
discretizations are provided:

* retarded (radiating):  ``u_n`` solves a nonlinear equation in ``u_(n-1)``;
* advanced (absorbing):  ``u_(n+1)`` from ``u_n``, linear in the unknown;
* symmetric (non-radiating): ``u_(n+1)`` from ``u_n`` and ``u_(n-1)``.

The relativistic unknown enters through the projector ``g + u u / c**2``,
which is singular along ``u``. The retarded solve runs Newton on the
equivalent normalized form ``u_prev + u (u . u_prev)/c**2 + b(u) = 0``. All
three solves are carried out in the rest frame of a known velocity, where
the projector is the spatial identity and round-off does not grow with gamma.

The retarded step producing index ``n`` evaluates the field at ``tau_n`` and
``x_(n-1)``; advanced and symmetric steps from ``n`` use ``tau_n`` and ``x_n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from chronon.fields import FieldSpec, lorentz_force
from chronon.kinematics import METRIC, ChrononParams, UnitSystem, minkowski_dot, normalize_velocity

FORMULATIONS = ("retarded", "advanced", "symmetric")
TRANSMISSIONS = ("literal", "trapezoidal")

NEWTON_TOL = 1e-12
NEWTON_MAX_ITER = 50

_NATURAL = UnitSystem.natural()


class StepError(RuntimeError):
    """A lattice step could not be completed."""

    def __init__(self, message: str, residual: float = math.nan):
        super().__init__(message)
        self.residual = residual
        self.trajectory = None


@dataclass(frozen=True)
class ChrononState:
    """One lattice point plus the diagnostics of the step that produced it."""

    n: int
    tau: float
    x: np.ndarray
    u: np.ndarray
    u_prev: np.ndarray | None = None
    iterations: int = 0
    residual: float = 0.0
    drift: float = 0.0


def transmission_update(x_base, u_curr, u_prev, tau0: float, formulation: str = "retarded", mode: str = "literal"):
    """Next lattice position from the transmission law of a formulation.

    ``retarded``/``literal``:     ``x_n = x_(n-1) + tau0/2 (u_n - u_(n-1))``
    ``retarded``/``trapezoidal``: ``x_n = x_(n-1) + tau0/2 (u_n + u_(n-1))``
    ``advanced``:                 ``x_(n+1) = x_n + tau0 u_n``
    ``symmetric``:                ``x_(n+1) = x_(n-1) + 2 tau0 u_n``

    ``x_base`` is the position the law starts from and ``u_curr`` the velocity
    it multiplies; ``u_prev`` is used only by the retarded laws.
    """
    x_base = np.asarray(x_base, dtype=float)
    u_curr = np.asarray(u_curr, dtype=float)
    if formulation == "retarded":
        u_prev = np.asarray(u_prev, dtype=float)
        if mode == "literal":
            return x_base + 0.5 * tau0 * (u_curr - u_prev)
        if mode == "trapezoidal":
            return x_base + 0.5 * tau0 * (u_curr + u_prev)
        raise ValueError(f"unknown transmission mode {mode!r}; expected one of {TRANSMISSIONS}")
    if formulation == "advanced":
        return x_base + tau0 * u_curr
    if formulation == "symmetric":
        return x_base + 2.0 * tau0 * u_curr
    raise ValueError(f"unknown formulation {formulation!r}; expected one of {FORMULATIONS}")


def retarded_residual(u, u_prev, F, tau0: float, units: UnitSystem = _NATURAL) -> np.ndarray:
    """Left minus right side of the retarded equation, divided by ``m0/tau0``."""
    c = units.c
    du = u - u_prev
    b = (tau0 / units.m0) * lorentz_force(F, u, units.e, c)
    return du + u * (minkowski_dot(u, du) / (c * c)) - b


def rest_frame_boost(u, c: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Pure boost ``L`` with ``L u = (c, 0, 0, 0)`` and its inverse.

    Built from ``n = u_spatial / c`` so that no ``gamma - 1`` cancellation occurs.
    """
    u = np.asarray(u, dtype=float)
    n = u[1:] / c
    g = u[0] / c
    L = np.empty((4, 4))
    L[0, 0] = g
    L[0, 1:] = L[1:, 0] = -n
    L[1:, 1:] = np.eye(3) + np.outer(n, n) / (g + 1.0)
    Linv = L.copy()
    Linv[0, 1:] = Linv[1:, 0] = n
    return L, Linv


def _solve_retarded(u_prev, F, tau0, units, tol, max_iter):
    # The equation is covariant, so it is solved in the rest frame of u_prev,
    # where the Jacobian stays well conditioned at any lab-frame speed.
    c = units.c
    c2 = c * c
    L, Linv = rest_frame_boost(u_prev, c)
    Fr = Linv.T @ F @ Linv
    Fr = 0.5 * (Fr - Fr.T)  # restore exact antisymmetry lost to round-off at high gamma
    Fm = (units.e / c) * (tau0 / units.m0) * (METRIC @ Fr)
    rest = np.array([c, 0.0, 0.0, 0.0])
    low_rest = np.array([-c, 0.0, 0.0, 0.0])

    def R(u):
        return rest + u * (minkowski_dot(u, rest) / c2) + Fm @ u

    # round-off in R grows with the rest-frame impulse, so the target does too
    target = tol * c * (1.0 + float(np.max(np.abs(Fm))))
    u = rest.copy()
    res = float(np.max(np.abs(retarded_residual(u, rest, Fr, tau0, units))))
    it = 0
    while res > target:
        if it >= max_iter:
            raise StepError(f"retarded Newton solve did not converge in {max_iter} iterations", res)
        r = R(u)
        J = (minkowski_dot(u, rest) / c2) * np.eye(4) + np.outer(u, low_rest) / c2 + Fm
        delta = np.linalg.solve(J, -r)
        norm0 = np.linalg.norm(r)
        lam = 1.0
        trial = u + delta
        while np.linalg.norm(R(trial)) >= norm0 and lam > 2.0**-10:
            lam *= 0.5
            trial = u + lam * delta
        u = trial
        it += 1
        res = float(np.max(np.abs(retarded_residual(u, rest, Fr, tau0, units))))
    if it == 0:
        return u_prev, 0, res, 0.0
    drift = abs(minkowski_dot(u, u) + c2) / c2
    u = normalize_velocity(u, c)
    res = float(np.max(np.abs(retarded_residual(u, rest, Fr, tau0, units))))
    return normalize_velocity(Linv @ u, c), it, res, drift


def step_retarded(
    state: ChrononState,
    field: FieldSpec,
    params: ChrononParams,
    units: UnitSystem = _NATURAL,
    transmission: str = "literal",
    tol: float = NEWTON_TOL,
    max_iter: int = NEWTON_MAX_ITER,
) -> ChrononState:
    """Advance from lattice index ``n-1`` to ``n`` with the retarded equation.

    Damped Newton seeded at the previous velocity, carried out in the rest
    frame of that velocity; converged when the scaled residual there is below
    ``tol * c * (1 + max|b|)``, with ``b`` the dimensionless rest-frame impulse
    matrix ``(e tau0 / m0 c) F``. The reported residual and drift refer to that frame. A
    field that vanishes leaves the velocity bit-for-bit unchanged.
    """
    tau0 = params.tau0
    n = state.n + 1
    tau = n * tau0
    F = field.tensor(tau, state.x)
    u, it, res, drift = _solve_retarded(state.u, F, tau0, units, tol, max_iter)
    x = transmission_update(state.x, u, state.u, tau0, "retarded", transmission)
    return ChrononState(n, tau, x, u, state.u, it, res, drift)


def _rest_frame_impulse(u, F, scale, units):
    """Boost to the rest frame of ``u`` and return ``(Linv, b)`` with ``b`` the rest-frame impulse.

    ``b = scale * f(rest) / m0`` is purely spatial there; a time component
    that is not round-off means the field tensor is not antisymmetric.
    """
    c = units.c
    L, Linv = rest_frame_boost(u, c)
    Fr = Linv.T @ F @ Linv
    Fr = 0.5 * (Fr - Fr.T)
    b = (scale / units.m0) * lorentz_force(Fr, np.array([c, 0.0, 0.0, 0.0]), units.e, c)
    size = max(float(np.max(np.abs(b))), 1e-300)
    if abs(b[0]) > 1e-8 * size:
        raise StepError(f"impulse not orthogonal to the velocity: |b0|/|b| = {abs(b[0]) / size:.3e}")
    b[0] = 0.0
    return Linv, b


def step_advanced(
    state: ChrononState,
    field: FieldSpec,
    params: ChrononParams,
    units: UnitSystem = _NATURAL,
) -> ChrononState:
    """Advance from ``n`` to ``n+1`` with the advanced equation (explicit in the field).

    In the rest frame of ``u_n`` the projector is the spatial identity, so the
    spatial part of ``u_(n+1)`` is the impulse and the time part follows from
    normalization. The reported residual refers to that frame.
    """
    c = units.c
    tau0 = params.tau0
    u = state.u
    F = field.tensor(state.tau, state.x)
    Linv, b = _rest_frame_impulse(u, F, tau0, units)
    ur = b.copy()
    ur[0] = math.sqrt(c * c + float(b[1:] @ b[1:]))
    drift = abs(minkowski_dot(ur, ur) + c * c) / (c * c)
    res = float(np.max(np.abs(ur[1:] - b[1:])))
    u_next = normalize_velocity(Linv @ ur, c)
    x = transmission_update(state.x, u, None, tau0, "advanced")
    return ChrononState(state.n + 1, state.tau + tau0, x, u_next, u, 0, res, drift)


def step_symmetric(
    prev: ChrononState,
    curr: ChrononState,
    field: FieldSpec,
    params: ChrononParams,
    units: UnitSystem = _NATURAL,
) -> ChrononState:
    """Advance from ``(n-1, n)`` to ``n+1`` with the symmetric equation.

    Solved in the rest frame of ``u_n``: the spatial part of ``u_(n+1) - u_(n-1)``
    equals the impulse and the time part is the normalization root closest
    to ``u_(n-1)``.
    """
    c = units.c
    c2 = c * c
    tau0 = params.tau0
    u = curr.u
    F = field.tensor(curr.tau, curr.x)
    L, _ = rest_frame_boost(u, c)
    Linv, b = _rest_frame_impulse(u, F, 2.0 * tau0, units)
    w = L @ prev.u + b
    w[0] = 0.0
    # u_next = w + lam (1, 0, 0, 0) with u_next^2 = -c^2, future-pointing
    lam = math.sqrt(c2 + float(w[1:] @ w[1:]))
    ur = w + np.array([lam, 0.0, 0.0, 0.0])
    drift = abs(minkowski_dot(ur, ur) + c2) / c2
    res = float(np.max(np.abs(ur[1:] - (L @ prev.u)[1:] - b[1:])))
    u_next = normalize_velocity(Linv @ ur, c)
    x = transmission_update(prev.x, u, None, tau0, "symmetric")
    return ChrononState(curr.n + 1, curr.tau + tau0, x, u_next, u, 0, res, drift)


# -- non-relativistic limit ------------------------------------------------

def step_retarded_nonrel(v, field: FieldSpec, params: ChrononParams, units: UnitSystem = _NATURAL, t: float = 0.0, r=None):
    """Solve ``(m0/tau0)(v - v_prev) = e (E + v x B / c)`` for ``v`` exactly.

    The magnetic term makes this the 3x3 linear system
    ``(m0/tau0 I + (e/c)[B]x) v = (m0/tau0) v_prev + e E``.
    """
    v = np.asarray(v, dtype=float)
    r = np.zeros(3) if r is None else np.asarray(r, dtype=float)
    E, B = field(t, np.concatenate(([units.c * t], r)))
    E = np.asarray(E, dtype=float)
    Bx = np.asarray(B, dtype=float)
    cross = np.array([[0.0, -Bx[2], Bx[1]], [Bx[2], 0.0, -Bx[0]], [-Bx[1], Bx[0], 0.0]])
    A = (units.m0 / params.tau0) * np.eye(3) + (units.e / units.c) * cross
    rhs = (units.m0 / params.tau0) * v + units.e * E
    if abs(np.linalg.det(A)) < 1e-300:
        raise StepError("singular non-relativistic system")
    return np.linalg.solve(A, rhs)


def nonrel_force(v, field: FieldSpec, units: UnitSystem, t: float, r):
    E, B = field(t, np.concatenate(([units.c * t], np.asarray(r, dtype=float))))
    return units.e * (np.asarray(E) + np.cross(v, B) / units.c)


def step_advanced_nonrel(v, field, params, units=_NATURAL, t=0.0, r=None):
    r = np.zeros(3) if r is None else r
    return np.asarray(v, float) + (params.tau0 / units.m0) * nonrel_force(v, field, units, t, r)


def step_symmetric_nonrel(v_prev, v, field, params, units=_NATURAL, t=0.0, r=None):
    r = np.zeros(3) if r is None else r
    return np.asarray(v_prev, float) + (2.0 * params.tau0 / units.m0) * nonrel_force(v, field, units, t, r)


# -- trajectories ----------------------------------------------------------

@dataclass
class Trajectory:
    """Lattice samples with the metadata of the run that produced them."""

    states: list
    formulation: str
    transmission: str
    tau0: float
    relativistic: bool = True
    scenario: str = ""
    termination: str = "completed"
    message: str | None = None
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.states)

    @property
    def n(self) -> np.ndarray:
        return np.array([s.n for s in self.states], dtype=int)

    @property
    def tau(self) -> np.ndarray:
        return np.array([s.tau for s in self.states])

    @property
    def x(self) -> np.ndarray:
        return np.array([s.x for s in self.states])

    @property
    def u(self) -> np.ndarray:
        return np.array([s.u for s in self.states])

    @property
    def residual(self) -> np.ndarray:
        return np.array([s.residual for s in self.states])

    @property
    def iterations(self) -> np.ndarray:
        return np.array([s.iterations for s in self.states], dtype=int)

    @property
    def drift(self) -> np.ndarray:
        return np.array([s.drift for s in self.states])


def integrate(
    initial: ChrononState,
    field: FieldSpec,
    params: ChrononParams,
    steps: int,
    formulation: str = "retarded",
    transmission: str = "literal",
    units: UnitSystem = _NATURAL,
    seed: ChrononState | None = None,
) -> Trajectory:
    """Run a relativistic stepper for ``steps`` lattice steps.

    The symmetric formulation needs a second state; unless ``seed`` is given
    it is produced by one advanced step (the advanced transmission law gives
    ``x_1 = x_0 + tau0 u_0``).
    """
    if formulation not in FORMULATIONS:
        raise ValueError(f"unknown formulation {formulation!r}; expected one of {FORMULATIONS}")
    if transmission not in TRANSMISSIONS:
        raise ValueError(f"unknown transmission mode {transmission!r}; expected one of {TRANSMISSIONS}")
    states = [initial]
    traj = Trajectory(states, formulation, transmission, params.tau0, True)
    try:
        if formulation == "retarded":
            for _ in range(steps):
                states.append(step_retarded(states[-1], field, params, units, transmission))
        elif formulation == "advanced":
            for _ in range(steps):
                states.append(step_advanced(states[-1], field, params, units))
        else:
            if steps > 0:
                states.append(seed if seed is not None else step_advanced(initial, field, params, units))
            for _ in range(steps - 1):
                states.append(step_symmetric(states[-2], states[-1], field, params, units))
    except StepError as exc:
        traj.termination = "solver-failure"
        traj.message = str(exc)
        exc.trajectory = traj
        raise
    return traj


def integrate_nonrel(
    r0,
    v0,
    field: FieldSpec,
    params: ChrononParams,
    steps: int,
    formulation: str = "retarded",
    transmission: str = "literal",
    units: UnitSystem = _NATURAL,
    t0: float = 0.0,
    v_seed=None,
) -> Trajectory:
    """Run a non-relativistic stepper.

    States store ``x = (c t, r)`` and ``u = (c, v)``; the transmission law acts
    on ``r`` only. Forces use the position of the previous lattice point
    (explicit in ``r``, implicit in ``v`` for the retarded equation).
    """
    if formulation not in FORMULATIONS:
        raise ValueError(f"unknown formulation {formulation!r}; expected one of {FORMULATIONS}")
    c, tau0 = units.c, params.tau0

    def make(n, r, v, v_prev, res=0.0):
        t = t0 + n * tau0
        return ChrononState(n, t, np.concatenate(([c * t], r)), np.concatenate(([c], v)),
                            None if v_prev is None else np.concatenate(([c], v_prev)), 0, res, 0.0)

    r = np.asarray(r0, dtype=float)
    v = np.asarray(v0, dtype=float)
    states = [make(0, r, v, None)]
    traj = Trajectory(states, formulation, transmission, tau0, relativistic=False)
    rs, vs = [r], [v]
    try:
        for i in range(steps):
            n = i + 1
            if formulation == "retarded":
                t = t0 + n * tau0
                v_new = step_retarded_nonrel(vs[-1], field, params, units, t, rs[-1])
                r_new = transmission_update(rs[-1], v_new, vs[-1], tau0, "retarded", transmission)
                lhs = (units.m0 / tau0) * (v_new - vs[-1])
                res = float(np.max(np.abs(lhs - nonrel_force(v_new, field, units, t, rs[-1])))) * tau0 / units.m0
            elif formulation == "advanced" or (formulation == "symmetric" and i == 0 and v_seed is None):
                t = t0 + i * tau0
                v_new = step_advanced_nonrel(vs[-1], field, params, units, t, rs[-1])
                r_new = transmission_update(rs[-1], vs[-1], None, tau0, "advanced")
                res = 0.0
            elif i == 0:
                v_new = np.asarray(v_seed, dtype=float)
                r_new = transmission_update(rs[-1], vs[-1], None, tau0, "advanced")
                res = 0.0
            else:
                t = t0 + i * tau0
                v_new = step_symmetric_nonrel(vs[-2], vs[-1], field, params, units, t, rs[-1])
                r_new = transmission_update(rs[-2], vs[-1], None, tau0, "symmetric")
                res = 0.0
            rs.append(r_new)
            vs.append(v_new)
            states.append(make(n, r_new, v_new, vs[-2], res))
    except StepError as exc:
        traj.termination = "solver-failure"
        traj.message = str(exc)
        exc.trajectory = traj
        raise
    return traj


# -- internal circular motion ----------------------------------------------

@dataclass(frozen=True)
class InternalSolution:
    beta0_squared: float
    beta0: float
    gamma: float
    angular_frequency: float
    radius: float
    magnetic_moment: float
    closed_form_moment: float
    schwinger_moment: float


def internal_velocity(tau, params: ChrononParams, units: UnitSystem = _NATURAL, beta0: float | None = None):
    """Circular internal velocity ``(-b c sin(2 pi tau/tau0), -b c cos(2 pi tau/tau0), 0)``."""
    b = math.sqrt(0.75) if beta0 is None else beta0
    ph = 2.0 * math.pi * np.asarray(tau, dtype=float) / params.tau0
    return np.stack((-b * units.c * np.sin(ph), -b * units.c * np.cos(ph), np.zeros_like(ph)), axis=-1)


def internal_solution(params: ChrononParams, units: UnitSystem = _NATURAL) -> InternalSolution:
    """Uniform circular internal motion whose kinetic energy equals ``m0 c**2``.

    ``(gamma - 1) m0 c**2 = m0 c**2`` gives ``gamma = 2`` and ``beta0**2 = 3/4``.
    The magnetic moment of the charge circulating once per chronon is
    ``I A`` (SI) or ``I A / c`` (natural, Gaussian-type); with
    ``tau0 = 2 theta0`` it reduces to ``k e**3 / (4 pi m0 c)`` (SI) or
    ``k e**3 / (4 pi m0 c**2)``.
    """
    c, e, m0, k, hbar = units.c, units.e, units.m0, units.k, units.hbar
    # (gamma - 1) m0 c**2 = m0 c**2
    gamma = 2.0
    beta0_sq = 1.0 - 1.0 / (gamma * gamma)
    beta0 = math.sqrt(beta0_sq)
    tau0 = params.tau0
    radius = beta0 * c * tau0 / (2.0 * math.pi)
    loop = abs(e) / tau0 * math.pi * radius**2
    alpha = k * e * e / (hbar * c)
    if units.mode == "si":
        moment = loop
        closed = k * abs(e) ** 3 / (4.0 * math.pi * m0 * c)
        schwinger = alpha / (2.0 * math.pi) * abs(e) * hbar / (2.0 * m0)
    else:
        moment = loop / c
        closed = k * abs(e) ** 3 / (4.0 * math.pi * m0 * c * c)
        schwinger = alpha / (2.0 * math.pi) * abs(e) * hbar / (2.0 * m0 * c)
    return InternalSolution(beta0_sq, beta0, gamma, 2.0 * math.pi / tau0, radius, moment, closed, schwinger)
