"""External electromagnetic fields.

A :class:`FieldSpec` wraps an evaluator ``eb(tau, x) -> (E, B)`` returning
the electric and magnetic 3-vectors at lattice time ``tau`` and 4-position
``x``. The relativistic steppers use the covariant tensor built from it,
``F_{0i} = -E_i`` and ``F_{ij} = eps_{ijk} B_k``, for which the 4-force is
``f^mu = (e/c) eta^{mu a} F_{a nu} u^nu``: spatially ``e gamma (E + v x B / c)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from chronon.kinematics import METRIC

_ZERO3 = np.zeros(3)


def field_tensor(E, B) -> np.ndarray:
    E = np.asarray(E, dtype=float)
    B = np.asarray(B, dtype=float)
    F = np.zeros((4, 4))
    F[0, 1:] = -E
    F[1:, 0] = E
    F[1, 2], F[2, 3], F[3, 1] = B[2], B[0], B[1]
    F[2, 1], F[3, 2], F[1, 3] = -B[2], -B[0], -B[1]
    return F


def lorentz_force(F, u, e: float, c: float) -> np.ndarray:
    """Contravariant 4-force ``(e/c) F^mu_nu u^nu``; orthogonal to ``u`` by antisymmetry."""
    return (e / c) * (METRIC @ (np.asarray(F) @ np.asarray(u, dtype=float)))


@dataclass(frozen=True)
class FieldSpec:
    name: str
    eb: Callable
    params: dict = field(default_factory=dict)

    def tensor(self, tau: float, x) -> np.ndarray:
        return field_tensor(*self.eb(tau, x))

    def __call__(self, tau: float, x):
        return self.eb(tau, x)


def no_field() -> FieldSpec:
    return FieldSpec("free", lambda tau, x: (_ZERO3, _ZERO3))


def uniform_field(E=(0.0, 0.0, 0.0), B=(0.0, 0.0, 0.0)) -> FieldSpec:
    E = np.asarray(E, dtype=float)
    B = np.asarray(B, dtype=float)
    return FieldSpec("uniform", lambda tau, x: (E, B), {"E": E.tolist(), "B": B.tolist()})


def step_pulse(E, tau_on: float, B=(0.0, 0.0, 0.0)) -> FieldSpec:
    """Uniform field switched on at ``tau_on`` (inclusive) and left on."""
    E = np.asarray(E, dtype=float)
    B = np.asarray(B, dtype=float)

    def eb(tau, x):
        return (E, B) if tau >= tau_on else (_ZERO3, _ZERO3)

    return FieldSpec("step_pulse", eb, {"E": E.tolist(), "B": B.tolist(), "tau_on": tau_on})


def oscillating_field(E0, omega: float, phase: float = 0.0) -> FieldSpec:
    """``E(t) = E0 sin(omega t + phase)``, no magnetic field."""
    E0 = np.asarray(E0, dtype=float)
    return FieldSpec(
        "oscillating",
        lambda t, x: (E0 * np.sin(omega * t + phase), _ZERO3),
        {"E0": E0.tolist(), "omega": omega, "phase": phase},
    )


def elastic_field(k_spring: float, charge: float) -> FieldSpec:
    """Electric field producing the restoring force ``-k r`` on ``charge``."""
    scale = -k_spring / charge
    return FieldSpec(
        "elastic",
        lambda t, x: (scale * np.asarray(x, dtype=float)[1:], _ZERO3),
        {"k_spring": k_spring},
    )
