"""Minkowski algebra, unit systems and the chronon time scale.

Four-vectors are plain ``numpy`` arrays whose last axis has length 4, index 0
being the time component. The metric signature is (-,+,+,+) throughout, so a
4-velocity satisfies ``u . u = -c**2``.

Internal computations use natural units (``c = m0 = 1``); the SI mode exists
for the handful of places where physical numbers are reported (chronon value,
magnetic moment).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from chronon import constants

METRIC = np.diag([-1.0, 1.0, 1.0, 1.0])


def minkowski_dot(a, b):
    """Minkowski inner product ``-a0*b0 + a1*b1 + a2*b2 + a3*b3``.

    Broadcasts over leading axes, so stacks of vectors are contracted
    row by row.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return -a[..., 0] * b[..., 0] + a[..., 1] * b[..., 1] + a[..., 2] * b[..., 2] + a[..., 3] * b[..., 3]


def lower(a):
    """Lower the index of a contravariant vector (flip the time sign)."""
    out = np.array(a, dtype=float, copy=True)
    out[..., 0] = -out[..., 0]
    return out


def lorentz_gamma(beta: float) -> float:
    if not 0.0 <= beta < 1.0:
        raise ValueError(f"speed must satisfy 0 <= beta < 1, got {beta!r}")
    return 1.0 / math.sqrt(1.0 - beta * beta)


def four_velocity(v, c: float = 1.0):
    """4-velocity ``gamma * (c, v)`` of a 3-velocity ``v``."""
    v = np.asarray(v, dtype=float)
    beta = math.sqrt(float(v @ v)) / c
    g = lorentz_gamma(beta)
    return np.concatenate(([g * c], g * v))


def normalize_velocity(u, c: float = 1.0):
    """Rescale the time component so that ``u . u = -c**2`` exactly (future-pointing)."""
    u = np.array(u, dtype=float, copy=True)
    u[0] = math.sqrt(c * c + float(u[1:] @ u[1:]))
    return u


@dataclass(frozen=True)
class UnitSystem:
    """Charge, mass, light speed and Coulomb constant used by the dynamics.

    ``natural`` fixes ``c = m0 = k = 1`` and leaves the charge free; ``si``
    carries CODATA electron values with ``k = 1/(4 pi eps0)``.
    """

    mode: Literal["natural", "si"]
    c: float
    e: float
    m0: float
    k: float
    hbar: float

    def __post_init__(self):
        if self.mode not in ("natural", "si"):
            raise ValueError(f"unknown unit mode {self.mode!r}")
        if self.mode == "natural" and (self.c != 1.0 or self.m0 != 1.0):
            raise ValueError("natural units fix c = 1 and m0 = 1")

    @classmethod
    def natural(cls, e: float = 1.0, hbar: float = 1.0) -> UnitSystem:
        return cls("natural", c=1.0, e=float(e), m0=1.0, k=1.0, hbar=float(hbar))

    @classmethod
    def si(cls) -> UnitSystem:
        return cls(
            "si",
            c=constants.C,
            e=constants.E_CHARGE,
            m0=constants.M_ELECTRON,
            k=constants.K_COULOMB,
            hbar=constants.HBAR,
        )

    @classmethod
    def from_name(cls, name: str) -> UnitSystem:
        if name == "natural":
            return cls.natural()
        if name == "si":
            return cls.si()
        raise ValueError(f"unknown unit mode {name!r}; expected 'natural' or 'si'")


def chronon_theta0(units: UnitSystem) -> float:
    """Half-chronon ``theta0 = (2/3) k e**2 / (m0 c**3)``; the chronon is ``2*theta0``."""
    if units.m0 <= 0 or units.c <= 0:
        raise ValueError("rest mass and light speed must be positive")
    if units.e == 0 or units.k <= 0:
        raise ValueError("charge must be nonzero and k positive")
    return (2.0 / 3.0) * units.k * units.e**2 / (units.m0 * units.c**3)


@dataclass(frozen=True)
class ChrononParams:
    """The proper-time quantum ``tau0`` and the scales derived from it."""

    tau0: float

    def __post_init__(self):
        if not (self.tau0 > 0 and math.isfinite(self.tau0)):
            raise ValueError(f"tau0 must be positive and finite, got {self.tau0!r}")

    @property
    def theta0(self) -> float:
        return 0.5 * self.tau0

    @property
    def omega0(self) -> float:
        # ground frequency of the internal motion, period 2*tau0
        return math.pi / self.tau0

    @classmethod
    def from_units(cls, units: UnitSystem) -> ChrononParams:
        return cls(2.0 * chronon_theta0(units))
