"""Discrete-time (chronon) electron dynamics and higher-derivative mechanics."""

from chronon.kinematics import (
    METRIC,
    ChrononParams,
    UnitSystem,
    chronon_theta0,
    four_velocity,
    lorentz_gamma,
    minkowski_dot,
)

__version__ = "0.1.0"

__all__ = [
    "METRIC",
    "ChrononParams",
    "UnitSystem",
    "chronon_theta0",
    "four_velocity",
    "lorentz_gamma",
    "minkowski_dot",
]
