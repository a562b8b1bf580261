"""Scenario presets and their configuration.

A scenario bundles a field, initial data and the stepper settings. The first
three run the relativistic steppers; the last three are non-relativistic
problems driven through the 3-vector steppers.

==========================  ==========================================
``free``                    no field
``em_pulse``                uniform E switched on at a lattice index
``hyperbolic``              constant E from rest
``time_dependent_force``    ``E(t) = E0 sin(omega t + phase)``
``constant_B``              uniform magnetic field
``elastic``                 restoring force ``-k r``
==========================  ==========================================
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass
from dataclasses import field as dc_field

import numpy as np

from chronon.fields import FieldSpec, elastic_field, no_field, oscillating_field, step_pulse, uniform_field
from chronon.kinematics import ChrononParams, UnitSystem, four_velocity, minkowski_dot
from chronon.stepper import FORMULATIONS, TRANSMISSIONS, ChrononState, Trajectory, integrate, integrate_nonrel

log = logging.getLogger(__name__)

SCENARIOS = ("free", "em_pulse", "hyperbolic", "time_dependent_force", "constant_B", "elastic")
RELATIVISTIC_DEFAULT = {
    "free": True,
    "em_pulse": True,
    "hyperbolic": True,
    "time_dependent_force": False,
    "constant_B": False,
    "elastic": False,
}
FIELD_KEYS = {
    "free": set(),
    "em_pulse": {"E", "B", "onset_step"},
    "hyperbolic": {"E"},
    "time_dependent_force": {"E0", "omega", "phase"},
    "constant_B": {"B", "E"},
    "elastic": {"k_spring"},
}
TOP_KEYS = {
    "scenario", "formulation", "transmission", "units", "tau0", "steps", "charge",
    "relativistic", "field", "initial", "output", "sweep", "ald",
}


class ConfigError(ValueError):
    """Invalid scenario configuration."""


def _vec3(value, what):
    try:
        arr = np.asarray(value, dtype=float).reshape(-1)
    except (TypeError, ValueError):
        raise ConfigError(f"{what} must be a list of three numbers, got {value!r}") from None
    if arr.shape != (3,) or not np.all(np.isfinite(arr)):
        raise ConfigError(f"{what} must be three finite numbers, got {value!r}")
    return arr


def _positive(value, what):
    try:
        v = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{what} must be a number, got {value!r}") from None
    if not (v > 0 and math.isfinite(v)):
        raise ConfigError(f"{what} must be positive and finite, got {value!r}")
    return v


@dataclass
class ScenarioConfig:
    """A fully validated run description; build it with :meth:`from_dict`."""

    scenario: str
    formulation: str = "retarded"
    transmission: str = "literal"
    units: str = "natural"
    tau0: float = 0.01
    steps: int = 100
    charge: float = 1.0
    relativistic: bool = True
    field: dict = dc_field(default_factory=dict)
    initial: dict = dc_field(default_factory=dict)
    output: dict = dc_field(default_factory=dict)
    sweep: dict = dc_field(default_factory=dict)
    ald: dict = dc_field(default_factory=dict)

    @classmethod
    def from_dict(cls, raw: dict, **overrides) -> ScenarioConfig:
        if not isinstance(raw, dict):
            raise ConfigError("configuration must be a mapping")
        raw = {**raw, **{k: v for k, v in overrides.items() if v is not None}}
        unknown = set(raw) - TOP_KEYS
        if unknown:
            raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
        name = raw.get("scenario")
        if name not in SCENARIOS:
            raise ConfigError(f"unknown scenario {name!r}; valid names: {', '.join(SCENARIOS)}")
        cfg = cls(
            scenario=name,
            formulation=raw.get("formulation", "retarded"),
            transmission=raw.get("transmission", "literal"),
            units=raw.get("units", "natural"),
            tau0=raw.get("tau0", 0.01),
            steps=raw.get("steps", 100),
            charge=raw.get("charge", 1.0),
            relativistic=raw.get("relativistic", RELATIVISTIC_DEFAULT[name]),
            field=dict(raw.get("field") or {}),
            initial=dict(raw.get("initial") or {}),
            output=dict(raw.get("output") or {}),
            sweep=dict(raw.get("sweep") or {}),
            ald=dict(raw.get("ald") or {}),
        )
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if self.formulation not in FORMULATIONS:
            raise ConfigError(f"unknown formulation {self.formulation!r}; valid: {', '.join(FORMULATIONS)}")
        if self.transmission not in TRANSMISSIONS:
            raise ConfigError(f"unknown transmission mode {self.transmission!r}; valid: {', '.join(TRANSMISSIONS)}")
        if self.units not in ("natural", "si"):
            raise ConfigError(f"unknown unit mode {self.units!r}; valid: natural, si")
        self.tau0 = _positive(self.tau0, "tau0")
        if isinstance(self.steps, bool) or not isinstance(self.steps, int) or self.steps < 0:
            raise ConfigError(f"steps must be a non-negative integer, got {self.steps!r}")
        if not isinstance(self.relativistic, bool):
            raise ConfigError("relativistic must be true or false")
        try:
            self.charge = float(self.charge)
        except (TypeError, ValueError):
            raise ConfigError(f"charge must be a number, got {self.charge!r}") from None
        if self.charge == 0 or not math.isfinite(self.charge):
            raise ConfigError("charge must be nonzero and finite")
        extra = set(self.field) - FIELD_KEYS[self.scenario]
        if extra:
            raise ConfigError(f"field keys {sorted(extra)} not used by scenario {self.scenario!r}")
        for key in ("E", "B", "E0"):
            if key in self.field:
                _vec3(self.field[key], f"field.{key}")
        if "onset_step" in self.field:
            n0 = self.field["onset_step"]
            if isinstance(n0, bool) or not isinstance(n0, int) or n0 < 0:
                raise ConfigError(f"field.onset_step must be a non-negative integer, got {n0!r}")
        for key in ("omega", "k_spring"):
            if key in self.field:
                _positive(self.field[key], f"field.{key}")
        extra = set(self.initial) - {"x", "v"}
        if extra:
            raise ConfigError(f"unknown initial-state keys {sorted(extra)}; expected x, v")
        v = _vec3(self.initial.get("v", (0.0, 0.0, 0.0)), "initial.v")
        _vec3(self.initial.get("x", (0.0, 0.0, 0.0)), "initial.x")
        c = self.unit_system().c
        if self.relativistic and float(v @ v) >= c * c:
            raise ConfigError("initial speed must be below c")
        for key, values in self.sweep.items():
            if key not in ("tau0", "steps", "charge") and not key.startswith("field."):
                raise ConfigError(f"cannot sweep {key!r}; use tau0, steps, charge or field.<name>")
            if not isinstance(values, list) or not values:
                raise ConfigError(f"sweep.{key} must be a non-empty list")

    def unit_system(self) -> UnitSystem:
        if self.units == "si":
            return UnitSystem.si()
        return UnitSystem.natural(e=self.charge)

    def params(self) -> ChrononParams:
        return ChrononParams(self.tau0)

    def field_spec(self) -> FieldSpec:
        f = self.field
        zero = (0.0, 0.0, 0.0)
        name = self.scenario
        if name == "free":
            return no_field()
        if name == "em_pulse":
            onset = f.get("onset_step", self.steps // 2)
            return step_pulse(f.get("E", (1.0, 0.0, 0.0)), onset * self.tau0, f.get("B", zero))
        if name == "hyperbolic":
            return uniform_field(f.get("E", (1.0, 0.0, 0.0)))
        if name == "time_dependent_force":
            return oscillating_field(f.get("E0", (1.0, 0.0, 0.0)), float(f.get("omega", 1.0)), float(f.get("phase", 0.0)))
        if name == "constant_B":
            return uniform_field(f.get("E", zero), f.get("B", (0.0, 0.0, 1.0)))
        return elastic_field(float(f.get("k_spring", 1.0)), self.unit_system().e)

    def to_dict(self) -> dict:
        return asdict(self)


def integrate_scenario(config: ScenarioConfig) -> Trajectory:
    """Run one scenario. A failing step raises :class:`StepError` with the partial trajectory attached."""
    units = config.unit_system()
    params = config.params()
    spec = config.field_spec()
    x0 = np.asarray(config.initial.get("x", (0.0, 0.0, 0.0)), dtype=float)
    v0 = np.asarray(config.initial.get("v", (0.0, 0.0, 0.0)), dtype=float)
    log.info("integrating %s (%s/%s, %d steps)", config.scenario, config.formulation, config.transmission, config.steps)
    if config.relativistic:
        start = ChrononState(0, 0.0, np.concatenate(([0.0], x0)), four_velocity(v0, units.c))
        traj = integrate(start, spec, params, config.steps, config.formulation, config.transmission, units)
    else:
        traj = integrate_nonrel(x0, v0, spec, params, config.steps, config.formulation, config.transmission, units)
    traj.scenario = config.scenario
    traj.meta.update({"units": config.units, "charge": units.e, "field": spec.name, "field_params": spec.params})
    if "onset_step" in config.field or config.scenario == "em_pulse":
        traj.meta["onset_step"] = config.field.get("onset_step", config.steps // 2)
    drift = traj.drift
    if len(drift):
        log.debug("largest pre-renormalization drift %.3e", drift.max())
    return traj


def _mean_rotation(vel_plane) -> float:
    ang = np.arctan2(vel_plane[:, 1], vel_plane[:, 0])
    d = np.diff(np.unwrap(ang))
    return float(np.mean(np.abs(d))) if len(d) else 0.0


def summarize(traj: Trajectory, config: ScenarioConfig | None = None) -> dict:
    """Scalar diagnostics of a trajectory; scenario-specific entries where meaningful."""
    u = traj.u
    its = traj.iterations
    hist = {str(int(k)): int(v) for k, v in zip(*np.unique(its, return_counts=True))}
    out = {
        "scenario": traj.scenario,
        "formulation": traj.formulation,
        "transmission": traj.transmission,
        "relativistic": traj.relativistic,
        "tau0": traj.tau0,
        "steps": len(traj) - 1,
        "termination": traj.termination,
        "max_residual": float(traj.residual.max()) if len(traj) else 0.0,
        "max_drift": float(traj.drift.max()) if len(traj) else 0.0,
        "iteration_histogram": hist,
        "final_u": u[-1].tolist(),
    }
    if traj.relativistic:
        c = (config.unit_system().c if config else 1.0)
        norm = np.abs(minkowski_dot(u, u) + c * c) / (c * c)
        out["max_normalization_error"] = float(norm.max())
    if traj.scenario == "em_pulse":
        n0 = int(traj.meta.get("onset_step", 0))
        pre = u[: min(n0, len(u))]
        out["onset_step"] = n0
        out["pre_pulse_response"] = float(np.max(np.abs(pre - u[0]))) if len(pre) else 0.0
    if traj.scenario == "hyperbolic" and len(u) > 1:
        c = config.unit_system().c if config else 1.0
        rap = np.arcsinh(np.linalg.norm(u[:, 1:], axis=1) / c)
        out["rapidity_per_step"] = float(np.mean(np.diff(rap)))
    if traj.scenario == "constant_B" and len(u) > 1:
        B = np.asarray((config.field.get("B", (0, 0, 1)) if config else (0, 0, 1)), dtype=float)
        bhat = B / np.linalg.norm(B)
        e1 = np.cross(bhat, [1.0, 0, 0]) if abs(bhat[0]) < 0.9 else np.cross(bhat, [0, 1.0, 0])
        e1 /= np.linalg.norm(e1)
        e2 = np.cross(bhat, e1)
        v = u[:, 1:]
        plane = np.stack((v @ e1, v @ e2), axis=1)
        out["rotation_angle_per_step"] = _mean_rotation(plane)
        sp = np.linalg.norm(plane, axis=1)
        if sp[0] > 0 and sp[1] > 0:
            out["speed_ratio_per_step"] = float((sp[-1] / sp[0]) ** (1.0 / (len(sp) - 1)))
    if traj.scenario == "elastic" and len(u) > 1:
        r = traj.x[:, 1:]
        amp = np.linalg.norm(r, axis=1)
        half = max(1, len(amp) // 2)
        first, last = amp[:half].max(), amp[half:].max() if len(amp) > half else amp.max()
        out["amplitude_first_half"] = float(first)
        out["amplitude_second_half"] = float(last)
        out["amplitude_drift"] = float(abs(last - first) / first) if first > 0 else 0.0
    return out
