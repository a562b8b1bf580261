import math
from pathlib import Path

import numpy as np
import pytest

import oracles
from chronon.io import load_config
from chronon.scenarios import SCENARIOS, ConfigError, ScenarioConfig, integrate_scenario, summarize

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def make(**kw):
    base = {"scenario": "free", "steps": 10, "tau0": 0.1}
    base.update(kw)
    return ScenarioConfig.from_dict(base)


@pytest.mark.parametrize(
    "raw, match",
    [
        ({"scenario": "warp"}, "valid names: free, em_pulse"),
        ({"scenario": "free", "colour": 1}, "unknown configuration keys"),
        ({"scenario": "free", "formulation": "sideways"}, "formulation"),
        ({"scenario": "free", "transmission": "midpoint"}, "transmission"),
        ({"scenario": "free", "units": "cgs"}, "unit mode"),
        ({"scenario": "free", "tau0": -1}, "tau0"),
        ({"scenario": "free", "tau0": "fast"}, "tau0"),
        ({"scenario": "free", "steps": 2.5}, "steps"),
        ({"scenario": "free", "steps": True}, "steps"),
        ({"scenario": "free", "charge": 0}, "charge"),
        ({"scenario": "free", "relativistic": "yes"}, "relativistic"),
        ({"scenario": "free", "field": {"E": [1, 0, 0]}}, "not used"),
        ({"scenario": "hyperbolic", "field": {"E": [1, 0]}}, "three"),
        ({"scenario": "em_pulse", "field": {"onset_step": -3}}, "onset_step"),
        ({"scenario": "elastic", "field": {"k_spring": 0}}, "k_spring"),
        ({"scenario": "free", "initial": {"v": [1.2, 0, 0]}}, "below c"),
        ({"scenario": "free", "initial": {"w": [0, 0, 0]}}, "initial-state"),
        ({"scenario": "free", "sweep": {"units": ["si"]}}, "cannot sweep"),
        ({"scenario": "free", "sweep": {"tau0": []}}, "non-empty"),
    ],
)
def test_validation_errors(raw, match):
    with pytest.raises(ConfigError, match=match):
        ScenarioConfig.from_dict(raw)


def test_defaults_and_overrides():
    cfg = ScenarioConfig.from_dict({"scenario": "constant_B"}, formulation="advanced", units=None)
    assert cfg.formulation == "advanced"
    assert cfg.units == "natural"
    assert cfg.relativistic is False
    assert make().relativistic is True


def test_round_trip_through_dict():
    cfg = ScenarioConfig.from_dict(load_config(CONFIGS / "em_pulse.yaml"))
    assert ScenarioConfig.from_dict(cfg.to_dict()) == cfg


def test_si_units():
    cfg = make(units="si")
    assert cfg.unit_system().c == pytest.approx(299792458.0)
    assert make(charge=0.5).unit_system().e == 0.5


@pytest.mark.parametrize("name", SCENARIOS)
@pytest.mark.parametrize("formulation", ["retarded", "advanced", "symmetric"])
def test_every_scenario_runs(name, formulation):
    cfg = ScenarioConfig.from_dict({"scenario": name, "formulation": formulation, "steps": 20, "tau0": 0.05,
                                    "initial": {"x": [0.01, 0, 0], "v": [0.01, 0, 0]}})
    traj = integrate_scenario(cfg)
    assert len(traj) == 21
    summary = summarize(traj, cfg)
    assert summary["termination"] == "completed"
    assert summary["steps"] == 20
    assert np.all(np.isfinite(traj.u))


def test_free_config_is_flat():
    cfg = ScenarioConfig.from_dict(load_config(CONFIGS / "free.yaml"))
    traj = integrate_scenario(cfg)
    assert np.all(traj.u == traj.u[0])
    s = summarize(traj, cfg)
    assert s["iteration_histogram"] == {"0": 201}
    assert s["max_normalization_error"] < 1e-12


def test_em_pulse_summary_reports_zero_pre_pulse_response():
    cfg = make(scenario="em_pulse", steps=60, field={"E": [0.01, 0, 0], "onset_step": 40})
    s = summarize(integrate_scenario(cfg), cfg)
    assert s["onset_step"] == 40
    assert s["pre_pulse_response"] == 0.0
    assert s["final_u"][1] > 0


def test_em_pulse_default_onset():
    cfg = make(scenario="em_pulse", steps=30)
    traj = integrate_scenario(cfg)
    assert traj.meta["onset_step"] == 15
    assert summarize(traj, cfg)["pre_pulse_response"] == 0.0


def test_hyperbolic_rapidity_summary():
    cfg = ScenarioConfig.from_dict(load_config(CONFIGS / "hyperbolic.yaml"))
    s = summarize(integrate_scenario(cfg), cfg)
    ref = oracles.hyperbolic_rapidity(1, 1.0, 0.5, cfg.tau0)
    assert s["rapidity_per_step"] == pytest.approx(ref, rel=1e-8)


@pytest.mark.parametrize("tau0", [0.05, 0.4])
def test_constant_B_rotation_summary(tau0):
    cfg = make(scenario="constant_B", tau0=tau0, steps=50, field={"B": [0, 0, 2.0]}, initial={"v": [0.01, 0, 0]})
    s = summarize(integrate_scenario(cfg), cfg)
    angle, speed = oracles.magnetic_rotation(1.0, 2.0, tau0)
    assert s["rotation_angle_per_step"] == pytest.approx(angle, rel=1e-10)
    assert s["speed_ratio_per_step"] == pytest.approx(speed, rel=1e-10)


def test_elastic_transmission_laws_differ():
    raw = load_config(CONFIGS / "elastic.yaml")
    trap = summarize(integrate_scenario(ScenarioConfig.from_dict(raw)))
    lit = summarize(integrate_scenario(ScenarioConfig.from_dict({**raw, "transmission": "literal"})))
    # trapezoidal: the discrete map has determinant 1 + k tau0**2 / (2 m0), a slow growth
    q = 1.0 * 0.01**2
    growth = (1 + q / 2) ** (1000 / 2)
    assert trap["amplitude_second_half"] > trap["amplitude_first_half"]
    assert trap["amplitude_drift"] < 2 * (growth - 1)
    assert trap["amplitude_drift"] < 0.05
    # literal: the position barely moves
    assert lit["amplitude_second_half"] <= lit["amplitude_first_half"] + 1e-12


def test_summary_iteration_histogram_counts_every_state():
    cfg = make(scenario="hyperbolic", steps=25, field={"E": [0.2, 0, 0]})
    s = summarize(integrate_scenario(cfg), cfg)
    assert sum(s["iteration_histogram"].values()) == 26
    assert math.isfinite(s["max_residual"])
