"""Config loading and deterministic CSV/JSON output."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np
import yaml

from chronon.scenarios import ConfigError

SCHEMA_VERSION = "chronon/1"
TRAJECTORY_COLUMNS = (
    "n", "tau", "x0", "x1", "x2", "x3", "u0", "u1", "u2", "u3", "residual", "iterations",
)
ALD_COLUMNS = TRAJECTORY_COLUMNS + ("a0", "a1", "a2", "a3")


def load_config(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path} is not valid YAML: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must contain a mapping at top level")
    return data


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if value is None:
        return ""
    return str(value)


def write_rows(path, header, rows) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def write_trajectory_csv(traj, path) -> Path:
    """One row per lattice point with the solver diagnostics of the step that produced it."""
    rows = (
        (s.n, s.tau, *s.x, *s.u, s.residual, s.iterations)
        for s in traj.states
    )
    return write_rows(path, TRAJECTORY_COLUMNS, rows)


def write_ald_csv(traj, path) -> Path:
    """Same columns as the lattice trajectories plus the acceleration ``a0..a3``."""
    rows = (
        (i, t, *x, *u, 0.0, 0, *a)
        for i, (t, x, u, a) in enumerate(zip(traj.tau, traj.x, traj.u, traj.a))
    )
    return write_rows(path, ALD_COLUMNS, rows)


def read_csv(path) -> tuple[list, np.ndarray]:
    """Header and float matrix of an all-numeric CSV (trajectory files)."""
    with Path(path).open() as fh:
        r = csv.reader(fh)
        header = next(r)
        data = np.array([[float(v) if v else math.nan for v in row] for row in r])
    return header, data


def _default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(payload: dict) -> str:
    payload = {"schema_version": SCHEMA_VERSION, **payload}
    return json.dumps(payload, indent=2, sort_keys=True, default=_default) + "\n"


def write_json(path, payload: dict) -> Path:
    path = Path(path)
    path.write_text(dumps(payload))
    return path
