"""Command-line front end.

Verbs: ``run``, ``check-identities``, ``compare``, ``sweep``.

Exit status: 0 when everything ran and every check passed, 1 when a
numerical check or integration failed, 2 for usage and configuration
errors (in which case nothing is written).

Set ``CHRONON_LOG`` to a logging level name (``DEBUG``, ``INFO``...) for
progress messages on stderr.
"""

from __future__ import annotations

import argparse
import itertools
import logging
import math
import os
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from chronon import ald, fourier, io, series
from chronon.kinematics import chronon_theta0
from chronon.scenarios import ConfigError, ScenarioConfig, integrate_scenario, summarize
from chronon.stepper import StepError

log = logging.getLogger("chronon")

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _overrides(args) -> dict:
    return {
        "formulation": getattr(args, "formulation", None),
        "transmission": getattr(args, "transmission", None),
        "units": getattr(args, "units", None),
    }


def _load(args) -> ScenarioConfig:
    return ScenarioConfig.from_dict(io.load_config(args.config), **_overrides(args))


def _out_dir(args, cfg: ScenarioConfig | None = None) -> Path:
    if args.out:
        return Path(args.out)
    if cfg is not None and cfg.output.get("dir"):
        return Path(cfg.output["dir"])
    return Path(".")


def _prepare(out: Path) -> None:
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise UsageError(f"cannot create output directory {out}: {exc.strerror}") from None


def cmd_run(args) -> int:
    cfg = _load(args)
    out = _out_dir(args, cfg)
    prefix = cfg.output.get("prefix", cfg.scenario)
    _prepare(out)
    status = EXIT_OK
    try:
        traj = integrate_scenario(cfg)
    except StepError as exc:
        log.error("integration failed: %s", exc)
        traj = exc.trajectory
        traj.scenario = cfg.scenario
        status = EXIT_FAILED
    summary = summarize(traj, cfg)
    csv_path = io.write_trajectory_csv(traj, out / f"{prefix}.csv")
    meta_path = io.write_json(out / f"{prefix}.json", {
        "config": cfg.to_dict(),
        "termination": traj.termination,
        "message": traj.message,
        "meta": traj.meta,
        "columns": list(io.TRAJECTORY_COLUMNS),
    })
    report_path = out / f"{prefix}_report.json"
    report = {
        "config": cfg.to_dict(),
        "termination": traj.termination,
        "summary": summary,
        "manifest": [str(csv_path), str(meta_path), str(report_path)],
    }
    io.write_json(report_path, report)
    print(io.dumps({"summary": summary, "manifest": report["manifest"]}), end="")
    return status


def cmd_check_identities(args) -> int:
    if args.max_m < 1:
        raise UsageError("--max-m must be at least 1")
    if args.ntrunc < 1:
        raise UsageError("--ntrunc must be positive")
    if args.max_m > series.CERTIFIED_MAX:
        warnings.warn(f"--max-m {args.max_m} exceeds the certified range m <= {series.CERTIFIED_MAX}",
                      series.PrecisionWarning, stacklevel=1)
    if args.out:
        _prepare(Path(args.out))
    try:
        report = fourier.identity_report(args.max_m, args.ntrunc)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    text = io.dumps(report)
    if args.out:
        (Path(args.out) / "identities.json").write_text(text)
    print(text, end="")
    for row in report["failed"]:
        log.warning("check %s (m=%s) failed: |%r - %r| = %.3e", row["check"], row["m"], row["value"],
                    row["expected"], row["abs_error"])
    return EXIT_OK if report["passed"] else EXIT_FAILED


def _check_compare(cfg: ScenarioConfig) -> None:
    if cfg.scenario != "em_pulse":
        raise ConfigError("compare needs an em_pulse configuration")
    if cfg.formulation != "retarded":
        raise ConfigError("compare contrasts the retarded formulation; set formulation: retarded")


def compare(cfg: ScenarioConfig) -> tuple[dict, object, object]:
    """Run one pulse through the retarded chronon stepper and the reaction equation."""
    _check_compare(cfg)
    units = cfg.unit_system()
    theta0 = chronon_theta0(units)
    traj = integrate_scenario(cfg)
    chronon_summary = summarize(traj, cfg)
    tau_on = traj.meta["onset_step"] * cfg.tau0
    E = np.asarray(cfg.field.get("E", (1.0, 0.0, 0.0)), dtype=float)
    opts = cfg.ald
    before = float(opts.get("before", 10.0))
    after = float(opts.get("after", 5.0))
    step = opts.get("step")
    step = theta0 / 50.0 if step is None else float(step) * theta0
    window = float(opts.get("window", 5.0))
    pulse = ald.pulse_physical_solution(E, tau_on, before, after, step, units, relativistic=cfg.relativistic)
    amag = ald.acceleration_magnitude(pulse)
    pre = pulse.tau < tau_on
    i_on = int(np.argmin(np.abs(pulse.tau - tau_on)))
    i_back = int(np.argmin(np.abs(pulse.tau - (tau_on - window * theta0))))
    rate = None
    ratio = None
    if amag[i_on] > 0:
        rate = ald.pre_pulse_rate(pulse, tau_on, window) * theta0
        ratio = float(amag[i_back] / amag[i_on] / math.exp(-window))
    seed = float(opts.get("seed_acceleration", 1e-6))
    free = ald.runaway(seed, float(opts.get("runaway_efolds", 10.0)), step, units, cfg.relativistic)
    free_rate = ald.fit_exponential_rate(free.tau, ald.acceleration_magnitude(free)) * theta0
    summary = {
        "theta0": theta0,
        "tau_on": tau_on,
        "chronon_pre_pulse_response": chronon_summary["pre_pulse_response"],
        "chronon_termination": traj.termination,
        "ald_pre_pulse_response": float(np.max(amag[pre])) if pre.any() else 0.0,
        "ald_rate_times_theta0": rate,
        "ald_decay_ratio_over_window": ratio,
        "ald_window_theta0": window,
        "ald_termination": pulse.termination,
        "runaway_efold_over_theta0": 1.0 / free_rate if free_rate else None,
        "runaway_termination": free.termination,
    }
    checks = {
        "chronon_no_pre_acceleration": summary["chronon_pre_pulse_response"] == 0.0,
        "ald_rate_within_5pct": rate is None or abs(rate - 1.0) <= 0.05,
        "runaway_within_1pct": summary["runaway_efold_over_theta0"] is not None
        and abs(summary["runaway_efold_over_theta0"] - 1.0) <= 0.01,
    }
    summary["checks"] = checks
    summary["passed"] = all(checks.values())
    return summary, traj, pulse


def cmd_compare(args) -> int:
    cfg = _load(args)
    _check_compare(cfg)
    out = _out_dir(args, cfg)
    _prepare(out)
    try:
        summary, traj, pulse = compare(cfg)
    except StepError as exc:
        log.error("chronon integration failed: %s", exc)
        return EXIT_FAILED
    files = [
        io.write_trajectory_csv(traj, out / "compare_chronon.csv"),
        io.write_ald_csv(pulse, out / "compare_ald.csv"),
    ]
    report_path = out / "compare_report.json"
    files.append(report_path)
    io.write_json(report_path, {"config": cfg.to_dict(), "summary": summary, "manifest": [str(f) for f in files]})
    print(io.dumps({"summary": summary}), end="")
    return EXIT_OK if summary["passed"] else EXIT_FAILED


def sweep_grid(cfg_raw: dict) -> list[dict]:
    """Cartesian product of the ``sweep`` lists, in the order they are written."""
    ranges = cfg_raw.get("sweep") or {}
    keys = list(ranges)
    points = []
    for combo in itertools.product(*(ranges[k] for k in keys)):
        points.append(dict(zip(keys, combo)))
    return points or [{}]


def _apply(raw: dict, point: dict) -> dict:
    raw = {**raw, "sweep": {}}
    raw["field"] = dict(raw.get("field") or {})
    for key, value in point.items():
        if key.startswith("field."):
            raw["field"][key[6:]] = value
        else:
            raw[key] = value
    return raw


def _sweep_point(task):
    raw, point, overrides = task
    row = {"point": point, "error": ""}
    try:
        cfg = ScenarioConfig.from_dict(_apply(raw, point), **overrides)
        traj = integrate_scenario(cfg)
        row.update({k: v for k, v in summarize(traj, cfg).items() if isinstance(v, (int, float, str, bool))})
    except (ConfigError, StepError) as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def cmd_sweep(args) -> int:
    raw = io.load_config(args.config)
    base = ScenarioConfig.from_dict(raw, **_overrides(args))  # validates everything but the grid values
    if not base.sweep:
        log.info("no sweep ranges given; running a single point")
    out = _out_dir(args, base)
    _prepare(out)
    points = sweep_grid(raw)
    tasks = [(raw, p, _overrides(args)) for p in points]
    if args.jobs == 1 or len(tasks) == 1:
        rows = [_sweep_point(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=args.jobs or None) as pool:
            rows = list(pool.map(_sweep_point, tasks))
    param_keys = list(points[0])
    stat_keys = []
    for row in rows:
        for k in row:
            if k not in ("point", "error") and k not in stat_keys:
                stat_keys.append(k)
    header = [f"sweep.{k}" for k in param_keys] + stat_keys + ["error"]

    def cell(v):
        return v if not isinstance(v, (list, tuple)) else " ".join(repr(float(x)) for x in v)

    table = [[cell(r["point"].get(k)) for k in param_keys] + [r.get(k) for k in stat_keys] + [r["error"]] for r in rows]
    path = io.write_rows(out / "sweep.csv", header, table)
    failed = sum(1 for r in rows if r["error"])
    print(io.dumps({"points": len(rows), "failed": failed, "manifest": [str(path)]}), end="")
    return EXIT_FAILED if failed == len(rows) else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chronon", description="Discrete-time electron dynamics toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def scenario_flags(p, config_required=True):
        p.add_argument("--config", required=config_required, help="YAML scenario file")
        p.add_argument("--out", help="output directory (default: output.dir from the config, else .)")
        p.add_argument("--formulation", choices=("retarded", "advanced", "symmetric"))
        p.add_argument("--transmission", choices=("literal", "trapezoidal"))
        p.add_argument("--units", choices=("natural", "si"))

    p = sub.add_parser("run", help="integrate one scenario")
    scenario_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("check-identities", help="series identities and closed-form checks")
    p.add_argument("--max-m", type=int, default=series.CERTIFIED_MAX)
    p.add_argument("--ntrunc", type=int, default=series.DEFAULT_NTRUNC)
    p.add_argument("--out", help="also write identities.json here")
    p.set_defaults(func=cmd_check_identities)

    p = sub.add_parser("compare", help="chronon vs radiation-reaction pulse response")
    scenario_flags(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("sweep", help="run a grid of scenario variants")
    scenario_flags(p)
    p.add_argument("--jobs", type=int, default=0, help="worker processes (0: one per CPU)")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    level = os.environ.get("CHRONON_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (ConfigError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
