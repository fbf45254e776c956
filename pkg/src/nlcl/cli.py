"""Command-line experiment runner.

Every subcommand reads one JSON experiment file::

    nlcl simulate config.json
    nlcl verify config.json --bounds gap,smoothing,support
    nlcl oracle-compare config.json
    nlcl converge config.json --Ns 32,64,128 --p 1

Exit status is 0 on success (all requested bounds pass), 1 when a bound
fails and 2 for configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import __version__
from . import model as mdl
from .dynamics import RhsMode, StepRejected, Trajectory, integrate, velocity_field
from .measure import Measure1D, MeasureError, quantile_of, wasserstein
from .oracle import RAREFACTION
from .verify import (BoundReport, ResolutionError, TestBump, check_gap, check_max_principle,
                     check_smoothing, check_stability, check_support, convergence_study,
                     not_applicable, weak_residuals, _report)

BOUNDS = ("gap", "smoothing", "max_principle", "support", "stability", "weak_residual")
EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        self.field = field_name
        super().__init__(f"config field {field_name!r}: {message}")


@dataclass
class ExperimentConfig:
    model: mdl.ModelSpec
    model_desc: dict
    initial: Measure1D
    N: int
    T: float
    mode: RhsMode = RhsMode.PARTICLE_U
    dt: object = "auto"
    snapshot_times: list = field(default_factory=list)
    output_dir: Path = Path(".")
    initial_b: Optional[Measure1D] = None
    p: float = 2.0
    bumps: list = field(default_factory=list)
    weak_field: str = "particle"
    weak_tol: Optional[float] = None
    R: Optional[float] = None


def _number(raw, key, cond=lambda v: True, what="a number"):
    v = raw[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v) or not cond(v):
        raise ConfigError(key, f"expected {what}, got {v!r}")
    return float(v)


def _measure(raw, key):
    try:
        data = raw[key]
        if not isinstance(data, dict):
            raise ConfigError(key, "expected an object with 'atoms' and/or 'pieces'")
        return Measure1D.from_dict(data)
    except (KeyError, TypeError) as exc:
        raise ConfigError(key, f"malformed measure ({exc})") from None
    except MeasureError as exc:
        raise ConfigError(key, str(exc)) from None


def _model(spec):
    if isinstance(spec, str):
        spec = {"name": spec}
    if not isinstance(spec, dict):
        raise ConfigError("model", "expected a builtin name or an object")
    name = spec.get("name", "table" if "table" in spec else None)
    try:
        if name in mdl.BUILTINS:
            m = mdl.builtin_model(name)
            kernel = m.kernel
        elif name == "table":
            table = spec.get("table")
            if not table or any(len(row) != 2 for row in table):
                raise ConfigError("model.table", "expected a list of [x, V(x)] pairs on x <= 0")
            xs, vs = zip(*table)
            kernel = mdl.tabulated_kernel(xs, vs, spec.get("lambda"), spec.get("lip_V"))
        else:
            raise ConfigError("model.name", f"unknown model {name!r}")
        vel = spec.get("velocity", {})
        velocity = mdl.linear_velocity(float(vel.get("vmax", 1.0)), float(vel.get("slope", 1.0)))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("model", str(exc)) from None
    return mdl.ModelSpec(velocity, kernel, name=name), spec


def parse_config(raw: dict, base_dir: Path = Path(".")) -> ExperimentConfig:
    """Validate a decoded JSON config; raises :class:`ConfigError` naming the bad field."""
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "expected a JSON object")
    for key in ("model", "initial", "N", "T"):
        if key not in raw:
            raise ConfigError(key, "missing required field")
    model, desc = _model(raw["model"])
    N = raw["N"]
    if isinstance(N, bool) or not isinstance(N, int) or N < 1:
        raise ConfigError("N", f"expected an integer >= 1, got {N!r}")
    T = _number(raw, "T", lambda v: v > 0, "a positive number")
    cfg = ExperimentConfig(model, desc, _measure(raw, "initial"), N, T)

    if "mode" in raw:
        try:
            cfg.mode = RhsMode(raw["mode"])
        except ValueError:
            raise ConfigError("mode", f"expected one of {[m.value for m in RhsMode]}") from None
    if "dt" in raw and raw["dt"] != "auto":
        cfg.dt = _number(raw, "dt", lambda v: v > 0, "'auto' or a positive number")
    times = raw.get("snapshot_times", [T])
    if (not isinstance(times, list) or not times
            or any(isinstance(t, bool) or not isinstance(t, (int, float)) for t in times)):
        raise ConfigError("snapshot_times", "expected a non-empty list of numbers")
    if times != sorted(times) or times[0] < 0 or times[-1] > T:
        raise ConfigError("snapshot_times", "must be sorted and lie in [0, T]")
    cfg.snapshot_times = [float(t) for t in times]
    cfg.output_dir = base_dir / raw.get("output_dir", ".")
    if "initial_b" in raw:
        cfg.initial_b = _measure(raw, "initial_b")
    if "p" in raw:
        cfg.p = math.inf if raw["p"] in ("inf", "Infinity") else _number(raw, "p", lambda v: v >= 1)
    for k, b in enumerate(raw.get("bumps", [])):
        try:
            cfg.bumps.append(TestBump(float(b["x0"]), float(b["t0"]), float(b["a"]), float(b["s"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bumps[{k}]", f"needs positive radii and x0, t0, a, s ({exc})") from None
    if "weak_field" in raw:
        if raw["weak_field"] not in ("particle", "field"):
            raise ConfigError("weak_field", "expected 'particle' or 'field'")
        cfg.weak_field = raw["weak_field"]
    if "weak_tol" in raw:
        cfg.weak_tol = _number(raw, "weak_tol", lambda v: v > 0, "a positive number")
    if "R" in raw:
        cfg.R = _number(raw, "R", lambda v: v > 0, "a positive number")
    return cfg


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError("<json>", f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    except OSError as exc:
        raise ConfigError("<file>", str(exc)) from None
    return parse_config(raw, path.parent)


# output helpers --------------------------------------------------------

def _fmt(x) -> str:
    return format(float(x), ".17g")


def _write_csv(path: Path, header, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])


def _write_json(path: Path, data):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2, sort_keys=True, default=_json_default) + "\n")


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    raise TypeError(type(o).__name__)


def _jsonable(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return x


def run_trajectory(cfg: ExperimentConfig, initial: Optional[Measure1D] = None) -> Trajectory:
    start = quantile_of(initial or cfg.initial, cfg.N)
    return integrate(start, cfg.model, cfg.mode, cfg.T, cfg.dt, cfg.snapshot_times)


def write_trajectory(traj: Trajectory, cfg: ExperimentConfig, out: Path):
    rows = [(s.time, i, x) for s in traj.snapshots for i, x in enumerate(s.values)]
    _write_csv(out / "trajectory.csv", ["t", "i", "x"], [(float(t), i, float(x)) for t, i, x in rows])
    dens = []
    for s in traj.snapshots:
        v = s.values
        gaps = np.diff(v)
        with np.errstate(divide="ignore"):
            rho = np.where(gaps > 0, s.mesh / np.where(gaps > 0, gaps, 1.0), math.inf)
        dens.extend((float(s.time), float(a), float(b), float(r)) for a, b, r in zip(v[:-1], v[1:], rho))
    _write_csv(out / "density.csv", ["t", "left", "right", "density"], dens)
    field_rows = []
    for s in traj.snapshots:
        if np.all(s.gaps > 0):
            mids = 0.5 * (s.values[:-1] + s.values[1:])
            G = velocity_field(s, traj.model, mids).velocities
            field_rows.extend((float(s.time), float(x), float(g)) for x, g in zip(mids, G))
    _write_csv(out / "velocity_field.csv", ["t", "x", "G"], field_rows)
    meta = {
        "version": __version__,
        "model": {"name": cfg.model.name, "spec": cfg.model_desc, **cfg.model.constants()},
        "N": cfg.N, "T": cfg.T, "mode": traj.mode.value, "dt": traj.dt,
        "snapshot_times": [float(t) for t in traj.times],
        "initial": cfg.initial.to_dict(),
    }
    _write_json(out / "meta.json", meta)


def run_simulate(cfg: ExperimentConfig) -> Trajectory:
    traj = run_trajectory(cfg)
    write_trajectory(traj, cfg, cfg.output_dir)
    return traj


def _weak_report(traj: Trajectory, cfg: ExperimentConfig) -> BoundReport:
    bumps = cfg.bumps or [TestBump(*_default_bump(traj))]
    try:
        res = np.abs(weak_residuals(traj, bumps, cfg.weak_field))
    except ResolutionError as exc:
        raise ConfigError("snapshot_times", str(exc)) from None
    tol = cfg.weak_tol if cfg.weak_tol is not None else 1.0 / traj.N
    return _report("weak_residual", [b.t0 for b in bumps], [tol] * len(bumps), res, "upper",
                   note=f"field={cfg.weak_field}")


def _default_bump(traj: Trajectory):
    # centred on the final support, spanning the middle half of the run
    T = traj.times[-1]
    lo, hi = traj.final.values[0], traj.final.values[-1]
    return 0.5 * (lo + hi), 0.5 * T, max(0.5 * (hi - lo), 1e-3), 0.25 * T


def run_verify(cfg: ExperimentConfig, bounds, hook: Optional[Callable] = None) -> list:
    """Integrate and check ``bounds``; ``hook`` may replace the trajectory (test use)."""
    unknown = set(bounds) - set(BOUNDS)
    if unknown:
        raise ConfigError("bounds", f"unknown bounds {sorted(unknown)}; choose from {BOUNDS}")
    traj = run_trajectory(cfg)
    if hook is not None:
        traj = hook(traj)
    reports = []
    for name in bounds:
        if name == "gap":
            reports.append(check_gap(traj))
        elif name == "smoothing":
            reports.append(check_smoothing(traj))
        elif name == "max_principle":
            R = cfg.R if cfg.R is not None else cfg.initial.sup_density
            reports.append(check_max_principle(traj, R))
        elif name == "support":
            reports.append(check_support(traj))
        elif name == "stability":
            if cfg.initial_b is None:
                reports.append(not_applicable("stability", "config has no 'initial_b'"))
            else:
                reports.append(check_stability(traj, run_trajectory(cfg, cfg.initial_b), cfg.p))
        elif name == "weak_residual":
            reports.append(_weak_report(traj, cfg))
    out = [{k: _jsonable(v) for k, v in r.to_dict().items()} for r in reports]
    _write_json(cfg.output_dir / "bound_reports.json", out)
    return reports


def run_oracle_compare(cfg: ExperimentConfig) -> list:
    if cfg.model.name != "burgers_indicator":
        raise ConfigError("model", "oracle-compare supports only 'burgers_indicator'")
    if cfg.initial != Measure1D.dirac(0.0):
        raise ConfigError("initial", "the closed-form solution covers the datum delta_0 only")
    if cfg.snapshot_times[0] <= 0:
        raise ConfigError("snapshot_times", "the oracle needs every snapshot time > 0")
    traj = run_trajectory(cfg)
    rows = []
    for s in traj.snapshots[1:]:
        ref = RAREFACTION.measure(s.time)
        rows.append((s.time, wasserstein(1, s, ref), wasserstein(math.inf, s, ref)))
    _write_csv(cfg.output_dir / "oracle_gap.csv", ["t", "W1", "Winf"], rows)
    return rows


def run_converge(cfg: ExperimentConfig, Ns, p: float):
    table = convergence_study(cfg.model, cfg.initial, Ns, p, cfg.T, cfg.mode, cfg.dt)
    _write_csv(cfg.output_dir / "convergence.csv", ["N", "reference_N", "distance", "rate"],
               [(n, table.reference_N, d, r) for n, d, r in zip(table.Ns, table.distances, table.rates)])
    return table


# entry point -----------------------------------------------------------

def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _order(text):
    return math.inf if text in ("inf", "Infinity") else float(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nlcl", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in [("simulate", "integrate and write trajectory/density CSVs"),
                        ("verify", "integrate and check proven bounds"),
                        ("oracle-compare", "distance to the exact rarefaction fan"),
                        ("converge", "Wasserstein convergence sweep in N")]:
        p = sub.add_parser(name, help=help_)
        p.add_argument("config", help="experiment JSON file")
        p.add_argument("--out", help="override output_dir")
        if name == "verify":
            p.add_argument("--bounds", default="gap,smoothing,support",
                           help=f"comma-separated subset of {','.join(BOUNDS)}")
        if name == "converge":
            p.add_argument("--Ns", type=_int_list, required=True)
            p.add_argument("--p", type=_order, default=1.0)
    return parser


def main(argv=None, hook: Optional[Callable] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.out:
            cfg.output_dir = Path(args.out)
        if args.command == "simulate":
            traj = run_simulate(cfg)
            print(f"wrote {len(traj.snapshots)} snapshots to {cfg.output_dir}")
        elif args.command == "verify":
            reports = run_verify(cfg, [b for b in args.bounds.split(",") if b], hook)
            for r in reports:
                print(r.summary())
            return EXIT_FAIL if any(r.passed is False for r in reports) else EXIT_OK
        elif args.command == "oracle-compare":
            for t, w1, winf in run_oracle_compare(cfg):
                print(f"t={t:.6g}  W1={w1:.3e}  Winf={winf:.3e}")
        elif args.command == "converge":
            table = run_converge(cfg, args.Ns, args.p)
            for row in table.rows():
                print(f"N={row['N']:<6} W={row['distance']:.6e} rate={row['rate']:.3f}")
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except StepRejected as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


def main_exit():
    sys.exit(main())
