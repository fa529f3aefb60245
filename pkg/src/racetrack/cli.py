"""Command-line front end: simulate, spectrum, sweep, validate.

Exit codes: 0 success, 1 invalid input, 2 non-convergence (or a failed
validation table), 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (LinearRegimeError, count_spikes, linear_summary, sweep)
from .config import ConfigError, RunConfig, load_config
from .dynamics import IntegrationBlowupError, initial_condition, simulate
from .equilibrium import DegenerateDensityError, ModelParams, solve
from .geometry import build_grid, build_kernel
from .stability import growth_rate, no_black_hole, spectrum

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NOT_CONVERGED = 2
EXIT_NUMERICAL = 3

SCHEMA = 1
VALIDATE_TOL = 0.02

PROFILE_HEADER = "x,lambda,w,G,omega"
SPECTRUM_HEADER = "n,E_n,J_n,growth_rate,verdict"
SWEEP_HEADER = "axis_value,max_spikes,seed,count,converged,fastest_mode,n_tilde,nbh"
TRAJECTORY_HEADER = "step,t,node,x,lambda"

log = logging.getLogger("racetrack")


def fmt(v) -> str:
    """Shortest round-tripping text for floats; plain text otherwise."""
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


class Outputs:
    """Tracks files written by one command so a failure can remove them."""

    def __init__(self, out_dir):
        self.dir = Path(out_dir)
        self.written = []

    def path(self, name) -> Path:
        self.dir.mkdir(parents=True, exist_ok=True)
        p = self.dir / name
        self.written.append(p)
        return p

    def write_csv(self, name, header, rows):
        p = self.path(name)
        with open(p, "w", newline="\n") as fh:
            fh.write(header + "\n")
            for row in rows:
                fh.write(",".join(fmt(v) for v in row) + "\n")
        return p

    def write_json(self, name, payload):
        p = self.path(name)
        with open(p, "w") as fh:
            json.dump({"schema": SCHEMA, **payload}, fh, indent=2, sort_keys=True,
                      allow_nan=False, default=_json_default)
            fh.write("\n")
        return p

    def discard(self):
        for p in self.written:
            try:
                p.unlink()
            except FileNotFoundError:
                pass
        self.written.clear()


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def _finite_or_none(x):
    return x if x is not None and math.isfinite(x) else None


def _spike_dict(report):
    if report is None:
        return None
    return {
        "spike_count": report.spike_count,
        "kappa": report.kappa,
        "background_mass": report.background_mass,
        "spikes": [{"center": s.center, "peak": s.peak, "mass": s.mass} for s in report.spikes],
    }


def _profile_rows(params: ModelParams, lam):
    grid = build_grid(len(lam))
    eq = solve(params, build_kernel(grid, params.alpha), grid, lam)
    return zip(grid.nodes, lam, eq.w, eq.G, eq.omega)


def _wants(cfg: RunConfig, kind: str) -> bool:
    return kind in cfg.format


# ---------------------------------------------------------------- commands

def cmd_simulate(cfg: RunConfig) -> int:
    out = Outputs(cfg.out_dir)
    params = cfg.params()
    grid = build_grid(cfg.I)
    lam0 = initial_condition(grid, cfg.seed, cfg.amplitude)
    snapshots = []
    sink = None
    if cfg.snapshot_stride > 0:
        sink = lambda k, t, lam: snapshots.append((k, t, lam))  # noqa: E731
    try:
        res = simulate(params, cfg.integrator(), lam0, grid=grid, sink=sink,
                       seed=cfg.seed, amplitude=cfg.amplitude)
        report = count_spikes(res, cfg.kappa) if res.converged else None
        if _wants(cfg, "csv"):
            out.write_csv("profile.csv", PROFILE_HEADER, _profile_rows(params, res.lam))
            if snapshots:
                out.write_csv("trajectory.csv", TRAJECTORY_HEADER, (
                    (k, t, i, x, v) for k, t, lam in snapshots
                    for i, (x, v) in enumerate(zip(grid.nodes, lam))))
        if _wants(cfg, "json"):
            out.write_json("summary.json", {
                "command": "simulate",
                "config": cfg.as_dict(),
                "params": params.as_dict(),
                "steps": res.steps,
                "converged": res.converged,
                "final_diff": _finite_or_none(res.final_diff),
                "max_mass_drift": res.max_mass_drift,
                "negative_steps": res.negative_steps,
                "spike_count": report.spike_count if report else None,
                "spike_report": _spike_dict(report),
            })
    except BaseException:
        out.discard()
        raise
    if not res.converged:
        print(f"not converged after {res.steps} steps (last diff {res.final_diff:.3e})",
              file=sys.stderr)
        return EXIT_NOT_CONVERGED
    print(f"converged in {res.steps} steps: {report.spike_count} spike(s)")
    return EXIT_OK


def cmd_spectrum(cfg: RunConfig) -> int:
    out = Outputs(cfg.out_dir)
    params = cfg.params()
    sp = spectrum(params, cfg.n_max)
    fastest, n_tilde = linear_summary(params, max(cfg.n_max, 10 * math.ceil(params.alpha) + 100))
    try:
        if _wants(cfg, "csv"):
            out.write_csv("spectrum.csv", SPECTRUM_HEADER,
                          ((r.n, r.E_n, r.J_n, r.growth_rate, r.verdict) for r in sp))
        if _wants(cfg, "json"):
            out.write_json("spectrum.json", {
                "command": "spectrum",
                "params": params.as_dict(),
                "n_max": cfg.n_max,
                "no_black_hole": no_black_hole(params),
                "n_tilde": n_tilde,
                "fastest_mode": sp.fastest_mode,
                "fastest_mode_is_heuristic": True,
            })
    except BaseException:
        out.discard()
        raise
    print(f"fastest mode {sp.fastest_mode}, n_tilde {n_tilde}, "
          f"no_black_hole {no_black_hole(params)}")
    return EXIT_OK


def _value_label(v: float) -> str:
    return repr(float(v)).replace("-", "m")


def cmd_sweep(cfg: RunConfig, axis: str, values, n_jobs: int = 1) -> int:
    out = Outputs(cfg.out_dir)
    seeds = cfg.seed_list()
    res = sweep(cfg.params(), axis, values, seeds, cfg.integrator(), kappa=cfg.kappa,
                amplitude=cfg.amplitude, I=cfg.I, n_jobs=n_jobs)
    try:
        rows = []
        for pt in res.points:
            for o in pt.outcomes:
                rows.append((pt.value, pt.max_spikes, o.seed, o.count, o.converged,
                             pt.fastest_mode, pt.n_tilde, pt.nbh))
        if _wants(cfg, "csv"):
            out.write_csv("sweep.csv", SWEEP_HEADER, rows)
            for pt in res.points:
                if pt.best_seed is not None:
                    out.write_csv(f"profile_{axis}_{_value_label(pt.value)}.csv", PROFILE_HEADER,
                                  _profile_rows(pt.params, pt.best_profile))
        if _wants(cfg, "json"):
            out.write_json("sweep.json", {
                "command": "sweep",
                "axis": axis,
                "values": res.values,
                "seeds": seeds,
                "base": cfg.params().as_dict(),
                "points": [{
                    "axis_value": pt.value,
                    "max_spikes": pt.max_spikes,
                    "best_seed": pt.best_seed,
                    "nbh": pt.nbh,
                    "fastest_mode": pt.fastest_mode,
                    "n_tilde": pt.n_tilde,
                    "error": pt.error,
                    "seeds": [{"seed": o.seed, "converged": o.converged, "steps": o.steps,
                               "count": o.count, "error": o.error,
                               "spike_report": _spike_dict(o.report)} for o in pt.outcomes],
                } for pt in res.points],
            })
    except BaseException:
        out.discard()
        raise
    for pt in res.points:
        flag = "" if pt.nbh else "  (no-black-hole violated)"
        print(f"{axis}={pt.value!r}: max spikes {pt.max_spikes}{flag}")
    if all(pt.max_spikes is None for pt in res.points):
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def validation_table(params: ModelParams, dt: float, I: int, modes=range(1, 9),
                     amplitude: float = 1e-6, horizon: float = 1.0):
    """Rows (n, measured, predicted, rel_error, ok, note)."""
    from .analysis import measure_mode_growth
    rows = []
    for n in modes:
        predicted = growth_rate(params, n)
        try:
            measured = measure_mode_growth(params, n, amplitude, horizon, dt, I)
        except (IntegrationBlowupError, LinearRegimeError, DegenerateDensityError) as exc:
            rows.append((n, None, predicted, None, False, str(exc)))
            continue
        if predicted == 0.0:
            rel = 0.0 if abs(measured) <= 1e-10 else math.inf
        else:
            rel = abs(measured - predicted) / abs(predicted)
        rows.append((n, measured, predicted, rel, rel <= VALIDATE_TOL, ""))
    return rows


def cmd_validate(cfg: RunConfig) -> int:
    rows = validation_table(cfg.params(), cfg.dt, cfg.I)
    print(f"{'n':>3} {'measured':>14} {'predicted':>14} {'rel_err':>10}  result")
    for n, m, p, rel, ok, note in rows:
        ms = f"{m:14.6e}" if m is not None else f"{'-':>14}"
        rs = f"{rel:10.2e}" if rel is not None else f"{'-':>10}"
        print(f"{n:>3} {ms} {p:14.6e} {rs}  {'pass' if ok else 'FAIL'} {note}".rstrip())
    passed = all(r[4] for r in rows)
    print("all modes within 2%" if passed else "validation FAILED")
    return EXIT_OK if passed else EXIT_NOT_CONVERGED


# ---------------------------------------------------------------- parsing

def _add_common(p: argparse.ArgumentParser):
    p.add_argument("-c", "--config", help="key=value or JSON config file")
    g = p.add_argument_group("model")
    for name in ("mu", "sigma", "tau", "F", "Phi"):
        g.add_argument(f"--{name}", dest=name, type=str, default=None)
    g = p.add_argument_group("numerics")
    g.add_argument("--I", "--nodes", dest="I", type=str, default=None)
    g.add_argument("--dt", type=str, default=None)
    g.add_argument("--epsilon", type=str, default=None)
    g.add_argument("--max-steps", dest="max_steps", type=str, default=None)
    g.add_argument("--amplitude", type=str, default=None)
    g.add_argument("--seed", type=str, default=None)
    g.add_argument("--kappa", type=str, default=None)
    g.add_argument("--n-max", dest="n_max", type=str, default=None)
    g = p.add_argument_group("output")
    g.add_argument("-o", "--out-dir", dest="out_dir", default=None)
    g.add_argument("--format", default=None, help="csv, json or csv,json")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="racetrack", description="Racetrack economy numerical laboratory")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="integrate one seeded run to a stationary state")
    _add_common(p)
    p.add_argument("--snapshot-stride", dest="snapshot_stride", type=str, default=None)

    p = sub.add_parser("spectrum", help="closed-form linear stability spectrum")
    _add_common(p)

    p = sub.add_parser("sweep", help="maximum spike count along one parameter axis")
    _add_common(p)
    p.add_argument("--axis", required=True, choices=("sigma", "tau", "Phi"))
    p.add_argument("--values", required=True, help="comma-separated axis values")
    p.add_argument("--seeds", default=None, help="e.g. 0-9 or 0,3,7")
    p.add_argument("--n-jobs", dest="n_jobs", type=int, default=1)

    p = sub.add_parser("validate", help="simulated vs predicted mode growth, n = 1..8")
    _add_common(p)
    return parser


_OVERRIDE_KEYS = ("mu", "sigma", "tau", "F", "Phi", "I", "dt", "epsilon", "max_steps",
                  "amplitude", "seed", "kappa", "n_max", "out_dir", "format",
                  "snapshot_stride", "seeds")


def _parse_values(text: str):
    try:
        vals = [float(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise ConfigError(f"values: expected comma-separated numbers, got {text!r}") from None
    if not vals:
        raise ConfigError("values: at least one axis value is required")
    return vals


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    overrides = {k: getattr(args, k) for k in _OVERRIDE_KEYS if hasattr(args, k)}
    try:
        cfg = load_config(args.config, overrides)
        if args.command == "simulate":
            return cmd_simulate(cfg)
        if args.command == "spectrum":
            return cmd_spectrum(cfg)
        if args.command == "sweep":
            values = _parse_values(args.values)
            if args.n_jobs == 0:
                raise ConfigError("n_jobs: must be nonzero")
            for v in values:
                cfg.params().replace(**{args.axis: v})
            return cmd_sweep(cfg, args.axis, values, args.n_jobs)
        return cmd_validate(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (IntegrationBlowupError, DegenerateDensityError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
