"""Command-line entry point.

Exit codes: 0 success, 1 validation or model failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import platform
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .dispatch import DispatchError, goodness_of_fit, run_dispatch, write_hourly_csv, write_totals_json
from .heat import DhPortfolio, load_table1_calibration, threshold_surface, threshold_table
from .lp import get_solver, write_mps
from .model import load_instance, validate_instance
from .scenarios import (ScenarioError, SweepSpec, run_sweep, write_passthrough_csv,
                        write_sweep_csv)
from .timeseries import SeriesError, SynthesisProfile, load_bundle_csv, save_bundle_csv, synthesize_year

log = logging.getLogger("carbonpass")

SENSITIVITY_KINDS = {
    "imports": "imports_1.25",
    "coal": "coal_0.75",
    "ancillary": "ancillary_0.5",
    "res2025": "res_2025",
    "res2030": "res_2030",
}

# built-in defaults; a --config file sits between these and explicit flags
DEFAULTS = {
    "out": "out",
    "eua_shift": 0.0,
    "start": 5.89,
    "step": 5.0,
    "count": 16,
    "jobs": 1,
    "solver": "simplex",
    "seed": 0,
    "hours": 8760,
    "eta_el": "0.3,0.4,0.5,0.6",
    "shares": "0.5,0.6,0.7,0.8,0.9,1.0",
    "surface_eta_el": "0.2,0.3,0.4,0.5,0.6",
    "ancillary_mode": "activity",
}


class UsageError(Exception):
    pass


class ValidationFailure(Exception):
    pass


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected a comma-separated list of numbers, got {text!r}") from None


def _digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _inputs(args, *names):
    found = {}
    for name in names:
        value = getattr(args, name, None)
        if value is None:
            raise UsageError(f"--{name} is required")
        p = Path(value)
        if not p.is_file():
            raise UsageError(f"--{name}: file not found: {p}")
        found[name] = p
    return found


def _load(args):
    paths = _inputs(args, "instance", "series")
    try:
        instance = load_instance(paths["instance"])
    except (ValueError, json.JSONDecodeError) as exc:
        raise ValidationFailure(f"{paths['instance']}: {exc}") from None
    problems = validate_instance(instance)
    if problems:
        raise ValidationFailure("instance violations:\n  " + "\n  ".join(map(str, problems)))
    try:
        bundle = load_bundle_csv(paths["series"])
    except SeriesError as exc:
        raise ValidationFailure(str(exc)) from None
    if bundle.hours != instance.horizon_hours:
        log.info("setting instance horizon to the %d hours of the series", bundle.hours)
        instance = instance.with_horizon(bundle.hours)
    for f in instance.fuels:
        if any(c.fuel == f.id for c in instance.clusters) and f.price_key not in bundle.fuel_price:
            raise ValidationFailure(f"{paths['series']}: missing column 'price_{f.price_key}'")
    return instance, bundle, paths


def _write_manifest(out: Path, args, inputs: dict, started: float, extra=None) -> None:
    config = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "verbose")}
    manifest = {
        "command": args.command,
        "config": config,
        "inputs": {k: {"path": str(p), "sha256": _digest(p)} for k, p in inputs.items()},
        "seed": getattr(args, "seed", None),
        "version": __version__,
        "python": platform.python_version(),
        "wall_time_s": round(time.perf_counter() - started, 3),
    }
    if extra:
        manifest.update(extra)
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, default=str) + "\n",
                                       encoding="utf-8")


# --- subcommands -------------------------------------------------------------

def cmd_validate(args, out: Path, started: float) -> int:
    instance, bundle, paths = _load(args)
    report = {"instance": "ok", "series": "ok", "hours": bundle.hours,
              "clusters": len(instance.clusters), "storages": len(instance.storages)}
    print(json.dumps(report))
    _write_manifest(out, args, paths, started)
    return 0


def cmd_run(args, out: Path, started: float) -> int:
    instance, bundle, paths = _load(args)
    solver = None if args.solver == "simplex" else get_solver(args.solver)
    result = run_dispatch(instance, bundle, args.eua_shift, solver=solver,
                          ancillary_mode=args.ancillary_mode)
    write_hourly_csv(result, out / "dispatch_hourly.csv")
    write_totals_json(result, out / "totals.json")
    if args.mps:
        write_mps(result.extras["lp"], out / "dispatch.mps")
    print(f"base price {result.base_price:.4f} EUR/MWh, emissions {result.emissions / 1e6:.4f} Mt")
    _write_manifest(out, args, paths, started)
    return 0


def _sweep(args, out: Path, started: float, sensitivity: str) -> int:
    instance, bundle, paths = _load(args)
    spec = SweepSpec(args.start, args.step, int(args.count), sensitivity)
    curve = run_sweep(instance, bundle, spec, jobs=int(args.jobs), solver=args.solver)
    write_sweep_csv(curve, out / "sweep.csv")
    write_passthrough_csv(curve, out / "passthrough.csv")
    est = curve.estimates
    print(f"{spec.count} scenarios; pass-through min {est.min():.3f}, "
          f"mean {est.mean():.3f}, max {est.max():.3f}")
    _write_manifest(out, args, paths, started, {"sensitivity": sensitivity})
    return 0


def cmd_sweep(args, out, started):
    return _sweep(args, out, started, "none")


def cmd_sensitivity(args, out, started):
    return _sweep(args, out, started, SENSITIVITY_KINDS[args.kind])


def cmd_dh_thresholds(args, out: Path, started: float) -> int:
    cal = load_table1_calibration()
    rows = threshold_table(_floats(args.eta_el), cal)
    with open(out / "thresholds.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["eta_el", "eta_th_chp", "min_markup", "min_passthrough"])
        for r in rows:
            w.writerow([repr(r.eta_el), repr(r.eta_th_chp),
                        f"{r.min_markup:.6f}", f"{r.min_passthrough:.6f}"])
    eta_grid = _floats(args.surface_eta_el)
    share_grid = _floats(args.shares)
    template = DhPortfolio(cal.eta_th_boiler, cal.eta_th_chp[len(cal.eta_th_chp) // 2],
                           0.5, cal.emission_factor, 1.0)
    surface = threshold_surface(eta_grid, share_grid, template)
    with open(out / "surface.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["eta_el", *[f"share_{s:g}" for s in share_grid]])
        for e, row in zip(eta_grid, surface):
            w.writerow([repr(e), *[f"{v:.6f}" for v in row]])
    for r in rows:
        print(f"eta_el {r.eta_el:.2f}  mark-up {r.min_markup:.3f}  pass-through {r.min_passthrough:.3f}")
    _write_manifest(out, args, {}, started)
    return 0


def cmd_synth(args, out: Path, started: float) -> int:
    bundle = synthesize_year(int(args.seed), SynthesisProfile(hours=int(args.hours)))
    save_bundle_csv(bundle, out / "series.csv")
    print(f"wrote {bundle.hours} hours to {out / 'series.csv'}")
    _write_manifest(out, args, {}, started)
    return 0


def cmd_fit(args, out: Path, started: float) -> int:
    instance, bundle, paths = _load(args)
    if bundle.reference_price is None:
        raise ValidationFailure(f"{paths['series']}: column 'ref_price' is required for fit")
    solver = None if args.solver == "simplex" else get_solver(args.solver)
    result = run_dispatch(instance, bundle, args.eua_shift, solver=solver)
    corr, rmse = goodness_of_fit(result.price, bundle.reference_price)
    (out / "fit.json").write_text(json.dumps({"correlation": corr, "rmse": rmse}, indent=2) + "\n",
                                  encoding="utf-8")
    print(f"correlation {corr:.4f}, RMSE {rmse:.4f}")
    _write_manifest(out, args, paths, started)
    return 0


# --- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="carbonpass", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, model=True):
        sp.add_argument("--config", help="JSON file of option defaults; flags win")
        sp.add_argument("--out", default=None, help="output directory")
        if model:
            sp.add_argument("--instance", help="instance JSON")
            sp.add_argument("--series", help="hourly series CSV")
            sp.add_argument("--solver", choices=["simplex", "highs"], default=None)

    sp = sub.add_parser("validate", help="check instance and series files")
    common(sp)
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("run", help="single dispatch run")
    common(sp)
    sp.add_argument("--eua-shift", type=float, default=None)
    sp.add_argument("--ancillary-mode", choices=["activity", "printed"], default=None)
    sp.add_argument("--mps", action="store_true", help="also export the LP in MPS format")
    sp.set_defaults(func=cmd_run)

    for name, func in (("sweep", cmd_sweep), ("sensitivity", cmd_sensitivity)):
        sp = sub.add_parser(name, help="emission price sweep" if name == "sweep"
                            else "sweep under a sensitivity case")
        common(sp)
        sp.add_argument("--start", type=float, default=None, help="mean EUA price of scenario 0")
        sp.add_argument("--step", type=float, default=None)
        sp.add_argument("--count", type=int, default=None)
        sp.add_argument("--jobs", type=int, default=None, help="concurrent scenario solves")
        if name == "sensitivity":
            sp.add_argument("--kind", required=True, choices=sorted(SENSITIVITY_KINDS))
        sp.set_defaults(func=func)

    sp = sub.add_parser("dh-thresholds", help="district heating threshold table and surface")
    common(sp, model=False)
    sp.add_argument("--eta-el", default=None, help="comma-separated electrical efficiencies")
    sp.add_argument("--shares", default=None, help="CHP heat shares for the surface")
    sp.add_argument("--surface-eta-el", default=None)
    sp.set_defaults(func=cmd_dh_thresholds)

    sp = sub.add_parser("synth", help="write a synthetic hourly year")
    common(sp, model=False)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--hours", type=int, default=None)
    sp.set_defaults(func=cmd_synth)

    sp = sub.add_parser("fit", help="goodness of fit of model prices against ref_price")
    common(sp)
    sp.add_argument("--eua-shift", type=float, default=None)
    sp.set_defaults(func=cmd_fit)
    return p


def _resolve(args) -> None:
    config = {}
    if getattr(args, "config", None):
        path = Path(args.config)
        if not path.is_file():
            raise UsageError(f"--config: file not found: {path}")
        try:
            config = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise UsageError(f"--config: invalid JSON ({exc})") from None
        if not isinstance(config, dict):
            raise UsageError("--config must hold a JSON object")
    known = set(vars(args)) - {"func", "command", "config", "verbose"}
    unknown = sorted(k for k in config if k.replace("-", "_") not in known)
    if unknown:
        raise UsageError(f"--config: unknown option(s) for {args.command}: {', '.join(unknown)}")
    config = {k.replace("-", "_"): v for k, v in config.items()}
    for dest in known:
        if getattr(args, dest) is None:
            if dest in config:
                setattr(args, dest, config[dest])
            elif dest in DEFAULTS:
                setattr(args, dest, DEFAULTS[dest])


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    started = time.perf_counter()
    try:
        _resolve(args)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        return args.func(args, out, started)
    except UsageError as exc:
        print(f"carbonpass {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (ValidationFailure, DispatchError, ScenarioError, ValueError) as exc:
        print(f"carbonpass {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
