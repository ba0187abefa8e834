"""Emission-price sweeps, finite-difference pass-through and sensitivity runs."""
from __future__ import annotations

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .dispatch import DispatchError, run_dispatch
from .model import SystemInstance
from .timeseries import TimeSeriesBundle, scale_series, shift_eua

SENSITIVITIES = ("none", "imports_1.25", "coal_0.75", "ancillary_0.5", "res_2025", "res_2030")
COAL_FUELS = ("coal", "hard_coal", "lignite")

# year -> (solar factor, wind factor, coal/lignite capacity factor)
RES_EXPANSION = {
    2025: (1.40, 1.50, 0.90),
    2030: (1.70, 2.00, 0.80),
}


@dataclass(frozen=True)
class SweepSpec:
    base_eua_mean: float = 5.89
    step: float = 5.0
    count: int = 16
    sensitivity: str = "none"

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError("step must be positive")
        if self.count < 2:
            raise ValueError("count must be at least 2")
        if self.sensitivity not in SENSITIVITIES:
            raise ValueError(f"sensitivity must be one of {SENSITIVITIES}")

    def eua_means(self) -> np.ndarray:
        return self.base_eua_mean + self.step * np.arange(self.count)


@dataclass(frozen=True)
class ScenarioPoint:
    index: int
    eua_mean: float
    base_price: float
    emissions: float
    burn_by_fuel: dict
    total_cost: float
    prices: np.ndarray


@dataclass(frozen=True)
class PassThroughCurve:
    spec: SweepSpec
    points: tuple[ScenarioPoint, ...]

    @property
    def eua_means(self) -> np.ndarray:
        return np.array([p.eua_mean for p in self.points])

    @property
    def base_prices(self) -> np.ndarray:
        return np.array([p.base_price for p in self.points])

    @property
    def estimates(self) -> np.ndarray:
        return np.array(passthrough(self))


class ScenarioError(RuntimeError):
    def __init__(self, index: int, cause: Exception):
        super().__init__(f"scenario {index}: {cause}")
        self.index = index


def apply_res_expansion(instance: SystemInstance, bundle: TimeSeriesBundle,
                        year: int) -> tuple[SystemInstance, TimeSeriesBundle]:
    """Scale solar and wind output and shrink coal and lignite power capacity for a target year."""
    try:
        solar, wind, coal = RES_EXPANSION[year]
    except KeyError:
        raise ValueError(f"year must be one of {sorted(RES_EXPANSION)}") from None
    bundle = scale_series(scale_series(bundle, "solar", solar), "wind", wind)
    clusters = tuple(
        replace(c, power_capacity_mw=c.power_capacity_mw * coal) if c.fuel in COAL_FUELS else c
        for c in instance.clusters)
    return replace(instance, clusters=clusters), bundle


def apply_sensitivity(instance: SystemInstance, bundle: TimeSeriesBundle,
                      kind: str) -> tuple[SystemInstance, TimeSeriesBundle]:
    if kind == "none":
        return instance, bundle
    if kind == "imports_1.25":
        return instance, scale_series(bundle, "net_imports", 1.25)
    if kind == "coal_0.75":
        key = next((f.price_key for f in instance.fuels if f.id in ("coal", "hard_coal")), "coal")
        return instance, scale_series(bundle, f"{key}_price", 0.75)
    if kind == "ancillary_0.5":
        return replace(instance, ancillary_min_mw=instance.ancillary_min_mw * 0.5), bundle
    if kind == "res_2025":
        return apply_res_expansion(instance, bundle, 2025)
    if kind == "res_2030":
        return apply_res_expansion(instance, bundle, 2030)
    raise ValueError(f"unknown sensitivity {kind!r}")


def _run_scenario(args) -> ScenarioPoint:
    index, instance, bundle, shift, solver_name = args
    from .lp import get_solver
    solver = get_solver(solver_name) if solver_name != "simplex" else None
    try:
        scenario = shift_eua(bundle, shift)
        res = run_dispatch(instance, scenario, solver=solver)
    except (DispatchError, ValueError) as exc:
        raise ScenarioError(index, exc) from exc
    return ScenarioPoint(index, float(scenario.eua_price.mean()), res.base_price, res.emissions,
                         res.burn_by_fuel(), res.total_cost, res.price)


def run_sweep(instance: SystemInstance, bundle: TimeSeriesBundle, spec: SweepSpec = SweepSpec(),
              jobs: int = 1, solver: str = "simplex") -> PassThroughCurve:
    """Dispatch one scenario per allowance price level.

    The sensitivity transform is applied once up front; scenario ``s`` then
    shifts the whole allowance series so its mean equals
    ``base_eua_mean + s * step``. Results are assembled by scenario index, so
    the output does not depend on ``jobs``.
    """
    instance, bundle = apply_sensitivity(instance, bundle, spec.sensitivity)
    offset = spec.base_eua_mean - float(bundle.eua_price.mean())
    tasks = [(s, instance, bundle, offset + s * spec.step, solver) for s in range(spec.count)]
    if jobs <= 1:
        points = [_run_scenario(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            points = list(pool.map(_run_scenario, tasks))
    points.sort(key=lambda p: p.index)
    return PassThroughCurve(spec, tuple(points))


def passthrough_estimates(base_prices: Sequence[float], eua_means: Sequence[float]) -> list[float]:
    p = np.asarray(base_prices, dtype=float)
    e = np.asarray(eua_means, dtype=float)
    de = np.diff(e)
    if np.any(de == 0):
        raise ValueError("adjacent scenarios share the same emission price")
    return list(np.diff(p) / de)


def passthrough(curve: PassThroughCurve) -> list[float]:
    """Change in base price over change in mean allowance price, per adjacent scenario pair."""
    return passthrough_estimates(curve.base_prices, curve.eua_means)


def emissions_curve(curve: PassThroughCurve) -> tuple[np.ndarray, np.ndarray]:
    """Emission totals per scenario and their differences between adjacent scenarios."""
    totals = np.array([p.emissions for p in curve.points])
    return totals, np.diff(totals)


# --- export ----------------------------------------------------------------

def _fmt(v: float) -> str:
    return repr(float(v))


def write_sweep_csv(curve: PassThroughCurve, path) -> None:
    fuels = sorted({f for p in curve.points for f in p.burn_by_fuel})
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["scenario", "eua_mean", "base_price", "emissions_mt", "total_cost",
                    *[f"burn_{f}_twh" for f in fuels]])
        for p in curve.points:
            w.writerow([p.index, _fmt(p.eua_mean), _fmt(p.base_price), _fmt(p.emissions / 1e6),
                        _fmt(p.total_cost),
                        *[_fmt(p.burn_by_fuel.get(f, 0.0) / 1e6) for f in fuels]])


def write_passthrough_csv(curve: PassThroughCurve, path) -> None:
    est = passthrough(curve)
    e = curve.eua_means
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["pair", "eua_from", "eua_to", "passthrough"])
        for k, v in enumerate(est):
            w.writerow([k + 1, _fmt(e[k]), _fmt(e[k + 1]), _fmt(v)])
