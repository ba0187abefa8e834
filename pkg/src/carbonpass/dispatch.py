"""Hourly economic dispatch LP for thermal, CHP, boiler and hydro storage units.

The model minimizes fuel, emission and O&M cost plus penalties for lost load
(``voll``) and curtailment. The dual of each hour's power balance row is the
electricity price of that hour; the dual of the heat balance row is the heat
shadow price.

Deliberate departures from the textbook formulation:

* the power balance carries lost-load and curtailment slacks so the LP is
  always feasible;
* ancillary provision counts turbining plus pumping of storages (the
  ``"printed"`` mode counts turbining plus the reservoir level instead);
* storages must end the horizon at least at their initial level.
"""
from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .lp import EQ, GE, INF, LE, LinearProgram, LpSolution, Tolerances
from .lp import solve as reference_solve
from .model import SystemInstance, validate_instance
from .timeseries import TimeSeriesBundle

log = logging.getLogger(__name__)

ANCILLARY_MODES = ("activity", "printed")


class DispatchError(RuntimeError):
    pass


@dataclass
class DispatchLayout:
    """Column and row indices of the dispatch LP, arrays shaped (hours, units)."""

    hours: int
    cluster_ids: list[str]
    storage_ids: list[str]
    qf: np.ndarray
    qp_pwr: np.ndarray  # -1 where a cluster has no power output
    qp_ht: np.ndarray  # -1 where a cluster has no heat output
    sconv: dict[str, np.ndarray]  # cluster -> (hours, corners)
    qpsp: np.ndarray
    ppsp: np.ndarray
    qstor: np.ndarray
    qns_pwr: np.ndarray
    qns_ht: Optional[np.ndarray]
    qct: np.ndarray
    power_balance: np.ndarray
    heat_balance: Optional[np.ndarray]
    ancillary: np.ndarray
    level: np.ndarray  # storage recursion rows
    inflow: np.ndarray  # (hours, storages) MWh routed to each plant
    fuel_cost: np.ndarray  # (hours, clusters) objective coefficient of qf


class DispatchLP(LinearProgram):
    layout: DispatchLayout


def _inflow_shares(instance: SystemInstance) -> np.ndarray:
    """Fraction of the inflow series routed to each storage plant.

    Explicit ``inflow_share`` values win (missing ones count as zero).
    Otherwise inflow goes to plants without pumps, pro rata by reservoir size,
    falling back to all plants when every plant can pump.
    """
    stor = instance.storages
    if not stor:
        return np.zeros(0)
    explicit = [s.inflow_share for s in stor]
    if any(v is not None for v in explicit):
        return np.array([v or 0.0 for v in explicit])
    caps = np.array([s.reservoir_capacity_mwh for s in stor], dtype=float)
    natural = np.array([s.pump_capacity_mw == 0 for s in stor])
    if natural.any():
        caps = np.where(natural, caps, 0.0)
    return caps / caps.sum() if caps.sum() > 0 else np.full(len(stor), 1 / len(stor))


def build_lp(instance: SystemInstance, bundle: TimeSeriesBundle, eua_shift: float = 0.0,
             ancillary_mode: str = "activity") -> DispatchLP:
    """Assemble the hourly dispatch LP.

    Rows per hour: power balance, heat balance (when any unit makes heat or
    heat is demanded), per-cluster capacity and efficiency or CHP convexity
    rows, the ancillary-service row, and one storage-level row per plant.
    """
    if ancillary_mode not in ANCILLARY_MODES:
        raise ValueError(f"ancillary_mode must be one of {ANCILLARY_MODES}")
    T = bundle.hours
    if T != instance.horizon_hours:
        raise ValueError(f"bundle has {T} hours but instance horizon is {instance.horizon_hours}")
    problems = validate_instance(instance)
    if problems:
        raise ValueError("invalid instance: " + "; ".join(map(str, problems)))
    for c in instance.clusters:
        if c.heat_capacity_mw > 0 and not (c.is_chp or c.is_boiler):
            raise ValueError(f"cluster {c.id}: CHP cluster without operating region")

    clusters = instance.clusters
    storages = instance.storages
    G, S = len(clusters), len(storages)
    fuel_of = {f.id: f for f in instance.fuels}
    prices = {}
    for f in instance.fuels:
        if any(c.fuel == f.id for c in clusters):
            if f.price_key not in bundle.fuel_price:
                raise ValueError(f"bundle lacks price series 'price_{f.price_key}' for fuel {f.id}")
            prices[f.id] = bundle.fuel_price[f.price_key]
    eua = bundle.eua_price + eua_shift
    M = instance.penalty.voll
    N = instance.penalty.curtailment_cost
    has_heat = any(c.is_chp or c.is_boiler for c in clusters) or bool(np.any(bundle.heat_mw > 0))
    shares = _inflow_shares(instance)
    inflow = bundle.inflow_mwh[:, None] * shares[None, :]
    renew = bundle.wind_mw + bundle.solar_mw + bundle.ror_mw
    net_demand = bundle.load_mw - bundle.net_import_mw - renew

    lp = DispatchLP("dispatch")
    qf = np.full((T, G), -1)
    qp_pwr = np.full((T, G), -1)
    qp_ht = np.full((T, G), -1)
    sconv = {c.id: np.full((T, len(c.operating_region.corners)), -1)
             for c in clusters if c.is_chp}
    qpsp = np.full((T, S), -1)
    ppsp = np.full((T, S), -1)
    qstor = np.full((T, S), -1)
    qns_pwr = np.full(T, -1)
    qns_ht = np.full(T, -1) if has_heat else None
    qct = np.full(T, -1)
    pb = np.full(T, -1)
    hb = np.full(T, -1) if has_heat else None
    anc = np.full(T, -1)
    lvl = np.full((T, S), -1)
    fuel_cost = np.zeros((T, G))

    for t in range(T):
        # columns
        for g, c in enumerate(clusters):
            f = fuel_of[c.fuel]
            cost = prices[c.fuel][t] + f.emission_factor * eua[t] + c.om_cost
            fuel_cost[t, g] = cost
            qf[t, g] = lp.add_column(f"qf[{t},{c.id}]", cost=cost)
            if not c.is_boiler:
                qp_pwr[t, g] = lp.add_column(f"qp[{t},{c.id},pwr]")
            if c.is_boiler or c.is_chp:
                qp_ht[t, g] = lp.add_column(f"qp[{t},{c.id},ht]")
            if c.is_chp:
                for k in range(len(c.operating_region.corners)):
                    sconv[c.id][t, k] = lp.add_column(f"sconv[{t},{c.id},{k}]", 0.0, 1.0)
        for s, st in enumerate(storages):
            qpsp[t, s] = lp.add_column(f"qpsp[{t},{st.id}]", 0.0, st.turbine_capacity_mw)
            ppsp[t, s] = lp.add_column(f"ppsp[{t},{st.id}]", 0.0, st.pump_capacity_mw)
            low = st.initial_level_mwh if t == T - 1 else 0.0
            qstor[t, s] = lp.add_column(f"qstor[{t},{st.id}]", low, st.reservoir_capacity_mwh)
        qns_pwr[t] = lp.add_column(f"qns[{t},pwr]", cost=M)
        if has_heat:
            qns_ht[t] = lp.add_column(f"qns[{t},ht]", cost=M)
        qct[t] = lp.add_column(f"qct[{t}]", cost=N)

        # power balance: supply net of curtailment plus lost load meets residual demand
        coefs = [(int(qp_pwr[t, g]), 1.0) for g in range(G) if qp_pwr[t, g] >= 0]
        coefs += [(int(qpsp[t, s]), 1.0) for s in range(S)]
        coefs += [(int(ppsp[t, s]), -1.0) for s in range(S)]
        coefs += [(int(qct[t]), -1.0), (int(qns_pwr[t]), 1.0)]
        pb[t] = lp.add_row(f"power_balance[{t}]", coefs, EQ, net_demand[t])

        if has_heat:
            coefs = [(int(qp_ht[t, g]), 1.0) for g in range(G) if qp_ht[t, g] >= 0]
            coefs.append((int(qns_ht[t]), 1.0))
            hb[t] = lp.add_row(f"heat_balance[{t}]", coefs, GE, bundle.heat_mw[t])

        for g, c in enumerate(clusters):
            if qp_pwr[t, g] >= 0:
                lp.add_row(f"cap[{t},{c.id},pwr]", [(int(qp_pwr[t, g]), 1.0)], LE,
                           c.power_capacity_mw)
            if qp_ht[t, g] >= 0:
                lp.add_row(f"cap[{t},{c.id},ht]", [(int(qp_ht[t, g]), 1.0)], LE,
                           c.heat_capacity_mw)
            if c.is_chp:
                corners = c.operating_region.corners
                cols = sconv[c.id][t]
                lp.add_row(f"conv[{t},{c.id}]", [(int(j), 1.0) for j in cols], EQ, 1.0)
                lp.add_row(f"orp[{t},{c.id},pwr]",
                           [(int(j), k.power) for j, k in zip(cols, corners)]
                           + [(int(qp_pwr[t, g]), -1.0)], EQ, 0.0)
                lp.add_row(f"orp[{t},{c.id},ht]",
                           [(int(j), k.heat) for j, k in zip(cols, corners)]
                           + [(int(qp_ht[t, g]), -1.0)], EQ, 0.0)
                lp.add_row(f"orf[{t},{c.id}]",
                           [(int(j), k.fuel) for j, k in zip(cols, corners)]
                           + [(int(qf[t, g]), -1.0)], LE, 0.0)
            elif c.is_boiler:
                lp.add_row(f"eff[{t},{c.id},ht]",
                           [(int(qp_ht[t, g]), 1.0), (int(qf[t, g]), -c.efficiency_heat)], LE, 0.0)
            else:
                lp.add_row(f"eff[{t},{c.id},pwr]",
                           [(int(qp_pwr[t, g]), 1.0), (int(qf[t, g]), -c.efficiency_power)], LE, 0.0)

        coefs = [(int(qp_pwr[t, g]), 1.0) for g in range(G) if qp_pwr[t, g] >= 0]
        coefs += [(int(qpsp[t, s]), 1.0) for s in range(S)]
        if ancillary_mode == "activity":
            coefs += [(int(ppsp[t, s]), 1.0) for s in range(S)]
        else:
            coefs += [(int(qstor[t, s]), 1.0) for s in range(S)]
        anc[t] = lp.add_row(f"ancillary[{t}]", coefs, GE, instance.ancillary_min_mw)

        for s, st in enumerate(storages):
            coefs = [(int(qstor[t, s]), 1.0), (int(ppsp[t, s]), -st.cycle_efficiency),
                     (int(qpsp[t, s]), 1.0)]
            rhs = inflow[t, s]
            if t == 0:
                rhs += st.initial_level_mwh
            else:
                coefs.append((int(qstor[t - 1, s]), -1.0))
            lvl[t, s] = lp.add_row(f"level[{t},{st.id}]", coefs, EQ, rhs)

    lp.layout = DispatchLayout(
        hours=T, cluster_ids=[c.id for c in clusters], storage_ids=[s.id for s in storages],
        qf=qf, qp_pwr=qp_pwr, qp_ht=qp_ht, sconv=sconv, qpsp=qpsp, ppsp=ppsp, qstor=qstor,
        qns_pwr=qns_pwr, qns_ht=qns_ht, qct=qct, power_balance=pb, heat_balance=hb,
        ancillary=anc, level=lvl, inflow=inflow, fuel_cost=fuel_cost)
    return lp


@dataclass
class DispatchResult:
    cluster_ids: list[str]
    cluster_fuels: list[str]
    storage_ids: list[str]
    price: np.ndarray
    heat_price: Optional[np.ndarray]
    power: np.ndarray  # (hours, clusters)
    heat: np.ndarray
    fuel_burn: np.ndarray  # (hours, clusters) MWh of fuel
    emission_factor: np.ndarray  # (clusters,)
    turbine: np.ndarray  # (hours, storages)
    pump: np.ndarray
    level: np.ndarray
    inflow: np.ndarray
    sconv: dict[str, np.ndarray]
    non_served_power: np.ndarray
    non_served_heat: np.ndarray
    curtailment: np.ndarray
    total_cost: float
    ancillary_dual: np.ndarray
    eua_shift: float = 0.0
    eua_mean: float = float("nan")
    iterations: int = 0
    extras: dict = field(default_factory=dict)

    @property
    def hours(self) -> int:
        return len(self.price)

    @property
    def emissions(self) -> float:
        return float((self.fuel_burn * self.emission_factor[None, :]).sum())

    @property
    def base_price(self) -> float:
        return float(self.price.mean())

    def burn_by_fuel(self) -> dict[str, float]:
        out: dict[str, float] = {}
        for g, f in enumerate(self.cluster_fuels):
            out[f] = out.get(f, 0.0) + float(self.fuel_burn[:, g].sum())
        return out

    def totals(self) -> dict:
        burn = self.burn_by_fuel()
        return {
            "hours": self.hours,
            "eua_shift": self.eua_shift,
            "eua_mean": self.eua_mean,
            "base_price": self.base_price,
            "total_cost": self.total_cost,
            "emissions_t": self.emissions,
            "fuel_burn_twh": {f: v / 1e6 for f, v in burn.items()},
            "non_served_power_mwh": float(self.non_served_power.sum()),
            "non_served_heat_mwh": float(self.non_served_heat.sum()),
            "curtailment_mwh": float(self.curtailment.sum()),
        }


Solver = Callable[[LinearProgram], LpSolution]


def _take(x, idx):
    out = np.zeros(idx.shape)
    mask = idx >= 0
    out[mask] = x[idx[mask]]
    return out


def extract_result(instance: SystemInstance, lp: DispatchLP, sol: LpSolution,
                   eua_shift: float = 0.0, eua_mean: float = float("nan")) -> DispatchResult:
    L = lp.layout
    x, y = sol.x, sol.duals
    T = L.hours
    fuel_of = {f.id: f for f in instance.fuels}
    return DispatchResult(
        cluster_ids=list(L.cluster_ids),
        cluster_fuels=[c.fuel for c in instance.clusters],
        storage_ids=list(L.storage_ids),
        price=y[L.power_balance].copy(),
        heat_price=None if L.heat_balance is None else y[L.heat_balance].copy(),
        power=_take(x, L.qp_pwr),
        heat=_take(x, L.qp_ht),
        fuel_burn=_take(x, L.qf),
        emission_factor=np.array([fuel_of[c.fuel].emission_factor for c in instance.clusters]),
        turbine=_take(x, L.qpsp),
        pump=_take(x, L.ppsp),
        level=_take(x, L.qstor),
        inflow=L.inflow.copy(),
        sconv={k: _take(x, v) for k, v in L.sconv.items()},
        non_served_power=x[L.qns_pwr].copy(),
        non_served_heat=np.zeros(T) if L.qns_ht is None else x[L.qns_ht].copy(),
        curtailment=x[L.qct].copy(),
        total_cost=float(sol.objective),
        ancillary_dual=y[L.ancillary].copy(),
        eua_shift=eua_shift,
        eua_mean=eua_mean,
        iterations=sol.iterations,
    )


def run_dispatch(instance: SystemInstance, bundle: TimeSeriesBundle, eua_shift: float = 0.0,
                 solver: Optional[Solver] = None, tolerances: Tolerances = Tolerances(),
                 ancillary_mode: str = "activity") -> DispatchResult:
    lp = build_lp(instance, bundle, eua_shift, ancillary_mode)
    if solver is None:
        sol = reference_solve(lp, tolerances)
    else:
        sol = solver(lp)
    if not sol.optimal:
        raise DispatchError(
            f"dispatch LP is {sol.status} ({lp.n_rows} rows, {lp.n_cols} columns)"
            + (f": {sol.message}" if sol.message else ""))
    log.debug("dispatch solved: %d iterations, objective %.6g", sol.iterations, sol.objective)
    eua_mean = float(bundle.eua_price.mean() + eua_shift)
    result = extract_result(instance, lp, sol, eua_shift, eua_mean)
    result.extras["lp"] = lp
    result.extras["solution"] = sol
    return result


def emissions_and_burn(result: DispatchResult) -> tuple[dict[str, float], float]:
    """Fuel burn per fuel (MWh_th) and total CO2 emissions (t)."""
    return result.burn_by_fuel(), result.emissions


def goodness_of_fit(model_prices, reference_prices) -> tuple[float, float]:
    """Pearson correlation and RMSE of model prices against a reference series."""
    a = np.asarray(model_prices, dtype=float)
    b = np.asarray(reference_prices, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("series must be one-dimensional and of equal length")
    if len(a) < 2:
        raise ValueError("need at least two observations")
    da, db = a - a.mean(), b - b.mean()
    sa, sb = np.sqrt(da @ da), np.sqrt(db @ db)
    if sa == 0 or sb == 0:
        raise ValueError("correlation undefined for a zero-variance series")
    corr = float(np.clip((da @ db) / (sa * sb), -1.0, 1.0))
    rmse = float(np.sqrt(np.mean((a - b) ** 2)))
    return corr, rmse


# --- export ----------------------------------------------------------------

def write_hourly_csv(result: DispatchResult, path) -> None:
    header = ["hour", "price", "heat_price"]
    header += [f"power_{c}" for c in result.cluster_ids]
    header += [f"heat_{c}" for c in result.cluster_ids]
    header += [f"fuel_{c}" for c in result.cluster_ids]
    for s in result.storage_ids:
        header += [f"turbine_{s}", f"pump_{s}", f"level_{s}"]
    header += ["non_served_power", "non_served_heat", "curtailment"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for t in range(result.hours):
            row = [t, result.price[t],
                   "" if result.heat_price is None else result.heat_price[t]]
            row += list(result.power[t]) + list(result.heat[t]) + list(result.fuel_burn[t])
            for s in range(len(result.storage_ids)):
                row += [result.turbine[t, s], result.pump[t, s], result.level[t, s]]
            row += [result.non_served_power[t], result.non_served_heat[t], result.curtailment[t]]
            w.writerow([v if isinstance(v, (int, str)) else f"{float(v):.10g}" for v in row])


def write_totals_json(result: DispatchResult, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(result.totals(), fh, indent=2, sort_keys=True)
        fh.write("\n")
