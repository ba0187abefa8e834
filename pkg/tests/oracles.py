"""Independent reference computations used by the test suite.

Nothing here calls into the package's solver; these are brute-force or
closed-form recomputations of the quantities under test.
"""
from __future__ import annotations

import itertools

import numpy as np

from carbonpass.lp import EQ, GE, LE, LinearProgram


def vertex_enumeration(lp: LinearProgram, feas_tol: float = 1e-9):
    """Minimum of ``lp`` over all basic solutions of [A I][x; s] = b.

    Every structural column must have finite bounds. Returns (objective, x)
    or (None, None) when no basic solution is feasible.
    """
    A, c, lo, up, senses, b = lp.arrays()
    A = A.toarray()
    m, n = A.shape
    assert np.all(np.isfinite(lo)) and np.all(np.isfinite(up))
    K = np.hstack([A, np.eye(m)])
    slo = np.where(senses == GE, -np.inf, 0.0)
    sup = np.where(senses == LE, np.inf, 0.0)
    L = np.concatenate([lo, slo])
    U = np.concatenate([up, sup])
    cost = np.concatenate([c, np.zeros(m)])
    best, best_x = None, None
    for basic in itertools.combinations(range(n + m), m):
        basic = list(basic)
        B = K[:, basic]
        if abs(np.linalg.det(B)) < 1e-10:
            continue
        nonbasic = [j for j in range(n + m) if j not in basic]
        choices = []
        for j in nonbasic:
            opts = [v for v in {L[j], U[j]} if np.isfinite(v)]
            choices.append(opts)
        patterns = np.array(list(itertools.product(*choices)), dtype=float)
        if patterns.size == 0:
            patterns = np.zeros((1, 0))
        rhs = b[:, None] - K[:, nonbasic] @ patterns.T
        xb = np.linalg.solve(B, rhs)  # m x P
        ok = np.all(xb >= L[basic][:, None] - feas_tol, axis=0) & \
            np.all(xb <= U[basic][:, None] + feas_tol, axis=0)
        if not ok.any():
            continue
        obj = cost[basic] @ xb + patterns @ cost[nonbasic]
        obj = np.where(ok, obj, np.inf)
        k = int(np.argmin(obj))
        if best is None or obj[k] < best:
            best = float(obj[k])
            full = np.zeros(n + m)
            full[basic] = xb[:, k]
            full[nonbasic] = patterns[k]
            best_x = full[:n]
    return best, best_x


def random_lp(rng: np.random.Generator, n: int, m: int, density: float = 0.6) -> LinearProgram:
    """Feasible LP with finite bounds (hence bounded), built around a random interior point.

    Inequalities are strictly slack at that point and equality rows are
    independent, so small rhs changes in either direction keep it feasible.
    """
    lp = LinearProgram("random")
    lo = np.where(rng.random(n) < 0.5, 0.0, rng.uniform(-5, 0, n))
    up = lo + rng.uniform(1, 10, n)
    x0 = rng.uniform(lo, up)
    for j in range(n):
        lp.add_column(f"x{j}", lo[j], up[j], rng.normal())
    eq_rows: list[np.ndarray] = []
    for i in range(m):
        sense = (LE, GE, EQ)[rng.choice(3, p=[0.45, 0.35, 0.2])]
        while True:
            mask = rng.random(n) < density
            if not mask.any():
                mask[rng.integers(n)] = True
            row = np.where(mask, rng.normal(size=n), 0.0)
            if sense != EQ:
                break
            # equality rows stay linearly independent so every rhs can move both ways
            if len(eq_rows) < n - 1 and np.linalg.matrix_rank(np.vstack(eq_rows + [row])) == len(eq_rows) + 1:
                eq_rows.append(row)
                break
            sense = (LE, GE)[rng.integers(2)]
        coefs = {int(j): float(row[j]) for j in np.flatnonzero(mask)}
        act = sum(v * x0[j] for j, v in coefs.items())
        rhs = act + (rng.uniform(0.01, 2) if sense == LE else -rng.uniform(0.01, 2) if sense == GE else 0)
        lp.add_row(f"r{i}", coefs, sense, rhs)
    return lp


def merit_order_prices(costs, caps, demand, voll):
    """Greedy merit order: price = marginal cost of the last unit needed each hour.

    ``costs`` is (T, G) per-MWh_el marginal cost, ``caps`` (G,), ``demand`` (T,).
    Hours where demand exceeds total capacity price at ``voll``.
    """
    costs = np.asarray(costs, dtype=float)
    prices = np.empty(len(demand))
    for t, d in enumerate(demand):
        order = np.argsort(costs[t], kind="stable")
        remaining = d
        price = None
        for g in order:
            if caps[g] <= 0:
                continue
            remaining -= caps[g]
            if remaining < 0:
                price = costs[t, g]
                break
        prices[t] = voll if price is None else price
    return prices


def chp_total_heat_cost(p_e, p_el_of, portfolio, fuel_price, demand=1.0):
    """Total heat cost of a boiler+CHP pair at a fixed CHP heat share.

    Heat cost per unit follows directly from fuel, emission and electricity
    prices; the CHP covers ``share`` of demand and the boiler the rest.
    """
    p_el = p_el_of(p_e)
    fuel_cost = fuel_price + p_e * portfolio["em"]
    k_b = fuel_cost / portfolio["eta_b"]
    k_c = (fuel_cost - portfolio["eta_el"] * p_el) / portfolio["eta_c"]
    s = portfolio["share"]
    return demand * (s * k_c + (1 - s) * k_b)


def conservation_residuals(instance, bundle, result) -> dict:
    """Worst relative residual of each balance identity, recomputed from primal values."""
    renew = bundle.wind_mw + bundle.solar_mw + bundle.ror_mw
    net = bundle.load_mw - bundle.net_import_mw - renew
    supply = result.power.sum(axis=1) + result.turbine.sum(axis=1) - result.pump.sum(axis=1)
    out = {"power": np.abs(supply - result.curtailment + result.non_served_power - net).max()
           / (1 + np.abs(net).max())}
    storage = [0.0]
    for s, st in enumerate(instance.storages):
        prev = np.concatenate([[st.initial_level_mwh], result.level[:-1, s]])
        expect = prev + st.cycle_efficiency * result.pump[:, s] - result.turbine[:, s] \
            + result.inflow[:, s]
        scale = 1 + st.reservoir_capacity_mwh
        storage.append(np.abs(result.level[:, s] - expect).max() / scale)
        storage.append(max(st.initial_level_mwh - result.level[-1, s], 0.0) / scale)
    out["storage"] = max(storage)
    em = {f.id: f.emission_factor for f in instance.fuels}
    by_unit = sum(em[f] * result.fuel_burn[:, g].sum() for g, f in enumerate(result.cluster_fuels))
    out["emissions"] = abs(result.emissions - by_unit) / (1 + abs(by_unit))
    burn = result.burn_by_fuel()
    out["burn"] = abs(sum(burn.values()) - result.fuel_burn.sum()) / (1 + result.fuel_burn.sum())
    if result.heat_price is not None:
        served = result.heat.sum(axis=1) + result.non_served_heat
        out["heat"] = np.maximum(bundle.heat_mw - served, 0).max() / (1 + bundle.heat_mw.max())
    lp = result.extras["lp"]
    cost = (result.fuel_burn * lp.layout.fuel_cost).sum() \
        + instance.penalty.voll * (result.non_served_power.sum() + result.non_served_heat.sum()) \
        + instance.penalty.curtailment_cost * result.curtailment.sum()
    out["objective"] = abs(cost - result.total_cost) / (1 + abs(result.total_cost))
    return {k: float(v) for k, v in out.items()}


def random_power_only_case(rng: np.random.Generator):
    """Thermal-only instance (<= 8 clusters, <= 48 h, no ancillary floor) plus its merit-order inputs."""
    from carbonpass.datasets import flat_bundle
    from carbonpass.model import FuelSpec, SystemInstance, TechnologyCluster

    G = int(rng.integers(1, 9))
    T = int(rng.integers(1, 49))
    fuels = tuple(FuelSpec(f"f{g}", float(rng.uniform(0, 0.4))) for g in range(G))
    caps = rng.uniform(10, 200, G)
    eff = rng.uniform(0.3, 0.6, G)
    om = rng.uniform(0, 3, G)
    clusters = tuple(TechnologyCluster(f"u{g}", f"f{g}", float(caps[g]),
                                       efficiency_power=float(eff[g]), om_cost=float(om[g]))
                     for g in range(G))
    inst = SystemInstance(fuels=fuels, clusters=clusters, horizon_hours=T)
    fp = {f"f{g}": rng.uniform(1, 40, T) for g in range(G)}
    eua = rng.uniform(0, 80, T)
    load = rng.uniform(0, 1.1 * caps.sum(), T)
    bundle = flat_bundle(T, load, fp, eua=eua)
    # O&M is charged per MWh of fuel, like the fuel and allowance costs
    costs = np.column_stack([(fp[f"f{g}"] + fuels[g].emission_factor * eua + om[g]) / eff[g]
                             for g in range(G)])
    return inst, bundle, costs, caps, load
