"""Closed-form district-heating operator model (gas boiler plus CHP unit).

Heat shadow costs per MWh_th, the electricity mark-up at which the CHP unit
beats the boiler, and the minimum emission-to-power price pass-through under
which total heat cost falls as the emission price rises.
"""
from __future__ import annotations

import enum
import itertools
import json
from dataclasses import asdict, dataclass, replace
from importlib import resources
from typing import Iterable, Sequence

import numpy as np

INDIFFERENCE_TOL = 1e-9


@dataclass(frozen=True)
class DhPortfolio:
    eta_th_boiler: float
    eta_th_chp: float
    eta_el_chp: float
    emission_factor: float
    chp_heat_share: float = 1.0
    elasticity: float = 0.0

    def __post_init__(self):
        for name in ("eta_th_boiler", "eta_th_chp", "eta_el_chp"):
            v = getattr(self, name)
            if not 0 < v <= 1:
                raise ValueError(f"{name} must lie in (0, 1], got {v}")
        if self.eta_th_boiler < self.eta_th_chp:
            raise ValueError("boiler heat efficiency must be at least the CHP heat efficiency")
        if not 0 < self.chp_heat_share <= 1:
            raise ValueError("chp_heat_share must lie in (0, 1]")
        if self.elasticity < 0 or self.emission_factor < 0:
            raise ValueError("elasticity and emission_factor must be nonnegative")


@dataclass(frozen=True)
class PriceEnv:
    p_fuel: float
    p_emission: float
    p_electricity: float

    def __post_init__(self):
        if self.p_fuel < 0 or self.p_emission < 0:
            raise ValueError("fuel and emission prices must be nonnegative")


class DispatchOrder(enum.Enum):
    CHP_FIRST = "chp_first"
    BOILER_FIRST = "boiler_first"
    INDIFFERENT = "indifferent"


def _fuel_cost(pf: DhPortfolio, prices: PriceEnv) -> float:
    return prices.p_fuel + prices.p_emission * pf.emission_factor


def boiler_heat_cost(pf: DhPortfolio, prices: PriceEnv) -> float:
    return _fuel_cost(pf, prices) / pf.eta_th_boiler


def chp_heat_cost(pf: DhPortfolio, prices: PriceEnv) -> float:
    """Heat cost of the CHP unit net of power revenue; negative when power pays for it all."""
    return (_fuel_cost(pf, prices) - pf.eta_el_chp * prices.p_electricity) / pf.eta_th_chp


def min_markup(pf: DhPortfolio) -> float:
    """Electricity price over fuel-plus-emission cost at which CHP heat matches boiler heat."""
    return (pf.eta_th_boiler - pf.eta_th_chp) / (pf.eta_th_boiler * pf.eta_el_chp)


def markup(pf: DhPortfolio, prices: PriceEnv) -> float:
    return prices.p_electricity / _fuel_cost(pf, prices)


def dispatch_order(pf: DhPortfolio, prices: PriceEnv, tol: float = INDIFFERENCE_TOL) -> DispatchOrder:
    diff = boiler_heat_cost(pf, prices) - chp_heat_cost(pf, prices)
    scale = max(1.0, abs(boiler_heat_cost(pf, prices)))
    if diff > tol * scale:
        return DispatchOrder.CHP_FIRST
    if diff < -tol * scale:
        return DispatchOrder.BOILER_FIRST
    return DispatchOrder.INDIFFERENT


def min_passthrough(pf: DhPortfolio) -> float:
    """Pass-through threshold in the adverse case where CHP output does not respond to power prices.

    With s the CHP share of heat, the threshold is
    ((1 - s)/s * eta_th_chp / (eta_th_boiler * eta_el) + 1/eta_el) * em.
    """
    s = pf.chp_heat_share
    ratio = (1.0 - s) / s
    return (ratio * pf.eta_th_chp / (pf.eta_th_boiler * pf.eta_el_chp)
            + 1.0 / pf.eta_el_chp) * pf.emission_factor


def min_passthrough_general(pf: DhPortfolio, prices: PriceEnv, passthrough_guess: float) -> float:
    """Threshold including the supply-response term, evaluated at a given pass-through.

    The response term is -(k_boiler - k_chp)/p_el * elasticity * eta_th_chp/eta_el
    * passthrough_guess. It vanishes when the elasticity is zero or both heat
    costs coincide; no fixed point in the pass-through is sought.
    """
    if not 0 <= passthrough_guess <= 1.5:
        raise ValueError("passthrough_guess must lie in [0, 1.5]")
    base = min_passthrough(pf)
    if pf.elasticity == 0:
        return base
    if prices.p_electricity == 0:
        raise ValueError("electricity price must be nonzero when elasticity > 0")
    gap = boiler_heat_cost(pf, prices) - chp_heat_cost(pf, prices)
    response = -(gap / prices.p_electricity) * pf.elasticity \
        * (pf.eta_th_chp / pf.eta_el_chp) * passthrough_guess
    return base + response


def threshold_surface(eta_el_grid: Sequence[float], share_grid: Sequence[float],
                      template: DhPortfolio) -> np.ndarray:
    """min_passthrough over (eta_el x share); rows follow eta_el_grid."""
    if len(eta_el_grid) == 0 or len(share_grid) == 0:
        raise ValueError("grids must be nonempty")
    out = np.empty((len(eta_el_grid), len(share_grid)))
    for i, eta in enumerate(eta_el_grid):
        for j, s in enumerate(share_grid):
            out[i, j] = min_passthrough(replace(template, eta_el_chp=eta, chp_heat_share=s))
    return out


# --- table of exemplary thresholds ------------------------------------------

TABLE1_ETA_EL = (0.3, 0.4, 0.5, 0.6)
TABLE1_MARKUP = (0.481, 0.389, 0.333, 0.296)
TABLE1_PASSTHROUGH = (0.759, 0.556, 0.433, 0.352)
BOILER_EFFICIENCY = 0.9


@dataclass(frozen=True)
class Calibration:
    eta_el: tuple[float, ...]
    eta_th_chp: tuple[float, ...]
    emission_factor: float
    chp_heat_share: float
    eta_th_boiler: float = BOILER_EFFICIENCY
    max_markup_error: float = 0.0
    max_passthrough_error: float = 0.0

    def portfolios(self) -> list[DhPortfolio]:
        return [DhPortfolio(self.eta_th_boiler, c, e, self.emission_factor, self.chp_heat_share)
                for e, c in zip(self.eta_el, self.eta_th_chp)]

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "Calibration":
        d = json.loads(text)
        return cls(**{k: tuple(v) if isinstance(v, list) else v for k, v in d.items()})


def _grid(lo, hi, step):
    n = int(round((hi - lo) / step))
    return np.round(lo + step * np.arange(n + 1), 10)


def calibrate_table1(eta_el=TABLE1_ETA_EL, markup_target=TABLE1_MARKUP,
                     passthrough_target=TABLE1_PASSTHROUGH,
                     eta_c_grid=None, em_grid=None, share_grid=None,
                     eta_b: float = BOILER_EFFICIENCY,
                     markup_tol: float = 0.005) -> Calibration:
    """Grid search for CHP heat efficiencies, emission factor and CHP share.

    Per row, only CHP heat efficiencies whose mark-up lands within
    ``markup_tol`` of the target are admissible; among all admissible
    combinations the one with the smallest worst-case pass-through error wins
    (ties broken by the smaller mark-up error, then grid order).
    """
    eta_c_grid = _grid(0.5, 0.9, 0.005) if eta_c_grid is None else np.asarray(eta_c_grid)
    em_grid = _grid(0.18, 0.25, 0.001) if em_grid is None else np.asarray(em_grid)
    share_grid = _grid(0.8, 1.0, 0.005) if share_grid is None else np.asarray(share_grid)
    eta_el = np.asarray(eta_el, dtype=float)
    mk_t = np.asarray(markup_target)
    pt_t = np.asarray(passthrough_target)

    # (rows, eta_c)
    mk = (eta_b - eta_c_grid[None, :]) / (eta_b * eta_el[:, None])
    mk_err = np.abs(mk - mk_t[:, None])
    admissible = mk_err <= markup_tol + 1e-12
    if not admissible.any(axis=1).all():
        raise ValueError("no CHP heat efficiency reproduces every mark-up target")

    ratio = (1 - share_grid) / share_grid  # (S,)
    # pass-through per (row, eta_c, em, share)
    coef = (ratio[None, None, :] * eta_c_grid[None, :, None] / (eta_b * eta_el[:, None, None])
            + 1.0 / eta_el[:, None, None])  # (R, C, S)
    pt = coef[:, :, None, :] * em_grid[None, None, :, None]  # (R, C, E, S)
    err = np.abs(pt - pt_t[:, None, None, None])
    err = np.where(admissible[:, :, None, None], err, np.inf)
    # lexicographic per row: pass-through error first, mark-up error second
    key = err + 1e-6 * mk_err[:, :, None, None]
    best_c = np.argmin(key, axis=1)  # (R, E, S)
    row_err = np.take_along_axis(err, best_c[:, None], axis=1)[:, 0]  # (R, E, S)
    worst = row_err.max(axis=0)  # (E, S)
    e_idx, s_idx = np.unravel_index(int(np.argmin(worst)), worst.shape)
    chosen = best_c[:, e_idx, s_idx]
    eta_c = tuple(float(eta_c_grid[c]) for c in chosen)
    return Calibration(
        eta_el=tuple(float(e) for e in eta_el),
        eta_th_chp=eta_c,
        emission_factor=float(em_grid[e_idx]),
        chp_heat_share=float(share_grid[s_idx]),
        eta_th_boiler=eta_b,
        max_markup_error=float(mk_err[np.arange(len(eta_el)), chosen].max()),
        max_passthrough_error=float(worst[e_idx, s_idx]),
    )


def load_table1_calibration() -> Calibration:
    text = resources.files("carbonpass.data").joinpath("table1_calibration.json").read_text()
    return Calibration.from_json(text)


@dataclass(frozen=True)
class ThresholdRow:
    eta_el: float
    eta_th_chp: float
    min_markup: float
    min_passthrough: float


def threshold_table(eta_el: Iterable[float], calibration: Calibration | None = None) -> list[ThresholdRow]:
    """Mark-up and pass-through thresholds per electrical efficiency.

    CHP heat efficiency is taken from the calibration where the efficiency
    matches a calibrated row, otherwise interpolated linearly across rows.
    """
    cal = calibration or load_table1_calibration()
    xs, ys = np.array(cal.eta_el), np.array(cal.eta_th_chp)
    rows = []
    for e in eta_el:
        eta_c = float(np.interp(e, xs, ys))
        eta_c = min(eta_c, cal.eta_th_boiler)
        pf = DhPortfolio(cal.eta_th_boiler, eta_c, e, cal.emission_factor, cal.chp_heat_share)
        rows.append(ThresholdRow(e, eta_c, min_markup(pf), min_passthrough(pf)))
    return rows
