"""Hourly exogenous series: CSV ingestion, synthetic years, scenario transforms."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from types import MappingProxyType
from typing import Mapping, Optional

import numpy as np

PHYSICAL = ("load_mw", "heat_mw", "wind_mw", "solar_mw", "ror_mw", "inflow_mwh")
SIGNED = ("net_import_mw",)
REQUIRED = ("timestamp",) + PHYSICAL + SIGNED


class SeriesError(ValueError):
    """Raised for malformed or invalid series input."""


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class TimeSeriesBundle:
    load_mw: np.ndarray
    heat_mw: np.ndarray
    wind_mw: np.ndarray
    solar_mw: np.ndarray
    ror_mw: np.ndarray
    inflow_mwh: np.ndarray
    net_import_mw: np.ndarray
    fuel_price: Mapping[str, np.ndarray]
    eua_price: np.ndarray
    reference_price: Optional[np.ndarray] = None
    timestamps: Optional[tuple] = None

    def __post_init__(self):
        for name in PHYSICAL + SIGNED + ("eua_price",):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        prices = {k: _frozen(v) for k, v in dict(self.fuel_price).items()}
        object.__setattr__(self, "fuel_price", MappingProxyType(prices))
        if self.reference_price is not None:
            object.__setattr__(self, "reference_price", _frozen(self.reference_price))
        problems = bundle_violations(self)
        if problems:
            raise SeriesError("; ".join(problems))

    def __reduce__(self):
        state = {name: getattr(self, name) for name in self.__dataclass_fields__}
        state["fuel_price"] = dict(self.fuel_price)
        return (_rebuild_bundle, (state,))

    @property
    def hours(self) -> int:
        return len(self.load_mw)

    def series(self) -> dict[str, np.ndarray]:
        out = {name: getattr(self, name) for name in PHYSICAL + SIGNED}
        for fuel, p in self.fuel_price.items():
            out[f"price_{fuel}"] = p
        out["price_eua"] = self.eua_price
        if self.reference_price is not None:
            out["ref_price"] = self.reference_price
        return out

    def equals(self, other: "TimeSeriesBundle") -> bool:
        a, b = self.series(), other.series()
        return a.keys() == b.keys() and all(np.array_equal(a[k], b[k]) for k in a)

    def head(self, hours: int) -> "TimeSeriesBundle":
        s = slice(0, hours)
        return replace(
            self,
            **{n: getattr(self, n)[s] for n in PHYSICAL + SIGNED + ("eua_price",)},
            fuel_price={k: v[s] for k, v in self.fuel_price.items()},
            reference_price=None if self.reference_price is None else self.reference_price[s],
            timestamps=None if self.timestamps is None else self.timestamps[s],
        )


def _rebuild_bundle(state):
    return TimeSeriesBundle(**state)


def bundle_violations(b: TimeSeriesBundle) -> list[str]:
    out = []
    n = len(b.load_mw)
    arrays = {name: getattr(b, name) for name in PHYSICAL + SIGNED}
    arrays["price_eua"] = b.eua_price
    arrays.update({f"price_{k}": v for k, v in b.fuel_price.items()})
    if b.reference_price is not None:
        arrays["ref_price"] = b.reference_price
    for name, a in arrays.items():
        if a.ndim != 1 or len(a) != n:
            out.append(f"{name}: length {a.shape} differs from load_mw length {n}")
            continue
        if not np.all(np.isfinite(a)):
            out.append(f"{name}: non-finite values")
        elif name in PHYSICAL and np.any(a < 0):
            out.append(f"{name}: negative values at hour {int(np.argmax(a < 0))}")
        elif name.startswith("price_") and np.any(a < 0):
            out.append(f"{name}: negative price at hour {int(np.argmax(a < 0))}")
    if n < 1:
        out.append("bundle must contain at least one hour")
    return out


# --- CSV -------------------------------------------------------------------

def load_bundle_csv(path) -> TimeSeriesBundle:
    """Read an hourly CSV. Row numbers in error messages count data rows from 1."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise SeriesError(f"{path}: empty file") from None
        for col in REQUIRED:
            if col not in header:
                raise SeriesError(f"{path}: missing column '{col}'")
        if "price_eua" not in header:
            raise SeriesError(f"{path}: missing column 'price_eua'")
        numeric = [h for h in header if h != "timestamp"]
        cols: dict[str, list[float]] = {h: [] for h in numeric}
        stamps = []
        for rowno, row in enumerate(reader, start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise SeriesError(
                    f"{path}: row {rowno} has {len(row)} fields, expected {len(header)}")
            for h, cell in zip(header, row):
                if h == "timestamp":
                    stamps.append(cell.strip())
                    continue
                try:
                    v = float(cell)
                except ValueError:
                    raise SeriesError(
                        f"{path}: row {rowno}, column '{h}': non-numeric value {cell!r}") from None
                if not math.isfinite(v):
                    raise SeriesError(f"{path}: row {rowno}, column '{h}': non-finite value")
                if (h.startswith("price_") or h in PHYSICAL) and v < 0:
                    raise SeriesError(f"{path}: row {rowno}, column '{h}': negative value {v}")
                cols[h].append(v)
    if not stamps:
        raise SeriesError(f"{path}: no data rows")
    fuel_price = {h[len("price_"):]: cols[h] for h in numeric
                  if h.startswith("price_") and h != "price_eua"}
    try:
        return TimeSeriesBundle(
            **{n: cols[n] for n in PHYSICAL + SIGNED},
            fuel_price=fuel_price,
            eua_price=cols["price_eua"],
            reference_price=cols.get("ref_price"),
            timestamps=tuple(stamps),
        )
    except SeriesError as exc:
        raise SeriesError(f"{path}: {exc}") from None


def save_bundle_csv(bundle: TimeSeriesBundle, path) -> None:
    cols = bundle.series()
    stamps = bundle.timestamps or tuple(_iso_hours(bundle.hours))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["timestamp", *cols])
        for t in range(bundle.hours):
            w.writerow([stamps[t], *(repr(float(cols[k][t])) for k in cols)])


def _iso_hours(n, year=2017):
    start = np.datetime64(f"{year}-01-01T00:00")
    return [str(start + np.timedelta64(h, "h")) for h in range(n)]


# --- synthesis -------------------------------------------------------------

@dataclass(frozen=True)
class SeriesProfile:
    """Mean, seasonal and diurnal relative amplitudes, and noise for one series.

    ``seasonal_amp`` > 0 puts the annual maximum in winter (January).
    """

    mean: float
    seasonal_amp: float = 0.0
    diurnal_amp: float = 0.0
    noise: float = 0.0


@dataclass(frozen=True)
class SynthesisProfile:
    # means follow the descriptive statistics of the 2017 DE/AT year (GW -> MW)
    load: SeriesProfile = SeriesProfile(69090.0, 0.10, 0.15, 0.03)
    heat: SeriesProfile = SeriesProfile(13490.0, 0.70, 0.10, 0.03)
    wind: SeriesProfile = SeriesProfile(12490.0, 0.25, 0.0, 0.60)
    solar: SeriesProfile = SeriesProfile(4230.0, -0.50, 0.0, 0.10)
    ror: SeriesProfile = SeriesProfile(4780.0, -0.20, 0.0, 0.05)
    inflow: SeriesProfile = SeriesProfile(790.0, -0.50, 0.0, 0.20)
    net_import: float = -4870.0
    net_import_amp: float = 2000.0
    fuel_prices: Mapping[str, float] = field(default_factory=lambda: {
        "lignite": 5.5, "coal": 9.65, "gas": 17.27, "oil": 28.25, "nuclear": 3.5,
        "biomass": 0.0, "water": 0.0})
    eua_mean: float = 5.89
    hours: int = 8760


def _noise(p: SeriesProfile, rng, n):
    # always draw, so the stream position does not depend on noise settings
    u = rng.uniform(-1.0, 1.0, size=n)
    return 1.0 + p.noise * u


def _shape(t, p: SeriesProfile, rng, hours_per_year=8760.0):
    season = np.cos(2 * np.pi * t / hours_per_year)
    day = -np.cos(2 * np.pi * t / 24.0)
    base = 1.0 + p.seasonal_amp * season + p.diurnal_amp * day
    return np.maximum(base * _noise(p, rng, t.shape), 0.0)


def _solar_shape(t, p: SeriesProfile, rng):
    daylight = np.clip(np.sin(np.pi * (t % 24 - 6) / 12.0), 0.0, None)
    season = 1.0 + p.seasonal_amp * np.cos(2 * np.pi * t / 8760.0)
    return np.maximum(daylight * season * _noise(p, rng, t.shape), 0.0)


def _rescale(x, mean):
    m = x.mean()
    return x * (mean / m) if m > 0 else np.full_like(x, mean)


def synthesize_year(seed: int, profile: SynthesisProfile = SynthesisProfile()) -> TimeSeriesBundle:
    """Deterministic synthetic hourly year.

    Each series is seasonal cosine times diurnal shape times bounded uniform
    multiplicative noise, then rescaled so its sample mean equals the target.
    """
    for name in ("load", "heat", "wind", "solar", "ror", "inflow"):
        if getattr(profile, name).mean <= 0:
            raise ValueError(f"synthesis mean for {name} must be positive")
    for fuel, price in profile.fuel_prices.items():
        if price < 0:
            raise ValueError(f"fuel price for {fuel} must be nonnegative")
    if profile.eua_mean <= 0 or profile.hours < 1:
        raise ValueError("eua_mean and hours must be positive")
    for name in ("load", "heat", "wind", "solar", "ror", "inflow"):
        if getattr(profile, name).noise >= 1:
            raise ValueError(f"noise for {name} must be below 1 to keep the series nonnegative")

    rng = np.random.default_rng(seed)
    t = np.arange(profile.hours, dtype=float)
    out = {}
    for name in ("load", "heat", "wind", "ror", "inflow"):
        p = getattr(profile, name)
        out[name] = _rescale(_shape(t, p, rng), p.mean)
    out["solar"] = _rescale(_solar_shape(t, profile.solar, rng), profile.solar.mean)
    nip = profile.net_import + profile.net_import_amp * np.sin(2 * np.pi * t / 24.0) \
        * (1 + rng.uniform(-0.1, 0.1, size=t.shape))
    fuels = {}
    for fuel, price in profile.fuel_prices.items():
        fuels[fuel] = np.full(profile.hours, float(price))
    # daily-constant allowance price wobbling around the mean
    days = profile.hours // 24 + 1
    daily = profile.eua_mean * (1 + rng.uniform(-0.15, 0.15, size=days))
    eua = np.repeat(daily, 24)[: profile.hours]
    eua = eua - eua.mean() + profile.eua_mean
    return TimeSeriesBundle(
        load_mw=out["load"], heat_mw=out["heat"], wind_mw=out["wind"],
        solar_mw=out["solar"], ror_mw=out["ror"], inflow_mwh=out["inflow"],
        net_import_mw=nip, fuel_price=fuels, eua_price=np.maximum(eua, 0.0),
        timestamps=tuple(_iso_hours(profile.hours)),
    )


# --- transforms ------------------------------------------------------------

_SELECTORS = {
    "net_imports": "net_import_mw",
    "load": "load_mw",
    "heat": "heat_mw",
    "wind": "wind_mw",
    "solar": "solar_mw",
    "ror": "ror_mw",
    "inflow": "inflow_mwh",
    "eua_price": "eua_price",
    "reference_price": "reference_price",
}


def scale_series(bundle: TimeSeriesBundle, selector: str, factor: float) -> TimeSeriesBundle:
    """Multiply one series by ``factor``.

    Selectors: the keys of ``_SELECTORS`` plus ``<fuel>_price`` for any fuel
    in the bundle (``coal_price``, ``gas_price``, ...).
    """
    if not factor > 0:
        raise ValueError("factor must be positive")
    if selector in _SELECTORS:
        attr = _SELECTORS[selector]
        current = getattr(bundle, attr)
        if current is None:
            raise KeyError(f"bundle has no {attr}")
        return replace(bundle, **{attr: current * factor})
    if selector.endswith("_price"):
        fuel = selector[: -len("_price")]
        if fuel in bundle.fuel_price:
            prices = dict(bundle.fuel_price)
            prices[fuel] = prices[fuel] * factor
            return replace(bundle, fuel_price=prices)
    raise KeyError(f"unknown selector '{selector}'")


def shift_eua(bundle: TimeSeriesBundle, delta_eur_per_t: float) -> TimeSeriesBundle:
    """Add a constant to the allowance price series; other series are shared as-is."""
    if delta_eur_per_t == 0:
        return bundle
    shifted = bundle.eua_price + delta_eur_per_t
    if np.any(shifted < 0):
        raise ValueError("EUA shift produces a negative allowance price")
    return replace(bundle, eua_price=shifted)
