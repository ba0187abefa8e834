"""Domain types for the dispatch model: fuels, clusters, storages, penalties.

All types are frozen dataclasses. ``validate_instance`` reports rule
violations as data; nothing here raises on a malformed instance except the
JSON loader when required keys are missing.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

DEFAULT_VOLL = 12500.0
DEFAULT_CURTAILMENT_COST = 100.0

# t CO2 per MWh of fuel
DEFAULT_EMISSION_FACTORS = {
    "lignite": 0.399,
    "coal": 0.337,
    "gas": 0.201,
    "oil": 0.266,
    "nuclear": 0.0,
    "biomass": 0.0,
    "water": 0.0,
}

STORAGE_CLASSES = ("daily", "weekly", "seasonal")


@dataclass(frozen=True)
class FuelSpec:
    id: str
    emission_factor: float
    base_price_series_ref: str = ""

    @property
    def price_key(self) -> str:
        """Key of this fuel's price series in a bundle (CSV column ``price_<key>``)."""
        ref = self.base_price_series_ref
        if ref.startswith("price_"):
            ref = ref[len("price_"):]
        return ref or self.id


@dataclass(frozen=True)
class Corner:
    """One vertex of a CHP operating region (per-hour MWh values)."""

    power: float
    heat: float
    fuel: float


@dataclass(frozen=True)
class OperatingRegion:
    corners: tuple[Corner, ...]

    def __post_init__(self):
        object.__setattr__(self, "corners", tuple(self.corners))


@dataclass(frozen=True)
class TechnologyCluster:
    id: str
    fuel: str
    power_capacity_mw: float
    heat_capacity_mw: float = 0.0
    efficiency_power: float = 1.0
    om_cost: float = 0.0
    num_plants: int = 1
    operating_region: Optional[OperatingRegion] = None
    is_boiler: bool = False
    # heat-only efficiency, used when is_boiler
    efficiency_heat: float = 0.9

    @property
    def is_chp(self) -> bool:
        return self.operating_region is not None


@dataclass(frozen=True)
class HydroStoragePlant:
    id: str
    turbine_capacity_mw: float
    pump_capacity_mw: float
    reservoir_capacity_mwh: float
    cycle_efficiency: float
    storage_class: str = "daily"
    initial_level_mwh: float = 0.0
    # fraction of the bundle's reservoir inflow routed to this plant;
    # None means pro rata by reservoir size
    inflow_share: Optional[float] = None


@dataclass(frozen=True)
class PenaltyConfig:
    voll: float = DEFAULT_VOLL
    curtailment_cost: float = DEFAULT_CURTAILMENT_COST


@dataclass(frozen=True)
class SystemInstance:
    fuels: tuple[FuelSpec, ...]
    clusters: tuple[TechnologyCluster, ...]
    storages: tuple[HydroStoragePlant, ...] = ()
    penalty: PenaltyConfig = field(default_factory=PenaltyConfig)
    ancillary_min_mw: float = 0.0
    horizon_hours: int = 8760

    def __post_init__(self):
        for name in ("fuels", "clusters", "storages"):
            object.__setattr__(self, name, tuple(getattr(self, name)))

    def fuel(self, fuel_id: str) -> FuelSpec:
        for f in self.fuels:
            if f.id == fuel_id:
                return f
        raise KeyError(fuel_id)

    def with_horizon(self, hours: int) -> "SystemInstance":
        return replace(self, horizon_hours=hours)


@dataclass(frozen=True)
class Violation:
    entity: str
    rule: str

    def __str__(self):
        return f"{self.entity}: {self.rule}"


def _check_unique(kind, ids, out):
    seen = set()
    for i in ids:
        if i in seen:
            out.append(Violation(f"{kind} {i}", "id is not unique"))
        seen.add(i)


def validate_instance(instance: SystemInstance) -> list[Violation]:
    """Return every invariant violation in ``instance`` (empty when valid)."""
    out: list[Violation] = []
    _check_unique("fuel", [f.id for f in instance.fuels], out)
    _check_unique("cluster", [c.id for c in instance.clusters], out)
    _check_unique("storage", [s.id for s in instance.storages], out)

    for f in instance.fuels:
        if not f.emission_factor >= 0:
            out.append(Violation(f"fuel {f.id}", "emission_factor must be >= 0"))

    fuel_ids = {f.id for f in instance.fuels}
    for c in instance.clusters:
        name = f"cluster {c.id}"
        if c.fuel not in fuel_ids:
            out.append(Violation(name, f"fuel '{c.fuel}' does not resolve"))
        if c.power_capacity_mw < 0 or c.heat_capacity_mw < 0:
            out.append(Violation(name, "capacities must be >= 0"))
        if not 0 < c.efficiency_power <= 1:
            out.append(Violation(name, "efficiency_power must lie in (0, 1]"))
        if c.om_cost < 0:
            out.append(Violation(name, "om_cost must be >= 0"))
        if c.is_boiler:
            if c.power_capacity_mw != 0:
                out.append(Violation(name, "boiler must have power_capacity_mw = 0"))
            if c.operating_region is not None:
                out.append(Violation(name, "boiler must not have an operating region"))
            if not 0 < c.efficiency_heat <= 1:
                out.append(Violation(name, "efficiency_heat must lie in (0, 1]"))
        elif c.operating_region is None and c.heat_capacity_mw > 0:
            out.append(Violation(name, "heat capacity requires an operating region or is_boiler"))
        region = c.operating_region
        if region is not None:
            if len(region.corners) < 2:
                out.append(Violation(name, "operating region needs >= 2 corners"))
            if any(min(k.power, k.heat, k.fuel) < 0 for k in region.corners):
                out.append(Violation(name, "operating region entries must be >= 0"))
            if not any(k.power > 0 for k in region.corners):
                out.append(Violation(name, "operating region needs a corner with power > 0"))

    for s in instance.storages:
        name = f"storage {s.id}"
        if min(s.turbine_capacity_mw, s.pump_capacity_mw, s.reservoir_capacity_mwh) < 0:
            out.append(Violation(name, "capacities must be >= 0"))
        if not 0 <= s.initial_level_mwh <= s.reservoir_capacity_mwh:
            out.append(Violation(name, "initial level must lie in [0, reservoir_capacity_mwh]"))
        if not 0 < s.cycle_efficiency <= 1:
            out.append(Violation(name, "cycle_efficiency must lie in (0, 1]"))
        if s.storage_class not in STORAGE_CLASSES:
            out.append(Violation(name, f"storage_class must be one of {STORAGE_CLASSES}"))
        if s.inflow_share is not None and not 0 <= s.inflow_share <= 1:
            out.append(Violation(name, "inflow_share must lie in [0, 1]"))

    shares = [s.inflow_share for s in instance.storages if s.inflow_share is not None]
    if sum(shares) > 1 + 1e-12:
        out.append(Violation("storages", "inflow_share values must sum to at most 1"))

    p = instance.penalty
    if not p.curtailment_cost >= 0:
        out.append(Violation("penalty", "curtailment_cost must be >= 0"))
    if not p.voll > p.curtailment_cost:
        out.append(Violation("penalty", "voll must exceed curtailment_cost"))
    if not instance.ancillary_min_mw >= 0:
        out.append(Violation("instance", "ancillary_min_mw must be >= 0"))
    if instance.horizon_hours < 1:
        out.append(Violation("instance", "horizon_hours must be >= 1"))
    return out


def ancillary_requirement(peak_load_mw: float, wind_capacity_mw: float,
                          solar_capacity_mw: float) -> float:
    """Minimum operating capacity: 12.5 % of peak load plus 7.5 % of wind and solar."""
    if min(peak_load_mw, wind_capacity_mw, solar_capacity_mw) < 0:
        raise ValueError("ancillary_requirement inputs must be nonnegative")
    return 0.125 * peak_load_mw + 0.075 * (wind_capacity_mw + solar_capacity_mw)


# --- JSON round trip -------------------------------------------------------

def instance_to_dict(instance: SystemInstance) -> dict:
    return asdict(instance)


def instance_from_dict(data: dict) -> SystemInstance:
    fuels = [FuelSpec(**f) for f in data["fuels"]]
    clusters = []
    for c in data["clusters"]:
        c = dict(c)
        region = c.pop("operating_region", None)
        if region is not None:
            region = OperatingRegion(tuple(Corner(**k) for k in region["corners"]))
        clusters.append(TechnologyCluster(operating_region=region, **c))
    storages = [HydroStoragePlant(**s) for s in data.get("storages", [])]
    penalty = PenaltyConfig(**data.get("penalty", {}))
    return SystemInstance(
        fuels=tuple(fuels),
        clusters=tuple(clusters),
        storages=tuple(storages),
        penalty=penalty,
        ancillary_min_mw=float(data.get("ancillary_min_mw", 0.0)),
        horizon_hours=int(data.get("horizon_hours", 8760)),
    )


def load_instance(path) -> SystemInstance:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    try:
        return instance_from_dict(data)
    except (KeyError, TypeError) as exc:
        raise ValueError(f"{path}: malformed instance document ({exc})") from exc


def save_instance(instance: SystemInstance, path) -> None:
    Path(path).write_text(json.dumps(instance_to_dict(instance), indent=2) + "\n",
                          encoding="utf-8")


def make_fuels(ids: Sequence[str]) -> tuple[FuelSpec, ...]:
    return tuple(FuelSpec(i, DEFAULT_EMISSION_FACTORS.get(i, 0.0)) for i in ids)
