"""Bundled instances: a three-fuel test week and a small illustrative fleet.

The three-fuel week is committed as files under ``carbonpass/data`` so that
acceptance runs do not depend on regenerating it; ``build_three_fuel_week``
documents how the files were produced.
"""
from __future__ import annotations

from importlib import resources

import numpy as np

from .model import (Corner, FuelSpec, HydroStoragePlant, OperatingRegion, PenaltyConfig,
                    SystemInstance, TechnologyCluster, instance_from_dict, load_instance,
                    make_fuels)
from .timeseries import (SeriesProfile, SynthesisProfile, TimeSeriesBundle, load_bundle_csv,
                         synthesize_year)

THREE_FUEL_SEED = 7


def _data_path(name: str):
    return resources.files("carbonpass.data").joinpath(name)


def build_three_fuel_week() -> tuple[SystemInstance, TimeSeriesBundle]:
    """Lignite (cheap, dirty), hard coal and gas (clean, dear) on a windy winter week."""
    profile = SynthesisProfile(
        hours=168,
        wind=SeriesProfile(30000.0, 0.25, 0.0, 0.9),
        fuel_prices={"lignite": 5.5, "coal": 9.65, "gas": 17.27},
    )
    bundle = synthesize_year(THREE_FUEL_SEED, profile)
    instance = SystemInstance(
        fuels=make_fuels(["lignite", "coal", "gas"]),
        clusters=(
            TechnologyCluster("lignite_st", "lignite", 18000, efficiency_power=0.38, om_cost=1.0),
            TechnologyCluster("coal_st", "coal", 22000, efficiency_power=0.40, om_cost=1.0),
            TechnologyCluster("gas_cc", "gas", 40000, efficiency_power=0.55, om_cost=0.5),
            TechnologyCluster("gas_boiler", "gas", 0, 30000, is_boiler=True, efficiency_heat=0.9),
        ),
        # pure pumped storage: natural inflow belongs to plants outside this system
        storages=(HydroStoragePlant("psp", 6000, 6000, 40000, 0.75, "daily", 20000,
                                    inflow_share=0.0),),
        ancillary_min_mw=21000.0,
        horizon_hours=168,
    )
    return instance, bundle


def three_fuel_week() -> tuple[SystemInstance, TimeSeriesBundle]:
    with resources.as_file(_data_path("three_fuel_instance.json")) as p:
        instance = load_instance(p)
    with resources.as_file(_data_path("three_fuel_week.csv")) as p:
        bundle = load_bundle_csv(p)
    return instance, bundle


def default_instance() -> SystemInstance:
    """Small illustrative fleet; not a reconstruction of any real power system."""
    with resources.as_file(_data_path("default_instance.json")) as p:
        return load_instance(p)


def build_default_instance() -> SystemInstance:
    chp_gas = OperatingRegion((Corner(0, 0, 0), Corner(5000, 0, 10000),
                               Corner(4000, 5000, 10000), Corner(1200, 1500, 3000)))
    chp_lignite = OperatingRegion((Corner(0, 0, 0), Corner(3000, 0, 7900),
                                   Corner(2600, 2500, 7900), Corner(900, 900, 2600)))
    return SystemInstance(
        fuels=make_fuels(["nuclear", "lignite", "coal", "gas", "oil"]),
        clusters=(
            TechnologyCluster("nuclear", "nuclear", 9500, efficiency_power=0.33, om_cost=2.0),
            TechnologyCluster("lignite_st", "lignite", 17000, efficiency_power=0.38, om_cost=1.0),
            TechnologyCluster("lignite_chp", "lignite", 3000, 2500, operating_region=chp_lignite),
            TechnologyCluster("coal_st", "coal", 21000, efficiency_power=0.40, om_cost=1.0),
            TechnologyCluster("gas_cc", "gas", 22000, efficiency_power=0.55, om_cost=0.5),
            TechnologyCluster("gas_chp", "gas", 5000, 5000, operating_region=chp_gas),
            TechnologyCluster("gas_ot", "gas", 8000, efficiency_power=0.36, om_cost=0.5),
            TechnologyCluster("oil_ot", "oil", 4000, efficiency_power=0.33, om_cost=0.5),
            TechnologyCluster("gas_boiler", "gas", 0, 30000, is_boiler=True, efficiency_heat=0.9),
        ),
        storages=(
            HydroStoragePlant("psp_daily", 7000, 7000, 45000, 0.75, "daily", 20000),
            HydroStoragePlant("res_seasonal", 3000, 0, 900000, 1.0, "seasonal", 450000,
                              inflow_share=1.0),
        ),
        penalty=PenaltyConfig(),
        ancillary_min_mw=21000.0,
        horizon_hours=8760,
    )


def single_gas_instance(hours: int, efficiency: float = 0.5, emission_factor: float = 0.2,
                        capacity: float = 100.0) -> SystemInstance:
    return SystemInstance(
        fuels=(FuelSpec("gas", emission_factor),),
        clusters=(TechnologyCluster("gas", "gas", capacity, efficiency_power=efficiency),),
        horizon_hours=hours,
    )


def flat_bundle(hours: int, load, fuel_prices: dict, eua=10.0, **series) -> TimeSeriesBundle:
    """Bundle with zero renewables, heat, inflow and trade unless given in ``series``."""
    z = np.zeros(hours)
    full = lambda v: np.broadcast_to(np.asarray(v, dtype=float), (hours,)).copy()
    kw = dict(load_mw=full(load), heat_mw=z, wind_mw=z, solar_mw=z, ror_mw=z,
              inflow_mwh=z, net_import_mw=z)
    kw.update({k: full(v) for k, v in series.items()})
    return TimeSeriesBundle(fuel_price={k: full(v) for k, v in fuel_prices.items()},
                            eua_price=full(eua), **kw)
