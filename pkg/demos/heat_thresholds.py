# %% [markdown]
# District heating: when does a higher emission price make heat cheaper?
#
# A heat operator runs a gas boiler and a CHP unit. Power sales offset the CHP
# fuel bill, so the CHP unit wins whenever electricity is dear enough relative
# to fuel plus allowances. If power prices rise by more than a threshold share
# of the emission cost, total heat cost falls as allowances get dearer.

# %%
import numpy as np

from carbonpass.heat import (DhPortfolio, PriceEnv, boiler_heat_cost, chp_heat_cost,
                             dispatch_order, load_table1_calibration, min_markup,
                             min_passthrough, threshold_surface, threshold_table)

pf = DhPortfolio(eta_th_boiler=0.9, eta_th_chp=0.75, eta_el_chp=0.4, emission_factor=0.201)
prices = PriceEnv(p_fuel=17.27, p_emission=5.89, p_electricity=40.0)
print("boiler heat cost", round(boiler_heat_cost(pf, prices), 3))
print("CHP heat cost   ", round(chp_heat_cost(pf, prices), 3))
print("dispatch order  ", dispatch_order(pf, prices).value)

# %% [markdown]
# The CHP unit stays ahead while the power/fuel mark-up exceeds this:

# %%
print("minimum mark-up", round(min_markup(pf), 4))
print("minimum pass-through with CHP covering all heat", round(min_passthrough(pf), 4))

# %% [markdown]
# Thresholds for the calibrated portfolio set, one row per electrical efficiency.

# %%
for row in threshold_table([0.3, 0.4, 0.5, 0.6], load_table1_calibration()):
    print(f"eta_el {row.eta_el:.1f}  eta_th {row.eta_th_chp:.3f}  "
          f"mark-up {row.min_markup:.3f}  pass-through {row.min_passthrough:.3f}")

# %% [markdown]
# Surface over electrical efficiency and CHP share of heat. A smaller CHP
# share leaves more boiler heat exposed to the allowance price, so the
# threshold climbs.

# %%
eta = np.round(np.arange(0.3, 0.61, 0.1), 2)
share = np.array([0.6, 0.8, 1.0])
surface = threshold_surface(eta, share, pf)
print("eta_el \\ share", share)
for e, row in zip(eta, surface):
    print(f"{e:>5}", np.round(row, 3))
