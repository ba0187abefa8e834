# %% [markdown]
# One week of hourly dispatch on the bundled three-fuel system.

# %%
import numpy as np

from carbonpass.datasets import three_fuel_week
from carbonpass.dispatch import run_dispatch

instance, bundle = three_fuel_week()
res = run_dispatch(instance, bundle)
print(f"base price {res.base_price:.2f} EUR/MWh, emissions {res.emissions / 1e6:.3f} Mt")

# %% [markdown]
# Hourly prices are the duals of the power balance. Sorting them gives a
# price duration curve; the steps are the marginal plants.

# %%
steps, counts = np.unique(np.round(res.price, 2), return_counts=True)
for p, n in zip(steps[::-1], counts[::-1]):
    print(f"{p:8.2f} EUR/MWh for {n:3d} h")

# %% [markdown]
# Output by cluster, and what the pumped storage did.

# %%
for g, name in enumerate(res.cluster_ids):
    print(f"{name:12s} {res.power[:, g].sum() / 1e3:9.1f} GWh el  {res.heat[:, g].sum() / 1e3:8.1f} GWh th")
print("pumped", round(res.pump.sum() / 1e3, 1), "GWh; turbined", round(res.turbine.sum() / 1e3, 1), "GWh")
cheap = res.price[res.pump[:, 0] > 1].mean() if (res.pump[:, 0] > 1).any() else float("nan")
dear = res.price[res.turbine[:, 0] > 1].mean() if (res.turbine[:, 0] > 1).any() else float("nan")
print(f"mean price while pumping {cheap:.2f}, while turbining {dear:.2f}")

# %% [markdown]
# Doubling the allowance price shifts the merit order from lignite toward gas.

# %%
hot = run_dispatch(instance, bundle, eua_shift=40.0)
for fuel in ("lignite", "coal", "gas"):
    a, b = res.burn_by_fuel()[fuel], hot.burn_by_fuel()[fuel]
    print(f"{fuel:8s} {a / 1e6:7.3f} -> {b / 1e6:7.3f} TWh fuel")
