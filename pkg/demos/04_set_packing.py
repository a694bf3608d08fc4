# %% [markdown]
# Weighted set packing through the same machinery
# -----------------------------------------------
# Sets play vehicles, weights play unique coverage, and a penalty above the total
# weight forbids any shared element.

# %%
from marp import WspInstance, reduce_wsp_to_marp, solve_wsp_via_marp, wsp_brute_force

wsp = WspInstance.from_lists(3, [[0, 1], [1, 2], [2]], [5, 4, 3])
stats, lam = reduce_wsp_to_marp(wsp)
print("penalty", lam, "overlaps", stats.overlaps)

chosen, weight = solve_wsp_via_marp(wsp)
print("via QUBO:", sorted(chosen), weight)
print("brute force:", wsp_brute_force(wsp))

# %%
# A random batch, checked against enumeration.
import numpy as np

rng = np.random.default_rng(0)
agree = 0
for _ in range(50):
    m, universe = int(rng.integers(2, 11)), int(rng.integers(3, 12))
    sets = [np.flatnonzero(rng.random(universe) < 0.3).tolist() for _ in range(m)]
    inst = WspInstance.from_lists(universe, sets, rng.integers(0, 11, m).tolist())
    agree += solve_wsp_via_marp(inst)[1] == wsp_brute_force(inst)[1]
print(agree, "/ 50 agree")
