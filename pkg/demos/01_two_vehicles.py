# %% [markdown]
# Two vehicles, one shared node
# -----------------------------
# The smallest interesting case: vehicle 0 drives 0-1-2, vehicle 1 drives 2-3.
# Node 2 is shared, so picking both costs one unit of overlap.

# %%
from marp import MarpInstance, RoadNetwork, Vehicle, build_qubo, compute_coverage, energy, solve_exact
from marp.qubo import PenaltyConfig, lambda_hard, lambda_soft

# nodes are (id, x, y), edges are (u, v, length)
net = RoadNetwork(nodes=tuple((i, float(i), 0.0) for i in range(4)),
                  edges=((0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)))
inst = MarpInstance(net, (Vehicle(0, 0, 2, (0, 1, 2)), Vehicle(1, 2, 3, (2, 3))))
stats = compute_coverage(inst)
print("unique coverage", stats.unique_counts)   # (2, 1): node 2 is not unique to anyone
print("overlaps", stats.overlaps)               # {(0, 1): 1}

# %%
# The two automatic penalties.
print("lambda soft", lambda_soft(stats))
print("lambda hard", lambda_hard(stats))

# %%
# Energy of every selection at a few penalties. Small lambda keeps both vehicles,
# large lambda drops the shorter one.
for lam in (0.5, lambda_soft(stats), lambda_hard(stats)):
    model = build_qubo(stats, PenaltyConfig("custom", lam))
    table = {x: energy(model, x) for x in ((0, 0), (1, 0), (0, 1), (1, 1))}
    best = solve_exact(model)
    print(f"lambda={lam:.4g}", table, "-> best", list(best.x))
