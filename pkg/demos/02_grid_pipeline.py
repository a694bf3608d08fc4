# %% [markdown]
# Grid city, end to end
# ---------------------
# Generate a jittered grid, send 60 vehicles along shortest paths, build the
# QUBO under the soft penalty, solve three ways and compare.

# %%
import time

from marp import build_qubo, compute_coverage, full_report, generate_instance, generate_network
from marp import default_sa_params, solve_greedy, solve_sa
from marp.qubo import PenaltyConfig

net = generate_network("grid", 15, seed=1)
inst = generate_instance(net, 60, seed=1)
stats = compute_coverage(inst)
print(len(net.nodes), "nodes,", len(net.edges), "edges,", inst.n_vehicles, "vehicles")
print(len(stats.overlaps), "overlapping pairs")

# %%
model = build_qubo(stats, PenaltyConfig("soft"))
print("soft lambda =", round(model.lambda_used, 4))

# %%
t = time.perf_counter()
sa = solve_sa(model, default_sa_params(model, seed=3))
print("SA", sa.energy, f"{time.perf_counter() - t:.2f}s")
greedy = solve_greedy(model)
print("greedy", greedy.energy)

# %%
# Metrics of the annealed selection, relative to running the whole fleet.
rep = full_report(inst, stats, model, sa)
for name in ("n_selected", "pct_coverage", "pct_overlap", "pct_vehicles", "avg_node_overlap",
             "top10_share", "entropy_norm", "hhi"):
    print(f"{name:>18}: {getattr(rep, name):.4g}")
