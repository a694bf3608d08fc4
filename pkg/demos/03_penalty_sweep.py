# %% [markdown]
# Sweeping the penalty
# --------------------
# Raising lambda trades coverage for less overlap. Each fleet size gets its own
# Pareto frontier, and the knee marks where extra coverage stops being cheap.

# %%
from marp import SweepConfig, binned_frontiers, knee_point, run_sweep

cfg = SweepConfig(lambda_values=(0.05, 0.1, 0.2, 0.5, 1.0, "soft", "hard"),
                  fleet_sizes=(50, 100), network_kind="grid", network_size=25, num_reads=20)
rows = run_sweep(cfg)
for r in rows:
    print(f"n={r.fleet_size:4d} lambda={r.lambda_value:8.3f} ({r.regime:6s}) "
          f"cov={r.report.pct_coverage:5.1f}% ov={r.report.pct_overlap:5.1f}%")

# %%
for label, front in binned_frontiers(rows, cfg.bins).items():
    knee = knee_point(front)
    print(f"bin {label}: {len(front)} frontier points, knee at lambda={knee.lambda_value:.3g} "
          f"(cov {knee.pct_cov:.1f}%, ov {knee.pct_ov:.1f}%)")
