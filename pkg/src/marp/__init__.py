"""Multi-agent route selection as a QUBO.

Build vehicle-route instances on road graphs, turn the coverage/overlap
trade-off into a QUBO, minimise it, and score the result.
"""

__version__ = "0.1.0"

from marp.coverage import CoverageStats, compute_coverage, coverage_of_selection
from marp.errors import (EmptySelectionError, InsufficientDataError, InvalidParameterError, MarpError,
                         NoPathError, ParseError, SizeLimitError, ValidationError)
from marp.instance import (MarpInstance, RoadNetwork, Vehicle, generate_instance, generate_network,
                           load_instance, save_instance)
from marp.metrics import MetricsReport, full_report
from marp.qubo import (PenaltyConfig, QuboModel, add_one_hot_groups, build_qubo, energy, export_qubo,
                       import_qubo, lambda_hard, lambda_soft)
from marp.reduction import WspInstance, reduce_wsp_to_marp, solve_wsp_via_marp, wsp_brute_force
from marp.solvers import SaParams, Solution, default_sa_params, solve_exact, solve_greedy, solve_sa
from marp.sweep import ParetoPoint, SweepConfig, binned_frontiers, knee_point, pareto_frontier, run_sweep
