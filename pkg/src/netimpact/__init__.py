"""Network-amplified expected impact of an initiating act.

The branching model gives closed forms for the expected total ``T`` and the
network multiplier ``M``; the graph variant replaces the tree with an
adjacency operator; the simulators provide stochastic cross-checks; and the
SIR module supplies the epidemiological threshold for comparison.
"""

from .analytic import (DEFAULT_TOLERANCE, DepthSchedule, HopBreakdown, HopLayer, ModelParams, Regime,
                       RegimeClass, capture_share_first_k, classify_regime, critical_perturbation_estimate,
                       dyadic_baseline, effective_ratio, hop_breakdown, infinite_horizon_multiplier,
                       infinite_horizon_total, max_depth_within_budget, network_multiplier, reach_count,
                       remaining_share_after_k, solve_critical_lever, tail_share_last_k, total_responsibility,
                       total_with_schedules)
from .errors import (DivergentHorizon, InfeasibleLever, ModelOverflow, NotConverged, ScenarioParseError,
                     StepTooLarge, ValidationError)
from .graph import (NeumannCheck, SpectralEstimate, WeightedDigraph, b_ary_tree, barabasi_albert,
                    complete_graph, cycle_graph, erdos_renyi, generate_graph, graph_total, load_edgelist,
                    neumann_convergent, parse_edgelist, spectral_radius, star_graph, write_edgelist)
from .simulate import SimConfig, SimResult, compare_to_analytic, simulate_branching, simulate_graph_cascade
from .sir import SirParams, SirTrajectory, basic_reproduction_number, integrate_sir, threshold_report

__version__ = "0.1.0"
