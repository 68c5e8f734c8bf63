"""Scheduling and single-symbol strategy bounds for phase-fading
interference channels.

The package simulates a K-user interference channel whose links apply fixed
random phase rotations. It implements a scheduling scheme that groups users
whose residual cross couplings are small (via a thresholded interference
graph), reference single-user schemes, a single-symbol strategy optimizer
that upper-bounds what per-symbol phase alignment can achieve, and Monte
Carlo verifiers for the analytic bounds that govern both.
"""

__version__ = "0.1.0"

from .channel import (
    ChannelRealization,
    EffectiveGains,
    RateReport,
    bpsk_rate,
    effective_gains,
    normalize,
    sample_channel,
    sinr_rate,
    wrap_angle,
)
from .baselines import tdma_bursty, tdma_peak, tin_all_on
from .seeding import derive_seed, make_generator
from .alignment import (
    Coloring,
    InterferenceGraph,
    Schedule,
    alignment_threshold,
    build_graph,
    greedy_color,
    make_schedule,
    max_independent_set_size,
    phase_alignment_rates,
)
from .ssa import (
    CouplingMatrix,
    SSAPoint,
    SubsetSolution,
    best_subset_exhaustive,
    coupling_matrix,
    direction_grid,
    extreme_point_reduce,
    linearized_sum_rate,
    optimize_ssa,
    ssa_per_user_rates,
    ssa_sum_rate,
    sum_rate_gradient,
)
from .bounds import (
    BoundCheckResult,
    alpha_bound,
    edge_probability,
    edge_probability_paper_bounds,
    lemma1_color_bound,
    lemma3_tail_bound,
    lemma4_modulus,
    theorem_envelopes,
    verify_alpha_bound,
    verify_color_bound,
    verify_direction_continuity,
    verify_edge_probability,
    verify_power_reduction,
    verify_tail_bound,
)
from .experiments import (
    AggregateRow,
    ExperimentConfig,
    ExperimentResult,
    TrialRow,
    aggregate,
    read_aggregates,
    read_rows,
    run_sweep,
    scaling_fit,
    write_aggregates,
    write_bound_results,
    write_rows,
)
from .report import render_figures, render_svg, write_svg

__all__ = [
    "AggregateRow",
    "BoundCheckResult",
    "ChannelRealization",
    "Coloring",
    "CouplingMatrix",
    "EffectiveGains",
    "ExperimentConfig",
    "ExperimentResult",
    "InterferenceGraph",
    "RateReport",
    "SSAPoint",
    "Schedule",
    "SubsetSolution",
    "TrialRow",
    "aggregate",
    "alignment_threshold",
    "alpha_bound",
    "best_subset_exhaustive",
    "bpsk_rate",
    "build_graph",
    "coupling_matrix",
    "derive_seed",
    "direction_grid",
    "edge_probability",
    "edge_probability_paper_bounds",
    "effective_gains",
    "extreme_point_reduce",
    "greedy_color",
    "lemma1_color_bound",
    "lemma3_tail_bound",
    "lemma4_modulus",
    "linearized_sum_rate",
    "make_generator",
    "make_schedule",
    "max_independent_set_size",
    "normalize",
    "optimize_ssa",
    "phase_alignment_rates",
    "read_aggregates",
    "read_rows",
    "render_figures",
    "render_svg",
    "run_sweep",
    "sample_channel",
    "scaling_fit",
    "sinr_rate",
    "ssa_per_user_rates",
    "ssa_sum_rate",
    "sum_rate_gradient",
    "tdma_bursty",
    "tdma_peak",
    "theorem_envelopes",
    "tin_all_on",
    "verify_alpha_bound",
    "verify_color_bound",
    "verify_direction_continuity",
    "verify_edge_probability",
    "verify_power_reduction",
    "verify_tail_bound",
    "wrap_angle",
    "write_aggregates",
    "write_bound_results",
    "write_rows",
    "write_svg",
]
