"""Robust signaling schemes for binary-action Bayesian persuasion.

Regret-minimizing and approximation-maximizing persuasion when the
receiver's utility is unknown, with independent numerical verification of
every closed-form value: zero-sum game discretization, brute-force
adversary search, exact combinatorics and simplex geometry.
"""

__version__ = "0.1.0"

from .core import (
    PLAUSIBILITY_TOL,
    PROB_TOL,
    DensityPiece,
    FiniteScheme,
    MixedThreshold,
    Posterior,
    Prior,
    ReceiverUtility,
    StateOrdering,
    ThresholdScheme,
    adopts,
    is_bayes_plausible,
    load_instance,
    point_mass,
    sample_mixed,
    scheme_from_dict,
    scheme_to_dict,
    sender_utility,
    threshold_to_finite,
)
from .standard import (
    KnapsackSolution,
    PiecewiseLinear,
    concavify_at,
    optimal_knapsack,
    optimal_scheme,
)
from .monotone_regret import (
    ThresholdGameSpec,
    adversary_opt,
    adversary_utility_from_threshold,
    best_response_x,
    best_response_y,
    binary_reduction_uprime,
    expected_g,
    expected_g_vs_x,
    expected_g_vs_y,
    g_payoff,
    reg_mon_value,
    regret_of_scheme,
    sender_opt,
)
from .approx import (
    ApproxGameSpec,
    approx_adversary_opt,
    approx_of_scheme,
    approx_sender_opt,
    apr_mon_value,
    check_reg_apr,
    expected_h,
    expected_h_vs_x,
    expected_h_vs_y,
    h_payoff,
    ratio_reduction_uprime,
)
from .matrix_game import (
    GameReport,
    LemmaCheck,
    MatrixGame,
    discretize,
    solve_matrix_game,
    solve_threshold_game,
    verify_lemma,
)
from .arbitrary import (
    GoodNormalBadInstance,
    HalfPlaneAdoption,
    TernaryBoundaryScheme,
    prop1_adversary,
    prop1_scheme,
    prop1_threshold_sweep,
    ternary_mass_in,
    ternary_regret,
    ternary_sample,
    ternary_sweep,
    thm2_lower_adoption_prob,
    thm2_lower_bound_check,
    thm2_upper_scheme,
)
from .multidim import (
    GridInstance,
    KnapsackRegion,
    antidiagonal_embedding,
    grid_instance_from_dict,
    grid_instance_to_dict,
    is_monotone_grid,
    lift_antidiagonal_utility,
    md_regret_bound_check,
    median_knapsack_scheme,
    sample_monotone_utility,
)
