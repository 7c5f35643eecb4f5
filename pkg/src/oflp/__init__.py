"""Prediction-augmented obnoxious facility location.

Mechanisms with a trust parameter lambda on four metric spaces (unit
segment, unit square, unit-circumference circle, edge-weighted trees),
exact welfare optima with an independent grid oracle, empirical
strategyproofness checkers, and experiments reproducing the
consistency/robustness tradeoff and the segment lower bound.
"""

from .spaces import (
    CIRCLE,
    SEGMENT,
    SQUARE,
    TREE,
    AugmentedTree,
    Space,
    SpaceError,
    TreeGraph,
    TreePoint,
    canonical_point,
    circle_canonical,
    check_point,
    circle_space,
    distance,
    is_peripheral,
    segment_space,
    square_space,
    tree_diameter,
    tree_distance,
    tree_space,
)
from .welfare import (
    DUAL,
    OBNOXIOUS,
    ContractError,
    Profile,
    grid_oracle,
    optimal_location,
    social_welfare,
)
from .mechanisms import (
    Trace,
    robust_coordinatewise_voting,
    robust_majority_circle,
    robust_majority_tree,
    run_mechanism,
    threshold_mechanism,
    transformed_robust_majority,
)
from .game_checks import (
    DeviationReport,
    agent_utility,
    check_coalition,
    check_unilateral,
    misreport_grid,
)
from .experiments import (
    DUAL_KIND,
    EvaluationReport,
    FuzzStats,
    LowerBoundReport,
    TradeoffCurve,
    TradeoffRow,
    Witness,
    adversarial_search,
    bound_fuzz,
    consistency_bound,
    evaluate_instance,
    lb_verify,
    random_instance,
    random_tree,
    robustness_bound,
    tradeoff_sweep,
    witness_suite,
)
from .serialize import (
    InstanceError,
    instance_digest,
    parse_instance,
    serialize_instance,
)

__all__ = [name for name in dir() if not name.startswith("_")]

__version__ = "1.0.0"
