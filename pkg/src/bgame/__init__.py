"""Security-investment games on attack graphs.

Defenders spread protection budgets over the edges of a probabilistic
attack DAG; edge success probabilities decay exponentially in combined
investment, and defenders may weigh probabilities through a Prelec
function. The package computes single-defender best responses, multi-
defender equilibria and planner optima, inefficiency ratios, behavioral
gain reports, and adaptive defense loops against several attacker models.
"""

from .adversary import (
    ATTACKER_KINDS,
    AttackerModel,
    AttackHistory,
    attack_path_sets,
    choose_paths,
    realized_loss,
    simulate_round,
)
from .behavior import (
    DefenderSpec,
    InvestmentProfile,
    PathWeights,
    edge_probability,
    path_success_probability,
    perceived_loss,
    prelec_weight,
    true_loss,
    weighted_perceived_loss,
)
from .catalog import (
    BUILTIN_NAMES,
    DIAMOND_EDGES,
    CaseStudy,
    build_case_study,
    crossed_diamond,
    diamond_defender,
    shared_edge_pair,
    split_chain_pair,
    two_path_diamond,
)
from .game import (
    PLANNER_ID,
    BaselineResult,
    EquilibriumResult,
    GainReport,
    PoaResult,
    baseline_defense_in_depth,
    baseline_min_cut,
    gain_report,
    nash_equilibrium,
    price_of_anarchy,
    probability_of_successful_attack,
    social_optimum,
    with_joint_ownership,
)
from .graph import (
    AttackGraph,
    Edge,
    GraphError,
    MinCutResult,
    PathLimitError,
    PathSet,
    ValidationReport,
    count_paths,
    enumerate_paths,
    load_graph,
    min_cut_size,
    min_edge_cut,
    require_valid,
    save_graph,
    validate,
)
from .kernel import BACKEND as KERNEL_BACKEND
from .learning import (
    DEFAULT_ALPHA_GRID,
    LEARNING_MODES,
    LearningError,
    LearningTrace,
    LemmaReport,
    PathLearningState,
    RlState,
    lemma_convergence_check,
    make_rl_state,
    run_learning,
)
from .solver import (
    BestResponse,
    ClosedForm,
    ClosedFormError,
    KktReport,
    SolverConfig,
    SolverError,
    best_response,
    closed_form_example,
    verify_kkt,
)

__version__ = "0.1.0"

__all__ = [
    "ATTACKER_KINDS",
    "AttackGraph",
    "AttackHistory",
    "AttackerModel",
    "BUILTIN_NAMES",
    "BaselineResult",
    "BestResponse",
    "CaseStudy",
    "ClosedForm",
    "ClosedFormError",
    "DEFAULT_ALPHA_GRID",
    "DIAMOND_EDGES",
    "DefenderSpec",
    "Edge",
    "EquilibriumResult",
    "GainReport",
    "GraphError",
    "InvestmentProfile",
    "KERNEL_BACKEND",
    "KktReport",
    "LEARNING_MODES",
    "LearningError",
    "LearningTrace",
    "LemmaReport",
    "MinCutResult",
    "PLANNER_ID",
    "PathLearningState",
    "PathLimitError",
    "PathSet",
    "PathWeights",
    "PoaResult",
    "RlState",
    "SolverConfig",
    "SolverError",
    "ValidationReport",
    "attack_path_sets",
    "baseline_defense_in_depth",
    "baseline_min_cut",
    "best_response",
    "build_case_study",
    "choose_paths",
    "closed_form_example",
    "count_paths",
    "crossed_diamond",
    "diamond_defender",
    "edge_probability",
    "enumerate_paths",
    "gain_report",
    "lemma_convergence_check",
    "load_graph",
    "make_rl_state",
    "min_cut_size",
    "min_edge_cut",
    "nash_equilibrium",
    "path_success_probability",
    "perceived_loss",
    "prelec_weight",
    "price_of_anarchy",
    "probability_of_successful_attack",
    "realized_loss",
    "require_valid",
    "run_learning",
    "save_graph",
    "shared_edge_pair",
    "simulate_round",
    "social_optimum",
    "split_chain_pair",
    "true_loss",
    "two_path_diamond",
    "validate",
    "verify_kkt",
    "weighted_perceived_loss",
    "with_joint_ownership",
]
