"""Exact lexicographic-makespan scheduling and robust rescheduling."""

from .bnb import (
    Limits,
    SearchNode,
    SolveReport,
    fathom_test,
    solve_lexopt,
    symmetry_reduced_children,
    vectorial_lower_component,
    vectorial_upper_component,
)
from .baselines import (
    PoolEntry,
    collect_solution_pool,
    highest_rank_method,
    sequential_method,
    solve_constrained_min,
    weighting_method,
)
from .generators import (
    Fixture,
    GenSpec,
    PerturbSpec,
    SplitMix64,
    gen_degenerate,
    gen_fixture,
    gen_perturbations,
    gen_wellformed,
)
from .model import (
    InfeasibleError,
    Instance,
    Job,
    LexSchedError,
    Schedule,
    SizeLimitError,
    ValidationError,
    brute_force_lexopt,
    brute_force_makespan,
    completion_vector,
    lex_compare,
    lex_less,
    lpt,
    makespan,
    validate_schedule,
    weighted_value,
)
from .recovery import (
    DecisionSplit,
    GuaranteeCheck,
    GuaranteeReport,
    Perturbation,
    RecoveryScenario,
    UncertaintyCharacterization,
    apply_perturbations,
    binding_recovery,
    characterize_uncertainty,
    classify_decisions,
    flexible_recovery,
    guarantee_bound,
    tightest_boundary,
    verify_guarantee,
)

__version__ = "0.1.0"
