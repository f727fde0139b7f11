"""Solver, simulator, and exact verification toolkit for the best-choice
problem with a limited budget of fallible expert queries."""

from .model import (
    LengthMismatch,
    NumericMode,
    ProbabilityOutOfRange,
    ProblemSpec,
    ResponseModel,
    SumNotOne,
    ValidationError,
    dump_config,
    parse_config,
    read_config,
    symmetric_binary_model,
    validate_model,
)
from .oracle import (
    BudgetExceeded,
    EnumerationBudget,
    exact_success_probability,
    exhaustive_optimal,
    random_exact_model,
    verify_lemma1,
    verify_lemma2,
)
from .policy import (
    EpisodeOutcome,
    Genie,
    GenieExhausted,
    HorizonMismatch,
    NotAPermutation,
    RankStream,
    ScriptedGenie,
    format_trace,
    hindsight_best,
    relative_ranks,
    run_strategy,
)
from .sim import (
    SimConfig,
    SimResult,
    model_genie,
    monte_carlo,
    sample_permutation,
    sample_response,
)
from .solver import (
    ThresholdSet,
    ValueTables,
    classical_threshold,
    compute_tables,
    extract_thresholds,
    pre_query_stop_thresholds,
    tables_to_csv,
    thresholds_to_json,
)

__version__ = "0.1.0"
