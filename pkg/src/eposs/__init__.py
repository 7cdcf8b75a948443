"""Probabilistic scheduling of DAG workflows onto heterogeneous cloud VM pools."""

from .cloud import (
    CATALOG_SUBSETS,
    DISTRIBUTIONS,
    SCENARIOS,
    BadQuantileOrder,
    ExecTimeModel,
    UnknownFamily,
    UnknownVmType,
    VmCatalog,
    VmType,
    catalog_subset,
    quantile_of_mean,
    sample_of_mean,
    transfer_time,
)
from .dag import (
    CycleDetected,
    DanglingEdge,
    MissingTime,
    RankedTasks,
    Task,
    Workflow,
    b_rank,
)
from .experiments import (
    ALGORITHMS,
    ExperimentPlan,
    LoadError,
    ResultRow,
    load_plan,
    parse_results,
    report,
    run_algorithm,
    run_plan,
    summarize,
)
from .generators import DEFAULT_RANGES, TOPOLOGIES, BadSpec, GenSpec, generate, scale_series
from .montecarlo import (
    EvalReport,
    IncompleteSchedule,
    ValidationResult,
    evaluate,
    simulate_runs,
    validate_solution,
)
from .pareto import BadReference, FrontPoint, ParetoFront, hypervolume, non_dominated
from .rng import derive_seed
from .schedule import (
    MalformedSchedule,
    Schedule,
    Timeline,
    UnscheduledPredecessor,
    VmInstance,
    compute_timeline,
    execution_order,
    expected_cost,
    feasible,
)
from .schedulers import (
    Candidate,
    NoFeasibleSolution,
    SchedulerTimeout,
    crowding_select,
    greedy_cost,
    heft,
    moheft,
    rank_order,
)
from .search import (
    ConfigError,
    SearchConfig,
    SearchResult,
    StepRecord,
    eposs,
    m_eposs,
    p_eposs,
    quantile_grid,
)

__version__ = "0.1.0"
