"""Adaptive transit routing that maximizes on-time arrival probability."""

from .baseline import ComparisonRow, LetResult, compare_sota_let, let_path
from .dist import (
    DiscreteCdf,
    DiscretePmf,
    ExhaustedLineError,
    GridMismatchError,
    HeadwayModel,
    LognormalSpec,
    SurvivalTable,
    convolve,
    discretize_lognormal,
    interleave_station_pmfs,
    propagate_headway,
    renormalize_waiting,
    station_tie_mass,
    waiting_from_headway,
)
from .grid import TimeGrid, parse_duration_seconds
from .instances import Instance, random_instance, single_station_demo, three_line_corridor
from .network import (
    ArrivalNode,
    CapacityError,
    DestinationNode,
    ExpandedGraph,
    FeasibilityBounds,
    Line,
    LineNode,
    NetworkSpec,
    SpecError,
    Station,
    StationNode,
    build_expanded_graph,
    candidate_lines,
    feasibility_bounds,
)
from .oracle import OracleCapError, enumerate_oracle
from .policy import (
    Policy,
    PolicyGapError,
    SimulationReport,
    extract_policy,
    simulate,
)
from .solver import (
    DominanceCache,
    HeuristicConfig,
    MissingStateError,
    SolveMode,
    SolveResult,
    SolveStats,
    Solver,
    UtilityTable,
    solve,
)

__version__ = "0.1.0"
