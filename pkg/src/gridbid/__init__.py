"""Two-settlement electricity market simulator with bid optimization under uncertainty."""

__version__ = "0.1.0"

from .bench import (
    CostReport,
    FrameworkRun,
    OosReport,
    out_of_sample,
    rolling_horizon,
    run_bid,
    run_framework,
    run_myd,
    run_oracle,
    run_std,
)
from .bid import BidResult, McCormickBounds, evaluate_bids, mccormick_bounds, solve_bid
from .dam import DamSolution, lmp, solve_dam
from .errors import (
    ConfigError,
    GridbidError,
    InfeasibleError,
    ModelBuildError,
    OracleSizeError,
    ParseError,
    SolverError,
    UnboundedError,
    ValidationError,
)
from .rtm import RtmSolution, expected_rt_cost, solve_rtm, solve_rtm_all
from .sysmodel import (
    BaseProfile,
    BidVector,
    Bus,
    ConventionalUnit,
    Line,
    Load,
    PowerSystem,
    RunConfig,
    Scenario,
    ScenarioSet,
    VresUnit,
    load_scenarios,
    load_system,
    sample_scenarios,
    validate_scenarios,
)

__all__ = [
    "BaseProfile",
    "BidResult",
    "BidVector",
    "Bus",
    "ConfigError",
    "ConventionalUnit",
    "CostReport",
    "DamSolution",
    "FrameworkRun",
    "GridbidError",
    "InfeasibleError",
    "Line",
    "Load",
    "McCormickBounds",
    "ModelBuildError",
    "OosReport",
    "OracleSizeError",
    "ParseError",
    "PowerSystem",
    "RtmSolution",
    "RunConfig",
    "Scenario",
    "ScenarioSet",
    "SolverError",
    "UnboundedError",
    "ValidationError",
    "VresUnit",
    "evaluate_bids",
    "expected_rt_cost",
    "lmp",
    "load_scenarios",
    "load_system",
    "mccormick_bounds",
    "out_of_sample",
    "rolling_horizon",
    "run_bid",
    "run_framework",
    "run_myd",
    "run_oracle",
    "run_std",
    "sample_scenarios",
    "solve_bid",
    "solve_dam",
    "solve_rtm",
    "solve_rtm_all",
    "validate_scenarios",
    "__version__",
]
