"""Benchmark frameworks and evaluation protocols.

Three bidding frameworks are compared on the same scenario data:

* myopic ("myd"): bid the expected VRES output, then re-dispatch;
* bilevel-informed ("bid"): the single-level bid optimization;
* stochastic ideal ("std"): one joint LP over both stages with VRES
  dispatch bounded by installed capacity only.

The stochastic ideal relaxes the bid problem and the myopic bid is one of
its feasible choices, so expected totals satisfy std <= bid <= myd up to
solver tolerance. A brute-force oracle grids the bid space for small cases.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace

import numpy as np

from . import lpcore
from ._blocks import (
    VarDa,
    add_dam_block,
    add_rtm_block,
    da_row,
    da_var,
    rt_cost_from_primal,
    rt_prefix,
)
from .bid import BidResult, evaluate_bids_full, quantity_bounds, solve_bid
from .dam import DamSolution
from .errors import (
    InfeasibleError,
    OracleSizeError,
    SolverError,
    UnboundedError,
    ValidationError,
)
from .lpcore import LpModel
from .rtm import RtmSolution, solve_rtm_all
from .sysmodel import (
    BidVector,
    PowerSystem,
    RunConfig,
    ScenarioSet,
    slice_periods,
    validate_scenarios,
    with_initial_state,
)

FRAMEWORKS = ("myd", "bid", "std")


@dataclass(frozen=True)
class CostReport:
    """Expected-cost summary for one framework on one scenario set."""

    framework: str
    total: float  # dam_cost + rt_expected
    dam_cost: float
    rt_expected: float
    rt_costs: dict[str, float]  # per-scenario re-dispatch cost
    total_std: float  # weighted std of per-scenario totals
    bids: BidVector | None


@dataclass(frozen=True)
class FrameworkRun:
    """A framework outcome with everything reporting needs."""

    report: CostReport
    dam: DamSolution
    rtm: dict[str, RtmSolution]
    bid_result: BidResult | None
    dam_prices: dict[tuple[str, int], float]
    rt_prices: dict[tuple[str, int, str], float]


def _weighted_std(weights: dict[str, float], values: dict[str, float]) -> float:
    mean = sum(weights[s] * values[s] for s in weights)
    var = sum(weights[s] * (values[s] - mean) ** 2 for s in weights)
    return math.sqrt(max(var, 0.0))


def _make_report(
    framework: str,
    scenarios: ScenarioSet,
    dam_cost: float,
    rt_costs: dict[str, float],
    bids: BidVector | None,
) -> CostReport:
    weights = scenarios.weights
    rt_expected = sum(weights[s] * rt_costs[s] for s in weights)
    totals = {s: dam_cost + rt_costs[s] for s in weights}
    return CostReport(
        framework=framework,
        total=dam_cost + rt_expected,
        dam_cost=dam_cost,
        rt_expected=rt_expected,
        rt_costs=dict(rt_costs),
        total_std=_weighted_std(weights, totals),
        bids=bids,
    )


def _run_from_solutions(
    framework: str,
    scenarios: ScenarioSet,
    dam_sol: DamSolution,
    rt_sols: dict[str, RtmSolution],
    bid_result: BidResult | None = None,
) -> FrameworkRun:
    rt_costs = {sid: s.cost for sid, s in rt_sols.items()}
    report = _make_report(framework, scenarios, dam_sol.cost, rt_costs, dam_sol.bids)
    return FrameworkRun(
        report=report,
        dam=dam_sol,
        rtm=rt_sols,
        bid_result=bid_result,
        dam_prices=dict(dam_sol.duals.balance) if dam_sol.duals else {},
        rt_prices={
            (b, t, sid): p
            for sid, s in rt_sols.items()
            for (b, t), p in s.prices.items()
        },
    )


def run_myd_full(
    system: PowerSystem, scenarios: ScenarioSet, config: RunConfig | None = None
) -> FrameworkRun:
    """Myopic benchmark: bid the expected VRES output."""
    config = config or RunConfig()
    config.validate_for(system)
    validate_scenarios(scenarios, system)
    bids = BidVector.from_mean(scenarios)
    _, dam_sol, rt_sols = evaluate_bids_full(
        system, scenarios, bids, voll=config.voll, tolerance=config.solver_tolerance
    )
    return _run_from_solutions("myd", scenarios, dam_sol, rt_sols)


def run_myd(
    system: PowerSystem, scenarios: ScenarioSet, config: RunConfig | None = None
) -> CostReport:
    return run_myd_full(system, scenarios, config).report


def run_bid_full(
    system: PowerSystem, scenarios: ScenarioSet, config: RunConfig | None = None
) -> FrameworkRun:
    """Bid optimization, re-simulated at the extracted bids."""
    result = solve_bid(system, scenarios, config)
    return _run_from_solutions("bid", scenarios, result.dam, result.rtm, result)


def run_bid(
    system: PowerSystem, scenarios: ScenarioSet, config: RunConfig | None = None
) -> CostReport:
    return run_bid_full(system, scenarios, config).report


def run_std_full(
    system: PowerSystem, scenarios: ScenarioSet, config: RunConfig | None = None
) -> FrameworkRun:
    """Stochastic ideal: one LP over both stages.

    The day-ahead VRES dispatch is bounded by installed capacity, so this is
    a relaxation of every bid choice and its optimum lower-bounds both other
    frameworks. Real-time prices are the scenario balance duals rescaled by
    the scenario weight.
    """
    config = config or RunConfig()
    config.validate_for(system)
    validate_scenarios(scenarios, system)
    P = scenarios.periods

    model = LpModel("std")
    cap = {(k.id, t): k.capacity for k in system.vres_units for t in P}
    add_dam_block(model, system, scenarios, wind_ub=cap)
    for s in scenarios.scenarios:
        add_rtm_block(
            model, system, scenarios, s, VarDa("da"), voll=config.voll, weight=s.weight
        )
    sol = lpcore.solve(model, tolerance=config.solver_tolerance)
    if sol.status == "infeasible":
        raise InfeasibleError("stochastic two-stage model is infeasible")
    if sol.status == "unbounded":
        raise UnboundedError("stochastic two-stage model is unbounded")

    g = sol.primal
    units = system.conventional_units
    dispatch = {(u.id, t): g[da_var("da", "pC", u.id, t)] for u in units for t in P}
    commitment = {(u.id, t): g[da_var("da", "u", u.id, t)] for u in units for t in P}
    startup = {(u.id, t): g[da_var("da", "c", u.id, t)] for u in units for t in P}
    vres_dispatch = {
        (k.id, t): g[da_var("da", "pW", k.id, t)] for k in system.vres_units for t in P
    }
    dam_cost = sum(
        u.variable_cost * dispatch[(u.id, t)]
        + u.no_load_cost * commitment[(u.id, t)]
        + startup[(u.id, t)]
        for u in units
        for t in P
    )
    dam_sol = DamSolution(
        periods=P,
        dispatch=dispatch,
        commitment=commitment,
        startup_cost=startup,
        vres_dispatch=vres_dispatch,
        angle={(b.id, t): g[da_var("da", "th", b.id, t)] for b in system.buses for t in P},
        cost=dam_cost,
        bids=BidVector(vres_dispatch),
        duals=None,
    )

    rt_sols: dict[str, RtmSolution] = {}
    for s in scenarios.scenarios:
        q = rt_prefix(s.id)
        rt_sols[s.id] = RtmSolution(
            scenario_id=s.id,
            up={(u.id, t): g[da_var(q, "rU", u.id, t)] for u in units for t in P},
            down={(u.id, t): g[da_var(q, "rD", u.id, t)] for u in units for t in P},
            commitment={(u.id, t): g[da_var(q, "uR", u.id, t)] for u in units for t in P},
            startup_cost={(u.id, t): g[da_var(q, "cR", u.id, t)] for u in units for t in P},
            curtailment={
                (k.id, t): g[da_var(q, "crt", k.id, t)]
                for k in system.vres_units
                for t in P
            },
            shed={(b.id, t): g[da_var(q, "shed", b.id, t)] for b in system.buses for t in P},
            angle={(b.id, t): g[da_var(q, "th", b.id, t)] for b in system.buses for t in P},
            cost=rt_cost_from_primal(
                system, scenarios, s, g, commitment, voll=config.voll
            ),
            prices={
                (b.id, t): sol.dual[da_row(q, "bal", b.id, t)] / s.weight
                for b in system.buses
                for t in P
            },
        )

    rt_costs = {sid: r.cost for sid, r in rt_sols.items()}
    report = _make_report("std", scenarios, dam_cost, rt_costs, None)
    # consistency: the stitched stage costs must reproduce the LP objective
    if abs(report.total - sol.objective) > 1e-6 * (1.0 + abs(sol.objective)):
        raise SolverError(
            "stochastic model stage costs do not add up to its objective"
        )
    return FrameworkRun(
        report=report,
        dam=dam_sol,
        rtm=rt_sols,
        bid_result=None,
        dam_prices={
            (b.id, t): sol.dual[da_row("da", "bal", b.id, t)]
            for b in system.buses
            for t in P
        },
        rt_prices={
            (b, t, sid): p
            for sid, r in rt_sols.items()
            for (b, t), p in r.prices.items()
        },
    )


def run_std(
    system: PowerSystem, scenarios: ScenarioSet, config: RunConfig | None = None
) -> CostReport:
    return run_std_full(system, scenarios, config).report


def run_framework(
    framework: str,
    system: PowerSystem,
    scenarios: ScenarioSet,
    config: RunConfig | None = None,
) -> FrameworkRun:
    if framework == "myd":
        return run_myd_full(system, scenarios, config)
    if framework == "bid":
        return run_bid_full(system, scenarios, config)
    if framework == "std":
        return run_std_full(system, scenarios, config)
    raise ValidationError(f"unknown framework {framework!r}")


# -- brute-force oracle -------------------------------------------------------


def oracle_grid(
    scenarios: ScenarioSet,
    gamma: float,
    grid_step: float,
    *,
    grid_cap: int = 1_000_000,
) -> tuple[list[tuple[str, int]], list[list[float]]]:
    """Per-dimension bid grids on [0, gamma * expected VRES]."""
    if not (grid_step > 0.0):
        raise ValidationError("grid_step must be positive")
    hi = quantity_bounds(scenarios, gamma)
    dims = sorted(hi)
    grids: list[list[float]] = []
    total = 1
    for key in dims:
        top = hi[key]
        pts = [i * grid_step for i in range(int(math.floor(top / grid_step)) + 1)]
        if not pts or top - pts[-1] > 1e-9:
            pts.append(top)
        grids.append(pts)
        total *= len(pts)
        if total > grid_cap:
            raise OracleSizeError(
                f"bid grid would enumerate more than {grid_cap} points"
            )
    return dims, grids


def run_oracle(
    system: PowerSystem,
    scenarios: ScenarioSet,
    config: RunConfig | None = None,
    *,
    grid_step: float = 1.0,
    grid_cap: int = 1_000_000,
) -> CostReport:
    """Exhaustive grid search over bid vectors; exact up to the grid step.

    Intended for systems with at most a couple of VRES-period dimensions;
    the enumeration cap fails fast otherwise.
    """
    config = config or RunConfig()
    config.validate_for(system)
    validate_scenarios(scenarios, system)
    dims, grids = oracle_grid(scenarios, config.gamma, grid_step, grid_cap=grid_cap)

    best_cost = math.inf
    best: tuple[float, ...] | None = None
    for combo in itertools.product(*grids):
        bids = BidVector(dict(zip(dims, combo)))
        cost, _, _ = evaluate_bids_full(
            system, scenarios, bids, voll=config.voll, tolerance=config.solver_tolerance
        )
        if cost < best_cost - 1e-12:
            best_cost = cost
            best = combo
    bids = BidVector(dict(zip(dims, best or ())))
    _, dam_sol, rt_sols = evaluate_bids_full(
        system, scenarios, bids, voll=config.voll, tolerance=config.solver_tolerance
    )
    rt_costs = {sid: s.cost for sid, s in rt_sols.items()}
    return _make_report("oracle", scenarios, dam_sol.cost, rt_costs, bids)


# -- out-of-sample evaluation --------------------------------------------------


@dataclass(frozen=True)
class OosReport:
    """Frozen-schedule performance across held-out scenario sets."""

    framework: str
    train_total: float
    totals: tuple[float, ...]  # one per test set
    mean: float
    std: float  # population std across test sets


def out_of_sample(
    system: PowerSystem,
    train: ScenarioSet,
    framework: str,
    tests: list[ScenarioSet],
    config: RunConfig | None = None,
) -> OosReport:
    """Train a framework, freeze its day-ahead schedule, re-dispatch tests.

    Each test set keeps the day-ahead stage cost fixed and replaces only the
    re-dispatch stage, which is how a committed schedule meets days the
    planner did not sample.
    """
    config = config or RunConfig()
    if not tests:
        raise ValidationError("need at least one test scenario set")
    run = run_framework(framework, system, train, config)
    totals = []
    for test in tests:
        if test.periods != train.periods:
            raise ValidationError("test sets must cover the training periods")
        validate_scenarios(test, system)
        rts = solve_rtm_all(
            system, test, run.dam, voll=config.voll, tolerance=config.solver_tolerance
        )
        weights = test.weights
        totals.append(
            run.report.dam_cost
            + sum(weights[sid] * rts[sid].cost for sid in weights)
        )
    arr = np.asarray(totals, dtype=float)
    return OosReport(
        framework=framework,
        train_total=run.report.total,
        totals=tuple(float(v) for v in arr),
        mean=float(arr.mean()),
        std=float(arr.std()),
    )


# -- rolling horizon -----------------------------------------------------------


def rolling_horizon(
    system: PowerSystem,
    scenarios: ScenarioSet,
    config: RunConfig,
    frameworks: tuple[str, ...] = FRAMEWORKS,
) -> dict[str, CostReport]:
    """Clear the horizon in consecutive windows with state handoff.

    Each window re-optimizes with the previous window's final day-ahead
    commitment and output as initial conditions; startup costs are charged
    only within windows. With the window spanning the whole horizon this
    reduces to the single-shot solve.
    """
    validate_scenarios(scenarios, system)
    P = scenarios.periods
    window = config.horizon_window or len(P)
    chunks = [P[i : i + window] for i in range(0, len(P), window)]
    inner = replace(config, horizon_window=None)

    out: dict[str, CostReport] = {}
    for fw in frameworks:
        if fw not in FRAMEWORKS:
            raise ValidationError(f"unknown framework {fw!r}")
        sys_w = system
        dam_cost = 0.0
        rt_costs = {s.id: 0.0 for s in scenarios.scenarios}
        bids_acc: dict[tuple[str, int], float] = {}
        for chunk in chunks:
            scen_w = slice_periods(scenarios, chunk)
            run = run_framework(fw, sys_w, scen_w, inner)
            dam_cost += run.report.dam_cost
            for sid in rt_costs:
                rt_costs[sid] += run.report.rt_costs[sid]
            if run.report.bids is not None:
                bids_acc.update(run.report.bids.quantities)
            last = chunk[-1]
            sys_w = with_initial_state(
                sys_w,
                {
                    u.id: (
                        run.dam.commitment[(u.id, last)],
                        run.dam.dispatch[(u.id, last)],
                    )
                    for u in system.conventional_units
                },
            )
        out[fw] = _make_report(
            fw, scenarios, dam_cost, rt_costs, BidVector(bids_acc) if bids_acc else None
        )
    return out
