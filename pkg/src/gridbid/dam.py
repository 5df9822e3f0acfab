"""Day-ahead market clearing.

The day-ahead problem schedules conventional energy, relaxed unit
commitment in [0, 1], startup cost recovery, and offered VRES quantities
against the demand forecast on a DC network. Every restriction is a named
row, so one solve returns the complete dual vector: nodal prices from the
balance rows and the multipliers needed to audit optimality conditions and
strong duality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

from . import lpcore
from ._blocks import add_dam_block, da_row, da_var, line_tag
from .errors import InfeasibleError, UnboundedError
from .lpcore import LpModel
from .sysmodel import (
    BidVector,
    PowerSystem,
    ScenarioSet,
    bus_demand,
    require_bids,
    validate_scenarios,
)


@dataclass(frozen=True)
class DamDuals:
    """Duals of the day-ahead rows, nonnegative for inequalities."""

    balance: dict[tuple[str, int], float]  # nodal price, (bus, t)
    flow_hi: dict[tuple[tuple[str, str], int], float]
    flow_lo: dict[tuple[tuple[str, str], int], float]
    vres_hi: dict[tuple[str, int], float]  # bid quantity cap
    vres_lo: dict[tuple[str, int], float]
    cap_hi: dict[tuple[str, int], float]  # p <= u * p_max
    cap_lo: dict[tuple[str, int], float]  # p >= u * p_min
    cmt_hi: dict[tuple[str, int], float]  # u <= 1
    cmt_lo: dict[tuple[str, int], float]  # u >= 0
    startup_def: dict[tuple[str, int], float]  # c >= C_SU (u_t - u_{t-1})
    startup_lo: dict[tuple[str, int], float]  # c >= 0
    ramp_hi: dict[tuple[str, int], float]
    ramp_lo: dict[tuple[str, int], float]
    ref: dict[int, float]  # angle reference row (zero at optimality)


@dataclass(frozen=True)
class DamSolution:
    """Cleared day-ahead schedule plus its dual vector.

    ``duals`` is None when the schedule was extracted from a joint model
    whose multipliers are not day-ahead duals (the stochastic benchmark).
    """

    periods: tuple[int, ...]
    dispatch: dict[tuple[str, int], float]  # conventional output, MW
    commitment: dict[tuple[str, int], float]  # relaxed u in [0, 1]
    startup_cost: dict[tuple[str, int], float]  # recovered startup cost, $
    vres_dispatch: dict[tuple[str, int], float]  # accepted VRES, MW
    angle: dict[tuple[str, int], float]
    cost: float  # objective value, $
    bids: BidVector
    duals: DamDuals | None

    def lmp(self, bus_id: str, t: int) -> float:
        if self.duals is None:
            raise ValueError("this schedule carries no day-ahead duals")
        return self.duals.balance[(bus_id, t)]


def lmp(solution: DamSolution) -> dict[tuple[str, int], float]:
    """Locational marginal prices: duals of the nodal balance rows."""
    if solution.duals is None:
        raise ValueError("this schedule carries no day-ahead duals")
    return dict(solution.duals.balance)


def build_dam(system: PowerSystem, scenarios: ScenarioSet, bids: BidVector) -> LpModel:
    """Assemble the day-ahead LP for the given VRES quantity bids."""
    validate_scenarios(scenarios, system)
    require_bids(bids, system, scenarios.periods)
    model = LpModel("dam")
    add_dam_block(model, system, scenarios, wind_ub=bids.quantities)
    return model


def solve_dam(
    system: PowerSystem,
    scenarios: ScenarioSet,
    bids: BidVector,
    *,
    tolerance: float = 1e-6,
) -> DamSolution:
    """Clear the day-ahead market; raises a typed error if it cannot clear."""
    model = build_dam(system, scenarios, bids)
    sol = lpcore.solve(model, tolerance=tolerance)
    if sol.status == "infeasible":
        raise InfeasibleError(
            "day-ahead market is infeasible: demand cannot be met within "
            "network and fleet limits"
        )
    if sol.status == "unbounded":
        raise UnboundedError("day-ahead market is unbounded; check cost data")
    return _extract(system, scenarios, bids, sol)


def _clip_dual(v: float) -> float:
    # tiny negative values are solver noise on a nonnegative multiplier
    return 0.0 if -1e-7 < v < 0.0 else v


def _extract(system, scenarios, bids, sol: lpcore.LpSolution) -> DamSolution:
    P = scenarios.periods
    units = system.conventional_units
    vres = system.vres_units
    g = sol.primal

    def dual(family, element, t):
        return _clip_dual(sol.dual[da_row("da", family, element, t)])

    duals = DamDuals(
        balance={(b.id, t): sol.dual[da_row("da", "bal", b.id, t)] for b in system.buses for t in P},
        flow_hi={(l.key, t): dual("flo_hi", line_tag(*l.key), t) for l in system.lines for t in P},
        flow_lo={(l.key, t): dual("flo_lo", line_tag(*l.key), t) for l in system.lines for t in P},
        vres_hi={(k.id, t): dual("w_hi", k.id, t) for k in vres for t in P},
        vres_lo={(k.id, t): dual("w_lo", k.id, t) for k in vres for t in P},
        cap_hi={(u.id, t): dual("cap_hi", u.id, t) for u in units for t in P},
        cap_lo={(u.id, t): dual("cap_lo", u.id, t) for u in units for t in P},
        cmt_hi={(u.id, t): dual("u_hi", u.id, t) for u in units for t in P},
        cmt_lo={(u.id, t): dual("u_lo", u.id, t) for u in units for t in P},
        startup_def={(u.id, t): dual("su", u.id, t) for u in units for t in P},
        startup_lo={(u.id, t): dual("c_lo", u.id, t) for u in units for t in P},
        ramp_hi={(u.id, t): dual("r_hi", u.id, t) for u in units for t in P},
        ramp_lo={(u.id, t): dual("r_lo", u.id, t) for u in units for t in P},
        ref={t: sol.dual[da_row("da", "ref", system.reference_bus, t)] for t in P},
    )
    return DamSolution(
        periods=P,
        dispatch={(u.id, t): g[da_var("da", "pC", u.id, t)] for u in units for t in P},
        commitment={(u.id, t): g[da_var("da", "u", u.id, t)] for u in units for t in P},
        startup_cost={(u.id, t): g[da_var("da", "c", u.id, t)] for u in units for t in P},
        vres_dispatch={(k.id, t): g[da_var("da", "pW", k.id, t)] for k in vres for t in P},
        angle={(b.id, t): g[da_var("da", "th", b.id, t)] for b in system.buses for t in P},
        cost=sol.objective,
        bids=bids,
        duals=duals,
    )


def dual_objective(
    system: PowerSystem, scenarios: ScenarioSet, solution: DamSolution
) -> float:
    """Dual objective of the day-ahead LP evaluated from extracted duals.

    Equal to the primal cost at optimality (strong duality). Includes the
    initial-condition terms, which vanish when every unit starts the horizon
    offline at zero output.
    """
    d = solution.duals
    if d is None:
        raise ValueError("this schedule carries no day-ahead duals")
    P = solution.periods
    first = P[0]
    demand = bus_demand(system, scenarios.da_demand, P)

    g = 0.0
    for b in system.buses:
        for t in P:
            g += d.balance[(b.id, t)] * demand[(b.id, t)]
    for l in system.lines:
        for t in P:
            g -= (d.flow_hi[(l.key, t)] + d.flow_lo[(l.key, t)]) * l.capacity
    for u in system.conventional_units:
        for t in P:
            g -= d.cmt_hi[(u.id, t)]
        g -= u.startup_cost * u.initial_commitment * d.startup_def[(u.id, first)]
        g -= (u.initial_commitment * u.ramp_down - u.initial_output) * d.ramp_lo[(u.id, first)]
        g -= u.initial_output * d.ramp_hi[(u.id, first)]
    for k in system.vres_units:
        for t in P:
            g -= d.vres_hi[(k.id, t)] * solution.bids.get(k.id, t)
    return g


def stationarity_residuals(
    system: PowerSystem, solution: DamSolution
) -> dict[str, float]:
    """Largest optimality-condition residual per variable family.

    These are the hand-written gradient conditions of the day-ahead
    Lagrangian; the bid optimizer emits the same system by transposing the
    constraint matrix, so agreement here validates both routes.
    """
    d = solution.duals
    if d is None:
        raise ValueError("this schedule carries no day-ahead duals")
    P = solution.periods
    last = P[-1]
    worst = {"dispatch": 0.0, "commitment": 0.0, "startup": 0.0, "vres": 0.0, "angle": 0.0}

    for u in system.conventional_units:
        i = u.id
        for t in P:
            r = (
                u.variable_cost
                - d.balance[(u.bus, t)]
                - d.cap_lo[(i, t)]
                + d.cap_hi[(i, t)]
                + d.ramp_hi[(i, t)]
                - d.ramp_lo[(i, t)]
            )
            if t < last:
                r += d.ramp_lo[(i, t + 1)] - d.ramp_hi[(i, t + 1)]
            worst["dispatch"] = max(worst["dispatch"], abs(r))

            r = (
                u.no_load_cost
                + d.cmt_hi[(i, t)]
                - d.cmt_lo[(i, t)]
                - u.p_max * d.cap_hi[(i, t)]
                + u.p_min * d.cap_lo[(i, t)]
                - u.ramp_up * d.ramp_hi[(i, t)]
                + u.startup_cost * d.startup_def[(i, t)]
            )
            if t < last:
                r -= u.ramp_down * d.ramp_lo[(i, t + 1)]
                r -= u.startup_cost * d.startup_def[(i, t + 1)]
            worst["commitment"] = max(worst["commitment"], abs(r))

            r = 1.0 - d.startup_def[(i, t)] - d.startup_lo[(i, t)]
            worst["startup"] = max(worst["startup"], abs(r))

    for k in system.vres_units:
        for t in P:
            r = -d.balance[(k.bus, t)] - d.vres_lo[(k.id, t)] + d.vres_hi[(k.id, t)]
            worst["vres"] = max(worst["vres"], abs(r))

    # per line: marginal value of pushing one more unit of angle difference
    for b in system.buses:
        for t in P:
            r = 0.0
            for l in system.lines:
                h = (
                    d.balance[(l.from_bus, t)]
                    - d.balance[(l.to_bus, t)]
                    + d.flow_hi[(l.key, t)]
                    - d.flow_lo[(l.key, t)]
                ) / l.reactance
                if l.from_bus == b.id:
                    r += h
                elif l.to_bus == b.id:
                    r -= h
            if b.id == system.reference_bus:
                r -= d.ref[t]
            worst["angle"] = max(worst["angle"], abs(r))

    return worst


def strong_duality_residual(
    system: PowerSystem, scenarios: ScenarioSet, solution: DamSolution
) -> float:
    """|primal cost - dual objective| for the cleared day-ahead market."""
    return abs(solution.cost - dual_objective(system, scenarios, solution))
