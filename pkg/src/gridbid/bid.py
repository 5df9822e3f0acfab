"""Uncertainty-informed day-ahead VRES quantity bids.

The bid problem is bilevel: choose offered quantities W so that total
expected cost (day-ahead clearing plus probability-weighted re-dispatch) is
minimal, where the day-ahead schedule is itself the optimizer of the
clearing LP given W. It is collapsed to a single LP in three steps:

1. the clearing problem's optimality is encoded by dual feasibility,
   gradient (stationarity) conditions, and a strong-duality equation --
   obtained here by transposing the actual day-ahead rows, so the encoding
   can never drift from the primal block;
2. the one bilinear term that survives, dual-of-the-bid-cap times bid
   quantity, is substituted by an auxiliary variable z;
3. z is boxed by its McCormick envelope over [0, quantity bound] x
   [0, dual bound].

The relaxation's W can be degenerate wherever the accepted quantity sits
below the offered one, so the reported bid vector is the accepted day-ahead
VRES position, and the headline cost is re-simulated by clearing the
day-ahead market at that bid and re-dispatching every scenario.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

from . import lpcore
from ._blocks import VarDa, add_dam_block, add_rtm_block, da_var
from .dam import DamSolution, solve_dam
from .errors import InfeasibleError, SolverError, UnboundedError, ValidationError
from .lpcore import LpModel
from .rtm import RtmSolution, expected_rt_cost, solve_rtm_all
from .sysmodel import (
    BidVector,
    PowerSystem,
    RunConfig,
    ScenarioSet,
    mean_vres,
    validate_scenarios,
)


@dataclass(frozen=True)
class McCormickBounds:
    """Envelope box per (vres unit, period); lower corners are zero."""

    quantity_hi: Mapping[tuple[str, int], float]  # MW cap on offered W
    dual_hi: Mapping[tuple[str, int], float]  # $/MWh cap on the bid-cap dual

    def __post_init__(self):
        for name, m in (("quantity", self.quantity_hi), ("dual", self.dual_hi)):
            for key, v in m.items():
                if v < 0.0 or not math.isfinite(v):
                    raise ValidationError(
                        f"{name} bound for {key} must be finite and >= 0 "
                        "(upper corner below the zero lower corner)"
                    )
        object.__setattr__(self, "quantity_hi", dict(self.quantity_hi))
        object.__setattr__(self, "dual_hi", dict(self.dual_hi))


def quantity_bounds(
    scenarios: ScenarioSet, gamma: float
) -> dict[tuple[str, int], float]:
    """Bid quantity caps: gamma times the expected VRES output."""
    if gamma < 0.0:
        raise ValidationError("gamma must be nonnegative")
    return {key: gamma * v for key, v in mean_vres(scenarios).items()}


def dual_bounds(
    system: PowerSystem,
    scenarios: ScenarioSet,
    xi: float,
    *,
    tolerance: float = 1e-6,
) -> dict[tuple[str, int], float]:
    """Dual caps from a zero-bid day-ahead clearing.

    With every VRES offer at zero, the dual of each bid cap prices the first
    offered MW. That dual can degenerate to zero (the cap row is slack-free
    but the wind is worthless only by coincidence), so the nodal price at
    the unit's bus backstops it; xi then scales the result.
    """
    if xi < 0.0:
        raise ValidationError("xi must be nonnegative")
    zero = BidVector.zeros(system, scenarios.periods)
    base = solve_dam(system, scenarios, zero, tolerance=tolerance)
    out: dict[tuple[str, int], float] = {}
    for k in system.vres_units:
        for t in scenarios.periods:
            cap_dual = base.duals.vres_hi[(k.id, t)]
            price = base.duals.balance[(k.bus, t)]
            out[(k.id, t)] = xi * max(cap_dual, price, 0.0)
    return out


def mccormick_bounds(
    system: PowerSystem, scenarios: ScenarioSet, config: RunConfig
) -> McCormickBounds:
    return McCormickBounds(
        quantity_hi=quantity_bounds(scenarios, config.gamma),
        dual_hi=dual_bounds(
            system, scenarios, config.xi, tolerance=config.solver_tolerance
        ),
    )


def _w_name(unit_id: str, t: int) -> str:
    return f"W[{unit_id},{t}]"


def _z_name(unit_id: str, t: int) -> str:
    return f"z[{unit_id},{t}]"


def _dual_name(row_name: str) -> str:
    return f"dl.{row_name}"


def build_bid_mccormick(
    system: PowerSystem,
    scenarios: ScenarioSet,
    bounds: McCormickBounds,
    *,
    voll: float = 1000.0,
) -> LpModel:
    """Assemble the single-level bid LP.

    Layout: bid variables W, the day-ahead block with W as its VRES caps,
    one re-dispatch block per scenario coupled to the day-ahead variables,
    then the transposed optimality system (duals, stationarity rows, strong
    duality with z substituted) and the McCormick envelope rows.
    """
    validate_scenarios(scenarios, system)
    model = LpModel("bid")
    P = scenarios.periods

    wind_var: dict[tuple[str, int], str] = {}
    for k in system.vres_units:
        for t in P:
            name = _w_name(k.id, t)
            model.add_var(name, lb=0.0, ub=bounds.quantity_hi[(k.id, t)])
            wind_var[(k.id, t)] = name

    info = add_dam_block(model, system, scenarios, wind_var=wind_var)
    for s in scenarios.scenarios:
        add_rtm_block(
            model, system, scenarios, s, VarDa(info.prefix), voll=voll, weight=s.weight
        )

    lower_prefix = info.prefix + "."
    dam_rows = [r for r in model.rows if r.name.startswith(lower_prefix)]

    # one dual per day-ahead row; the bid-cap duals are boxed by the envelope
    w_row_names = {da_var(info.prefix, "w_hi", k.id, t): (k.id, t) for k in system.vres_units for t in P}
    for r in dam_rows:
        if r.sense == "=":
            model.add_var(_dual_name(r.name))
        elif r.name in w_row_names:
            model.add_var(
                _dual_name(r.name), lb=0.0, ub=bounds.dual_hi[w_row_names[r.name]]
            )
        else:
            model.add_var(_dual_name(r.name), lb=0.0)
    for k in system.vres_units:
        for t in P:
            model.add_var(_z_name(k.id, t))

    # stationarity: transpose the day-ahead rows over day-ahead columns
    stationarity: dict[str, dict[str, float]] = {v: {} for v in info.lower_cost}
    sd_row: dict[str, float] = {}
    for v, cost in info.lower_cost.items():
        if cost != 0.0:
            sd_row[v] = cost
    for r in dam_rows:
        dual = _dual_name(r.name)
        for var, coef in r.coeffs.items():
            if var.startswith(lower_prefix):
                sign = 1.0 if r.sense == "<=" else -1.0
                acc = stationarity[var]
                acc[dual] = acc.get(dual, 0.0) + sign * coef
            elif r.name not in w_row_names:
                raise SolverError(
                    f"day-ahead row {r.name!r} unexpectedly couples to {var!r}"
                )
        # strong duality: f - g = 0; g collects sigma * rhs per row
        sigma = -1.0 if r.sense == "<=" else 1.0
        if r.rhs != 0.0:
            sd_row[dual] = sd_row.get(dual, 0.0) - sigma * r.rhs
    for (k, t) in w_row_names.values():
        # the bid-cap rhs is the decision W; its dual-weighted term is z
        sd_row[_z_name(k, t)] = 1.0

    for v, coeffs in stationarity.items():
        model.add_constr(f"st.{v}", coeffs, "=", -info.lower_cost[v])
    model.add_constr("sd", sd_row, "=", 0.0)

    for k in system.vres_units:
        for t in P:
            w = _w_name(k.id, t)
            z = _z_name(k.id, t)
            d = _dual_name(da_var(info.prefix, "w_hi", k.id, t))
            bw = bounds.quantity_hi[(k.id, t)]
            bl = bounds.dual_hi[(k.id, t)]
            model.add_constr(f"mc_a[{k.id},{t}]", {z: 1.0}, ">=", 0.0)
            model.add_constr(
                f"mc_b[{k.id},{t}]", {z: 1.0, w: -bl, d: -bw}, ">=", -bl * bw
            )
            model.add_constr(f"mc_c[{k.id},{t}]", {z: 1.0, w: -bl}, "<=", 0.0)
            model.add_constr(f"mc_d[{k.id},{t}]", {z: 1.0, d: -bw}, "<=", 0.0)

    return model


def envelope_violation(
    bounds: McCormickBounds, key: tuple[str, int], w: float, d: float, z: float
) -> float:
    """Largest violated McCormick inequality at a point; <= 0 means inside."""
    bw = bounds.quantity_hi[key]
    bl = bounds.dual_hi[key]
    return max(
        -z,
        bl * w + bw * d - bl * bw - z,
        z - bl * w,
        z - bw * d,
    )


@dataclass(frozen=True)
class BidResult:
    """Outcome of the bid optimization.

    ``bids`` is the accepted day-ahead VRES position of the relaxed optimum
    (the offered W is degenerate above it); ``evaluated_cost`` is the
    re-simulated expected total cost of clearing at those bids, which is the
    number benchmarks should quote. ``relaxed_objective`` lower-bounds it.
    """

    bids: BidVector
    relaxed_objective: float
    evaluated_cost: float
    dam: DamSolution
    rtm: dict[str, RtmSolution]
    bounds: McCormickBounds
    envelope_gap: dict[tuple[str, int], float]
    offered: BidVector  # raw W variables at the relaxed optimum


def solve_bid(
    system: PowerSystem, scenarios: ScenarioSet, config: RunConfig | None = None
) -> BidResult:
    """Optimize VRES bids, then re-simulate both markets at the result."""
    config = config or RunConfig()
    config.validate_for(system)
    bounds = mccormick_bounds(system, scenarios, config)
    model = build_bid_mccormick(system, scenarios, bounds, voll=config.voll)
    sol = lpcore.solve(model, tolerance=config.solver_tolerance)
    if sol.status == "infeasible":
        raise InfeasibleError(
            "bid optimization is infeasible; the dual bounds are likely too "
            "tight (raise xi)"
        )
    if sol.status == "unbounded":
        raise UnboundedError("bid optimization is unbounded; check cost data")

    P = scenarios.periods
    quantities: dict[tuple[str, int], float] = {}
    offered: dict[tuple[str, int], float] = {}
    gaps: dict[tuple[str, int], float] = {}
    for k in system.vres_units:
        for t in P:
            key = (k.id, t)
            quantities[key] = max(0.0, sol.primal[da_var("da", "pW", k.id, t)])
            offered[key] = max(0.0, sol.primal[_w_name(k.id, t)])
            d = sol.primal[_dual_name(da_var("da", "w_hi", k.id, t))]
            z = sol.primal[_z_name(k.id, t)]
            gaps[key] = abs(z - d * offered[key])

    bids = BidVector(quantities)
    dam_sol = solve_dam(system, scenarios, bids, tolerance=config.solver_tolerance)
    rt_sols = solve_rtm_all(
        system,
        scenarios,
        dam_sol,
        voll=config.voll,
        tolerance=config.solver_tolerance,
    )
    evaluated = dam_sol.cost + expected_rt_cost(
        system, scenarios, dam_sol, voll=config.voll, solutions=rt_sols
    )
    return BidResult(
        bids=bids,
        relaxed_objective=sol.objective,
        evaluated_cost=evaluated,
        dam=dam_sol,
        rtm=rt_sols,
        bounds=bounds,
        envelope_gap=gaps,
        offered=BidVector(offered),
    )


def evaluate_bids(
    system: PowerSystem,
    scenarios: ScenarioSet,
    bids: BidVector,
    *,
    voll: float = 1000.0,
    tolerance: float = 1e-6,
) -> float:
    """Expected total cost of clearing at the given bids: day-ahead cost
    plus probability-weighted re-dispatch cost."""
    cost, _, _ = evaluate_bids_full(
        system, scenarios, bids, voll=voll, tolerance=tolerance
    )
    return cost


def evaluate_bids_full(
    system: PowerSystem,
    scenarios: ScenarioSet,
    bids: BidVector,
    *,
    voll: float = 1000.0,
    tolerance: float = 1e-6,
) -> tuple[float, DamSolution, dict[str, RtmSolution]]:
    """As :func:`evaluate_bids` but returning both markets' solutions."""
    dam_sol = solve_dam(system, scenarios, bids, tolerance=tolerance)
    rt_sols = solve_rtm_all(system, scenarios, dam_sol, voll=voll, tolerance=tolerance)
    expected = expected_rt_cost(
        system, scenarios, dam_sol, voll=voll, solutions=rt_sols
    )
    return dam_sol.cost + expected, dam_sol, rt_sols
