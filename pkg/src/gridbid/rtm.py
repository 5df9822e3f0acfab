"""Real-time re-dispatch against a frozen day-ahead schedule.

Each scenario solves its own LP: upward/downward redispatch, real-time
commitment of fast units, VRES curtailment, and load shedding at the value
of lost load close the gap between the day-ahead position and the realized
system state. The balance duals are the real-time prices used for
settlement. A negative optimal cost is legitimate: downward redispatch
refunds fuel.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from . import lpcore
from ._blocks import FixedDa, add_rtm_block, da_row, da_var, line_tag, rt_prefix
from .dam import DamSolution
from .errors import InfeasibleError, UnboundedError
from .lpcore import LpModel
from .sysmodel import PowerSystem, ScenarioSet


@dataclass(frozen=True)
class RtmSolution:
    """One scenario's re-dispatch outcome."""

    scenario_id: str
    up: dict[tuple[str, int], float]  # upward redispatch, MW
    down: dict[tuple[str, int], float]  # downward redispatch, MW
    commitment: dict[tuple[str, int], float]  # real-time u in [0, 1]
    startup_cost: dict[tuple[str, int], float]  # incremental startup cost, $
    curtailment: dict[tuple[str, int], float]  # spilled VRES, MW
    shed: dict[tuple[str, int], float]  # lost load per bus, MW
    angle: dict[tuple[str, int], float]
    cost: float  # re-dispatch cost, $ (can be negative)
    prices: dict[tuple[str, int], float]  # real-time nodal prices


def _fixed_da(da: DamSolution) -> FixedDa:
    return FixedDa(da.dispatch, da.commitment, da.startup_cost)


def build_rtm(
    system: PowerSystem,
    scenarios: ScenarioSet,
    da: DamSolution,
    scenario_id: str,
    *,
    voll: float = 1000.0,
) -> LpModel:
    """Assemble one scenario's re-dispatch LP against the frozen schedule."""
    model = LpModel(f"rtm[{scenario_id}]")
    add_rtm_block(
        model,
        system,
        scenarios,
        scenarios.scenario(scenario_id),
        _fixed_da(da),
        voll=voll,
        weight=1.0,
    )
    return model


def solve_rtm(
    system: PowerSystem,
    scenarios: ScenarioSet,
    da: DamSolution,
    scenario_id: str,
    *,
    voll: float = 1000.0,
    tolerance: float = 1e-6,
) -> RtmSolution:
    """Re-dispatch one scenario.

    With shedding priced at the value of lost load and downward redispatch
    never cheaper than upward, this LP is feasible and bounded for any
    day-ahead schedule the day-ahead market can produce; failure therefore
    raises instead of returning a status.
    """
    model = build_rtm(system, scenarios, da, scenario_id, voll=voll)
    sol = lpcore.solve(model, tolerance=tolerance)
    if sol.status == "infeasible":
        raise InfeasibleError(
            f"real-time re-dispatch infeasible for scenario {scenario_id!r}; "
            "this indicates inconsistent input data"
        )
    if sol.status == "unbounded":
        raise UnboundedError(
            f"real-time re-dispatch unbounded for scenario {scenario_id!r}"
        )

    q = rt_prefix(scenario_id)
    P = scenarios.periods
    g = sol.primal
    units = system.conventional_units
    return RtmSolution(
        scenario_id=scenario_id,
        up={(u.id, t): g[da_var(q, "rU", u.id, t)] for u in units for t in P},
        down={(u.id, t): g[da_var(q, "rD", u.id, t)] for u in units for t in P},
        commitment={(u.id, t): g[da_var(q, "uR", u.id, t)] for u in units for t in P},
        startup_cost={(u.id, t): g[da_var(q, "cR", u.id, t)] for u in units for t in P},
        curtailment={
            (k.id, t): g[da_var(q, "crt", k.id, t)] for k in system.vres_units for t in P
        },
        shed={(b.id, t): g[da_var(q, "shed", b.id, t)] for b in system.buses for t in P},
        angle={(b.id, t): g[da_var(q, "th", b.id, t)] for b in system.buses for t in P},
        cost=sol.objective,
        prices={
            (b.id, t): sol.dual[da_row(q, "bal", b.id, t)]
            for b in system.buses
            for t in P
        },
    )


def solve_rtm_all(
    system: PowerSystem,
    scenarios: ScenarioSet,
    da: DamSolution,
    *,
    voll: float = 1000.0,
    tolerance: float = 1e-6,
    workers: int | None = None,
) -> dict[str, RtmSolution]:
    """Re-dispatch every scenario; results keyed by scenario id.

    Scenario solves are independent; ``workers`` > 1 fans them out over a
    thread pool. Aggregation order is scenario-id order either way.
    """
    ids = [s.id for s in scenarios.scenarios]
    if workers is not None and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = {
                sid: pool.submit(
                    solve_rtm,
                    system,
                    scenarios,
                    da,
                    sid,
                    voll=voll,
                    tolerance=tolerance,
                )
                for sid in ids
            }
            return {sid: futures[sid].result() for sid in ids}
    return {
        sid: solve_rtm(system, scenarios, da, sid, voll=voll, tolerance=tolerance)
        for sid in ids
    }


def expected_rt_cost(
    system: PowerSystem,
    scenarios: ScenarioSet,
    da: DamSolution,
    *,
    voll: float = 1000.0,
    tolerance: float = 1e-6,
    solutions: dict[str, RtmSolution] | None = None,
) -> float:
    """Probability-weighted re-dispatch cost over all scenarios."""
    if solutions is None:
        solutions = solve_rtm_all(
            system, scenarios, da, voll=voll, tolerance=tolerance
        )
    weights = scenarios.weights
    return sum(weights[sid] * sol.cost for sid, sol in solutions.items())
