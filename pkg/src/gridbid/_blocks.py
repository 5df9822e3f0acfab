"""Shared constraint-block builders for the market LPs.

The day-ahead block and the per-scenario real-time block are emitted into an
:class:`~gridbid.lpcore.LpModel` with a name prefix, so the same row
construction backs four models: the standalone day-ahead clearing, the
standalone real-time re-dispatch, the joint stochastic benchmark, and the
single-level bid optimization (which additionally transposes the day-ahead
rows into optimality conditions).

Real-time blocks reference the day-ahead schedule through a :class:`DaRef`,
which resolves each day-ahead quantity either to a constant (re-dispatch
against a frozen schedule) or to the day-ahead block's own variables (joint
models).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .lpcore import LpModel
from .sysmodel import PowerSystem, Scenario, ScenarioSet, bus_demand

# -- deterministic name helpers ---------------------------------------------


def da_var(prefix: str, family: str, element: str, t: int) -> str:
    return f"{prefix}.{family}[{element},{t}]"


def da_row(prefix: str, family: str, element: str, t: int) -> str:
    return f"{prefix}.{family}[{element},{t}]"


def line_tag(a: str, b: str) -> str:
    return f"{a}>{b}"


class DaRef:
    """Resolve day-ahead quantities to (coefficients, constant) pairs."""

    def dispatch(self, unit_id: str, t: int) -> tuple[dict[str, float], float]:
        raise NotImplementedError

    def commitment(self, unit_id: str, t: int) -> tuple[dict[str, float], float]:
        raise NotImplementedError

    def startup(self, unit_id: str, t: int) -> tuple[dict[str, float], float]:
        raise NotImplementedError


class FixedDa(DaRef):
    """A frozen day-ahead schedule (plain mappings keyed (unit, period))."""

    def __init__(
        self,
        dispatch: Mapping[tuple[str, int], float],
        commitment: Mapping[tuple[str, int], float],
        startup_cost: Mapping[tuple[str, int], float],
    ):
        self._p = dispatch
        self._u = commitment
        self._c = startup_cost

    def dispatch(self, unit_id, t):
        return {}, self._p[(unit_id, t)]

    def commitment(self, unit_id, t):
        return {}, self._u[(unit_id, t)]

    def startup(self, unit_id, t):
        return {}, self._c[(unit_id, t)]


class VarDa(DaRef):
    """The day-ahead block's own variables (joint models)."""

    def __init__(self, prefix: str = "da"):
        self.prefix = prefix

    def dispatch(self, unit_id, t):
        return {da_var(self.prefix, "pC", unit_id, t): 1.0}, 0.0

    def commitment(self, unit_id, t):
        return {da_var(self.prefix, "u", unit_id, t): 1.0}, 0.0

    def startup(self, unit_id, t):
        return {da_var(self.prefix, "c", unit_id, t): 1.0}, 0.0


def _acc(target: dict[str, float], coeffs: Mapping[str, float], scale: float = 1.0) -> None:
    for name, coef in coeffs.items():
        target[name] = target.get(name, 0.0) + scale * coef


def _flow_coeffs(system: PowerSystem, prefix: str, t: int) -> dict[tuple[str, str], dict[str, float]]:
    """Per line: coefficients of the directed flow (th_from - th_to)/x."""
    out = {}
    for l in system.lines:
        out[l.key] = {
            da_var(prefix, "th", l.from_bus, t): 1.0 / l.reactance,
            da_var(prefix, "th", l.to_bus, t): -1.0 / l.reactance,
        }
    return out


@dataclass(frozen=True)
class DamBlockInfo:
    """Bookkeeping the bid optimizer needs to transpose the block."""

    prefix: str
    periods: tuple[int, ...]
    lower_cost: dict[str, float]  # day-ahead objective coefficient per variable


def add_dam_block(
    model: LpModel,
    system: PowerSystem,
    scenarios: ScenarioSet,
    *,
    wind_ub: Mapping[tuple[str, int], float] | None = None,
    wind_var: Mapping[tuple[str, int], str] | None = None,
    prefix: str = "da",
) -> DamBlockInfo:
    """Emit the day-ahead clearing block.

    The VRES dispatch upper bound comes either from constants (``wind_ub``:
    accepted bids, or installed capacity for the stochastic benchmark) or
    from upper-level decision variables (``wind_var``). Every restriction is
    written as an explicit row so each one carries a dual.
    """
    if (wind_ub is None) == (wind_var is None):
        raise ValueError("exactly one of wind_ub/wind_var is required")
    P = scenarios.periods
    first = P[0]
    demand = bus_demand(system, scenarios.da_demand, P)
    lower_cost: dict[str, float] = {}

    for t in P:
        for u in system.conventional_units:
            p = model.add_var(da_var(prefix, "pC", u.id, t))
            model.objective[p] += u.variable_cost
            c = model.add_var(da_var(prefix, "u", u.id, t))
            model.objective[c] += u.no_load_cost
            s = model.add_var(da_var(prefix, "c", u.id, t))
            model.objective[s] += 1.0
            lower_cost[da_var(prefix, "pC", u.id, t)] = u.variable_cost
            lower_cost[da_var(prefix, "u", u.id, t)] = u.no_load_cost
            lower_cost[da_var(prefix, "c", u.id, t)] = 1.0
        for k in system.vres_units:
            model.add_var(da_var(prefix, "pW", k.id, t))
            lower_cost[da_var(prefix, "pW", k.id, t)] = 0.0
        for b in system.buses:
            model.add_var(da_var(prefix, "th", b.id, t))
            lower_cost[da_var(prefix, "th", b.id, t)] = 0.0

    for t in P:
        flows = _flow_coeffs(system, prefix, t)

        # nodal balance: conventional + VRES + net line inflow = forecast load
        bal: dict[str, dict[str, float]] = {b.id: {} for b in system.buses}
        for u in system.conventional_units:
            _acc(bal[u.bus], {da_var(prefix, "pC", u.id, t): 1.0})
        for k in system.vres_units:
            _acc(bal[k.bus], {da_var(prefix, "pW", k.id, t): 1.0})
        for l in system.lines:
            _acc(bal[l.from_bus], flows[l.key], -1.0)
            _acc(bal[l.to_bus], flows[l.key], 1.0)
        for b in system.buses:
            model.add_constr(
                da_row(prefix, "bal", b.id, t), bal[b.id], "=", demand[(b.id, t)]
            )

        for l in system.lines:
            tag = line_tag(l.from_bus, l.to_bus)
            model.add_constr(da_row(prefix, "flo_hi", tag, t), flows[l.key], "<=", l.capacity)
            model.add_constr(da_row(prefix, "flo_lo", tag, t), flows[l.key], ">=", -l.capacity)

        for k in system.vres_units:
            pw = da_var(prefix, "pW", k.id, t)
            if wind_var is not None:
                model.add_constr(
                    da_row(prefix, "w_hi", k.id, t),
                    {pw: 1.0, wind_var[(k.id, t)]: -1.0},
                    "<=",
                    0.0,
                )
            else:
                model.add_constr(
                    da_row(prefix, "w_hi", k.id, t), {pw: 1.0}, "<=", wind_ub[(k.id, t)]
                )
            model.add_constr(da_row(prefix, "w_lo", k.id, t), {pw: 1.0}, ">=", 0.0)

        for u in system.conventional_units:
            p = da_var(prefix, "pC", u.id, t)
            uu = da_var(prefix, "u", u.id, t)
            cc = da_var(prefix, "c", u.id, t)
            model.add_constr(
                da_row(prefix, "cap_hi", u.id, t), {p: 1.0, uu: -u.p_max}, "<=", 0.0
            )
            model.add_constr(
                da_row(prefix, "cap_lo", u.id, t), {p: 1.0, uu: -u.p_min}, ">=", 0.0
            )
            model.add_constr(da_row(prefix, "u_hi", u.id, t), {uu: 1.0}, "<=", 1.0)
            model.add_constr(da_row(prefix, "u_lo", u.id, t), {uu: 1.0}, ">=", 0.0)
            model.add_constr(da_row(prefix, "c_lo", u.id, t), {cc: 1.0}, ">=", 0.0)
            if t == first:
                model.add_constr(
                    da_row(prefix, "su", u.id, t),
                    {uu: u.startup_cost, cc: -1.0},
                    "<=",
                    u.startup_cost * u.initial_commitment,
                )
                model.add_constr(
                    da_row(prefix, "r_hi", u.id, t),
                    {p: 1.0, uu: -u.ramp_up},
                    "<=",
                    u.initial_output,
                )
                model.add_constr(
                    da_row(prefix, "r_lo", u.id, t),
                    {p: 1.0},
                    ">=",
                    u.initial_output - u.initial_commitment * u.ramp_down,
                )
            else:
                pm = da_var(prefix, "pC", u.id, t - 1)
                um = da_var(prefix, "u", u.id, t - 1)
                model.add_constr(
                    da_row(prefix, "su", u.id, t),
                    {uu: u.startup_cost, um: -u.startup_cost, cc: -1.0},
                    "<=",
                    0.0,
                )
                model.add_constr(
                    da_row(prefix, "r_hi", u.id, t),
                    {p: 1.0, pm: -1.0, uu: -u.ramp_up},
                    "<=",
                    0.0,
                )
                model.add_constr(
                    da_row(prefix, "r_lo", u.id, t),
                    {p: 1.0, pm: -1.0, um: u.ramp_down},
                    ">=",
                    0.0,
                )

        model.add_constr(
            da_row(prefix, "ref", system.reference_bus, t),
            {da_var(prefix, "th", system.reference_bus, t): 1.0},
            "=",
            0.0,
        )

    return DamBlockInfo(prefix=prefix, periods=P, lower_cost=lower_cost)


def rt_prefix(scenario_id: str) -> str:
    return f"rt[{scenario_id}]"


def add_rtm_block(
    model: LpModel,
    system: PowerSystem,
    scenarios: ScenarioSet,
    scenario: Scenario,
    da: DaRef,
    *,
    voll: float,
    weight: float = 1.0,
    prefix: str | None = None,
) -> str:
    """Emit one scenario's real-time re-dispatch block.

    Objective terms enter scaled by ``weight`` (the scenario probability in
    joint models, 1 for a standalone solve). Returns the block prefix.
    """
    q = rt_prefix(scenario.id) if prefix is None else prefix
    P = scenarios.periods
    first = P[0]
    demand = bus_demand(system, scenario.demand, P)

    for t in P:
        for u in system.conventional_units:
            i = model.add_var(da_var(q, "rU", u.id, t), lb=0.0)
            model.objective[i] += weight * u.redispatch_up_cost
            i = model.add_var(da_var(q, "rD", u.id, t), lb=0.0)
            model.objective[i] += -weight * u.redispatch_down_cost
            i = model.add_var(da_var(q, "uR", u.id, t), lb=0.0, ub=1.0)
            model.objective[i] += weight * u.no_load_cost
            i = model.add_var(da_var(q, "cR", u.id, t), lb=0.0)
            model.objective[i] += weight
            # the committed-in-day-ahead no-load cost is credited back
            coeffs, const = da.commitment(u.id, t)
            for name, coef in coeffs.items():
                model.add_obj(name, -weight * u.no_load_cost * coef)
            model.objective_constant += -weight * u.no_load_cost * const
        for k in system.vres_units:
            model.add_var(
                da_var(q, "crt", k.id, t), lb=0.0, ub=scenario.vres[(k.id, t)]
            )
        for b in system.buses:
            i = model.add_var(da_var(q, "shed", b.id, t), lb=0.0, ub=demand[(b.id, t)])
            model.objective[i] += weight * voll
            model.add_var(da_var(q, "th", b.id, t))

    def q_term(u, t):
        """Delivered output p_da + rU - rD as (coeffs, const)."""
        coeffs, const = da.dispatch(u.id, t)
        coeffs = dict(coeffs)
        _acc(coeffs, {da_var(q, "rU", u.id, t): 1.0, da_var(q, "rD", u.id, t): -1.0})
        return coeffs, const

    for t in P:
        flows = _flow_coeffs(system, q, t)

        bal: dict[str, dict[str, float]] = {b.id: {} for b in system.buses}
        rhs = {b.id: demand[(b.id, t)] for b in system.buses}
        for u in system.conventional_units:
            coeffs, const = q_term(u, t)
            _acc(bal[u.bus], coeffs)
            rhs[u.bus] -= const
        for k in system.vres_units:
            _acc(bal[k.bus], {da_var(q, "crt", k.id, t): -1.0})
            rhs[k.bus] -= scenario.vres[(k.id, t)]
        for b in system.buses:
            _acc(bal[b.id], {da_var(q, "shed", b.id, t): 1.0})
        for l in system.lines:
            _acc(bal[l.from_bus], flows[l.key], -1.0)
            _acc(bal[l.to_bus], flows[l.key], 1.0)
        for b in system.buses:
            model.add_constr(da_row(q, "bal", b.id, t), bal[b.id], "=", rhs[b.id])

        for l in system.lines:
            tag = line_tag(l.from_bus, l.to_bus)
            model.add_constr(da_row(q, "flo_hi", tag, t), flows[l.key], "<=", l.capacity)
            model.add_constr(da_row(q, "flo_lo", tag, t), flows[l.key], ">=", -l.capacity)

        for u in system.conventional_units:
            ur = da_var(q, "uR", u.id, t)
            cr = da_var(q, "cR", u.id, t)

            # commitment link: fast units may start in real time, slow may not
            coeffs, const = da.commitment(u.id, t)
            link = {ur: 1.0}
            _acc(link, coeffs, -1.0)
            sense = ">=" if u.startup_class == "fast" else "="
            model.add_constr(da_row(q, "link", u.id, t), link, sense, const)

            qc, q0 = q_term(u, t)
            hi = dict(qc)
            _acc(hi, {ur: -u.p_max})
            model.add_constr(da_row(q, "cap_hi", u.id, t), hi, "<=", -q0)
            lo = dict(qc)
            _acc(lo, {ur: -u.p_min})
            model.add_constr(da_row(q, "cap_lo", u.id, t), lo, ">=", -q0)

            # real-time startup cost, with the day-ahead charge credited
            su = {ur: u.startup_cost, cr: -1.0}
            ccoeffs, cconst = da.startup(u.id, t)
            _acc(su, ccoeffs, -1.0)
            su_rhs = cconst
            if t == first:
                su_rhs += u.startup_cost * u.initial_commitment
            else:
                _acc(su, {da_var(q, "uR", u.id, t - 1): -u.startup_cost})
            model.add_constr(da_row(q, "su", u.id, t), su, "<=", su_rhs)

            # ramping on delivered output
            if t == first:
                rhi = dict(qc)
                _acc(rhi, {ur: -u.ramp_up})
                model.add_constr(
                    da_row(q, "r_hi", u.id, t), rhi, "<=", u.initial_output - q0
                )
                rlo = dict(qc)
                model.add_constr(
                    da_row(q, "r_lo", u.id, t),
                    rlo,
                    ">=",
                    u.initial_output - u.initial_commitment * u.ramp_down - q0,
                )
            else:
                qm, qm0 = q_term(u, t - 1)
                rhi = dict(qc)
                _acc(rhi, qm, -1.0)
                _acc(rhi, {ur: -u.ramp_up})
                model.add_constr(da_row(q, "r_hi", u.id, t), rhi, "<=", qm0 - q0)
                rlo = dict(qc)
                _acc(rlo, qm, -1.0)
                _acc(rlo, {da_var(q, "uR", u.id, t - 1): u.ramp_down})
                model.add_constr(da_row(q, "r_lo", u.id, t), rlo, ">=", qm0 - q0)

        model.add_constr(
            da_row(q, "ref", system.reference_bus, t),
            {da_var(q, "th", system.reference_bus, t): 1.0},
            "=",
            0.0,
        )

    return q


def rt_cost_from_primal(
    system: PowerSystem,
    scenarios: ScenarioSet,
    scenario: Scenario,
    primal: Mapping[str, float],
    da_commitment: Mapping[tuple[str, int], float],
    *,
    voll: float,
    prefix: str | None = None,
) -> float:
    """Evaluate one scenario's re-dispatch cost from joint-model primal values."""
    q = rt_prefix(scenario.id) if prefix is None else prefix
    total = 0.0
    for t in scenarios.periods:
        for u in system.conventional_units:
            total += u.redispatch_up_cost * primal[da_var(q, "rU", u.id, t)]
            total -= u.redispatch_down_cost * primal[da_var(q, "rD", u.id, t)]
            total += u.no_load_cost * (
                primal[da_var(q, "uR", u.id, t)] - da_commitment[(u.id, t)]
            )
            total += primal[da_var(q, "cR", u.id, t)]
        for b in system.buses:
            total += voll * primal[da_var(q, "shed", b.id, t)]
    return total
