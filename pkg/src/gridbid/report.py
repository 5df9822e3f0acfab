"""Settlement, price tables, commitment quality, and file output.

Settlement follows the two-settlement convention: day-ahead positions earn
the day-ahead nodal price, real-time deviations from the position settle at
the real-time nodal price, and each participant's own costs are netted off.
The merchandising surplus (load payments minus generator receipts) is
reported per stage; it is congestion rent and vanishes on uncongested
systems.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .dam import DamSolution
from .rtm import RtmSolution
from .sysmodel import PowerSystem, ScenarioSet, bus_demand


@dataclass(frozen=True)
class ParticipantSettlement:
    participant: str
    kind: str  # "vres" or "conventional"
    dam_revenue: float  # day-ahead market revenue net of own bid costs, $
    rt_settlement: float  # expected real-time deviation settlement, $
    total: float


@dataclass(frozen=True)
class SettlementReport:
    participants: tuple[ParticipantSettlement, ...]
    rt_by_scenario: dict[tuple[str, str], float]  # (participant, scenario) -> $
    dam_surplus: float  # load payments minus generator receipts, day-ahead
    rt_surplus: float  # expected deviation payments minus receipts, real-time


def settle(
    system: PowerSystem,
    scenarios: ScenarioSet,
    dam: DamSolution,
    rtm: Mapping[str, RtmSolution],
) -> SettlementReport:
    """Settle both stages for every unit against nodal prices."""
    if dam.duals is None:
        raise ValueError("settlement needs day-ahead prices")
    P = dam.periods
    weights = scenarios.weights
    lam_da = dam.duals.balance

    participants: list[ParticipantSettlement] = []
    rt_by_scenario: dict[tuple[str, str], float] = {}

    for k in system.vres_units:
        da_rev = sum(lam_da[(k.bus, t)] * dam.vres_dispatch[(k.id, t)] for t in P)
        expected_rt = 0.0
        for s in scenarios.scenarios:
            rt = rtm[s.id]
            val = sum(
                rt.prices[(k.bus, t)]
                * (
                    (s.vres[(k.id, t)] - rt.curtailment[(k.id, t)])
                    - dam.vres_dispatch[(k.id, t)]
                )
                for t in P
            )
            rt_by_scenario[(k.id, s.id)] = val
            expected_rt += weights[s.id] * val
        participants.append(
            ParticipantSettlement(k.id, "vres", da_rev, expected_rt, da_rev + expected_rt)
        )

    for u in system.conventional_units:
        da_rev = sum(
            lam_da[(u.bus, t)] * dam.dispatch[(u.id, t)]
            - u.variable_cost * dam.dispatch[(u.id, t)]
            - u.no_load_cost * dam.commitment[(u.id, t)]
            - dam.startup_cost[(u.id, t)]
            for t in P
        )
        expected_rt = 0.0
        for s in scenarios.scenarios:
            rt = rtm[s.id]
            val = 0.0
            for t in P:
                dev = rt.up[(u.id, t)] - rt.down[(u.id, t)]
                val += rt.prices[(u.bus, t)] * dev
                val -= (
                    u.redispatch_up_cost * rt.up[(u.id, t)]
                    - u.redispatch_down_cost * rt.down[(u.id, t)]
                    + u.no_load_cost
                    * (rt.commitment[(u.id, t)] - dam.commitment[(u.id, t)])
                    + rt.startup_cost[(u.id, t)]
                )
            rt_by_scenario[(u.id, s.id)] = val
            expected_rt += weights[s.id] * val
        participants.append(
            ParticipantSettlement(
                u.id, "conventional", da_rev, expected_rt, da_rev + expected_rt
            )
        )

    # merchandising surplus per stage
    demand_da = bus_demand(system, scenarios.da_demand, P)
    dam_surplus = 0.0
    for b in system.buses:
        for t in P:
            gen = sum(dam.dispatch[(u.id, t)] for u in system.conventional_at(b.id))
            gen += sum(dam.vres_dispatch[(k.id, t)] for k in system.vres_at(b.id))
            dam_surplus += lam_da[(b.id, t)] * (demand_da[(b.id, t)] - gen)

    rt_surplus = 0.0
    for s in scenarios.scenarios:
        rt = rtm[s.id]
        demand_rt = bus_demand(system, s.demand, P)
        stage = 0.0
        for b in system.buses:
            for t in P:
                load_dev = (
                    demand_rt[(b.id, t)] - rt.shed[(b.id, t)] - demand_da[(b.id, t)]
                )
                gen_dev = sum(
                    rt.up[(u.id, t)] - rt.down[(u.id, t)]
                    for u in system.conventional_at(b.id)
                )
                gen_dev += sum(
                    (s.vres[(k.id, t)] - rt.curtailment[(k.id, t)])
                    - dam.vres_dispatch[(k.id, t)]
                    for k in system.vres_at(b.id)
                )
                stage += rt.prices[(b.id, t)] * (load_dev - gen_dev)
        rt_surplus += weights[s.id] * stage

    return SettlementReport(
        participants=tuple(participants),
        rt_by_scenario=rt_by_scenario,
        dam_surplus=dam_surplus,
        rt_surplus=rt_surplus,
    )


@dataclass(frozen=True)
class PriceTables:
    dam: dict[tuple[str, int], float]  # (bus, t)
    rt: dict[tuple[str, int, str], float]  # (bus, t, scenario)
    rt_expected: dict[tuple[str, int], float]
    rt_std: dict[tuple[str, int], float]  # weighted std across scenarios


def price_tables(
    scenarios: ScenarioSet,
    dam_prices: Mapping[tuple[str, int], float],
    rt_prices: Mapping[tuple[str, int, str], float],
) -> PriceTables:
    """Organize nodal prices and per-node scenario statistics."""
    weights = scenarios.weights
    rt_expected: dict[tuple[str, int], float] = {}
    rt_std: dict[tuple[str, int], float] = {}
    keys = sorted({(b, t) for (b, t, _) in rt_prices})
    for b, t in keys:
        mean = sum(weights[sid] * rt_prices[(b, t, sid)] for sid in weights)
        var = sum(
            weights[sid] * (rt_prices[(b, t, sid)] - mean) ** 2 for sid in weights
        )
        rt_expected[(b, t)] = mean
        rt_std[(b, t)] = math.sqrt(max(var, 0.0))
    return PriceTables(
        dam=dict(dam_prices),
        rt=dict(rt_prices),
        rt_expected=rt_expected,
        rt_std=rt_std,
    )


@dataclass(frozen=True)
class UcQuality:
    """How binary the relaxed commitments came out, per stage."""

    epsilon: float
    dam_total: int
    dam_fractional: int
    rt_total: int
    rt_fractional: int
    histogram_dam: tuple[int, ...]  # 10 bins over [0, 1]
    histogram_rt: tuple[int, ...]

    @property
    def dam_share(self) -> float:
        return self.dam_fractional / self.dam_total if self.dam_total else 0.0

    @property
    def rt_share(self) -> float:
        return self.rt_fractional / self.rt_total if self.rt_total else 0.0

    @property
    def overall_share(self) -> float:
        total = self.dam_total + self.rt_total
        return (self.dam_fractional + self.rt_fractional) / total if total else 0.0


def _bin(u: float) -> int:
    u = min(max(u, 0.0), 1.0)
    return min(int(u * 10.0), 9)


def uc_quality(
    dam: DamSolution,
    rtm: Mapping[str, RtmSolution],
    epsilon: float = 1e-6,
) -> UcQuality:
    """Count commitments strictly inside (epsilon, 1 - epsilon)."""
    hist_dam = [0] * 10
    hist_rt = [0] * 10
    dam_frac = 0
    for u in dam.commitment.values():
        hist_dam[_bin(u)] += 1
        if epsilon < u < 1.0 - epsilon:
            dam_frac += 1
    rt_total = 0
    rt_frac = 0
    for sol in rtm.values():
        for u in sol.commitment.values():
            hist_rt[_bin(u)] += 1
            rt_total += 1
            if epsilon < u < 1.0 - epsilon:
                rt_frac += 1
    return UcQuality(
        epsilon=epsilon,
        dam_total=len(dam.commitment),
        dam_fractional=dam_frac,
        rt_total=rt_total,
        rt_fractional=rt_frac,
        histogram_dam=tuple(hist_dam),
        histogram_rt=tuple(hist_rt),
    )


# -- file emission -------------------------------------------------------------


def fmt(value) -> str:
    """Stable text for CSV cells; floats keep full round-trip precision."""
    if isinstance(value, float):
        return repr(value + 0.0)  # normalizes -0.0
    return str(value)


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def write_run_summary(path: str, payload: Mapping) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
