import os

import numpy as np
import pytest

from gridbid.sysmodel import (
    Bus,
    ConventionalUnit,
    Line,
    Load,
    PowerSystem,
    Scenario,
    ScenarioSet,
    VresUnit,
    load_scenarios,
    load_system,
    validate_scenarios,
)

DATA = os.path.join(os.path.dirname(__file__), "data")


def data_path(name):
    return os.path.join(DATA, name)


def two_bus(cu=30.0, cd=5.0):
    """One cheap unit at n1 serving a 50 MW load, wind at n2, one period.

    Hand-solved landmarks (load 50, C=10): bidding the 15 MW mean costs
    350 day-ahead at LMP 10; the wind scenarios are 30 (hi) and 0 (lo).
    """
    system = PowerSystem(
        buses=(Bus("n1", ("d1",)), Bus("n2", ())),
        lines=(Line("n1", "n2", reactance=0.1, capacity=100.0),),
        loads=(Load("d1", "n1"),),
        conventional_units=(
            ConventionalUnit(
                id="g1", bus="n1", variable_cost=10.0, no_load_cost=0.0,
                startup_cost=0.0, redispatch_up_cost=cu, redispatch_down_cost=cd,
                p_min=0.0, p_max=100.0, ramp_up=100.0, ramp_down=100.0,
                startup_class="fast", initial_commitment=1.0, initial_output=0.0,
            ),
        ),
        vres_units=(VresUnit("w1", "n2", capacity=35.0),),
    )
    scenarios = ScenarioSet(
        periods=(1,),
        scenarios=(
            Scenario("hi", 0.5, {("w1", 1): 30.0}, {("d1", 1): 50.0}),
            Scenario("lo", 0.5, {("w1", 1): 0.0}, {("d1", 1): 50.0}),
        ),
        da_demand={("d1", 1): 50.0},
    )
    validate_scenarios(scenarios, system)
    return system, scenarios


def congested_two_bus():
    """Cheap remote unit behind a 20 MW line, expensive local unit at the load.

    With a 15 MW wind bid the import saturates: LMP 10 at n1, 50 at n2,
    congestion rent 40 on the line.
    """
    system = PowerSystem(
        buses=(Bus("n1", ()), Bus("n2", ("d1",))),
        lines=(Line("n1", "n2", reactance=0.1, capacity=20.0),),
        loads=(Load("d1", "n2"),),
        conventional_units=(
            ConventionalUnit(
                id="gc", bus="n1", variable_cost=10.0, no_load_cost=0.0,
                startup_cost=0.0, redispatch_up_cost=30.0, redispatch_down_cost=5.0,
                p_min=0.0, p_max=100.0, ramp_up=100.0, ramp_down=100.0,
                startup_class="fast", initial_commitment=1.0, initial_output=0.0,
            ),
            ConventionalUnit(
                id="ge", bus="n2", variable_cost=50.0, no_load_cost=0.0,
                startup_cost=0.0, redispatch_up_cost=80.0, redispatch_down_cost=5.0,
                p_min=0.0, p_max=100.0, ramp_up=100.0, ramp_down=100.0,
                startup_class="fast", initial_commitment=1.0, initial_output=0.0,
            ),
        ),
        vres_units=(VresUnit("w1", "n2", capacity=35.0),),
    )
    scenarios = ScenarioSet(
        periods=(1,),
        scenarios=(
            Scenario("hi", 0.5, {("w1", 1): 30.0}, {("d1", 1): 50.0}),
            Scenario("lo", 0.5, {("w1", 1): 0.0}, {("d1", 1): 50.0}),
        ),
        da_demand={("d1", 1): 50.0},
    )
    validate_scenarios(scenarios, system)
    return system, scenarios


@pytest.fixture(scope="session")
def five_bus():
    """The curated 25 MW block system; loaded from the shipped data files."""
    system = load_system(data_path("five_bus_system.json"))
    scenarios = load_scenarios(data_path("five_bus_scenarios.csv"), system)
    return system, scenarios


def random_instance(seed):
    """A small feasible system with VRES uncertainty, deterministic per seed.

    Ramps equal capacity and total demand stays below total conventional
    capacity, so the day-ahead market always clears; real-time shedding and
    curtailment keep every re-dispatch feasible.
    """
    rng = np.random.default_rng(seed)
    nb = int(rng.integers(3, 6))
    bus_ids = [f"n{i}" for i in range(1, nb + 1)]
    T = int(rng.integers(2, 4))
    periods = tuple(range(1, T + 1))

    n_load = int(rng.integers(1, 4))
    load_bus = [bus_ids[int(rng.integers(0, nb))] for _ in range(n_load)]
    load_ids = [f"d{i}" for i in range(1, n_load + 1)]

    buses = tuple(
        Bus(b, tuple(l for l, lb in zip(load_ids, load_bus) if lb == b))
        for b in bus_ids
    )
    lines = tuple(
        Line(bus_ids[i], bus_ids[(i + 1) % nb],
             float(rng.uniform(0.05, 0.2)), float(rng.uniform(60.0, 150.0)))
        for i in range(nb)
    )

    n_unit = int(rng.integers(2, 5))
    units = []
    for i in range(1, n_unit + 1):
        c = float(rng.uniform(10.0, 45.0))
        pmax = float(rng.uniform(20.0, 60.0))
        u0 = float(rng.integers(0, 2))
        units.append(ConventionalUnit(
            id=f"g{i}", bus=bus_ids[int(rng.integers(0, nb))],
            variable_cost=c, no_load_cost=float(rng.uniform(0.0, 8.0)),
            startup_cost=float(rng.uniform(0.0, 25.0)),
            redispatch_up_cost=c + float(rng.uniform(5.0, 60.0)),
            redispatch_down_cost=float(rng.uniform(0.0, 5.0)),
            p_min=0.0, p_max=pmax, ramp_up=pmax, ramp_down=pmax,
            startup_class=("fast", "slow")[int(rng.integers(0, 2))],
            initial_commitment=u0, initial_output=u0 * float(rng.uniform(0.0, pmax / 2)),
        ))
    total_pmax = sum(u.p_max for u in units)

    n_vres = int(rng.integers(1, 3))
    vres = tuple(
        VresUnit(f"w{i}", bus_ids[int(rng.integers(0, nb))], float(rng.uniform(20.0, 70.0)))
        for i in range(1, n_vres + 1)
    )

    system = PowerSystem(buses=buses, lines=lines,
                         loads=tuple(Load(l, b) for l, b in zip(load_ids, load_bus)),
                         conventional_units=tuple(units), vres_units=vres)

    demand = {}
    for t in periods:
        total = float(rng.uniform(0.4, 0.8)) * total_pmax
        shares = rng.dirichlet(np.ones(n_load))
        for l, s in zip(load_ids, shares):
            demand[(l, t)] = float(s) * total

    K = int(rng.integers(2, 6))
    w = rng.uniform(0.2, 1.0, K)
    w = w / w.sum()
    scen_list = []
    for k in range(K):
        trace = {(v.id, t): float(rng.uniform(0.0, v.capacity))
                 for v in vres for t in periods}
        scen_list.append(Scenario(f"s{k + 1}", float(w[k]), trace, dict(demand)))
    scenarios = ScenarioSet(periods=periods, scenarios=tuple(scen_list), da_demand=demand)
    validate_scenarios(scenarios, system)
    return system, scenarios
