import pytest

from gridbid import dam, rtm
from gridbid.sysmodel import (
    BidVector,
    Bus,
    ConventionalUnit,
    Load,
    PowerSystem,
    Scenario,
    ScenarioSet,
    VresUnit,
    validate_scenarios,
)

from conftest import two_bus


def solved_two_bus(bid=15.0, cu=30.0, cd=5.0):
    system, scenarios = two_bus(cu=cu, cd=cd)
    sol = dam.solve_dam(system, scenarios, BidVector({("w1", 1): bid}))
    return system, scenarios, sol


def test_shortfall_and_surplus_hand_values():
    system, scenarios, sol = solved_two_bus()
    rts = rtm.solve_rtm_all(system, scenarios, sol)
    # lo: wind 0 vs 15 sold, 15 MW of redispatch up at 30
    assert rts["lo"].cost == pytest.approx(450.0)
    assert rts["lo"].up[("g1", 1)] == pytest.approx(15.0)
    assert rts["lo"].prices[("n1", 1)] == pytest.approx(30.0)
    # hi: wind 30 vs 15 sold, 15 MW of redispatch down paying back 5
    assert rts["hi"].cost == pytest.approx(-75.0)
    assert rts["hi"].down[("g1", 1)] == pytest.approx(15.0)
    assert rts["hi"].prices[("n1", 1)] == pytest.approx(5.0)
    assert rtm.expected_rt_cost(system, scenarios, sol, solutions=rts) == pytest.approx(187.5)


def test_exact_delivery_costs_nothing():
    system, scenarios, sol = solved_two_bus(bid=30.0)
    r = rtm.solve_rtm(system, scenarios, sol, "hi")
    assert r.cost == pytest.approx(0.0)
    assert max(r.up.values()) == pytest.approx(0.0)
    assert max(r.down.values()) == pytest.approx(0.0)
    assert max(r.curtailment.values()) == pytest.approx(0.0)
    assert max(r.shed.values()) == pytest.approx(0.0)


def one_bus_case(startup_class, startup_cost=0.0, rt_demand=50.0, wind=0.0,
                 no_load=1.0, da_demand=0.0):
    system = PowerSystem(
        buses=(Bus("n1", ("d1",)),),
        lines=(),
        loads=(Load("d1", "n1"),),
        conventional_units=(ConventionalUnit(
            id="g1", bus="n1", variable_cost=10.0, no_load_cost=no_load,
            startup_cost=startup_cost, redispatch_up_cost=30.0,
            redispatch_down_cost=5.0, p_min=0.0, p_max=100.0,
            ramp_up=100.0, ramp_down=100.0, startup_class=startup_class,
            initial_commitment=0.0, initial_output=0.0),),
        vres_units=(VresUnit("w1", "n1", 80.0),),
    )
    scenarios = ScenarioSet(
        periods=(1,),
        scenarios=(Scenario("s", 1.0, {("w1", 1): wind}, {("d1", 1): rt_demand}),),
        da_demand={("d1", 1): da_demand},
    )
    validate_scenarios(scenarios, system)
    sol = dam.solve_dam(system, scenarios, BidVector({("w1", 1): 0.0}))
    return system, scenarios, sol


def test_slow_unit_cannot_start_in_real_time():
    system, scenarios, sol = one_bus_case("slow")
    assert sol.commitment[("g1", 1)] == pytest.approx(0.0)
    r = rtm.solve_rtm(system, scenarios, sol, "s", voll=1000.0)
    assert r.shed[("n1", 1)] == pytest.approx(50.0)
    assert r.cost == pytest.approx(50000.0)
    assert r.prices[("n1", 1)] == pytest.approx(1000.0)


def test_fast_unit_starts_with_day_ahead_credit():
    system, scenarios, sol = one_bus_case("fast", startup_cost=40.0)
    r = rtm.solve_rtm(system, scenarios, sol, "s")
    # relaxed commitment scales with the dispatched fraction: u = 50/100,
    # so half the no-load and startup money is due on top of 50 MW at 30
    assert r.commitment[("g1", 1)] == pytest.approx(0.5)
    assert r.startup_cost[("g1", 1)] == pytest.approx(20.0)
    assert r.cost == pytest.approx(1520.5)
    assert r.shed[("n1", 1)] == pytest.approx(0.0)


def test_surplus_beyond_headroom_is_curtailed():
    system, scenarios, sol = one_bus_case("fast", rt_demand=50.0, wind=60.0,
                                          no_load=0.0, da_demand=50.0)
    r = rtm.solve_rtm(system, scenarios, sol, "s")
    # conventional backs down its whole 50 MW; the last 10 MW of wind is spilled
    assert r.down[("g1", 1)] == pytest.approx(50.0)
    assert r.curtailment[("w1", 1)] == pytest.approx(10.0)
    assert r.cost == pytest.approx(-250.0)
    assert r.prices[("n1", 1)] == pytest.approx(0.0)


def test_thread_pool_matches_serial():
    system, scenarios, sol = solved_two_bus()
    serial = rtm.solve_rtm_all(system, scenarios, sol)
    pooled = rtm.solve_rtm_all(system, scenarios, sol, workers=4)
    assert set(serial) == set(pooled)
    for sid in serial:
        assert serial[sid].cost == pytest.approx(pooled[sid].cost, abs=1e-12)
        assert serial[sid].up == pooled[sid].up


def test_unknown_scenario_id():
    system, scenarios, sol = solved_two_bus()
    with pytest.raises(KeyError):
        rtm.solve_rtm(system, scenarios, sol, "nope")
