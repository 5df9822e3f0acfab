import pytest

from gridbid import dam
from gridbid.errors import InfeasibleError, ValidationError
from gridbid.sysmodel import BidVector

from conftest import congested_two_bus, five_bus, random_instance, two_bus


def bid1(w):
    return BidVector({("w1", 1): w})


def test_mean_bid_hand_values():
    system, scenarios = two_bus()
    sol = dam.solve_dam(system, scenarios, bid1(15.0))
    assert sol.cost == pytest.approx(350.0)
    assert sol.dispatch[("g1", 1)] == pytest.approx(35.0)
    assert sol.vres_dispatch[("w1", 1)] == pytest.approx(15.0)
    assert sol.lmp("n1", 1) == pytest.approx(10.0)
    assert sol.lmp("n2", 1) == pytest.approx(10.0)  # uncongested: one price
    assert sol.bids.get("w1", 1) == 15.0
    # the wind offer cap binds, so its shadow price equals the saved energy cost
    assert sol.duals.vres_hi[("w1", 1)] == pytest.approx(10.0)


def test_oversized_bid_collapses_price():
    system, scenarios = two_bus()
    sol = dam.solve_dam(system, scenarios, bid1(60.0))
    assert sol.vres_dispatch[("w1", 1)] == pytest.approx(50.0)
    assert sol.cost == pytest.approx(0.0)
    assert sol.lmp("n1", 1) == pytest.approx(0.0)


def test_cost_monotone_in_bid():
    system, scenarios = two_bus()
    costs = [dam.solve_dam(system, scenarios, bid1(w)).cost
             for w in (0.0, 5.0, 15.0, 25.0, 35.0)]
    assert costs[0] == pytest.approx(500.0)
    for lo, hi in zip(costs[1:], costs):
        assert lo <= hi + 1e-9


def test_congestion_splits_prices():
    system, scenarios = congested_two_bus()
    sol = dam.solve_dam(system, scenarios, bid1(15.0))
    assert sol.lmp("n1", 1) == pytest.approx(10.0)
    assert sol.lmp("n2", 1) == pytest.approx(50.0)
    assert sol.duals.flow_hi[(("n1", "n2"), 1)] == pytest.approx(40.0)
    assert sol.dispatch[("gc", 1)] == pytest.approx(20.0)  # at line capacity
    assert sol.dispatch[("ge", 1)] == pytest.approx(15.0)
    assert sol.cost == pytest.approx(950.0)


def test_optimality_certificates_on_fixtures(five_bus):
    cases = [
        two_bus() + (bid1(15.0),),
        two_bus(cu=12.0) + (bid1(30.0),),
        congested_two_bus() + (bid1(15.0),),
        five_bus + (BidVector.from_mean(five_bus[1]),),
    ]
    for system, scenarios, bids in cases:
        sol = dam.solve_dam(system, scenarios, bids)
        res = dam.stationarity_residuals(system, sol)
        assert max(res.values()) <= 1e-6, res
        assert dam.strong_duality_residual(system, scenarios, sol) <= 1e-6
        assert abs(dam.dual_objective(system, scenarios, sol) - sol.cost) <= 1e-6 * (
            1.0 + abs(sol.cost)
        )


def test_optimality_certificates_on_random_instances():
    for seed in range(5):
        system, scenarios = random_instance(seed)
        bids = BidVector.from_mean(scenarios)
        sol = dam.solve_dam(system, scenarios, bids)
        res = dam.stationarity_residuals(system, sol)
        scale = 1.0 + abs(sol.cost)
        assert max(res.values()) <= 1e-6 * scale, (seed, res)
        assert dam.strong_duality_residual(system, scenarios, sol) <= 1e-6 * scale


def test_row_count_closed_form(five_bus):
    # per period: balance |N|, flow 2|L|, vres caps 2|K|, unit rows 8|I|, ref 1
    for system, scenarios in (two_bus(), five_bus):
        model = dam.build_dam(
            system, scenarios, BidVector.zeros(system, scenarios.periods)
        )
        per_t = (
            len(system.buses) + 2 * len(system.lines) + 2 * len(system.vres_units)
            + 8 * len(system.conventional_units) + 1
        )
        assert model.num_constrs == per_t * len(scenarios.periods)


def test_infeasible_when_capacity_short():
    system, scenarios = two_bus()
    small = system.conventional_units[0].__class__(
        **{**system.conventional_units[0].__dict__, "p_max": 20.0,
           "ramp_up": 20.0, "ramp_down": 20.0, "initial_output": 0.0}
    )
    short = system.__class__(
        buses=system.buses, lines=system.lines, loads=system.loads,
        conventional_units=(small,), vres_units=system.vres_units,
    )
    with pytest.raises(InfeasibleError):
        dam.solve_dam(short, scenarios, bid1(0.0))


def test_missing_bid_rejected():
    system, scenarios = two_bus()
    with pytest.raises(ValidationError, match="missing"):
        dam.solve_dam(system, scenarios, BidVector({}))


def test_lmp_table_matches_method():
    system, scenarios = two_bus()
    sol = dam.solve_dam(system, scenarios, bid1(15.0))
    table = dam.lmp(sol)
    assert table[("n1", 1)] == sol.lmp("n1", 1)
    assert set(table) == {("n1", 1), ("n2", 1)}
