import json

import pytest

from gridbid import dam, report, rtm
from gridbid.sysmodel import BidVector

from conftest import congested_two_bus, two_bus


def settled(builder, bid=15.0):
    system, scenarios = builder()
    sol = dam.solve_dam(system, scenarios, BidVector({("w1", 1): bid}))
    rts = rtm.solve_rtm_all(system, scenarios, sol)
    return system, scenarios, sol, rts


def test_two_bus_settlement():
    system, scenarios, sol, rts = settled(two_bus)
    stl = report.settle(system, scenarios, sol, rts)
    by_id = {p.participant: p for p in stl.participants}
    # wind sells 15 at LMP 10, then buys back shortfalls at RT prices
    assert by_id["w1"].dam_revenue == pytest.approx(150.0)
    assert by_id["w1"].rt_settlement == pytest.approx(-187.5)
    assert by_id["w1"].total == pytest.approx(-37.5)
    assert by_id["w1"].kind == "vres"
    # the marginal unit earns exactly its cost day-ahead and breaks even in RT
    assert by_id["g1"].dam_revenue == pytest.approx(0.0)
    assert by_id["g1"].rt_settlement == pytest.approx(0.0)
    assert stl.rt_by_scenario[("w1", "hi")] == pytest.approx(0.5 * 15.0 * 5.0 / 0.5)
    assert stl.rt_by_scenario[("w1", "lo")] == pytest.approx(-15.0 * 30.0)
    # one bus price, balanced books
    assert stl.dam_surplus == pytest.approx(0.0, abs=1e-9)
    assert stl.rt_surplus == pytest.approx(0.0, abs=1e-9)


def test_congestion_rent():
    system, scenarios, sol, rts = settled(congested_two_bus)
    stl = report.settle(system, scenarios, sol, rts)
    # 20 MW flows from the 10 $ bus to the 50 $ bus
    assert stl.dam_surplus == pytest.approx(800.0)
    by_id = {p.participant: p for p in stl.participants}
    assert by_id["w1"].dam_revenue == pytest.approx(750.0)
    assert by_id["w1"].rt_settlement == pytest.approx(-562.5)


def test_exact_delivery_settles_flat():
    system, scenarios, sol, rts = settled(two_bus, bid=30.0)
    stl = report.settle(system, scenarios, sol, rts)
    by_id = {p.participant: p for p in stl.participants}
    # delivering the sold quantity in hi leaves only the lo shortfall
    assert stl.rt_by_scenario[("w1", "hi")] == pytest.approx(0.0)
    assert stl.rt_by_scenario[("w1", "lo")] == pytest.approx(-30.0 * 30.0)
    assert by_id["w1"].rt_settlement == pytest.approx(-450.0)


def test_price_tables_weighted_moments():
    system, scenarios, sol, rts = settled(two_bus)
    rt_prices = {(b, t, sid): r.prices[(b, t)]
                 for sid, r in rts.items() for (b, t) in r.prices}
    tables = report.price_tables(scenarios, dam.lmp(sol), rt_prices)
    assert tables.dam[("n1", 1)] == pytest.approx(10.0)
    # RT prices are 5 (hi) and 30 (lo) with equal weight
    assert tables.rt[("n1", 1, "hi")] == pytest.approx(5.0)
    assert tables.rt[("n1", 1, "lo")] == pytest.approx(30.0)
    assert tables.rt_expected[("n1", 1)] == pytest.approx(17.5)
    assert tables.rt_std[("n1", 1)] == pytest.approx(12.5)


def test_uc_quality_counts():
    system, scenarios, sol, rts = settled(two_bus)
    uc = report.uc_quality(sol, rts)
    assert uc.dam_total == 1
    assert uc.rt_total == 2
    assert uc.dam_fractional == 0
    assert uc.rt_fractional == 0
    assert uc.overall_share == 0.0
    assert sum(uc.histogram_dam) == uc.dam_total
    assert sum(uc.histogram_rt) == uc.rt_total
    # a huge epsilon empties the fractional band
    loose = report.uc_quality(sol, rts, epsilon=0.5)
    assert loose.dam_fractional == 0 and loose.rt_fractional == 0


def test_fractional_commitment_is_counted():
    # a half-loaded single unit commits at exactly its dispatch fraction
    from test_rtm import one_bus_case

    system, scenarios, sol = one_bus_case("fast", startup_cost=40.0)
    rts = rtm.solve_rtm_all(system, scenarios, sol)
    uc = report.uc_quality(sol, rts)
    assert uc.rt_fractional == 1
    assert uc.rt_share == pytest.approx(1.0)
    assert uc.histogram_rt[5] == 1  # u = 0.5 lands in the [0.5, 0.6) bin


def test_float_formatting():
    assert report.fmt(-0.0) == "0.0"
    assert report.fmt(1.5) == "1.5"
    assert report.fmt(0.1) == "0.1"
    assert report.fmt(1e-17) == "1e-17"


def test_csv_and_summary_writers(tmp_path):
    csv_path = tmp_path / "t.csv"
    report.write_csv(str(csv_path), ("a", "b"), [[1.0, "x"], [-0.0, "y"]])
    assert csv_path.read_text() == "a,b\n1.0,x\n0.0,y\n"

    sum_path = tmp_path / "s.json"
    report.write_run_summary(str(sum_path), {"z": 1, "a": [1.5]})
    text = sum_path.read_text()
    assert text.endswith("\n")
    assert json.loads(text) == {"z": 1, "a": [1.5]}
    assert text.index('"a"') < text.index('"z"')  # keys sorted for stable bytes
