"""End-to-end checks for the claims the package makes.

Each test covers one headline property: cost ordering between frameworks,
agreement with brute-force search, validity of the bilinear relaxation,
robustness of the sweep knobs, out-of-sample behaviour, commitment quality,
and reproducibility of study outputs. Every test prints one summary line.
"""

import time

import numpy as np
import pytest

from gridbid import bench, cli, dam, report
from gridbid.bid import envelope_violation, mccormick_bounds, solve_bid
from gridbid.errors import InfeasibleError
from gridbid.sysmodel import (
    BaseProfile,
    BidVector,
    RunConfig,
    mean_vres,
    sample_scenarios,
)

from conftest import congested_two_bus, data_path, random_instance, two_bus

FRAMEWORKS = ("myd", "bid", "std")


def bid1(w):
    return BidVector({("w1", 1): w})


@pytest.fixture(scope="module")
def five_runs(five_bus):
    system, scenarios = five_bus
    t0 = time.monotonic()
    runs = {fw: bench.run_framework(fw, system, scenarios, RunConfig())
            for fw in FRAMEWORKS}
    return runs, time.monotonic() - t0


def test_stochastic_ideal_lower_bounds_both_frameworks(five_bus):
    t0 = time.monotonic()
    cases = [two_bus(), two_bus(cu=12.0), congested_two_bus(), five_bus]
    cases += [random_instance(seed) for seed in range(25)]
    worst = -np.inf
    for i, (system, scenarios) in enumerate(cases):
        totals = {fw: bench.run_framework(fw, system, scenarios, RunConfig()).report.total
                  for fw in FRAMEWORKS}
        for fw in ("myd", "bid"):
            slack = totals["std"] - totals[fw]
            assert slack <= 1e-6 * (1.0 + abs(totals[fw])), (i, totals)
            worst = max(worst, slack)
    elapsed = time.monotonic() - t0
    assert elapsed < 120.0
    print(f"PASS stochastic lower bound on {len(cases)} systems: "
          f"worst slack {worst:.2e}, {elapsed:.1f}s")


def test_two_bus_bid_matches_brute_force_within_one_percent():
    t0 = time.monotonic()
    gaps = []
    for cu, gamma, step in ((30.0, 1.0, 1.0), (12.0, 2.0, 2.5)):
        system, scenarios = two_bus(cu=cu)
        config = RunConfig(gamma=gamma)
        oracle = bench.run_oracle(system, scenarios, config, grid_step=step)
        run = bench.run_framework("bid", system, scenarios, config)
        gap = abs(run.report.total - oracle.total) / abs(oracle.total)
        assert gap <= 0.01, (cu, run.report.total, oracle.total)
        gaps.append(gap)
    elapsed = time.monotonic() - t0
    assert elapsed < 30.0
    print(f"PASS brute-force agreement: gaps {gaps[0]:.2e}, {gaps[1]:.2e}, "
          f"{elapsed:.1f}s")


def test_relaxed_objective_never_exceeds_brute_force_optimum():
    cases = [
        (two_bus(), 1.0, 1.0),
        (two_bus(cu=12.0), 1.0, 1.0),
        (two_bus(cu=12.0), 2.0, 2.5),
        (congested_two_bus(), 1.0, 1.0),
    ]
    margins = []
    for (system, scenarios), gamma, step in cases:
        config = RunConfig(gamma=gamma)
        oracle = bench.run_oracle(system, scenarios, config, grid_step=step)
        res = solve_bid(system, scenarios, config)
        assert res.relaxed_objective <= oracle.total + 1e-6, (gamma, res, oracle)
        margins.append(oracle.total - res.relaxed_objective)
    print(f"PASS relaxation bound on {len(cases)} instances: "
          f"margins {['%.3g' % m for m in margins]}")


def test_uncertainty_aware_bidding_beats_myopic_by_five_percent(five_runs):
    runs, elapsed = five_runs
    myd = runs["myd"].report.total
    bid = runs["bid"].report.total
    assert elapsed < 300.0
    assert bid <= 0.95 * myd, (bid, myd)
    print(f"PASS curated five-bus advantage: bid {bid:.2f} vs myd {myd:.2f} "
          f"({100.0 * (1.0 - bid / myd):.2f}% cheaper), {elapsed:.1f}s")


def test_day_ahead_optimality_certificates_on_fixture_suite(five_bus, five_runs):
    runs, _ = five_runs
    solutions = []
    for system, scenarios in (two_bus(), two_bus(cu=12.0), congested_two_bus()):
        for w in (0.0, 15.0, 30.0):
            solutions.append(
                (system, scenarios, dam.solve_dam(system, scenarios, bid1(w)))
            )
    fsys, fscen = five_bus
    solutions.append(
        (fsys, fscen, dam.solve_dam(fsys, fscen, BidVector.from_mean(fscen)))
    )
    for fw in FRAMEWORKS:
        if runs[fw].dam.duals is not None:
            solutions.append((fsys, fscen, runs[fw].dam))

    worst_st = worst_sd = 0.0
    for system, scenarios, sol in solutions:
        res = dam.stationarity_residuals(system, sol)
        sd = dam.strong_duality_residual(system, scenarios, sol)
        assert max(res.values()) <= 1e-6, res
        assert sd <= 1e-6
        worst_st = max(worst_st, max(res.values()))
        worst_sd = max(worst_sd, sd)
    print(f"PASS optimality certificates on {len(solutions)} day-ahead solves: "
          f"stationarity {worst_st:.2e}, strong duality {worst_sd:.2e}")


def test_bilinear_envelope_has_zero_violations_on_random_points(five_bus):
    rng = np.random.default_rng(11)
    checked = 0
    violations = 0
    for system, scenarios in (two_bus(), five_bus):
        bounds = mccormick_bounds(system, scenarios, RunConfig())
        for key, w_hi in sorted(bounds.quantity_hi.items()):
            d_hi = bounds.dual_hi[key]
            ws = rng.uniform(0.0, w_hi, 10_000)
            ds = rng.uniform(0.0, d_hi, 10_000)
            for w, d in zip(ws, ds):
                if envelope_violation(bounds, key, w, d, w * d) > 1e-9:
                    violations += 1
                checked += 1
    assert violations == 0
    print(f"PASS bilinear envelope: {checked} boundary-box points, "
          f"{violations} violations")


def test_cost_is_insensitive_to_quantity_bound_scaling(five_bus):
    system, scenarios = five_bus
    totals = {g: bench.run_framework("bid", system, scenarios,
                                     RunConfig(gamma=g)).report.total
              for g in (0.2, 0.6, 1.0, 1.4)}
    best = min(totals.values())
    for g, t in totals.items():
        assert t <= 1.10 * best, (g, t, best)
    print(f"PASS quantity bound sweep: totals {sorted(set(round(t, 2) for t in totals.values()))} "
          f"all within 10% of best {best:.2f}")


def test_cost_is_insensitive_to_dual_bound_scaling(five_bus):
    system, scenarios = five_bus
    totals = {}
    infeasible = []
    for xi in (1.0, 1.5, 2.0):
        try:
            totals[xi] = bench.run_framework(
                "bid", system, scenarios, RunConfig(xi=xi)).report.total
        except InfeasibleError:
            infeasible.append(xi)
    assert totals, "every dual bound choice came back infeasible"
    spread = (max(totals.values()) - min(totals.values())) / min(totals.values())
    assert spread < 0.01, totals
    print(f"PASS dual bound sweep: spread {100.0 * spread:.3f}%, "
          f"infeasible at {infeasible or 'none'}")


def test_bid_framework_is_steadier_out_of_sample(five_bus):
    system, scenarios = five_bus
    base = BaseProfile(vres=mean_vres(scenarios), demand=scenarios.da_demand,
                       vres_rel_std=1.0)
    tests = [sample_scenarios(system, base, 5, seed=100 + i) for i in range(50)]
    reports = {fw: bench.out_of_sample(system, scenarios, fw, tests, RunConfig())
               for fw in ("myd", "bid")}
    print("framework  mean       std")
    for fw, rep in reports.items():
        print(f"{fw:<9}  {rep.mean:<9.2f}  {rep.std:.2f}")
    assert reports["bid"].std <= reports["myd"].std
    print(f"PASS out-of-sample stability on 50 resampled test sets: "
          f"std {reports['bid'].std:.2f} (bid) <= {reports['myd'].std:.2f} (myd)")


def test_commitment_relaxation_is_nearly_integral(five_runs):
    runs, _ = five_runs
    fractional = 0
    total = 0
    for run in runs.values():
        uc = report.uc_quality(run.dam, run.rtm)
        fractional += uc.dam_fractional + uc.rt_fractional
        total += uc.dam_total + uc.rt_total
    share = fractional / total
    assert share < 0.05, (fractional, total)
    print(f"PASS commitment quality: {fractional}/{total} fractional "
          f"({100.0 * share:.2f}%)")


def test_study_runs_are_byte_reproducible(tmp_path):
    spec = cli.load_study(data_path("study_small.json"))
    dirs = [str(tmp_path / n) for n in ("a", "b")]
    for d in dirs:
        assert cli.run_study(spec, d) == 0
    names = ("costs.csv", "prices_dam.csv", "prices_rt.csv",
             "revenues.csv", "uc_quality.csv", "run_summary.json")
    for name in names:
        a = open(f"{dirs[0]}/{name}", "rb").read()
        b = open(f"{dirs[1]}/{name}", "rb").read()
        assert a == b, name
    print(f"PASS reproducibility: {len(names)} output files byte-identical "
          f"across repeated runs")
