"""Command-line entry points.

``gridbid run`` executes a study: a cartesian sweep over bid-bound
multipliers, scenario counts, VRES penetration, line capacity scaling, and
fleet flexibility, with one row per (sweep point, framework) in the output
CSVs. ``gridbid validate`` checks inputs and exits; ``gridbid oracle`` runs
the brute-force bid search on small cases.

Exit codes: 0 on success, 1 when any sweep point failed, 2 for unusable
inputs or configuration.
"""

from __future__ import annotations

import argparse
import dataclasses
import itertools
import json
import os
import sys
from dataclasses import dataclass, field, replace

from . import __version__, bench, report
from .bench import FRAMEWORKS
from .errors import ConfigError, GridbidError, OracleSizeError, ParseError, ValidationError
from .sysmodel import (
    BaseProfile,
    PowerSystem,
    RunConfig,
    ScenarioSet,
    load_scenarios,
    load_system,
    mean_vres,
    sample_scenarios,
    with_flexibility,
    with_line_capacity_scale,
    with_vres_penetration,
)

FLEX_LABELS = ("lFlx", "mFlx", "hFlx")

_CONFIG_KEYS = {f.name for f in dataclasses.fields(RunConfig)}


def _config_from_dict(raw: dict) -> RunConfig:
    unknown = set(raw) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    try:
        return RunConfig(**raw)
    except (TypeError, ValidationError) as e:
        raise ConfigError(f"bad run config: {e}") from e


@dataclass(frozen=True)
class StudySpec:
    """Declarative description of a sweep study."""

    system: str
    scenarios: str
    out: str | None = None
    frameworks: tuple[str, ...] = FRAMEWORKS
    gammas: tuple[float, ...] = ()
    xis: tuple[float, ...] = ()
    scenario_counts: tuple[int, ...] = ()  # empty: use the file's scenarios
    vres_scale: tuple[float, ...] = ()  # penetration percents; empty: as-is
    line_scale: tuple[float, ...] = ()  # capacity factors; empty: as-is
    flexibility: tuple[str, ...] = ("mFlx",)
    config: RunConfig = field(default_factory=RunConfig)
    sample_rel_std: float = 0.25
    sample_demand_rel_std: float = 0.0

    def __post_init__(self):
        if not self.frameworks:
            raise ConfigError("study needs at least one framework")
        for fw in self.frameworks:
            if fw not in FRAMEWORKS:
                raise ConfigError(f"unknown framework {fw!r}")
        for lbl in self.flexibility:
            if lbl not in FLEX_LABELS:
                raise ConfigError(f"unknown flexibility label {lbl!r}")
        for n in self.scenario_counts:
            if n < 1:
                raise ConfigError("scenario counts must be positive")


_STUDY_KEYS = {
    "system",
    "scenarios",
    "out",
    "frameworks",
    "gammas",
    "xis",
    "scenario_counts",
    "vres_scale",
    "line_scale",
    "flexibility",
    "config",
    "sample_rel_std",
    "sample_demand_rel_std",
}


def load_study(path: str) -> StudySpec:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as e:
        raise ConfigError(f"cannot read study file {path!r}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"study file {path!r} is not valid JSON: {e}") from e
    return study_from_dict(raw, base_dir=os.path.dirname(os.path.abspath(path)))


def study_from_dict(raw: dict, base_dir: str | None = None) -> StudySpec:
    if not isinstance(raw, dict):
        raise ConfigError("study spec must be a JSON object")
    unknown = set(raw) - _STUDY_KEYS
    if unknown:
        raise ConfigError(f"unknown study keys: {sorted(unknown)}")
    for key in ("system", "scenarios"):
        if key not in raw:
            raise ConfigError(f"study spec is missing {key!r}")

    def path(p):
        if base_dir is not None and not os.path.isabs(p):
            return os.path.join(base_dir, p)
        return p

    return StudySpec(
        system=path(str(raw["system"])),
        scenarios=path(str(raw["scenarios"])),
        out=raw.get("out"),
        frameworks=tuple(raw.get("frameworks", FRAMEWORKS)),
        gammas=tuple(float(v) for v in raw.get("gammas", ())),
        xis=tuple(float(v) for v in raw.get("xis", ())),
        scenario_counts=tuple(int(v) for v in raw.get("scenario_counts", ())),
        vres_scale=tuple(float(v) for v in raw.get("vres_scale", ())),
        line_scale=tuple(float(v) for v in raw.get("line_scale", ())),
        flexibility=tuple(raw.get("flexibility", ("mFlx",))),
        config=_config_from_dict(raw.get("config", {})),
        sample_rel_std=float(raw.get("sample_rel_std", 0.25)),
        sample_demand_rel_std=float(raw.get("sample_demand_rel_std", 0.0)),
    )


COST_COLUMNS = (
    "gamma",
    "xi",
    "n_scenarios",
    "vres_scale",
    "line_scale",
    "flexibility",
    "framework",
    "total",
    "dam_cost",
    "rt_expected",
    "total_std",
)


def _sweep_axes(spec: StudySpec):
    """Each axis is a list of (column value, applied value); None = leave alone."""
    return (
        [(g, g) for g in spec.gammas] or [(spec.config.gamma, None)],
        [(x, x) for x in spec.xis] or [(spec.config.xi, None)],
        [(n, n) for n in spec.scenario_counts] or [("", None)],
        [(v, v) for v in spec.vres_scale] or [("", None)],
        [(v, v) for v in spec.line_scale] or [("", None)],
        [(f, f) for f in spec.flexibility],
    )


def run_study(spec: StudySpec, out_dir: str) -> int:
    """Execute the study; returns the process exit code."""
    system = load_system(spec.system)
    scenarios = load_scenarios(spec.scenarios, system)
    os.makedirs(out_dir, exist_ok=True)

    cost_rows: list[list] = []
    dam_price_rows: list[list] = []
    rt_price_rows: list[list] = []
    revenue_rows: list[list] = []
    uc_rows: list[list] = []
    summary_points: list[dict] = []
    failed = 0

    axes = _sweep_axes(spec)
    for (g_col, g), (x_col, x), (n_col, n), (v_col, v), (l_col, l), (f_col, f) in itertools.product(*axes):
        point_key = [g_col, x_col, n_col, v_col, l_col, f_col]
        point_desc = dict(
            zip(("gamma", "xi", "n_scenarios", "vres_scale", "line_scale", "flexibility"), point_key)
        )
        try:
            sys_pt, scen_pt = system, scenarios
            if v is not None:
                sys_pt, scen_pt = with_vres_penetration(sys_pt, scen_pt, v)
            if l is not None:
                sys_pt = with_line_capacity_scale(sys_pt, l)
            sys_pt = with_flexibility(sys_pt, f)
            if n is not None:
                base = BaseProfile(
                    vres=scen_pt.da_vres or mean_vres(scen_pt),
                    demand=scen_pt.da_demand,
                    vres_rel_std=spec.sample_rel_std,
                    demand_rel_std=spec.sample_demand_rel_std,
                )
                scen_pt = sample_scenarios(sys_pt, base, n, spec.config.seed)
            config = replace(spec.config, gamma=float(g_col), xi=float(x_col))

            n_actual = len(scen_pt.scenarios)
            point_desc["n_scenarios"] = n_actual
            point_key[2] = n_actual

            if config.horizon_window is not None:
                reports = bench.rolling_horizon(sys_pt, scen_pt, config, spec.frameworks)
                for fw in spec.frameworks:
                    rep = reports[fw]
                    cost_rows.append(
                        point_key
                        + [fw, rep.total, rep.dam_cost, rep.rt_expected, rep.total_std]
                    )
                    summary_points.append(
                        {**point_desc, "framework": fw, "total": rep.total}
                    )
                continue

            for fw in spec.frameworks:
                run = bench.run_framework(fw, sys_pt, scen_pt, config)
                rep = run.report
                cost_rows.append(
                    point_key
                    + [fw, rep.total, rep.dam_cost, rep.rt_expected, rep.total_std]
                )
                summary_points.append({**point_desc, "framework": fw, "total": rep.total})

                tables = report.price_tables(scen_pt, run.dam_prices, run.rt_prices)
                for (b, t), p in sorted(tables.dam.items()):
                    dam_price_rows.append(point_key + [fw, b, t, p])
                for (b, t, sid), p in sorted(tables.rt.items()):
                    rt_price_rows.append(point_key + [fw, b, t, sid, p])

                if run.dam.duals is not None:
                    stl = report.settle(sys_pt, scen_pt, run.dam, run.rtm)
                    for ps in stl.participants:
                        revenue_rows.append(
                            point_key
                            + [fw, ps.participant, ps.kind, ps.dam_revenue, ps.rt_settlement, ps.total]
                        )
                uc = report.uc_quality(run.dam, run.rtm)
                uc_rows.append(
                    point_key + [fw, "dam", uc.dam_total, uc.dam_fractional, uc.dam_share]
                )
                uc_rows.append(
                    point_key + [fw, "rtm", uc.rt_total, uc.rt_fractional, uc.rt_share]
                )
        except GridbidError as e:
            failed += 1
            summary_points.append({**point_desc, "error": str(e)})

    key_cols = COST_COLUMNS[:6]
    report.write_csv(os.path.join(out_dir, "costs.csv"), COST_COLUMNS, cost_rows)
    report.write_csv(
        os.path.join(out_dir, "prices_dam.csv"),
        key_cols + ("framework", "bus", "period", "price"),
        dam_price_rows,
    )
    report.write_csv(
        os.path.join(out_dir, "prices_rt.csv"),
        key_cols + ("framework", "bus", "period", "scenario", "price"),
        rt_price_rows,
    )
    report.write_csv(
        os.path.join(out_dir, "revenues.csv"),
        key_cols + ("framework", "participant", "kind", "dam_revenue", "rt_settlement", "total"),
        revenue_rows,
    )
    report.write_csv(
        os.path.join(out_dir, "uc_quality.csv"),
        key_cols + ("framework", "stage", "count", "fractional", "share"),
        uc_rows,
    )
    report.write_run_summary(
        os.path.join(out_dir, "run_summary.json"),
        {
            "version": __version__,
            "study": {
                "system": spec.system,
                "scenarios": spec.scenarios,
                "frameworks": list(spec.frameworks),
                "gammas": list(spec.gammas),
                "xis": list(spec.xis),
                "scenario_counts": list(spec.scenario_counts),
                "vres_scale": list(spec.vres_scale),
                "line_scale": list(spec.line_scale),
                "flexibility": list(spec.flexibility),
                "config": dataclasses.asdict(spec.config),
            },
            "results": summary_points,
            "failed_points": failed,
        },
    )
    return 1 if failed else 0


def _load_inputs(args) -> tuple[PowerSystem, ScenarioSet, RunConfig]:
    system = load_system(args.system)
    scenarios = load_scenarios(args.scenarios, system)
    config = RunConfig()
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                config = _config_from_dict(json.load(fh))
        except OSError as e:
            raise ConfigError(f"cannot read config file: {e}") from e
        except json.JSONDecodeError as e:
            raise ConfigError(f"config file is not valid JSON: {e}") from e
    return system, scenarios, config


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="gridbid",
        description="Two-settlement market simulation and VRES bid optimization",
    )
    parser.add_argument("--version", action="version", version=f"gridbid {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a study sweep")
    p_run.add_argument("--study", help="StudySpec JSON file")
    p_run.add_argument("--system", help="system JSON file")
    p_run.add_argument("--scenarios", help="scenario CSV file")
    p_run.add_argument("--config", help="RunConfig JSON file")
    p_run.add_argument("--out", help="output directory")
    p_run.add_argument(
        "--framework",
        action="append",
        choices=FRAMEWORKS,
        help="framework to run (repeatable; default all)",
    )

    p_val = sub.add_parser("validate", help="validate inputs and exit")
    p_val.add_argument("--system", required=True)
    p_val.add_argument("--scenarios", required=True)
    p_val.add_argument("--config")

    p_orc = sub.add_parser("oracle", help="brute-force bid search (small systems)")
    p_orc.add_argument("--system", required=True)
    p_orc.add_argument("--scenarios", required=True)
    p_orc.add_argument("--config")
    p_orc.add_argument("--step", type=float, default=1.0, help="bid grid step in MW")

    args = parser.parse_args(argv)

    try:
        if args.command == "validate":
            system, scenarios, config = _load_inputs(args)
            config.validate_for(system)
            print(
                f"ok: {len(system.buses)} buses, {len(system.lines)} lines, "
                f"{len(system.conventional_units)} conventional units, "
                f"{len(system.vres_units)} vres units, "
                f"{len(scenarios.scenarios)} scenarios over "
                f"{len(scenarios.periods)} periods"
            )
            return 0

        if args.command == "oracle":
            system, scenarios, config = _load_inputs(args)
            rep = bench.run_oracle(system, scenarios, config, grid_step=args.step)
            print(f"best expected total cost: {rep.total:.6f}")
            for (k, t), w in sorted(rep.bids.quantities.items()):
                print(f"  bid {k} t={t}: {w:.6f} MW")
            return 0

        if args.command == "run":
            if args.study:
                spec = load_study(args.study)
                if args.framework:
                    spec = replace(spec, frameworks=tuple(args.framework))
            else:
                if not args.system or not args.scenarios:
                    raise ConfigError("run needs --study or both --system and --scenarios")
                config = RunConfig()
                if args.config:
                    with open(args.config) as fh:
                        config = _config_from_dict(json.load(fh))
                spec = StudySpec(
                    system=args.system,
                    scenarios=args.scenarios,
                    frameworks=tuple(args.framework) if args.framework else FRAMEWORKS,
                    config=config,
                )
            out_dir = args.out or spec.out
            if not out_dir:
                raise ConfigError("run needs an output directory (--out)")
            return run_study(spec, out_dir)

        raise ConfigError(f"unknown command {args.command!r}")
    except (ConfigError, ParseError, ValidationError, OracleSizeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
