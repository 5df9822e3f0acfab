"""Power-system data model, input parsing, and scenario handling.

A :class:`PowerSystem` is an immutable snapshot of the physical system:
buses, directed lines (one record per physical line), conventional units
with relaxed-commitment attributes, renewable (VRES) units, and loads.
Scenario data lives in a :class:`ScenarioSet`: weighted joint realizations
of VRES output and demand per period, plus the day-ahead demand forecast.

All collections are sorted by identifier at construction so downstream
model builds are deterministic for identical inputs.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping

import numpy as np

from .errors import ParseError, ValidationError

STARTUP_CLASSES = ("fast", "slow")


@dataclass(frozen=True)
class Bus:
    id: str
    loads: tuple[str, ...] = ()


@dataclass(frozen=True)
class Load:
    id: str
    bus: str


@dataclass(frozen=True)
class Line:
    from_bus: str
    to_bus: str
    reactance: float  # p.u.
    capacity: float  # MW, symmetric limit

    @property
    def key(self) -> tuple[str, str]:
        return (self.from_bus, self.to_bus)


@dataclass(frozen=True)
class ConventionalUnit:
    id: str
    bus: str
    variable_cost: float  # $/MWh, day-ahead energy
    no_load_cost: float  # $/h while committed
    startup_cost: float  # $ per full start
    redispatch_up_cost: float  # $/MWh for real-time upward redispatch
    redispatch_down_cost: float  # $/MWh saved by downward redispatch
    p_min: float  # MW
    p_max: float  # MW
    ramp_up: float  # MW/h
    ramp_down: float  # MW/h
    startup_class: str  # "fast" units may start in real time, "slow" may not
    initial_commitment: float = 0.0  # u at t=0, in [0, 1]
    initial_output: float = 0.0  # MW at t=0


@dataclass(frozen=True)
class VresUnit:
    id: str
    bus: str
    capacity: float  # MW installed


@dataclass(frozen=True)
class PowerSystem:
    buses: tuple[Bus, ...]
    lines: tuple[Line, ...]
    conventional_units: tuple[ConventionalUnit, ...]
    vres_units: tuple[VresUnit, ...]
    loads: tuple[Load, ...]

    def __post_init__(self):
        object.__setattr__(self, "buses", tuple(sorted(self.buses, key=lambda b: b.id)))
        object.__setattr__(self, "lines", tuple(sorted(self.lines, key=lambda l: l.key)))
        object.__setattr__(
            self,
            "conventional_units",
            tuple(sorted(self.conventional_units, key=lambda u: u.id)),
        )
        object.__setattr__(
            self, "vres_units", tuple(sorted(self.vres_units, key=lambda u: u.id))
        )
        object.__setattr__(self, "loads", tuple(sorted(self.loads, key=lambda d: d.id)))
        _validate_system(self)

    # -- lookups ----------------------------------------------------------

    def bus_ids(self) -> tuple[str, ...]:
        return tuple(b.id for b in self.buses)

    @property
    def reference_bus(self) -> str:
        """Angle reference: the lexicographically first bus."""
        return self.buses[0].id

    def loads_at(self, bus_id: str) -> tuple[Load, ...]:
        return tuple(d for d in self.loads if d.bus == bus_id)

    def conventional_at(self, bus_id: str) -> tuple[ConventionalUnit, ...]:
        return tuple(u for u in self.conventional_units if u.bus == bus_id)

    def vres_at(self, bus_id: str) -> tuple[VresUnit, ...]:
        return tuple(u for u in self.vres_units if u.bus == bus_id)

    def vres_unit(self, unit_id: str) -> VresUnit:
        for u in self.vres_units:
            if u.id == unit_id:
                return u
        raise KeyError(unit_id)


def _check_unique(kind: str, ids: Iterable[str]) -> None:
    seen = set()
    for i in ids:
        if i in seen:
            raise ValidationError(f"duplicate {kind} id {i!r}")
        seen.add(i)


def _validate_system(sys: PowerSystem) -> None:
    if not sys.buses:
        raise ValidationError("system has no buses")
    _check_unique("bus", (b.id for b in sys.buses))
    _check_unique("conventional unit", (u.id for u in sys.conventional_units))
    _check_unique("vres unit", (u.id for u in sys.vres_units))
    _check_unique("load", (d.id for d in sys.loads))
    _check_unique("line", (f"{l.from_bus}->{l.to_bus}" for l in sys.lines))

    bus_ids = set(b.id for b in sys.buses)
    for l in sys.lines:
        if l.from_bus not in bus_ids or l.to_bus not in bus_ids:
            raise ValidationError(f"line {l.from_bus}->{l.to_bus} references unknown bus")
        if l.from_bus == l.to_bus:
            raise ValidationError(f"line {l.from_bus}->{l.to_bus} is a self-loop")
        if not (l.reactance > 0.0) or not math.isfinite(l.reactance):
            raise ValidationError(
                f"line {l.from_bus}->{l.to_bus}: reactance must be positive"
            )
        if not (l.capacity > 0.0) or not math.isfinite(l.capacity):
            raise ValidationError(
                f"line {l.from_bus}->{l.to_bus}: capacity must be positive"
            )

    for u in sys.conventional_units:
        if u.bus not in bus_ids:
            raise ValidationError(f"unit {u.id!r} references unknown bus {u.bus!r}")
        if u.startup_class not in STARTUP_CLASSES:
            raise ValidationError(
                f"unit {u.id!r}: startup_class must be one of {STARTUP_CLASSES}"
            )
        for attr in (
            "variable_cost",
            "no_load_cost",
            "startup_cost",
            "redispatch_up_cost",
            "redispatch_down_cost",
            "ramp_up",
            "ramp_down",
        ):
            v = getattr(u, attr)
            if v < 0.0 or not math.isfinite(v):
                raise ValidationError(f"unit {u.id!r}: {attr} must be nonnegative")
        if not (0.0 <= u.p_min <= u.p_max) or not math.isfinite(u.p_max):
            raise ValidationError(f"unit {u.id!r}: need 0 <= p_min <= p_max")
        if u.redispatch_down_cost > u.redispatch_up_cost:
            # otherwise simultaneous up/down redispatch makes the RT problem
            # unbounded below
            raise ValidationError(
                f"unit {u.id!r}: redispatch_down_cost exceeds redispatch_up_cost"
            )
        if not (0.0 <= u.initial_commitment <= 1.0):
            raise ValidationError(f"unit {u.id!r}: initial_commitment outside [0, 1]")
        if u.initial_output < -1e-9 or u.initial_output > u.initial_commitment * u.p_max + 1e-9:
            raise ValidationError(
                f"unit {u.id!r}: initial_output inconsistent with initial_commitment"
            )

    for u in sys.vres_units:
        if u.bus not in bus_ids:
            raise ValidationError(f"vres unit {u.id!r} references unknown bus {u.bus!r}")
        if u.capacity < 0.0 or not math.isfinite(u.capacity):
            raise ValidationError(f"vres unit {u.id!r}: capacity must be nonnegative")

    load_ids = set(d.id for d in sys.loads)
    owner: dict[str, str] = {}
    for b in sys.buses:
        for lid in b.loads:
            if lid in owner:
                raise ValidationError(f"load {lid!r} attached to two buses")
            owner[lid] = b.id
    for d in sys.loads:
        if d.bus not in bus_ids:
            raise ValidationError(f"load {d.id!r} references unknown bus {d.bus!r}")
        if owner.get(d.id) != d.bus:
            raise ValidationError(
                f"load {d.id!r}: bus attachment disagrees between load and bus records"
            )
    for lid in owner:
        if lid not in load_ids:
            raise ValidationError(f"bus references unknown load {lid!r}")


# -- scenarios -------------------------------------------------------------


@dataclass(frozen=True)
class Scenario:
    id: str
    weight: float
    vres: Mapping[tuple[str, int], float]  # (vres unit, period) -> MW
    demand: Mapping[tuple[str, int], float]  # (load, period) -> MW


@dataclass(frozen=True)
class ScenarioSet:
    periods: tuple[int, ...]
    scenarios: tuple[Scenario, ...]
    da_demand: Mapping[tuple[str, int], float]  # (load, period) -> MW forecast
    da_vres: Mapping[tuple[str, int], float] | None = None  # optional forecast

    def __post_init__(self):
        object.__setattr__(self, "periods", tuple(sorted(self.periods)))
        object.__setattr__(
            self, "scenarios", tuple(sorted(self.scenarios, key=lambda s: s.id))
        )

    @property
    def weights(self) -> dict[str, float]:
        return {s.id: s.weight for s in self.scenarios}

    def scenario(self, scenario_id: str) -> Scenario:
        for s in self.scenarios:
            if s.id == scenario_id:
                return s
        raise KeyError(scenario_id)


def validate_scenarios(scenarios: ScenarioSet, system: PowerSystem) -> None:
    """Check coverage, weights, and physical ranges against a system."""
    periods = scenarios.periods
    if not periods:
        raise ValidationError("scenario set has no periods")
    for a, b in zip(periods, periods[1:]):
        if b != a + 1:
            raise ValidationError("periods must be consecutive integers")
    if periods[0] < 1:
        raise ValidationError("periods must start at 1 or later")
    if not scenarios.scenarios:
        raise ValidationError("scenario set has no scenarios")
    total = sum(s.weight for s in scenarios.scenarios)
    if abs(total - 1.0) > 1e-9:
        raise ValidationError(f"scenario weights sum to {total:.12g}, expected 1")
    cap = {u.id: u.capacity for u in system.vres_units}
    for s in scenarios.scenarios:
        if s.weight <= 0.0:
            raise ValidationError(f"scenario {s.id!r}: weight must be positive")
        for u in system.vres_units:
            for t in periods:
                try:
                    v = s.vres[(u.id, t)]
                except KeyError:
                    raise ValidationError(
                        f"scenario {s.id!r}: missing vres value for ({u.id}, {t})"
                    ) from None
                if v < -1e-9 or v > cap[u.id] + 1e-9:
                    raise ValidationError(
                        f"scenario {s.id!r}: vres value {v} for ({u.id}, {t}) outside "
                        f"[0, {cap[u.id]}]"
                    )
        for d in system.loads:
            for t in periods:
                try:
                    v = s.demand[(d.id, t)]
                except KeyError:
                    raise ValidationError(
                        f"scenario {s.id!r}: missing demand value for ({d.id}, {t})"
                    ) from None
                if v < -1e-9:
                    raise ValidationError(
                        f"scenario {s.id!r}: negative demand for ({d.id}, {t})"
                    )
        extra = set(s.vres) - {(u.id, t) for u in system.vres_units for t in periods}
        if extra:
            raise ValidationError(f"scenario {s.id!r}: unknown vres entries {sorted(extra)}")
    for d in system.loads:
        for t in periods:
            if (d.id, t) not in scenarios.da_demand:
                raise ValidationError(f"missing day-ahead demand forecast for ({d.id}, {t})")


def mean_vres(scenarios: ScenarioSet) -> dict[tuple[str, int], float]:
    """Probability-weighted mean VRES output per (unit, period)."""
    out: dict[tuple[str, int], float] = {}
    for s in scenarios.scenarios:
        for key, v in s.vres.items():
            out[key] = out.get(key, 0.0) + s.weight * v
    return out


def bus_demand(
    system: PowerSystem, demand: Mapping[tuple[str, int], float], periods: Iterable[int]
) -> dict[tuple[str, int], float]:
    """Aggregate per-load demand onto buses; buses without loads get zero."""
    out = {(b.id, t): 0.0 for b in system.buses for t in periods}
    for d in system.loads:
        for t in periods:
            out[(d.bus, t)] += demand[(d.id, t)]
    return out


def slice_periods(scenarios: ScenarioSet, periods: Iterable[int]) -> ScenarioSet:
    """Restrict a scenario set to a period window (used by rolling horizon)."""
    keep = tuple(sorted(periods))
    missing = [t for t in keep if t not in scenarios.periods]
    if missing:
        raise ValidationError(f"cannot slice to unknown periods {missing}")

    def pick(m: Mapping[tuple[str, int], float]) -> dict[tuple[str, int], float]:
        return {(e, t): v for (e, t), v in m.items() if t in keep}

    return ScenarioSet(
        periods=keep,
        scenarios=tuple(
            Scenario(s.id, s.weight, pick(s.vres), pick(s.demand))
            for s in scenarios.scenarios
        ),
        da_demand=pick(scenarios.da_demand),
        da_vres=None if scenarios.da_vres is None else pick(scenarios.da_vres),
    )


# -- file I/O ---------------------------------------------------------------


def load_system(path: str) -> PowerSystem:
    """Read a power system from a JSON file."""
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as e:
        raise ParseError(f"cannot read system file {path!r}: {e}") from e
    except json.JSONDecodeError as e:
        raise ParseError(f"system file {path!r} is not valid JSON: {e}") from e
    return system_from_dict(raw)


def system_from_dict(raw: Mapping) -> PowerSystem:
    for key in ("buses", "lines", "conventional_units", "vres_units", "loads"):
        if key not in raw:
            raise ParseError(f"system is missing the {key!r} section")
    try:
        buses = tuple(
            Bus(id=str(b["id"]), loads=tuple(str(x) for x in b.get("loads", ())))
            for b in raw["buses"]
        )
        lines = tuple(
            Line(
                from_bus=str(l["from"]),
                to_bus=str(l["to"]),
                reactance=float(l["reactance"]),
                capacity=float(l["capacity"]),
            )
            for l in raw["lines"]
        )
        units = tuple(
            ConventionalUnit(
                id=str(u["id"]),
                bus=str(u["bus"]),
                variable_cost=float(u["variable_cost"]),
                no_load_cost=float(u["no_load_cost"]),
                startup_cost=float(u["startup_cost"]),
                redispatch_up_cost=float(u["redispatch_up_cost"]),
                redispatch_down_cost=float(u["redispatch_down_cost"]),
                p_min=float(u["p_min"]),
                p_max=float(u["p_max"]),
                ramp_up=float(u["ramp_up"]),
                ramp_down=float(u["ramp_down"]),
                startup_class=str(u["startup_class"]),
                initial_commitment=float(u.get("initial_commitment", 0.0)),
                initial_output=float(u.get("initial_output", 0.0)),
            )
            for u in raw["conventional_units"]
        )
        vres = tuple(
            VresUnit(id=str(u["id"]), bus=str(u["bus"]), capacity=float(u["capacity"]))
            for u in raw["vres_units"]
        )
        loads = tuple(Load(id=str(d["id"]), bus=str(d["bus"])) for d in raw["loads"])
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError(f"malformed system record: {e!r}") from e
    return PowerSystem(
        buses=buses, lines=lines, conventional_units=units, vres_units=vres, loads=loads
    )


def system_to_dict(system: PowerSystem) -> dict:
    return {
        "buses": [{"id": b.id, "loads": list(b.loads)} for b in system.buses],
        "lines": [
            {
                "from": l.from_bus,
                "to": l.to_bus,
                "reactance": l.reactance,
                "capacity": l.capacity,
            }
            for l in system.lines
        ],
        "conventional_units": [
            {
                "id": u.id,
                "bus": u.bus,
                "variable_cost": u.variable_cost,
                "no_load_cost": u.no_load_cost,
                "startup_cost": u.startup_cost,
                "redispatch_up_cost": u.redispatch_up_cost,
                "redispatch_down_cost": u.redispatch_down_cost,
                "p_min": u.p_min,
                "p_max": u.p_max,
                "ramp_up": u.ramp_up,
                "ramp_down": u.ramp_down,
                "startup_class": u.startup_class,
                "initial_commitment": u.initial_commitment,
                "initial_output": u.initial_output,
            }
            for u in system.conventional_units
        ],
        "vres_units": [
            {"id": u.id, "bus": u.bus, "capacity": u.capacity} for u in system.vres_units
        ],
        "loads": [{"id": d.id, "bus": d.bus} for d in system.loads],
    }


def serialize(system: PowerSystem) -> str:
    """JSON text that :func:`load_system` reads back to an equal system."""
    return json.dumps(system_to_dict(system), indent=2, sort_keys=True) + "\n"


SCENARIO_COLUMNS = ("scenario_id", "weight", "kind", "element_id", "period", "value_mw")


def load_scenarios(path: str, system: PowerSystem) -> ScenarioSet:
    """Read a scenario CSV and validate it against the system.

    Rows with scenario_id "DA" carry the day-ahead forecast; their weight
    field is ignored. When no DA demand rows are present the forecast
    defaults to the probability-weighted scenario mean.
    """
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or tuple(reader.fieldnames) != SCENARIO_COLUMNS:
                raise ParseError(
                    f"scenario file {path!r}: expected columns {SCENARIO_COLUMNS}, "
                    f"got {reader.fieldnames}"
                )
            rows = list(reader)
    except OSError as e:
        raise ParseError(f"cannot read scenario file {path!r}: {e}") from e
    return scenarios_from_rows(rows, system)


def scenarios_from_rows(rows: Iterable[Mapping[str, str]], system: PowerSystem) -> ScenarioSet:
    weights: dict[str, float] = {}
    vres: dict[str, dict[tuple[str, int], float]] = {}
    demand: dict[str, dict[tuple[str, int], float]] = {}
    da_vres: dict[tuple[str, int], float] = {}
    da_demand: dict[tuple[str, int], float] = {}
    periods: set[int] = set()

    for i, row in enumerate(rows, start=2):
        sid = row["scenario_id"].strip()
        kind = row["kind"].strip()
        eid = row["element_id"].strip()
        try:
            t = int(row["period"])
            value = float(row["value_mw"])
        except (TypeError, ValueError) as e:
            raise ParseError(f"scenario row {i}: bad period or value ({e})") from e
        if kind not in ("vres", "load"):
            raise ParseError(f"scenario row {i}: kind must be vres or load, got {kind!r}")
        periods.add(t)
        if sid == "DA":
            target = da_vres if kind == "vres" else da_demand
            if (eid, t) in target:
                raise ParseError(f"scenario row {i}: duplicate DA entry ({eid}, {t})")
            target[(eid, t)] = value
            continue
        w = row["weight"].strip() if row["weight"] is not None else ""
        if not w:
            raise ParseError(f"scenario row {i}: missing weight for scenario {sid!r}")
        try:
            weight = float(w)
        except ValueError as e:
            raise ParseError(f"scenario row {i}: bad weight {w!r}") from e
        if sid in weights and abs(weights[sid] - weight) > 1e-12:
            raise ParseError(f"scenario row {i}: inconsistent weight for {sid!r}")
        weights[sid] = weight
        target = vres if kind == "vres" else demand
        per = target.setdefault(sid, {})
        if (eid, t) in per:
            raise ParseError(f"scenario row {i}: duplicate entry ({sid}, {eid}, {t})")
        per[(eid, t)] = value

    if not weights:
        raise ParseError("scenario file contains no scenario rows")
    scen = tuple(
        Scenario(
            id=sid,
            weight=weights[sid],
            vres=vres.get(sid, {}),
            demand=demand.get(sid, {}),
        )
        for sid in sorted(weights)
    )
    period_tuple = tuple(sorted(periods))
    if not da_demand:
        mean: dict[tuple[str, int], float] = {}
        for s in scen:
            for key, v in s.demand.items():
                mean[key] = mean.get(key, 0.0) + s.weight * v
        da_demand = mean
    out = ScenarioSet(
        periods=period_tuple,
        scenarios=scen,
        da_demand=da_demand,
        da_vres=da_vres or None,
    )
    validate_scenarios(out, system)
    return out


def write_scenarios(scenarios: ScenarioSet, path: str) -> None:
    """Write a scenario set in the CSV format :func:`load_scenarios` reads."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SCENARIO_COLUMNS)
        for (eid, t), v in sorted(scenarios.da_demand.items()):
            w.writerow(["DA", "", "load", eid, t, repr(float(v))])
        if scenarios.da_vres:
            for (eid, t), v in sorted(scenarios.da_vres.items()):
                w.writerow(["DA", "", "vres", eid, t, repr(float(v))])
        for s in scenarios.scenarios:
            for (eid, t), v in sorted(s.vres.items()):
                w.writerow([s.id, repr(s.weight), "vres", eid, t, repr(float(v))])
            for (eid, t), v in sorted(s.demand.items()):
                w.writerow([s.id, repr(s.weight), "load", eid, t, repr(float(v))])


# -- scenario synthesis ------------------------------------------------------


@dataclass(frozen=True)
class BaseProfile:
    """Mean VRES and demand traces that sampled scenarios scatter around."""

    vres: Mapping[tuple[str, int], float]  # (vres unit, period) -> MW
    demand: Mapping[tuple[str, int], float]  # (load, period) -> MW
    vres_rel_std: float = 0.25
    demand_rel_std: float = 0.0


def sample_scenarios(
    system: PowerSystem, base_profile: BaseProfile, n: int, seed: int
) -> ScenarioSet:
    """Draw n equal-weight scenarios around the base profile.

    Each (element, period) value gets an independent Gaussian perturbation
    with the configured relative standard deviation, truncated to the
    physical range ([0, capacity] for VRES, nonnegative for demand).
    Deterministic for a given seed. The day-ahead demand forecast is the
    base demand trace.
    """
    if n < 1:
        raise ValidationError("need at least one scenario")
    periods = sorted({t for (_, t) in base_profile.vres} | {t for (_, t) in base_profile.demand})
    if not periods:
        raise ValidationError("base profile is empty")
    cap = {u.id: u.capacity for u in system.vres_units}
    for u in system.vres_units:
        for t in periods:
            if (u.id, t) not in base_profile.vres:
                raise ValidationError(f"base profile missing vres entry ({u.id}, {t})")
    for d in system.loads:
        for t in periods:
            if (d.id, t) not in base_profile.demand:
                raise ValidationError(f"base profile missing demand entry ({d.id}, {t})")

    rng = np.random.default_rng(seed)
    width = len(str(n - 1)) if n > 1 else 1
    scen = []
    for j in range(n):
        v: dict[tuple[str, int], float] = {}
        for u in system.vres_units:
            for t in periods:
                mu = base_profile.vres[(u.id, t)]
                x = rng.normal(mu, base_profile.vres_rel_std * mu) if mu > 0 else 0.0
                v[(u.id, t)] = float(min(max(x, 0.0), cap[u.id]))
        dm: dict[tuple[str, int], float] = {}
        for d in system.loads:
            for t in periods:
                mu = base_profile.demand[(d.id, t)]
                if base_profile.demand_rel_std > 0 and mu > 0:
                    x = rng.normal(mu, base_profile.demand_rel_std * mu)
                else:
                    x = mu
                dm[(d.id, t)] = float(max(x, 0.0))
        scen.append(Scenario(id=f"s{j:0{width}d}", weight=1.0 / n, vres=v, demand=dm))

    out = ScenarioSet(
        periods=tuple(periods),
        scenarios=tuple(scen),
        da_demand=dict(base_profile.demand),
        da_vres=None,
    )
    validate_scenarios(out, system)
    return out


# -- run configuration -------------------------------------------------------


@dataclass(frozen=True)
class RunConfig:
    """Knobs shared by the bidding and benchmarking entry points."""

    voll: float = 1000.0  # $/MWh value of lost load (RT shedding cost)
    gamma: float = 1.0  # bid quantity bound multiplier on expected VRES
    xi: float = 1.5  # dual bound multiplier on zero-bid prices
    solver_tolerance: float = 1e-6
    horizon_window: int | None = None  # periods per rolling window, None = all
    seed: int = 0

    def __post_init__(self):
        if not (self.voll > 0.0) or not math.isfinite(self.voll):
            raise ValidationError("voll must be positive")
        if self.gamma < 0.0 or self.xi < 0.0:
            raise ValidationError("gamma and xi must be nonnegative")
        if not (self.solver_tolerance > 0.0):
            raise ValidationError("solver_tolerance must be positive")
        if self.horizon_window is not None and self.horizon_window < 1:
            raise ValidationError("horizon_window must be at least 1")

    def validate_for(self, system: PowerSystem) -> None:
        worst = max(
            (u.redispatch_up_cost for u in system.conventional_units), default=0.0
        )
        if self.voll <= worst:
            raise ValidationError(
                f"voll {self.voll} must exceed the largest redispatch-up cost {worst}"
            )


# -- bids ---------------------------------------------------------------------


@dataclass(frozen=True)
class BidVector:
    """Day-ahead VRES quantity bids per (unit, period), in MW."""

    quantities: Mapping[tuple[str, int], float]

    def __post_init__(self):
        for key, v in self.quantities.items():
            if v < 0.0 or not math.isfinite(v):
                raise ValidationError(f"bid for {key} must be finite and nonnegative")
        object.__setattr__(self, "quantities", dict(self.quantities))

    def get(self, unit_id: str, period: int) -> float:
        return self.quantities[(unit_id, period)]

    @staticmethod
    def zeros(system: PowerSystem, periods: Iterable[int]) -> "BidVector":
        return BidVector({(u.id, t): 0.0 for u in system.vres_units for t in periods})

    @staticmethod
    def from_mean(scenarios: ScenarioSet) -> "BidVector":
        """The myopic bid: probability-weighted expected VRES output."""
        return BidVector(mean_vres(scenarios))


def require_bids(bids: BidVector, system: PowerSystem, periods: Iterable[int]) -> None:
    for u in system.vres_units:
        for t in periods:
            if (u.id, t) not in bids.quantities:
                raise ValidationError(f"bid vector missing entry ({u.id}, {t})")


# -- system transforms --------------------------------------------------------


def with_line_capacity_scale(system: PowerSystem, factor: float) -> PowerSystem:
    """Scale every line capacity by a positive factor."""
    if not (factor > 0.0):
        raise ValidationError("line capacity factor must be positive")
    return replace(
        system,
        lines=tuple(replace(l, capacity=l.capacity * factor) for l in system.lines),
    )


def with_flexibility(system: PowerSystem, label: str) -> PowerSystem:
    """Apply a fleet flexibility override.

    "lFlx" marks every unit slow, "hFlx" marks every unit fast, and "mFlx"
    keeps the configured mix.
    """
    if label == "mFlx":
        return system
    if label == "lFlx":
        cls = "slow"
    elif label == "hFlx":
        cls = "fast"
    else:
        raise ValidationError(f"unknown flexibility label {label!r}")
    return replace(
        system,
        conventional_units=tuple(
            replace(u, startup_class=cls) for u in system.conventional_units
        ),
    )


def with_initial_state(
    system: PowerSystem, state: Mapping[str, tuple[float, float]]
) -> PowerSystem:
    """Replace initial commitment/output per unit id (rolling-horizon seam)."""
    units = []
    for u in system.conventional_units:
        if u.id in state:
            u0, p0 = state[u.id]
            u0 = min(max(u0, 0.0), 1.0)
            p0 = min(max(p0, 0.0), u0 * u.p_max)
            units.append(replace(u, initial_commitment=u0, initial_output=p0))
        else:
            units.append(u)
    return replace(system, conventional_units=tuple(units))


def with_vres_penetration(
    system: PowerSystem, scenarios: ScenarioSet, percent: float
) -> tuple[PowerSystem, ScenarioSet]:
    """Rescale VRES capacity and traces to a target penetration level.

    The factor is chosen so expected VRES energy over the horizon equals
    ``percent`` % of expected demand energy; capacities, scenario traces and
    any day-ahead VRES forecast all scale together.
    """
    if percent < 0.0:
        raise ValidationError("penetration percent must be nonnegative")
    energy_vres = sum(
        s.weight * v for s in scenarios.scenarios for v in s.vres.values()
    )
    energy_load = sum(
        s.weight * v for s in scenarios.scenarios for v in s.demand.values()
    )
    if energy_vres <= 0.0:
        raise ValidationError("cannot rescale: expected VRES energy is zero")
    factor = (percent / 100.0) * energy_load / energy_vres

    new_system = replace(
        system,
        vres_units=tuple(
            replace(u, capacity=u.capacity * factor) for u in system.vres_units
        ),
    )
    new_scen = ScenarioSet(
        periods=scenarios.periods,
        scenarios=tuple(
            Scenario(
                s.id,
                s.weight,
                {k: v * factor for k, v in s.vres.items()},
                dict(s.demand),
            )
            for s in scenarios.scenarios
        ),
        da_demand=dict(scenarios.da_demand),
        da_vres=None
        if scenarios.da_vres is None
        else {k: v * factor for k, v in scenarios.da_vres.items()},
    )
    validate_scenarios(new_scen, new_system)
    return new_system, new_scen
