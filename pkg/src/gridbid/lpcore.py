"""Linear-program container and HiGHS adapter with dual extraction.

Models are minimization LPs over named variables and named constraint rows.
Rows carry a sense in {"<=", ">=", "="}. Duals are reported in the
nonnegative shadow-price convention for inequalities (the marginal objective
increase from tightening the row by one unit) and as d(objective)/d(rhs) for
equalities. With a nodal balance written as supply = load, the equality dual
is therefore the locational marginal price directly.

Variable bounds are allowed but market models built on top of this module
keep every primal restriction as an explicit row whenever its dual has a
meaning, so the full dual vector comes back from one solve.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .errors import ModelBuildError, SolverError

SENSES = ("<=", ">=", "=")

#: scipy/HiGHS status codes for the three outcomes we accept.
_STATUS_MAP = {0: "optimal", 2: "infeasible", 3: "unbounded"}


@dataclass
class _Row:
    name: str
    coeffs: dict[str, float]
    sense: str
    rhs: float


class LpModel:
    """A minimization LP assembled row by row in deterministic order."""

    def __init__(self, name: str = "lp"):
        self.name = name
        self.var_names: list[str] = []
        self._var_index: dict[str, int] = {}
        self.lower: list[float] = []
        self.upper: list[float] = []
        self.objective: list[float] = []
        self.objective_constant: float = 0.0
        self.rows: list[_Row] = []
        self._row_index: dict[str, int] = {}

    # -- construction -----------------------------------------------------

    def add_var(
        self,
        name: str,
        lb: float = -math.inf,
        ub: float = math.inf,
        obj: float = 0.0,
    ) -> int:
        if name in self._var_index:
            raise ModelBuildError(f"duplicate variable {name!r}")
        if math.isnan(lb) or math.isnan(ub) or not math.isfinite(obj):
            raise ModelBuildError(f"bad bounds/objective for variable {name!r}")
        if lb > ub:
            raise ModelBuildError(f"lb > ub for variable {name!r}")
        idx = len(self.var_names)
        self.var_names.append(name)
        self._var_index[name] = idx
        self.lower.append(lb)
        self.upper.append(ub)
        self.objective.append(obj)
        return idx

    def add_obj(self, name: str, coef: float) -> None:
        """Accumulate an objective coefficient onto an existing variable."""
        self.objective[self._require_var(name)] += coef

    def add_constr(
        self,
        name: str,
        coeffs: Mapping[str, float],
        sense: str,
        rhs: float,
    ) -> int:
        if name in self._row_index:
            raise ModelBuildError(f"duplicate row {name!r}")
        if sense not in SENSES:
            raise ModelBuildError(f"row {name!r}: bad sense {sense!r}")
        if not math.isfinite(rhs):
            raise ModelBuildError(f"row {name!r}: non-finite rhs")
        clean: dict[str, float] = {}
        for var, coef in coeffs.items():
            self._require_var(var)
            if not math.isfinite(coef):
                raise ModelBuildError(f"row {name!r}: non-finite coefficient on {var!r}")
            if coef != 0.0:
                clean[var] = float(coef)
        idx = len(self.rows)
        self.rows.append(_Row(name, clean, sense, float(rhs)))
        self._row_index[name] = idx
        return idx

    def _require_var(self, name: str) -> int:
        try:
            return self._var_index[name]
        except KeyError:
            raise ModelBuildError(f"unknown variable {name!r}") from None

    # -- introspection ----------------------------------------------------

    @property
    def num_vars(self) -> int:
        return len(self.var_names)

    @property
    def num_constrs(self) -> int:
        return len(self.rows)

    def has_var(self, name: str) -> bool:
        return name in self._var_index

    def has_row(self, name: str) -> bool:
        return name in self._row_index

    def row(self, name: str) -> tuple[dict[str, float], str, float]:
        r = self.rows[self._row_index[name]]
        return r.coeffs, r.sense, r.rhs

    def obj_coef(self, name: str) -> float:
        return self.objective[self._require_var(name)]

    def to_lp_text(self) -> str:
        """Render the model in the industry LP text format (debug aid)."""
        safe = _NameSanitizer()
        out = [f"\\ {self.name}", "Minimize", " obj:"]
        terms = [
            f" {c:+.17g} {safe(v)}"
            for v, c in zip(self.var_names, self.objective)
            if c != 0.0
        ]
        out[-1] += "".join(terms) if terms else " 0 " + safe(self.var_names[0])
        out.append("Subject To")
        op = {"<=": "<=", ">=": ">=", "=": "="}
        for r in self.rows:
            body = "".join(f" {c:+.17g} {safe(v)}" for v, c in r.coeffs.items())
            out.append(f" {safe(r.name)}:{body} {op[r.sense]} {r.rhs:.17g}")
        out.append("Bounds")
        for v, lb, ub in zip(self.var_names, self.lower, self.upper):
            if lb == -math.inf and ub == math.inf:
                out.append(f" {safe(v)} free")
            else:
                lo = "-inf" if lb == -math.inf else f"{lb:.17g}"
                hi = "+inf" if ub == math.inf else f"{ub:.17g}"
                out.append(f" {lo} <= {safe(v)} <= {hi}")
        out.append("End")
        return "\n".join(out) + "\n"


class _NameSanitizer:
    """Map arbitrary names onto LP-format-safe identifiers, collision free."""

    def __init__(self):
        self._seen: dict[str, str] = {}
        self._used: set[str] = set()

    def __call__(self, name: str) -> str:
        if name in self._seen:
            return self._seen[name]
        base = re.sub(r"[^A-Za-z0-9_.]", "_", name)
        if not base or base[0].isdigit():
            base = "v_" + base
        cand, k = base, 1
        while cand in self._used:
            k += 1
            cand = f"{base}_{k}"
        self._seen[name] = cand
        self._used.add(cand)
        return cand


@dataclass(frozen=True)
class LpSolution:
    """Primal/dual solution of an :class:`LpModel`.

    ``dual`` maps row names to duals in the convention described in the
    module docstring; ``reduced_lower``/``reduced_upper`` carry the bound
    multipliers (nonnegative at active lower bounds, nonpositive at active
    upper bounds, zero elsewhere).
    """

    status: str
    objective: float
    primal: dict[str, float] = field(default_factory=dict)
    dual: dict[str, float] = field(default_factory=dict)
    reduced_lower: dict[str, float] = field(default_factory=dict)
    reduced_upper: dict[str, float] = field(default_factory=dict)

    def value(self, name: str) -> float:
        return self.primal[name]


def solve(
    model: LpModel,
    tolerance: float = 1e-9,
    dump_lp: str | None = None,
) -> LpSolution:
    """Solve the model with HiGHS and return primal values plus duals.

    ``tolerance`` is handed to the solver as its feasibility tolerance.
    When ``dump_lp`` names a path the model is written there in LP text
    format before solving.
    """
    if model.num_vars == 0:
        raise ModelBuildError("cannot solve a model with no variables")
    if dump_lp is not None:
        with open(dump_lp, "w") as fh:
            fh.write(model.to_lp_text())

    n = model.num_vars
    c = np.asarray(model.objective, dtype=float)
    bounds = [
        (None if lb == -math.inf else lb, None if ub == math.inf else ub)
        for lb, ub in zip(model.lower, model.upper)
    ]

    # Split rows into equalities and a single <= block; >= rows are negated
    # into that block, which flips the reported marginal sign in a way the
    # extraction below undoes.
    ub_rows: list[int] = []
    eq_rows: list[int] = []
    for i, r in enumerate(model.rows):
        (eq_rows if r.sense == "=" else ub_rows).append(i)

    def build(rows: list[int], negate_ge: bool):
        data, ri, ci, rhs = [], [], [], []
        for pos, i in enumerate(rows):
            r = model.rows[i]
            sgn = -1.0 if (negate_ge and r.sense == ">=") else 1.0
            rhs.append(sgn * r.rhs)
            for var, coef in r.coeffs.items():
                ri.append(pos)
                ci.append(model._var_index[var])
                data.append(sgn * coef)
        mat = sparse.csr_matrix((data, (ri, ci)), shape=(len(rows), n))
        return mat, np.asarray(rhs, dtype=float)

    a_ub, b_ub = build(ub_rows, negate_ge=True) if ub_rows else (None, None)
    a_eq, b_eq = build(eq_rows, negate_ge=False) if eq_rows else (None, None)

    tol = min(max(tolerance, 1e-12), 1e-6)
    res = linprog(
        c,
        A_ub=a_ub,
        b_ub=b_ub,
        A_eq=a_eq,
        b_eq=b_eq,
        bounds=bounds,
        method="highs",
        options={
            "presolve": True,
            "primal_feasibility_tolerance": tol,
            "dual_feasibility_tolerance": tol,
        },
    )

    status = _STATUS_MAP.get(res.status)
    if status is None:
        raise SolverError(f"{model.name}: solver failure ({res.message})")
    if status != "optimal":
        return LpSolution(status=status, objective=math.nan)

    primal = dict(zip(model.var_names, (float(v) for v in res.x)))
    dual: dict[str, float] = {}
    for pos, i in enumerate(ub_rows):
        # sign convention: inequality duals are nonnegative for both senses
        dual[model.rows[i].name] = -float(res.ineqlin.marginals[pos])
    for pos, i in enumerate(eq_rows):
        dual[model.rows[i].name] = float(res.eqlin.marginals[pos])

    sol = LpSolution(
        status="optimal",
        objective=float(res.fun) + model.objective_constant,
        primal=primal,
        dual=dual,
        reduced_lower=dict(zip(model.var_names, (float(v) for v in res.lower.marginals))),
        reduced_upper=dict(zip(model.var_names, (float(v) for v in res.upper.marginals))),
    )

    # Sanity: the solver must deliver a consistent primal/dual pair.
    scale = 1.0 + abs(sol.objective)
    check = max(tolerance, 1e-7)
    feas = feasibility_residual(model, sol)
    gap = check_strong_duality(model, sol)
    if feas > check * scale or gap > check * scale:
        raise SolverError(
            f"{model.name}: solution failed quality checks "
            f"(feasibility {feas:.3e}, duality gap {gap:.3e})"
        )
    return sol


def _row_activity(model: LpModel, sol: LpSolution, r: _Row) -> float:
    return sum(coef * sol.primal[var] for var, coef in r.coeffs.items())


def feasibility_residual(model: LpModel, sol: LpSolution) -> float:
    """Largest primal constraint or bound violation, in row units."""
    worst = 0.0
    for r in model.rows:
        act = _row_activity(model, sol, r)
        if r.sense == "<=":
            worst = max(worst, act - r.rhs)
        elif r.sense == ">=":
            worst = max(worst, r.rhs - act)
        else:
            worst = max(worst, abs(act - r.rhs))
    for v, lb, ub in zip(model.var_names, model.lower, model.upper):
        x = sol.primal[v]
        worst = max(worst, lb - x, x - ub)
    return worst


def check_strong_duality(model: LpModel, sol: LpSolution) -> float:
    """|primal objective - dual objective| computed from first principles.

    The dual objective is rebuilt from the solution's row duals and bound
    multipliers, not taken from the solver, so a corrupted dual vector shows
    up as a nonzero residual.
    """
    pobj = sum(
        coef * sol.primal[var]
        for var, coef in zip(model.var_names, model.objective)
        if coef != 0.0
    )
    dobj = 0.0
    for r in model.rows:
        lam = sol.dual[r.name]
        if r.sense == "<=":
            dobj -= lam * r.rhs
        elif r.sense == ">=":
            dobj += lam * r.rhs
        else:
            dobj += lam * r.rhs
    for v, lb, ub in zip(model.var_names, model.lower, model.upper):
        zl = sol.reduced_lower.get(v, 0.0)
        zu = sol.reduced_upper.get(v, 0.0)
        if lb != -math.inf:
            dobj += zl * lb
        if ub != math.inf:
            dobj += zu * ub
    return abs(pobj - dobj)


def complementary_slackness(model: LpModel, sol: LpSolution) -> float:
    """Largest |dual * slack| over all inequality rows and variable bounds."""
    worst = 0.0
    for r in model.rows:
        if r.sense == "=":
            continue
        act = _row_activity(model, sol, r)
        slack = (r.rhs - act) if r.sense == "<=" else (act - r.rhs)
        worst = max(worst, abs(sol.dual[r.name] * slack))
    for v, lb, ub in zip(model.var_names, model.lower, model.upper):
        x = sol.primal[v]
        if lb != -math.inf:
            worst = max(worst, abs(sol.reduced_lower.get(v, 0.0) * (x - lb)))
        if ub != math.inf:
            worst = max(worst, abs(sol.reduced_upper.get(v, 0.0) * (ub - x)))
    return worst
