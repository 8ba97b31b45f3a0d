"""A small exact mixed-integer linear modelling layer.

Formulations are written against :class:`Model`; :func:`solve` hands them to
a registered backend. The default backend is HiGHS through
``scipy.optimize.milp``.
"""
from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp as _scipy_milp
from scipy.sparse import coo_matrix

INTEGRALITY_TOL = 1e-6


class VarKind(enum.Enum):
    BINARY = "binary"
    INTEGER = "integer"
    CONTINUOUS = "continuous"


class Status(enum.Enum):
    OPTIMAL = "OPTIMAL"
    INFEASIBLE = "INFEASIBLE"
    TIMEOUT = "TIMEOUT"
    ERROR = "ERROR"


@dataclass
class Var:
    index: int
    name: str
    kind: VarKind
    lb: float
    ub: float


@dataclass
class Constraint:
    coeffs: dict[int, float]
    sense: str  # "<=", ">=" or "=="
    rhs: float
    name: str = ""


@dataclass
class Model:
    """Variables, linear constraints and a minimisation objective."""

    name: str = "model"
    variables: list[Var] = field(default_factory=list)
    constraints: list[Constraint] = field(default_factory=list)
    objective: dict[int, float] = field(default_factory=dict)
    time_limit: float | None = None
    feasibility_only: bool = True

    def add_var(
        self, name: str, kind: VarKind = VarKind.BINARY, lb: float = 0.0, ub: float | None = None
    ) -> int:
        if ub is None:
            ub = 1.0 if kind is VarKind.BINARY else math.inf
        var = Var(len(self.variables), name, kind, float(lb), float(ub))
        self.variables.append(var)
        return var.index

    def binary(self, name: str) -> int:
        return self.add_var(name, VarKind.BINARY)

    def continuous(self, name: str, lb: float = 0.0, ub: float | None = None) -> int:
        return self.add_var(name, VarKind.CONTINUOUS, lb, ub)

    def integer(self, name: str, lb: float = 0.0, ub: float | None = None) -> int:
        return self.add_var(name, VarKind.INTEGER, lb, ub)

    def fix(self, index: int, value: float) -> None:
        self.variables[index].lb = self.variables[index].ub = float(value)

    def add_constraint(
        self, coeffs: Mapping[int, float], sense: str, rhs: float, name: str = ""
    ) -> None:
        if sense not in ("<=", ">=", "=="):
            raise ValueError(f"unknown relation {sense!r}")
        merged: dict[int, float] = {}
        for idx, value in coeffs.items():
            if not 0 <= idx < len(self.variables):
                raise ValueError(f"constraint {name!r} references undeclared variable {idx}")
            if not math.isfinite(value):
                raise ValueError(f"constraint {name!r} has a non-finite coefficient")
            merged[idx] = merged.get(idx, 0.0) + float(value)
        self.constraints.append(Constraint(merged, sense, float(rhs), name))

    def minimize(self, coeffs: Mapping[int, float]) -> None:
        self.objective = {k: float(v) for k, v in coeffs.items()}
        self.feasibility_only = not any(self.objective.values())

    def count(self, kind: VarKind) -> int:
        return sum(1 for v in self.variables if v.kind is kind)

    def to_lp(self) -> str:
        """Render the model in CPLEX LP file syntax."""

        def term_list(coeffs: Mapping[int, float]) -> str:
            parts = []
            for idx, value in coeffs.items():
                sign = "-" if value < 0 else "+"
                parts.append(f"{sign} {abs(value):g} {self.variables[idx].name}")
            text = " ".join(parts) or "0"
            return text[2:] if text.startswith("+ ") else text

        lines = [f"\\ {self.name}", "Minimize", f" obj: {term_list(self.objective)}", "Subject To"]
        for k, con in enumerate(self.constraints):
            sense = {"<=": "<=", ">=": ">=", "==": "="}[con.sense]
            lines.append(f" {con.name or f'r{k}'}: {term_list(con.coeffs)} {sense} {con.rhs:g}")
        lines.append("Bounds")
        for v in self.variables:
            if v.kind is VarKind.BINARY and (v.lb, v.ub) == (0.0, 1.0):
                continue
            upper = "+inf" if math.isinf(v.ub) else f"{v.ub:g}"
            lines.append(f" {v.lb:g} <= {v.name} <= {upper}")
        for label, kind in (("Binaries", VarKind.BINARY), ("Generals", VarKind.INTEGER)):
            names = [v.name for v in self.variables if v.kind is kind]
            if names:
                lines.append(label)
                lines.append(" " + " ".join(names))
        lines.append("End")
        return "\n".join(lines) + "\n"


@dataclass
class SolveOutcome:
    status: Status
    values: list[float] | None = None
    objective: float | None = None
    seconds: float = 0.0
    message: str = ""

    def value(self, index: int) -> float:
        if self.values is None:
            raise ValueError(f"no assignment available (status {self.status.value})")
        return self.values[index]


def _round_integral(model: Model, x: np.ndarray) -> list[float] | None:
    values = [float(v) for v in x]
    for var in model.variables:
        if var.kind is VarKind.CONTINUOUS:
            continue
        nearest = round(values[var.index])
        if abs(values[var.index] - nearest) > INTEGRALITY_TOL:
            return None
        values[var.index] = float(nearest)
    return values


def _solve_highs(model: Model) -> SolveOutcome:
    n = len(model.variables)
    start = time.perf_counter()
    cost = np.zeros(n)
    for idx, value in model.objective.items():
        cost[idx] = value
    integrality = np.array([0 if v.kind is VarKind.CONTINUOUS else 1 for v in model.variables])
    bounds = Bounds(
        np.array([v.lb for v in model.variables]), np.array([v.ub for v in model.variables])
    )
    rows, cols, data, lower, upper = [], [], [], [], []
    for r, con in enumerate(model.constraints):
        for idx, value in con.coeffs.items():
            rows.append(r)
            cols.append(idx)
            data.append(value)
        lower.append(-np.inf if con.sense == "<=" else con.rhs)
        upper.append(np.inf if con.sense == ">=" else con.rhs)
    constraints = []
    if model.constraints:
        matrix = coo_matrix((data, (rows, cols)), shape=(len(model.constraints), n)).tocsr()
        constraints.append(LinearConstraint(matrix, np.array(lower), np.array(upper)))
    options: dict = {"presolve": True}
    if model.time_limit is not None:
        options["time_limit"] = float(model.time_limit)
    if n == 0:
        # nothing to decide: feasible iff every constant constraint holds
        ok = all(
            (c.sense == "<=" and 0 <= c.rhs)
            or (c.sense == ">=" and 0 >= c.rhs)
            or (c.sense == "==" and c.rhs == 0)
            for c in model.constraints
        )
        status = Status.OPTIMAL if ok else Status.INFEASIBLE
        return SolveOutcome(status, [] if ok else None, 0.0 if ok else None, 0.0)
    res = _scipy_milp(
        cost, integrality=integrality, bounds=bounds, constraints=constraints, options=options
    )
    elapsed = time.perf_counter() - start
    if res.status == 2:
        return SolveOutcome(Status.INFEASIBLE, seconds=elapsed, message=res.message)
    has_point = res.x is not None
    if res.status == 0 or (res.status == 1 and has_point and model.feasibility_only):
        values = _round_integral(model, res.x)
        if values is None:
            return SolveOutcome(
                Status.ERROR, seconds=elapsed, message="fractional value on an integer variable"
            )
        objective = sum(model.objective.get(i, 0.0) * v for i, v in enumerate(values))
        return SolveOutcome(Status.OPTIMAL, values, objective, elapsed, res.message)
    if res.status == 1:
        return SolveOutcome(Status.TIMEOUT, seconds=elapsed, message=res.message)
    return SolveOutcome(Status.ERROR, seconds=elapsed, message=res.message)


BACKENDS: dict[str, Callable[[Model], SolveOutcome]] = {"highs": _solve_highs}
DEFAULT_BACKEND = "highs"


def solve(model: Model, backend: str | None = None) -> SolveOutcome:
    """Solve ``model`` with the named backend (HiGHS by default)."""
    name = backend or DEFAULT_BACKEND
    if name not in BACKENDS:
        return SolveOutcome(Status.ERROR, message=f"unknown backend {name!r}")
    return BACKENDS[name](model)
