"""Backend-agnostic MILP container and the HiGHS backend.

Higher layers only build :class:`MilpModel` objects and call :func:`solve` or
:func:`solve_lp_with_fixings`; nothing outside this module touches the
solver library.
"""
from __future__ import annotations

import enum
import logging
import math
import re
import time
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

log = logging.getLogger(__name__)

INF = math.inf
FEAS_TOL = 1e-6


class SolverError(RuntimeError):
    """The backend failed (load error, internal error, ...)."""


class ContractError(ValueError):
    """A caller broke a documented precondition."""


class VarType(enum.Enum):
    CONTINUOUS = "continuous"
    BINARY = "binary"


class Status(enum.Enum):
    OPTIMAL = "optimal"
    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    TIMEOUT_NO_SOLUTION = "timeout-no-solution"

    @property
    def has_solution(self) -> bool:
        return self in (Status.OPTIMAL, Status.FEASIBLE)


@dataclass(frozen=True)
class Var:
    index: int
    kind: VarType
    name: str

    @property
    def is_binary(self) -> bool:
        return self.kind is VarType.BINARY

    def _expr(self) -> "Expr":
        return Expr({self.index: 1.0})

    def __add__(self, other):
        return self._expr() + other

    __radd__ = __add__

    def __sub__(self, other):
        return self._expr() - other

    def __rsub__(self, other):
        return -self._expr() + other

    def __mul__(self, c):
        return self._expr() * c

    __rmul__ = __mul__

    def __neg__(self):
        return -self._expr()


class Expr:
    """Affine expression sum(coef * var) + const."""

    __slots__ = ("terms", "const")

    def __init__(self, terms: Mapping[int, float] | None = None, const: float = 0.0):
        self.terms = dict(terms) if terms else {}
        self.const = float(const)

    @staticmethod
    def of(value) -> "Expr":
        if isinstance(value, Expr):
            return value
        if isinstance(value, Var):
            return value._expr()
        return Expr(None, float(value))

    @staticmethod
    def lin(pairs: Iterable[tuple[float, Var]], const: float = 0.0) -> "Expr":
        """Build sum(coef * var) + const without intermediate copies."""
        terms: dict[int, float] = {}
        for c, v in pairs:
            terms[v.index] = terms.get(v.index, 0.0) + float(c)
        return Expr(terms, const)

    def copy(self) -> "Expr":
        return Expr(self.terms, self.const)

    def __add__(self, other):
        out = self.copy()
        o = Expr.of(other)
        for k, v in o.terms.items():
            out.terms[k] = out.terms.get(k, 0.0) + v
        out.const += o.const
        return out

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-Expr.of(other))

    def __rsub__(self, other):
        return Expr.of(other) - self

    def __mul__(self, c):
        c = float(c)
        return Expr({k: v * c for k, v in self.terms.items()}, self.const * c)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def value(self, values: np.ndarray) -> float:
        return self.const + sum(v * values[k] for k, v in self.terms.items())


@dataclass(frozen=True)
class LinConstraint:
    terms: tuple[tuple[float, int], ...]
    sense: str
    rhs: float
    name: str = ""


@dataclass
class SolveParams:
    time_limit: float = INF
    threads: int = 1
    rel_gap: float = 1e-4
    emphasis: str = "default"
    seed: int = 0
    polish: bool = True
    # branch-and-bound node cap; unlike the time limit it is deterministic
    node_limit: int | None = None

    def __post_init__(self):
        if self.node_limit is not None and self.node_limit < 0:
            raise ContractError(f"node limit must be >= 0, got {self.node_limit}")
        if not self.time_limit > 0:
            raise ContractError(f"time limit must be positive, got {self.time_limit}")
        if self.emphasis not in ("default", "feasibility"):
            raise ContractError(f"unknown emphasis {self.emphasis!r}")


@dataclass
class SolveResult:
    status: Status
    values: np.ndarray
    objective: float
    bound: float
    wall_time: float

    def __getitem__(self, var) -> float:
        if isinstance(var, Expr):
            return var.value(self.values)
        return float(self.values[var.index])


_SENSES = {"<=": "<=", "=": "==", "==": "==", ">=": ">="}


class MilpModel:
    """Minimization model with continuous and binary variables."""

    def __init__(self, name: str = "model"):
        self.name = name
        self.variables: list[Var] = []
        self.lb: list[float] = []
        self.ub: list[float] = []
        self.constraints: list[LinConstraint] = []
        self.objective: dict[int, float] = {}
        self.objective_constant = 0.0
        self.warm_start: dict[int, float] = {}

    # construction ---------------------------------------------------------

    def add_var(self, name: str, lb: float = 0.0, ub: float = INF,
                kind: VarType = VarType.CONTINUOUS) -> Var:
        if kind is VarType.BINARY:
            lb, ub = max(lb, 0.0), min(ub, 1.0)
        v = Var(len(self.variables), kind, name)
        self.variables.append(v)
        self.lb.append(float(lb))
        self.ub.append(float(ub))
        return v

    def add_binary(self, name: str) -> Var:
        return self.add_var(name, 0.0, 1.0, VarType.BINARY)

    def add_constr(self, lhs, sense: str, rhs=0.0, name: str = "") -> LinConstraint:
        """Add ``lhs sense rhs``; either side may be a Var, Expr or number."""
        if sense not in _SENSES:
            raise ContractError(f"unknown constraint sense {sense!r}")
        e = Expr.of(lhs) - Expr.of(rhs)
        terms = tuple((c, k) for k, c in e.terms.items() if c != 0.0)
        for c, k in terms:
            if not math.isfinite(c):
                raise ContractError(f"non-finite coefficient in constraint {name!r}")
            if not 0 <= k < len(self.variables):
                raise ContractError(f"constraint {name!r} references an undeclared variable")
        con = LinConstraint(terms, _SENSES[sense], -e.const, name)
        self.constraints.append(con)
        return con

    def add_terms(self, terms: Iterable[tuple[float, Var]], sense: str, rhs: float,
                  name: str = "") -> LinConstraint:
        return self.add_constr(Expr.lin(terms), sense, rhs, name)

    def set_objective(self, expr) -> None:
        e = Expr.of(expr)
        for k in e.terms:
            if not 0 <= k < len(self.variables):
                raise ContractError("objective references an undeclared variable")
        self.objective = {k: c for k, c in e.terms.items() if c != 0.0}
        self.objective_constant = e.const

    def fix(self, var: Var, value: float) -> None:
        self.lb[var.index] = self.ub[var.index] = float(value)

    def set_bounds(self, var: Var, lb: float, ub: float) -> None:
        self.lb[var.index], self.ub[var.index] = float(lb), float(ub)

    def set_start(self, var: Var, value: float) -> None:
        self.warm_start[var.index] = float(value)

    # views ----------------------------------------------------------------

    @property
    def binaries(self) -> list[Var]:
        return [v for v in self.variables if v.is_binary]

    @property
    def num_binaries(self) -> int:
        return sum(1 for v in self.variables if v.is_binary)

    def objective_value(self, values: np.ndarray) -> float:
        return self.objective_constant + sum(c * values[k] for k, c in self.objective.items())

    def _arrays(self):
        n = len(self.variables)
        cost = np.zeros(n)
        for k, c in self.objective.items():
            cost[k] = c
        starts = [0]
        idx: list[int] = []
        val: list[float] = []
        lo = np.empty(len(self.constraints))
        hi = np.empty(len(self.constraints))
        for r, con in enumerate(self.constraints):
            for c, k in con.terms:
                idx.append(k)
                val.append(c)
            starts.append(len(idx))
            lo[r] = con.rhs if con.sense in (">=", "==") else -INF
            hi[r] = con.rhs if con.sense in ("<=", "==") else INF
        return (
            cost,
            np.asarray(self.lb, dtype=float),
            np.asarray(self.ub, dtype=float),
            lo,
            hi,
            np.asarray(starts, dtype=np.int32),
            np.asarray(idx, dtype=np.int32),
            np.asarray(val, dtype=float),
        )

    def max_violation(self, values: np.ndarray) -> float:
        """Largest bound or row violation of ``values`` (0 when feasible)."""
        cost, lb, ub, lo, hi, starts, idx, val = self._arrays()
        worst = float(max(np.max(lb - values, initial=0.0), np.max(values - ub, initial=0.0)))
        if len(lo):
            act = np.add.reduceat(val * values[idx], starts[:-1]) if len(idx) else np.zeros(len(lo))
            empty = starts[:-1] == starts[1:]
            act[empty] = 0.0
            worst = max(worst, float(np.max(lo - act, initial=0.0)), float(np.max(act - hi, initial=0.0)))
        return worst

    def write_lp(self, path) -> None:
        """Dump the model in LP file format (debugging aid)."""
        h = _load(self, relax=False, fixings=None)
        status = h.writeModel(str(path))
        if status != _hs().HighsStatus.kOk:
            raise SolverError(f"writing {path} failed: {status}")


# backend --------------------------------------------------------------------

def _hs():
    import highspy

    return highspy


_NAME_RE = re.compile(r"[^A-Za-z0-9_.]")


def _load(model: MilpModel, relax: bool, fixings: Mapping[int, float] | None):
    hs = _hs()
    cost, lb, ub, lo, hi, starts, idx, val = model._arrays()
    if fixings:
        for k, v in fixings.items():
            lb[k] = ub[k] = v
    lp = hs.HighsLp()
    lp.num_col_ = len(cost)
    lp.num_row_ = len(lo)
    lp.col_cost_ = cost
    lp.col_lower_ = lb
    lp.col_upper_ = ub
    lp.row_lower_ = lo
    lp.row_upper_ = hi
    lp.offset_ = model.objective_constant
    lp.a_matrix_.format_ = hs.MatrixFormat.kRowwise
    lp.a_matrix_.start_ = starts
    lp.a_matrix_.index_ = idx
    lp.a_matrix_.value_ = val
    lp.col_names_ = [_NAME_RE.sub("_", v.name) or f"c{v.index}" for v in model.variables]
    lp.row_names_ = [_NAME_RE.sub("_", c.name) or f"r{r}" for r, c in enumerate(model.constraints)]
    if not relax and any(v.is_binary for v in model.variables):
        lp.integrality_ = [
            hs.HighsVarType.kInteger if v.is_binary else hs.HighsVarType.kContinuous
            for v in model.variables
        ]
    h = hs.Highs()
    h.setOptionValue("output_flag", False)
    status = h.passModel(lp)
    if status == hs.HighsStatus.kError:
        raise SolverError(f"HiGHS rejected model {model.name!r}")
    return h


def _configure(h, params: SolveParams) -> None:
    if math.isfinite(params.time_limit):
        h.setOptionValue("time_limit", float(params.time_limit))
    h.setOptionValue("threads", int(params.threads))
    h.setOptionValue("random_seed", int(params.seed))
    h.setOptionValue("mip_rel_gap", float(params.rel_gap))
    if params.node_limit is not None:
        h.setOptionValue("mip_max_nodes", int(params.node_limit))
    if params.emphasis == "feasibility":
        h.setOptionValue("mip_heuristic_effort", 0.3)


def _run(model: MilpModel, params: SolveParams, relax: bool,
         fixings: Mapping[int, float] | None) -> SolveResult:
    hs = _hs()
    t0 = time.perf_counter()
    n = len(model.variables)
    if n == 0:
        return SolveResult(Status.OPTIMAL, np.zeros(0), model.objective_constant,
                           model.objective_constant, 0.0)
    h = _load(model, relax, fixings)
    _configure(h, params)
    is_mip = not relax and any(v.is_binary for v in model.variables)
    if model.warm_start and is_mip:
        keys = np.fromiter(model.warm_start.keys(), dtype=np.int32)
        vals = np.fromiter(model.warm_start.values(), dtype=float)
        if len(keys) == n:
            sol = hs.HighsSolution()
            full = np.empty(n)
            full[keys] = vals
            sol.col_value = full
            sol.value_valid = True
            h.setSolution(sol)
        else:
            h.setSolution(len(keys), keys, vals)
    run_status = h.run()
    ms = h.getModelStatus()
    MS = hs.HighsModelStatus
    if ms == MS.kUnboundedOrInfeasible:
        h.setOptionValue("presolve", "off")
        run_status = h.run()
        ms = h.getModelStatus()
    if run_status == hs.HighsStatus.kError and ms not in (MS.kInfeasible, MS.kUnbounded):
        raise SolverError(f"HiGHS failed on {model.name!r}: {h.modelStatusToString(ms)}")
    info = h.getInfo()
    has_sol = info.primal_solution_status == 2
    if ms == MS.kOptimal:
        status = Status.OPTIMAL
    elif ms in (MS.kInfeasible, MS.kUnboundedOrInfeasible):
        status = Status.INFEASIBLE
    elif ms == MS.kUnbounded:
        status = Status.UNBOUNDED
    elif ms in (MS.kTimeLimit, MS.kIterationLimit, MS.kInterrupt, MS.kSolutionLimit,
                MS.kObjectiveBound, MS.kObjectiveTarget):
        status = Status.FEASIBLE if has_sol else Status.TIMEOUT_NO_SOLUTION
    elif ms == MS.kModelEmpty:
        status = Status.OPTIMAL
    else:
        raise SolverError(f"HiGHS failed on {model.name!r}: {h.modelStatusToString(ms)}")

    if not status.has_solution:
        return SolveResult(status, np.full(n, np.nan), INF if status is Status.INFEASIBLE else np.nan,
                           np.nan, time.perf_counter() - t0)
    values = np.asarray(h.getSolution().col_value, dtype=float)
    bound = float(info.mip_dual_bound) if is_mip else float(info.objective_function_value)
    if is_mip and params.polish:
        values = _polish(model, values, params, fixings)
    viol = model.max_violation(values)
    if viol > FEAS_TOL:
        log.warning("solution of %s violates constraints by %.3g", model.name, viol)
    return SolveResult(status, values, model.objective_value(values), bound,
                       time.perf_counter() - t0)


def _polish(model: MilpModel, values: np.ndarray, params: SolveParams,
            fixings: Mapping[int, float] | None) -> np.ndarray:
    """Round binaries, fix them and re-solve the LP for exact continuous values.

    Big-M rows turn integrality slack (``1 - 1e-6``) into geometric overlap;
    re-solving with exact 0/1 values removes it.
    """
    fix = dict(fixings or {})
    for v in model.variables:
        if v.is_binary:
            fix[v.index] = float(round(values[v.index]))
    h = _load(model, relax=True, fixings=fix)
    _configure(h, SolveParams(threads=params.threads, seed=params.seed))
    h.run()
    hs = _hs()
    if h.getModelStatus() != hs.HighsModelStatus.kOptimal:
        log.debug("polish LP of %s not optimal; keeping raw values", model.name)
        return values
    polished = np.asarray(h.getSolution().col_value, dtype=float)
    for k, v in fix.items():
        polished[k] = v
    if model.objective_value(polished) > model.objective_value(values) + 1e-6 * max(
        1.0, abs(model.objective_value(values))
    ):
        return values
    return polished


def solve(model: MilpModel, params: SolveParams | None = None) -> SolveResult:
    """Solve ``model`` (minimization) with the HiGHS backend."""
    return _run(model, params or SolveParams(), relax=False, fixings=None)


def solve_lp_with_fixings(model: MilpModel, fixings: Mapping[Var, float],
                          params: SolveParams | None = None) -> SolveResult:
    """Fix every binary variable and solve the remaining pure LP."""
    fix = {}
    for var, val in fixings.items():
        if val not in (0, 1, 0.0, 1.0) and var.is_binary:
            raise ContractError(f"binary {var.name} fixed to non-binary value {val}")
        fix[var.index] = float(val)
    missing = [v.name for v in model.variables if v.is_binary and v.index not in fix]
    if missing:
        raise ContractError(f"{len(missing)} binaries left unfixed, e.g. {missing[:3]}")
    return _run(model, params or SolveParams(), relax=True, fixings=fix)
