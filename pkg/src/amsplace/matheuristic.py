"""Variable-fixing local search around a feasible placement.

Each iteration frees the ``g`` rectangles nearest a random point, re-solves
that restricted model, and polishes accepted moves with a pure LP. After a run
of non-improving iterations an optional swap step exchanges similar-area
rectangles to leave the current basin.
"""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable

import numpy as np

from .builder import (
    BuildOptions,
    ExtractionError,
    VarMap,
    build_model,
    extract_placement,
    solve_with_fixed_relations,
    warm_start_from_placement,
)
from .core.geometry import criterion, criterion_parts, proximity, validate
from .core.model import Instance, Placement
from .milp import INF, ContractError, Expr, MilpModel, SolveParams, Var, solve

log = logging.getLogger(__name__)

IMPROVEMENT_TOL = 1e-9


class MatheuristicError(RuntimeError):
    """An internal step broke its contract (for example an infeasible fine-opt LP)."""


@dataclass(frozen=True)
class MhConfig:
    g: int = 10
    step_time_limit: float = 10.0
    non_improving_threshold: int = 10
    use_diversification: bool = False
    a_diff: float = 0.25
    min_swaps_fraction: float = 1 / 3
    seed: int = 0
    total_budget: float = 60.0
    options: BuildOptions = field(default_factory=BuildOptions)
    threads: int = 1
    max_iterations: int | None = None
    # trace time = iteration index, so traces are bit-stable across runs
    logical_clock: bool = False
    incumbent_bound: bool = True

    def __post_init__(self):
        if self.g < 2:
            raise ContractError("g must be >= 2")
        if not self.step_time_limit > 0 or self.non_improving_threshold < 1:
            raise ContractError("step time limit and non-improving threshold must be positive")
        if self.a_diff < 0 or not 0 <= self.min_swaps_fraction <= 1:
            raise ContractError("a_diff must be >= 0 and min_swaps_fraction in [0, 1]")
        if self.total_budget < 0:
            raise ContractError("total budget must be >= 0")

    def solve_params(self, time_limit: float) -> SolveParams:
        return SolveParams(time_limit=max(time_limit, 1e-3), threads=self.threads, seed=self.seed)


@dataclass(frozen=True)
class TraceEvent:
    time_s: float
    kind: str
    criterion: float
    area_term: float
    connectivity_term: float

    def line(self) -> str:
        return f"{self.time_s!r} {self.kind} {self.criterion!r} {self.area_term!r} {self.connectivity_term!r}"


@dataclass
class MhTrace:
    events: list[TraceEvent] = field(default_factory=list)

    KINDS = ("intensify-accept", "intensify-reject", "diversify", "fine-opt")

    def record(self, time_s: float, kind: str, parts: tuple[float, float, float]) -> None:
        if kind not in self.KINDS:
            raise ValueError(f"unknown trace event {kind!r}")
        self.events.append(TraceEvent(float(time_s), kind, *map(float, parts)))

    def to_text(self) -> str:
        return "".join(e.line() + "\n" for e in self.events)

    def write(self, path) -> None:
        Path(path).write_text(self.to_text(), encoding="utf-8")

    @staticmethod
    def parse(text: str) -> "MhTrace":
        tr = MhTrace()
        for raw in text.splitlines():
            if raw.strip():
                t, kind, c, la, lc = raw.split()
                tr.events.append(TraceEvent(float(t), kind, float(c), float(la), float(lc)))
        return tr

    def best_so_far(self, initial: float = INF) -> list[float]:
        out, best = [], initial
        for e in self.events:
            best = min(best, e.criterion)
            out.append(best)
        return out


# intensification ---------------------------------------------------------------

def select_group(instance: Instance, placement: Placement, point: tuple[float, float], g: int) -> list[int]:
    """The g movable rectangles nearest ``point`` (ties by id) plus their symmetry partners."""
    mov = np.asarray(instance.movable, dtype=np.int64)
    if g > len(mov):
        raise ContractError(f"g={g} exceeds the {len(mov)} selectable rectangles")
    w, h = placement.sizes(instance)
    prox = proximity(point[0], point[1], placement.x[mov], placement.y[mov], w[mov], h[mov])
    order = np.lexsort((mov, prox))
    chosen = set(int(i) for i in mov[order[:g]])
    for i in list(chosen):
        gi = instance.group_of.get(i)
        if gi is not None:
            chosen.update(instance.symmetry[gi].members)
    return sorted(chosen)


def _bounded_options(instance: Instance, placement: Placement, config: MhConfig) -> BuildOptions:
    """Cap W + H by what the incumbent already achieves; this never cuts an improvement."""
    opts = config.options
    c_a = opts.weights.c_A
    if not config.incumbent_bound or c_a <= 0:
        return opts
    crit = criterion(instance, placement, opts.weights)
    P = crit / c_a
    P += 1e-6 * max(1.0, P)
    if opts.half_perimeter_bound is not None:
        P = min(P, opts.half_perimeter_bound)
    return replace(opts, half_perimeter_bound=P)


def build_restricted_model(
    instance: Instance, placement: Placement, group, options: BuildOptions | None = None
) -> tuple[MilpModel, VarMap]:
    group = list(group)
    if not group:
        raise ContractError("group must be non-empty")
    model, vm = build_model(instance, options, free=group, reference=placement)
    warm_start_from_placement(model, vm, instance, placement)
    return model, vm


def intensify_step(
    instance: Instance,
    placement: Placement,
    point: tuple[float, float],
    config: MhConfig,
    time_limit: float | None = None,
) -> tuple[Placement, bool]:
    weights = config.options.weights
    current = criterion(instance, placement, weights)
    group = select_group(instance, placement, point, config.g)
    model, vm = build_restricted_model(
        instance, placement, group, _bounded_options(instance, placement, config)
    )
    limit = config.step_time_limit if time_limit is None else min(time_limit, config.step_time_limit)
    res = solve(model, config.solve_params(limit))
    if not res.status.has_solution:
        return placement, False
    try:
        cand = extract_placement(instance, vm, res)
    except ExtractionError as exc:
        log.info("restricted solve did not extract: %s", exc)
        return placement, False
    if criterion(instance, cand, weights) < current - IMPROVEMENT_TOL and not validate(instance, cand):
        return cand, True
    return placement, False


def lp_fine_optimize(instance: Instance, placement: Placement, config: MhConfig) -> Placement:
    """Re-solve positions with every binary fixed; never returns a worse placement."""
    weights = config.options.weights
    res = solve_with_fixed_relations(
        instance, placement, config.options, SolveParams(threads=config.threads, seed=config.seed)
    )
    if res is None:
        raise MatheuristicError("fine-optimization LP infeasible for a feasible placement")
    if validate(instance, res):
        log.debug("fine-opt result failed validation; keeping input")
        return placement
    if criterion(instance, res, weights) > criterion(instance, placement, weights):
        return placement
    return res


# diversification ----------------------------------------------------------------

@dataclass
class SwapVarMap:
    ids: list[int]
    p: dict[tuple[int, int], Var]
    candidates: dict[int, list[int]]
    xi: Var
    W: Var
    H: Var
    required_swaps: int


def swap_candidates(instance: Instance, placement: Placement, a_diff: float) -> dict[int, list[int]]:
    """Rectangles whose current areas are within ``a_diff`` relative of each other.

    Symmetry-group members keep their place, since moving one side of a pair
    alone would break the mirror.
    """
    w, h = placement.sizes(instance)
    area = w * h
    mov = list(instance.movable)
    grouped = instance.group_of
    out = {}
    for i in mov:
        if i in grouped:
            out[i] = [i]
            continue
        out[i] = [
            j for j in mov
            if j not in grouped and abs(area[i] - area[j]) / min(area[i], area[j]) <= a_diff
        ]
    return out


def build_swap_model(instance: Instance, placement: Placement, config: MhConfig) -> tuple[MilpModel, SwapVarMap]:
    mov = list(instance.movable)
    n = len(mov)
    w, h = placement.sizes(instance)
    cx, cy = placement.centroids(instance)
    cand = swap_candidates(instance, placement, config.a_diff)
    N = math.floor(n * config.min_swaps_fraction)

    m = MilpModel(f"{instance.name}:swap")
    p = {(i, j): m.add_binary(f"p_{i}_{j}") for i in mov for j in cand[i]}
    takers: dict[int, list[Var]] = {j: [] for j in mov}
    for (i, j), var in p.items():
        takers[j].append(var)
    for i in mov:
        m.add_terms([(1.0, p[(i, j)]) for j in cand[i]], "==", 1.0, f"take_{i}")
    for j in mov:
        m.add_terms([(1.0, v) for v in takers[j]], "==", 1.0, f"taken_{j}")

    xs = {i: Expr.lin((cx[j], p[(i, j)]) for j in cand[i]) for i in mov}
    ys = {i: Expr.lin((cy[j], p[(i, j)]) for j in cand[i]) for i in mov}
    W = m.add_var("W")
    H = m.add_var("H")
    for i in mov:
        m.add_constr(xs[i] + w[i] / 2 - W, "<=", 0.0, f"inW_{i}")
        m.add_constr(ys[i] + h[i] / 2 - H, "<=", 0.0, f"inH_{i}")
    xi = m.add_var("xi")
    # xi >= N - (n - sum p_ii)
    m.add_constr(Expr.lin((1.0, p[(i, i)]) for i in mov) - xi, "<=", n - N, "min_swaps")

    wts = config.options.weights
    obj = wts.c_A * W + wts.c_A * H + max(placement.W, placement.H) * xi
    conn = wts.c_C / instance.total_net_cost if instance.total_net_cost > 0 else 0.0
    if conn > 0:
        for e, net in enumerate(instance.nets):
            XM, Xm = m.add_var(f"XM_{e}", -INF), m.add_var(f"Xm_{e}", -INF)
            YM, Ym = m.add_var(f"YM_{e}", -INF), m.add_var(f"Ym_{e}", -INF)
            for i in net.members:
                m.add_constr(XM - xs[i], ">=", 0.0, f"XM_{e}_{i}")
                m.add_constr(Xm - xs[i], "<=", 0.0, f"Xm_{e}_{i}")
                m.add_constr(YM - ys[i], ">=", 0.0, f"YM_{e}_{i}")
                m.add_constr(Ym - ys[i], "<=", 0.0, f"Ym_{e}_{i}")
            obj = obj + Expr.lin([(conn * net.cost, XM), (-conn * net.cost, Xm),
                                  (conn * net.cost, YM), (-conn * net.cost, Ym)])
    m.set_objective(obj)
    for (i, j), var in p.items():
        m.set_start(var, 1.0 if i == j else 0.0)
    return m, SwapVarMap(mov, p, cand, xi, W, H, N)


def assignment_from(svm: SwapVarMap, values: np.ndarray) -> dict[int, int]:
    """Rectangle -> the rectangle whose position it takes."""
    out = {}
    for i in svm.ids:
        j = max(svm.candidates[i], key=lambda j: values[svm.p[(i, j)].index])
        out[i] = j
    return out


def teleport(instance: Instance, placement: Placement, assignment: dict[int, int]) -> Placement:
    """Move each rectangle's centroid onto its assigned partner's centroid, keeping variants."""
    w, h = placement.sizes(instance)
    cx, cy = placement.centroids(instance)
    x, y = placement.x.copy(), placement.y.copy()
    for i, j in assignment.items():
        x[i] = cx[j] - w[i] / 2
        y[i] = cy[j] - h[i] / 2
    return Placement.from_arrays(instance, x, y, placement.variant.copy(), placement.axes)


def repair(instance: Instance, rough: Placement, config: MhConfig, time_limit: float) -> Placement | None:
    """Feasible placement near ``rough``: fixed-relation LP, then a warm-started full solve."""
    weights = config.options.weights
    seed = None
    try:
        seed = solve_with_fixed_relations(
            instance, rough, config.options, SolveParams(threads=config.threads, seed=config.seed)
        )
    except ExtractionError:
        seed = None
    if seed is not None and validate(instance, seed):
        seed = None
    model, vm = build_model(instance, config.options)
    warm_start_from_placement(model, vm, instance, seed if seed is not None else rough)
    res = solve(model, config.solve_params(time_limit))
    best = seed
    if res.status.has_solution:
        try:
            cand = extract_placement(instance, vm, res)
        except ExtractionError:
            cand = None
        if cand is not None and not validate(instance, cand):
            if best is None or criterion(instance, cand, weights) <= criterion(instance, best, weights):
                best = cand
    return best


def diversify(
    instance: Instance, placement: Placement, config: MhConfig, time_limit: float | None = None
) -> Placement:
    limit = config.step_time_limit if time_limit is None else min(time_limit, config.step_time_limit)
    model, svm = build_swap_model(instance, placement, config)
    res = solve(model, config.solve_params(limit))
    if not res.status.has_solution:
        log.info("swap model found no assignment; keeping the current placement")
        return placement
    assignment = assignment_from(svm, res.values)
    if all(i == j for i, j in assignment.items()):
        return placement
    moved = teleport(instance, placement, assignment)
    fixed = repair(instance, moved, config, limit)
    if fixed is None:
        log.warning("diversification repair found no feasible placement; keeping the current one")
        return placement
    return fixed


# control loop ----------------------------------------------------------------------

Callback = Callable[[int, Placement, Placement], None]


def run(
    instance: Instance,
    initial: Placement,
    config: MhConfig,
    callback: Callback | None = None,
) -> tuple[Placement, MhTrace]:
    """Local search until the budget (or ``max_iterations``) runs out.

    ``callback(iteration, current, best)`` is invoked after every iteration.
    """
    t0 = time.perf_counter()
    weights = config.options.weights
    rng = np.random.default_rng(config.seed)
    trace = MhTrace()
    current = initial
    best, best_crit = initial, criterion(instance, initial, weights)
    stalled = 0
    it = 0

    def stamp() -> float:
        return float(it) if config.logical_clock else round(time.perf_counter() - t0, 6)

    def note(kind: str, pl: Placement) -> None:
        trace.record(stamp(), kind, criterion_parts(instance, pl, weights))

    while True:
        remaining = config.total_budget - (time.perf_counter() - t0)
        if remaining <= 1e-3 or (config.max_iterations is not None and it >= config.max_iterations):
            break
        point = (rng.uniform(0.0, current.W), rng.uniform(0.0, current.H))
        try:
            current, improved = intensify_step(instance, current, point, config, remaining)
        except Exception:
            log.exception("intensification step %d failed", it)
            improved = False
        if improved:
            note("intensify-accept", current)
            try:
                current = lp_fine_optimize(instance, current, config)
            except MatheuristicError:
                log.exception("fine optimization at step %d failed", it)
            note("fine-opt", current)
            stalled = 0
        else:
            note("intensify-reject", current)
            stalled += 1
        if config.use_diversification and stalled >= config.non_improving_threshold:
            remaining = config.total_budget - (time.perf_counter() - t0)
            if remaining > 1e-3:
                try:
                    current = diversify(instance, current, config, remaining)
                except Exception:
                    log.exception("diversification at step %d failed", it)
                note("diversify", current)
            stalled = 0
        crit = criterion(instance, current, weights)
        if crit < best_crit:
            best, best_crit = current, crit
        it += 1
        if callback is not None:
            callback(it, current, best)
    return best, trace
