"""Translate an :class:`Instance` into the big-M placement MILP.

One builder serves both the full model and the restricted (variable-fixing)
models of the local search: rectangles outside ``free`` enter as constants
taken from a reference placement.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from . import kernels
from .core.geometry import criterion
from .core.model import CriterionWeights, Instance, Placement
from .milp import (
    INF,
    ContractError,
    Expr,
    MilpModel,
    SolveParams,
    SolveResult,
    Var,
    solve_lp_with_fixings,
)


class ModelError(ValueError):
    """The instance cannot be expressed by the placement model."""


class ExtractionError(RuntimeError):
    """A solver result does not decode into a placement (integrality breach)."""


@dataclass(frozen=True)
class BuildOptions:
    weights: CriterionWeights = field(default_factory=CriterionWeights)
    symmetry_breaking: bool = False
    half_perimeter_bound: float | None = None
    big_m: float | None = None

    def __post_init__(self):
        if self.half_perimeter_bound is not None and not self.half_perimeter_bound > 0:
            raise ContractError("half-perimeter bound must be positive")


@dataclass
class VarMap:
    """Model variables per symbol; fixed rectangles map to plain floats."""

    x: dict[int, Var | float]
    y: dict[int, Var | float]
    w: dict[int, Var | float]
    h: dict[int, Var | float]
    s: dict[int, list[Var]]
    r: dict[tuple[int, int], tuple[Var, Var, Var, Var]]
    W: Var
    H: Var
    nets: list[tuple[Var, Var, Var, Var]]
    axes: list[Var]
    r_R: Var | None
    free: frozenset[int]
    fixed_variant: dict[int, int]
    big_m: float


def _e(v) -> Expr:
    return Expr.of(v)


def max_distance(instance: Instance) -> float:
    """a_M over the pairs the model actually separates."""
    a_m = instance.distance.max_value if instance.n > 1 else -INF
    if any(b.blocked for b in instance.blockages):
        a_m = max(a_m, 0.0)
    return 0.0 if a_m == -INF else a_m


def compute_big_m(instance: Instance, options: BuildOptions | None = None) -> float:
    """Big-M for the separation and aspect rows.

    With a half-perimeter bound P this is P + a_M. Otherwise P is replaced by
    the width of all rectangles in one row (longest sides, positive gaps),
    widened by the blockage extents.
    """
    options = options or BuildOptions()
    if options.big_m is not None:
        return float(options.big_m)
    a_m = max_distance(instance)
    if options.half_perimeter_bound is not None:
        return float(options.half_perimeter_bound) + a_m
    mov = instance.movable
    line = sum(instance.rectangles[i].max_dim for i in mov) + max(len(mov) - 1, 0) * max(a_m, 0.0)
    reach = max((max(b.x + b.width, b.y + b.height) for b in instance.blockages), default=0.0)
    return line + reach + a_m


def expected_binaries(instance: Instance, free: Iterable[int]) -> int:
    free = set(free)
    g, n = len(free), instance.n
    count = sum(len(instance.rectangles[i].variants) for i in free)
    count += 2 * g * (g - 1) + 4 * g * (n - g)
    count += 4 * sum(len(b.blocked & free) for b in instance.blockages)
    if instance.aspect[1] < 1:
        count += 1
    return count


def build_model(
    instance: Instance,
    options: BuildOptions | None = None,
    *,
    free: Iterable[int] | None = None,
    reference: Placement | None = None,
) -> tuple[MilpModel, VarMap]:
    """Build the placement MILP.

    ``free=None`` gives the full model. Otherwise every movable rectangle not
    in ``free`` is fixed to its position and variant in ``reference``.
    """
    options = options or BuildOptions()
    mov = instance.movable
    free_set = frozenset(mov) if free is None else frozenset(free)
    if not free_set <= set(mov):
        raise ContractError("free set contains unknown or non-selectable rectangles")
    if free is not None and reference is None:
        raise ContractError("a restricted model needs a reference placement")
    if options.symmetry_breaking and instance.symmetry:
        raise ContractError("symmetry breaking requires an instance without symmetry groups")
    for grp in instance.symmetry:
        for i, j in grp.pairs:
            if instance.rectangles[i].variants != instance.rectangles[j].variants:
                raise ModelError(f"symmetric pair ({i}, {j}) has different variant lists")

    M = compute_big_m(instance, options)
    dist = instance.distance
    m = MilpModel(f"{instance.name}:{'full' if free is None else f'restricted{len(free_set)}'}")
    W = m.add_var("W")
    H = m.add_var("H")

    x: dict[int, Var | float] = {}
    y: dict[int, Var | float] = {}
    w: dict[int, Var | float] = {}
    h: dict[int, Var | float] = {}
    s: dict[int, list[Var]] = {}
    fixed_variant: dict[int, int] = {}
    if reference is not None:
        ref_w, ref_h = reference.sizes(instance)
    w_floor = h_floor = 0.0
    for i in mov:
        rect = instance.rectangles[i]
        if i in free_set:
            x[i] = m.add_var(f"x_{i}")
            y[i] = m.add_var(f"y_{i}")
            s[i] = [m.add_binary(f"s_{i}_{k}") for k in range(len(rect.variants))]
            w[i] = m.add_var(f"w_{i}")
            h[i] = m.add_var(f"h_{i}")
            m.add_terms([(1.0, v) for v in s[i]], "==", 1.0, f"variant_{i}")
            m.add_constr(
                _e(w[i]) - Expr.lin((v.width, sk) for v, sk in zip(rect.variants, s[i])), "==", 0.0,
                f"width_{i}",
            )
            m.add_constr(
                _e(h[i]) - Expr.lin((v.height, sk) for v, sk in zip(rect.variants, s[i])), "==", 0.0,
                f"height_{i}",
            )
            m.add_constr(x[i] + w[i] - W, "<=", 0.0, f"inW_{i}")
            m.add_constr(y[i] + h[i] - H, "<=", 0.0, f"inH_{i}")
        else:
            x[i], y[i] = float(reference.x[i]), float(reference.y[i])
            w[i], h[i] = float(ref_w[i]), float(ref_h[i])
            fixed_variant[i] = int(reference.variant[i])
            w_floor = max(w_floor, x[i] + w[i])
            h_floor = max(h_floor, y[i] + h[i])
    # every per-row big-M below assumes the layout stays inside this canvas
    canvas = max(M - max_distance(instance), w_floor, h_floor)
    m.set_bounds(W, w_floor, canvas)
    m.set_bounds(H, h_floor, canvas)

    r: dict[tuple[int, int], tuple[Var, Var, Var, Var]] = {}

    def row_m(start, length, other_start, a):
        # largest value of start + length + a - other_start; exact when either side is fixed
        end = canvas if isinstance(start, Var) else start + length
        low = 0.0 if isinstance(other_start, Var) else other_start
        return max(end - low + a, 0.0)

    def separate(key, xi, yi, wi, hi, xj, yj, wj, hj, a):
        rv = tuple(m.add_binary(f"r{k}_{key[0]}_{key[1]}") for k in range(1, 5))
        r[key] = rv
        m.add_terms([(1.0, v) for v in rv], ">=", 1.0, f"rel_{key[0]}_{key[1]}")
        rows = (
            ("left", xi, wi, xj, rv[0]),
            ("below", yi, hi, yj, rv[1]),
            ("right", xj, wj, xi, rv[2]),
            ("above", yj, hj, yi, rv[3]),
        )
        for label, start, length, other, rk in rows:
            mk = row_m(start, length, other, a)
            # start + length - other + M_k*r_k <= M_k - a  is  ... + a <= M_k(1 - r_k)
            m.add_constr(_e(start) + length - other + mk * rk, "<=", mk - a,
                         f"{label}_{key[0]}_{key[1]}")

    for p, i in enumerate(mov):
        for j in mov[p + 1:]:
            if i in free_set or j in free_set:
                separate((i, j), x[i], y[i], w[i], h[i], x[j], y[j], w[j], h[j], dist(i, j))
    for d, blk in zip(instance.dummies, instance.blockages):
        for i in sorted(blk.blocked & free_set):
            separate((i, d), x[i], y[i], w[i], h[i], blk.x, blk.y, blk.width, blk.height, 0.0)

    lo, hi = instance.aspect
    r_R = None
    if lo > 0:
        m.add_constr(lo * W - H, "<=", 0.0, "aspect_lo_H")
        m.add_constr(lo * H - W, "<=", 0.0, "aspect_lo_W")
    if hi < 1:
        r_R = m.add_binary("r_R")
        m.add_constr(H - hi * W + M * r_R, "<=", M, "aspect_hi_H")
        m.add_constr(W - hi * H - M * r_R, "<=", 0.0, "aspect_hi_W")

    axes: list[Var] = []
    for g, grp in enumerate(instance.symmetry):
        xg = m.add_var(f"xG_{g}")
        axes.append(xg)
        if not any(i in free_set for i in grp.members):
            m.fix(xg, reference.axes[g])
            continue
        for i, j in grp.pairs:
            if i not in free_set and j not in free_set:
                # both fixed: only the axis row remains, and it pins x_G
                m.add_constr(_e(x[i]) + x[j] + w[i] - 2 * xg, "==", 0.0, f"symx_{i}_{j}")
                continue
            m.add_constr(_e(w[i]) - w[j], "==", 0.0, f"symw_{i}_{j}")
            m.add_constr(_e(h[i]) - h[j], "==", 0.0, f"symh_{i}_{j}")
            m.add_constr(_e(y[i]) - y[j], "==", 0.0, f"symy_{i}_{j}")
            m.add_constr(_e(x[i]) + x[j] + w[i] - 2 * xg, "==", 0.0, f"symx_{i}_{j}")
        for i in grp.self_symmetric:
            m.add_constr(2 * _e(x[i]) + w[i] - 2 * xg, "==", 0.0, f"symself_{i}")

    wts = options.weights
    conn = wts.c_C / instance.total_net_cost if instance.total_net_cost > 0 else 0.0
    obj = wts.c_A * W + wts.c_A * H
    nets: list[tuple[Var, Var, Var, Var]] = []
    if conn > 0:
        for e, net in enumerate(instance.nets):
            box = (m.add_var(f"XM_{e}", -INF), m.add_var(f"Xm_{e}", -INF),
                   m.add_var(f"YM_{e}", -INF), m.add_var(f"Ym_{e}", -INF))
            nets.append(box)
            for i in net.members:
                cx = _e(x[i]) + 0.5 * _e(w[i])
                cy = _e(y[i]) + 0.5 * _e(h[i])
                m.add_constr(_e(box[0]) - cx, ">=", 0.0, f"XM_{e}_{i}")
                m.add_constr(_e(box[1]) - cx, "<=", 0.0, f"Xm_{e}_{i}")
                m.add_constr(_e(box[2]) - cy, ">=", 0.0, f"YM_{e}_{i}")
                m.add_constr(_e(box[3]) - cy, "<=", 0.0, f"Ym_{e}_{i}")
            obj = obj + Expr.lin(
                [(conn * net.cost, box[0]), (-conn * net.cost, box[1]),
                 (conn * net.cost, box[2]), (-conn * net.cost, box[3])]
            )
    m.set_objective(obj)

    if options.half_perimeter_bound is not None:
        add_half_perimeter_bound(m, None, options.half_perimeter_bound, W=W, H=H)

    vm = VarMap(x, y, w, h, s, r, W, H, nets, axes, r_R, free_set, fixed_variant, M)
    expected = expected_binaries(instance, free_set)
    if m.num_binaries != expected:
        raise AssertionError(f"binary count {m.num_binaries} != formula {expected}")
    if options.symmetry_breaking:
        add_symmetry_breaking(m, vm, instance)
    return m, vm


def build_full_model(instance: Instance, options: BuildOptions | None = None):
    return build_model(instance, options)


def add_half_perimeter_bound(model: MilpModel, varmap: VarMap | None, P: float, *, W=None, H=None):
    """Add W + H <= P. Build with ``half_perimeter_bound`` to also shrink big-M."""
    if not P > 0:
        raise ContractError("half-perimeter bound must be positive")
    W = W if W is not None else varmap.W
    H = H if H is not None else varmap.H
    model.add_constr(W + H, "<=", float(P), "half_perimeter")


def rotated_variants(variants) -> list[int]:
    """Indices of variants that transpose an earlier variant."""
    out = []
    for k, v in enumerate(variants):
        if any((u.width, u.height) == (v.height, v.width) for u in variants[:k]):
            out.append(k)
    return out


def transpose_closed(instance: Instance) -> bool:
    for i in instance.movable:
        vs = {(v.width, v.height) for v in instance.rectangles[i].variants}
        if any((hh, ww) not in vs for ww, hh in vs):
            return False
    return True


def largest_rectangle(instance: Instance) -> int:
    return max(instance.movable, key=lambda i: (instance.rectangles[i].max_area, -i))


def add_symmetry_breaking(model: MilpModel, varmap: VarMap, instance: Instance) -> int:
    """Pin the largest rectangle K to an unrotated variant and the lower-left quadrant.

    The rotation fix is applied only when every rectangle's variant set is
    closed under transposition (otherwise the transposed layout need not
    exist). Returns K.
    """
    if instance.symmetry:
        raise ContractError("symmetry breaking is defined for instances without symmetry groups")
    if instance.blockages:
        raise ContractError("symmetry breaking is not valid with blockage areas")
    K = largest_rectangle(instance)
    if K not in varmap.free:
        raise ContractError(f"rectangle {K} is fixed in this model")
    if transpose_closed(instance):
        for k in rotated_variants(instance.rectangles[K].variants):
            model.fix(varmap.s[K][k], 0.0)
    model.add_constr(2 * _e(varmap.x[K]) + varmap.w[K] - varmap.W, "<=", 0.0, "sb_quadrant_x")
    model.add_constr(2 * _e(varmap.y[K]) + varmap.h[K] - varmap.H, "<=", 0.0, "sb_quadrant_y")
    return K


# relations ------------------------------------------------------------------

def relation_violations(ri, rj, a: float) -> tuple[float, float, float, float]:
    """Violation of the four separation rows for rectangles (x, y, w, h)."""
    xi, yi, wi, hi = ri
    xj, yj, wj, hj = rj
    return (xi + wi + a - xj, yi + hi + a - yj, xj + wj + a - xi, yj + hj + a - yi)


def least_violated_relation(ri, rj, a: float) -> int:
    """Relation k in 1..4 with the smallest violation; ties go to the smaller k."""
    v = relation_violations(ri, rj, a)
    return 1 + min(range(4), key=lambda k: (v[k], k))


def relation_map(instance: Instance, placement: Placement, keys) -> dict[tuple[int, int], int]:
    """Least violated relation for each pair key of a VarMap."""
    w, h = placement.sizes(instance)
    mov = np.asarray(instance.movable, dtype=np.int64)
    pos = {int(i): p for p, i in enumerate(mov)}
    rel = kernels.least_violated(
        np.ascontiguousarray(placement.x[mov]), np.ascontiguousarray(placement.y[mov]),
        np.ascontiguousarray(w[mov]), np.ascontiguousarray(h[mov]),
        np.ascontiguousarray(instance.distance_matrix[np.ix_(mov, mov)]),
    )
    dummies = set(instance.dummies)
    out = {}
    for i, j in keys:
        if j in dummies:
            blk = instance.blockage_of_dummy(j)
            out[(i, j)] = _blockage_relation(placement, w, h, i, blk)
        else:
            out[(i, j)] = int(rel[pos[i], pos[j]])
    return out


def _blockage_relation(placement, w, h, i, blk) -> int:
    """Least violated relation against a fixed blockage, preferring sides that fit on the canvas."""
    ri = (placement.x[i], placement.y[i], w[i], h[i])
    rb = (blk.x, blk.y, blk.width, blk.height)
    v = relation_violations(ri, rb, 0.0)
    # relations 1/2 put i left of/below the blockage, impossible if it does not fit
    fits = (blk.x >= w[i], blk.y >= h[i], True, True)
    return 1 + min(range(4), key=lambda k: (not fits[k], v[k], k))


# warm start / extraction ------------------------------------------------------

def warm_start_from_placement(model: MilpModel, varmap: VarMap, instance: Instance,
                              placement: Placement) -> None:
    """Load ``placement`` as a (possibly infeasible) starting point."""
    wv, hv = placement.sizes(instance)
    for i, sv in varmap.s.items():
        for k, var in enumerate(sv):
            model.set_start(var, 1.0 if k == placement.variant[i] else 0.0)
    for i in varmap.free:
        model.set_start(varmap.x[i], max(placement.x[i], 0.0))
        model.set_start(varmap.y[i], max(placement.y[i], 0.0))
        model.set_start(varmap.w[i], wv[i])
        model.set_start(varmap.h[i], hv[i])
    model.set_start(varmap.W, placement.W)
    model.set_start(varmap.H, placement.H)
    rels = relation_map(instance, placement, varmap.r.keys())
    for key, rv in varmap.r.items():
        for k, var in enumerate(rv, start=1):
            model.set_start(var, 1.0 if k == rels[key] else 0.0)
    if varmap.nets:
        cx, cy = placement.x + wv / 2, placement.y + hv / 2
        for net, box in zip(instance.nets, varmap.nets):
            mem = list(net.members)
            for var, val in zip(box, (cx[mem].max(), cx[mem].min(), cy[mem].max(), cy[mem].min())):
                model.set_start(var, float(val))
    for g, var in enumerate(varmap.axes):
        model.set_start(var, placement.axes[g])
    if varmap.r_R is not None:
        model.set_start(varmap.r_R, 1.0 if placement.H <= placement.W else 0.0)


def relation_fixings(instance: Instance, varmap: VarMap, placement: Placement) -> dict[Var, float]:
    """Binary fixings: current variants, least violated relations and aspect side."""
    fix: dict[Var, float] = {}
    for i, sv in varmap.s.items():
        for k, var in enumerate(sv):
            fix[var] = 1.0 if k == placement.variant[i] else 0.0
    rels = relation_map(instance, placement, varmap.r.keys())
    for key, rv in varmap.r.items():
        for k, var in enumerate(rv, start=1):
            fix[var] = 1.0 if k == rels[key] else 0.0
    if varmap.r_R is not None:
        fix[varmap.r_R] = 1.0 if placement.H <= placement.W else 0.0
    return fix


def _value(v, values) -> float:
    return float(values[v.index]) if isinstance(v, Var) else float(v)


def extract_placement(instance: Instance, varmap: VarMap, result: SolveResult) -> Placement:
    if not result.status.has_solution:
        raise ExtractionError(f"no solution to extract (status {result.status.value})")
    vals = result.values
    n_all = len(instance.rectangles)
    x = np.zeros(n_all)
    y = np.zeros(n_all)
    var = np.zeros(n_all, dtype=np.int64)
    for i in instance.movable:
        x[i] = _value(varmap.x[i], vals)
        y[i] = _value(varmap.y[i], vals)
        if i in varmap.s:
            sv = np.array([vals[v.index] for v in varmap.s[i]])
            k = int(np.argmax(sv))
            if abs(sv[k] - 1.0) > 1e-4:
                raise ExtractionError(f"rectangle {i}: no variant selector near 1 ({sv})")
            var[i] = k
        else:
            var[i] = varmap.fixed_variant[i]
    for d, blk in zip(instance.dummies, instance.blockages):
        x[d], y[d] = blk.x, blk.y
    # snap solver noise below zero onto the canvas
    x[x < 0] = np.where(x[x < 0] > -1e-9, 0.0, x[x < 0])
    y[y < 0] = np.where(y[y < 0] > -1e-9, 0.0, y[y < 0])
    axes = tuple(float(vals[v.index]) for v in varmap.axes)
    return Placement(x, y, var, float(vals[varmap.W.index]), float(vals[varmap.H.index]), axes)


def solve_with_fixed_relations(
    instance: Instance,
    placement: Placement,
    options: BuildOptions | None = None,
    params: SolveParams | None = None,
) -> Placement | None:
    """Fix variants and least violated relations of ``placement`` and solve the LP.

    Works for infeasible inputs too (overlaps are resolved along the chosen
    relations). Returns None when the fixed relations admit no solution.
    """
    options = options or BuildOptions()
    model, vm = build_model(instance, options)
    res = solve_lp_with_fixings(model, relation_fixings(instance, vm, placement), params)
    if not res.status.has_solution:
        return None
    return extract_placement(instance, vm, res)


def placement_objective(instance: Instance, placement: Placement, options: BuildOptions) -> float:
    return criterion(instance, placement, options.weights)
