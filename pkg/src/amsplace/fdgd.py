"""Force-directed warm start and its MILP legalization."""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass

import numpy as np

from . import kernels
from .builder import (
    BuildOptions,
    ExtractionError,
    build_model,
    extract_placement,
    solve_with_fixed_relations,
    warm_start_from_placement,
)
from .core.geometry import criterion, validate
from .core.model import Instance, Placement
from .milp import SolveParams, solve

log = logging.getLogger(__name__)


class LegalizationError(RuntimeError):
    """No feasible placement was found within the legalization budget."""


@dataclass(frozen=True)
class FdgdParams:
    iterations: int = 500
    step: float | None = None
    decay: float = 0.99
    seed: int = 0
    attraction: float = 0.05

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not 0 < self.decay <= 1:
            raise ValueError("decay must lie in (0, 1]")


@dataclass
class RoughLayout:
    """Centroids per rectangle id (NaN for blockage dummies) and group axes."""

    cx: np.ndarray
    cy: np.ndarray
    axes: tuple[float, ...]

    def to_placement(self, instance: Instance) -> Placement:
        n_all = len(instance.rectangles)
        var = np.zeros(n_all, dtype=np.int64)
        w = np.array([r.variants[0].width for r in instance.rectangles])
        h = np.array([r.variants[0].height for r in instance.rectangles])
        x = np.nan_to_num(self.cx - w / 2)
        y = np.nan_to_num(self.cy - h / 2)
        return Placement.from_arrays(instance, x, y, var, self.axes)


@dataclass
class _Nodes:
    members: list[list[int]]
    half: np.ndarray
    offsets: dict[int, tuple[float, float]]
    group_node: dict[int, int]


def _cluster_nodes(instance: Instance) -> _Nodes:
    """One node per free rectangle and one rigid node per symmetry group.

    Group members are stacked in rows: each pair mirrored about the group
    axis, each self-symmetric rectangle centred on it.
    """
    pad = max(instance.distance.max_value, 0.0)
    members: list[list[int]] = []
    half: list[tuple[float, float]] = []
    offsets: dict[int, tuple[float, float]] = {}
    group_node: dict[int, int] = {}
    for g, grp in enumerate(instance.symmetry):
        rows = []
        for i, j in grp.pairs:
            v = instance.rectangles[i].variants[0]
            gap = max(instance.distance(i, j), 0.0)
            rows.append(([(i, -gap / 2 - v.width / 2), (j, gap / 2 + v.width / 2)],
                         2 * v.width + gap, v.height))
        for i in grp.self_symmetric:
            v = instance.rectangles[i].variants[0]
            rows.append(([(i, 0.0)], v.width, v.height))
        width = max(r[1] for r in rows)
        height = sum(r[2] for r in rows) + pad * (len(rows) - 1)
        top = height / 2
        for placed, _, rh in rows:
            for i, ox in placed:
                offsets[i] = (ox, top - rh / 2)
            top -= rh + pad
        group_node[g] = len(members)
        members.append(list(grp.members))
        half.append((width / 2, height / 2))
    grouped = instance.group_of
    for i in instance.movable:
        if i in grouped:
            continue
        v = instance.rectangles[i].variants[0]
        offsets[i] = (0.0, 0.0)
        members.append([i])
        half.append((v.width / 2, v.height / 2))
    return _Nodes(members, np.array(half, dtype=float).reshape(-1, 2), offsets, group_node)


def _initial_positions(nodes: _Nodes, gap: np.ndarray, seed: int) -> np.ndarray:
    """Nodes on a shuffled grid whose pitch rules out initial overlaps."""
    k = len(nodes.members)
    cell = 2 * float(nodes.half.max()) + max(float(gap.max(initial=0.0)), 0.0)
    side = max(1, math.ceil(math.sqrt(k)))
    order = np.random.default_rng(seed).permutation(k)
    pos = np.empty((k, 2))
    for slot, node in enumerate(order):
        pos[node] = ((slot % side) * cell, (slot // side) * cell)
    return pos


def fdgd_layout(instance: Instance, params: FdgdParams | None = None) -> RoughLayout:
    """Spring-embedder rough layout of rectangle centroids (variant 0 sizes)."""
    params = params or FdgdParams()
    nodes = _cluster_nodes(instance)
    k = len(nodes.members)
    n_all = len(instance.rectangles)
    node_of = {i: u for u, mem in enumerate(nodes.members) for i in mem}

    dist = instance.distance_matrix
    gap = np.zeros((k, k))
    for u in range(k):
        for v in range(u + 1, k):
            gap[u, v] = gap[v, u] = dist[np.ix_(nodes.members[u], nodes.members[v])].max()

    ptr, idx, cost = instance.net_csr
    node_idx = np.array([node_of[i] for i in idx], dtype=np.int64)
    off = np.array([nodes.offsets[i] for i in idx], dtype=float).reshape(-1, 2)
    netw = cost / cost.max() if len(cost) and cost.max() > 0 else np.ones(len(cost))
    step = params.step
    if step is None:
        step = float(np.mean([instance.rectangles[i].max_dim for i in instance.movable]))

    pos = _initial_positions(nodes, gap, params.seed)
    pos = kernels.fdgd_run(
        pos, np.ascontiguousarray(nodes.half), np.ascontiguousarray(gap), ptr, node_idx,
        np.ascontiguousarray(off), np.ascontiguousarray(netw, dtype=float),
        int(params.iterations), float(step), float(params.decay), float(params.attraction),
    )

    cx = np.full(n_all, np.nan)
    cy = np.full(n_all, np.nan)
    for i, u in node_of.items():
        cx[i] = pos[u, 0] + nodes.offsets[i][0]
        cy[i] = pos[u, 1] + nodes.offsets[i][1]
    w0 = np.array([r.variants[0].width for r in instance.rectangles])
    h0 = np.array([r.variants[0].height for r in instance.rectangles])
    mov = list(instance.movable)
    dx = np.min(cx[mov] - w0[mov] / 2)
    dy = np.min(cy[mov] - h0[mov] / 2)
    cx -= dx
    cy -= dy
    axes = tuple(float(pos[nodes.group_node[g], 0] - dx) for g in range(len(instance.symmetry)))
    return RoughLayout(cx, cy, axes)


def legalize(
    instance: Instance,
    rough: RoughLayout | Placement,
    budget: float,
    options: BuildOptions | None = None,
    params: SolveParams | None = None,
) -> Placement:
    """Turn a rough layout into a feasible placement and improve it by a full solve.

    The rough layout's least violated relations seed a fixed-relation LP
    whose (feasible) solution warm-starts the full model, which is then
    solved for whatever remains of ``budget`` seconds.
    """
    if not budget > 0:
        raise ValueError("legalization budget must be positive")
    t0 = time.perf_counter()
    options = options or BuildOptions()
    params = params or SolveParams()
    start = rough.to_placement(instance) if isinstance(rough, RoughLayout) else rough

    seed = None
    try:
        seed = solve_with_fixed_relations(instance, start, options, SolveParams(threads=params.threads))
    except ExtractionError:
        seed = None
    if seed is not None and validate(instance, seed):
        seed = None
    if seed is None:
        log.info("fixed-relation LP could not legalize %s; full solve without a feasible hint",
                 instance.name)

    remaining = budget - (time.perf_counter() - t0)
    best = seed
    if remaining > 0:
        model, vm = build_model(instance, options)
        warm_start_from_placement(model, vm, instance, seed if seed is not None else start)
        res = solve(model, SolveParams(
            time_limit=remaining, threads=params.threads, rel_gap=params.rel_gap,
            emphasis=params.emphasis, seed=params.seed,
        ))
        if res.status.has_solution:
            try:
                cand = extract_placement(instance, vm, res)
            except ExtractionError as exc:
                log.warning("legalization extract failed: %s", exc)
                cand = None
            if cand is not None and not validate(instance, cand):
                if best is None or criterion(instance, cand, options.weights) <= criterion(
                    instance, best, options.weights
                ):
                    best = cand
    if best is None:
        raise LegalizationError(f"no feasible placement for {instance.name} within {budget:.1f}s")
    return best
