"""Criterion arithmetic, proximity and feasibility validation."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import kernels
from .model import (
    GEOM_TOL,
    CriterionWeights,
    Instance,
    InstanceError,
    Placement,
    check_complete,
)

VIOLATION_KINDS = ("overlap", "blockage", "symmetry", "aspect-ratio", "bounds", "variant")


@dataclass(frozen=True)
class Violation:
    kind: str
    ids: tuple[int, ...]
    magnitude: float

    def __str__(self):
        return f"{self.kind}{list(self.ids)}: {self.magnitude:.6g}"


def _c(a):
    return np.ascontiguousarray(a, dtype=float)


def hpwl(instance: Instance, placement: Placement) -> float:
    """Cost-weighted half-perimeter wirelength over net member centroids."""
    check_complete(instance, placement)
    cx, cy = placement.centroids(instance)
    ptr, idx, cost = instance.net_csr
    return kernels.hpwl(_c(cx), _c(cy), ptr, idx, cost)


def area_term(placement: Placement) -> float:
    return placement.W + placement.H


def criterion_parts(
    instance: Instance, placement: Placement, weights: CriterionWeights
) -> tuple[float, float, float]:
    """Return (criterion, L_A, L_C)."""
    l_a = area_term(placement)
    l_c = hpwl(instance, placement)
    total = instance.total_net_cost
    conn = weights.c_C / total * l_c if total > 0 else 0.0
    return weights.c_A * l_a + conn, l_a, l_c


def criterion(instance: Instance, placement: Placement, weights: CriterionWeights) -> float:
    return criterion_parts(instance, placement, weights)[0]


def proximity(x: float, y: float, rx, ry, rw, rh):
    """Max distance from (x, y) to the rectangle's edge lines; vectorised over rectangles."""
    if np.ndim(rx) == 0:
        return float(max(abs(rx - x), abs(rx + rw - x), abs(ry - y), abs(ry + rh - y)))
    return kernels.proximity(float(x), float(y), _c(rx), _c(ry), _c(rw), _c(rh))


def validate(
    instance: Instance, placement: Placement, tolerance: float = GEOM_TOL
) -> list[Violation]:
    """All constraint violations of ``placement`` exceeding ``tolerance``."""
    check_complete(instance, placement)
    out: list[Violation] = []
    var = placement.variant
    bad_variant = False
    for r in instance.rectangles:
        if not (0 <= var[r.id] < len(r.variants)):
            out.append(Violation("variant", (r.id,), float(abs(var[r.id]) + 1)))
            bad_variant = True
    if bad_variant:
        return out

    w, h = placement.sizes(instance)
    x, y = placement.x, placement.y
    W, H = placement.W, placement.H
    mov = np.asarray(instance.movable, dtype=np.int64)

    for i in mov:
        for mag in (-x[i], -y[i], x[i] + w[i] - W, y[i] + h[i] - H):
            if mag > tolerance:
                out.append(Violation("bounds", (int(i),), float(mag)))
                break

    if len(mov) > 1:
        dist = np.ascontiguousarray(instance.distance_matrix[np.ix_(mov, mov)])
        ii, jj, mag = kernels.separation_deficit(
            _c(x[mov]), _c(y[mov]), _c(w[mov]), _c(h[mov]), dist, float(tolerance)
        )
        for a, b, m in zip(ii, jj, mag):
            out.append(Violation("overlap", (int(mov[a]), int(mov[b])), float(m)))

    for d, blk in zip(instance.dummies, instance.blockages):
        off = max(abs(x[d] - blk.x), abs(y[d] - blk.y), abs(var[d]))
        if off > tolerance:
            out.append(Violation("blockage", (d,), float(off)))
        for i in sorted(blk.blocked):
            m = min(
                x[i] + w[i] - blk.x,
                y[i] + h[i] - blk.y,
                blk.x + blk.width - x[i],
                blk.y + blk.height - y[i],
            )
            if m > tolerance:
                out.append(Violation("blockage", (i, d), float(m)))

    for g, grp in enumerate(instance.symmetry):
        axis = placement.axes[g]
        for i, j in grp.pairs:
            m = max(
                abs(w[i] - w[j]),
                abs(h[i] - h[j]),
                abs(y[i] - y[j]),
                abs(x[i] + x[j] + w[i] - 2 * axis),
            )
            if m > tolerance:
                out.append(Violation("symmetry", (i, j), float(m)))
        for i in grp.self_symmetric:
            m = abs(2 * x[i] + w[i] - 2 * axis)
            if m > tolerance:
                out.append(Violation("symmetry", (i,), float(m)))

    lo, hi = instance.aspect
    if lo > 0 or hi < 1:
        short, long_ = min(W, H), max(W, H)
        m = lo * long_ - short
        if m > tolerance:
            out.append(Violation("aspect-ratio", (), float(m)))
        if hi < 1:
            m = short - hi * long_
            if m > tolerance:
                out.append(Violation("aspect-ratio", (), float(m)))
    return out


def is_feasible(instance: Instance, placement: Placement, tolerance: float = GEOM_TOL) -> bool:
    return not validate(instance, placement, tolerance)


__all__ = [
    "Violation", "hpwl", "criterion", "criterion_parts", "proximity", "validate",
    "is_feasible", "InstanceError",
]
