"""Reference computations that share no code with the package under test.

The brute-force placement optimum enumerates variant choices and, per pair,
one of the four relative positions. A relation assignment splits into an
x-problem (left/right pairs) and a y-problem (below/above pairs), solved as
separate LPs with scipy and cached; longest-path bounds prune the search.
"""
from __future__ import annotations

import itertools
import math
from functools import lru_cache

import numpy as np
from scipy.optimize import linprog

from amsplace.core.model import DistanceRule, Instance, Net, Rectangle, Variant


def tiny_suite() -> list[tuple[Instance, float]]:
    """20 seeded instances with n <= 4, at most two variants, no symmetry; paired with c_C."""
    out = []
    sizes = [2] * 6 + [3] * 8 + [4] * 6
    for k, n in enumerate(sizes):
        rng = np.random.default_rng(1000 + k)
        rects = []
        for i in range(n):
            w, h = (float(v) for v in rng.integers(1, 7, size=2))
            if rng.random() < 0.5 and w != h:
                variants = (Variant(w, h), Variant(h, w))
            elif rng.random() < 0.5:
                w2 = float(rng.integers(1, 7))
                variants = (Variant(w, h), Variant(w2, h)) if w2 != w else (Variant(w, h),)
            else:
                variants = (Variant(w, h),)
            rects.append(Rectangle(i, variants))
        nets = []
        for _ in range(int(rng.integers(1, n + 1))):
            size = int(rng.integers(2, n + 1))
            members = tuple(sorted(int(v) for v in rng.choice(n, size=size, replace=False)))
            nets.append(Net(members, float(rng.integers(1, 4))))
        overrides = {}
        for i, j in itertools.combinations(range(n), 2):
            u = rng.random()
            if u < 0.2:
                overrides[(i, j)] = -0.5
            elif u < 0.4:
                overrides[(i, j)] = 2.0
        inst = Instance(tuple(rects), tuple(nets), DistanceRule(1.0, overrides), name=f"tiny{k}")
        out.append((inst, 0.0 if k % 2 == 0 else 1.0))
    return out


def _longest(n, sizes, edges):
    """Smallest extent under x_j >= x_i + gap(i, j), or None on a cycle."""
    pos = [0.0] * n
    indeg = [0] * n
    adj = [[] for _ in range(n)]
    for i, j, gap in edges:
        adj[i].append((j, gap))
        indeg[j] += 1
    order = [i for i in range(n) if indeg[i] == 0]
    seen = 0
    while order:
        i = order.pop()
        seen += 1
        for j, gap in adj[i]:
            pos[j] = max(pos[j], pos[i] + gap)
            indeg[j] -= 1
            if indeg[j] == 0:
                order.append(j)
    if seen < n:
        return None
    return max(pos[i] + sizes[i] for i in range(n))


def _axis_lp(n, sizes, edges, nets, c_area, c_conn):
    """min c_area*extent + c_conn*sum(cost*(max-min)) over centroid coordinates."""
    # variables: x_0..x_{n-1}, E, then (hi_e, lo_e) per net
    nv = n + 1 + 2 * len(nets)
    c = np.zeros(nv)
    c[n] = c_area
    rows, rhs = [], []

    def row(coefs, b):
        r = np.zeros(nv)
        for k, v in coefs:
            r[k] += v
        rows.append(r)
        rhs.append(b)

    for i, j, gap in edges:
        row([(i, 1.0), (j, -1.0)], -gap)
    for i in range(n):
        row([(i, 1.0), (n, -1.0)], -sizes[i])
    for e, (members, cost) in enumerate(nets):
        hi, lo = n + 1 + 2 * e, n + 2 + 2 * e
        c[hi] += c_conn * cost
        c[lo] -= c_conn * cost
        for i in members:
            # lo <= x_i + s_i/2 <= hi
            row([(i, 1.0), (hi, -1.0)], -sizes[i] / 2)
            row([(lo, 1.0), (i, -1.0)], sizes[i] / 2)
    bounds = [(0, None)] * (n + 1) + [(None, None)] * (2 * len(nets))
    res = linprog(c, A_ub=np.array(rows), b_ub=np.array(rhs), bounds=bounds, method="highs")
    if res.status != 0:
        return math.inf
    return float(res.fun)


def brute_force_optimum(instance: Instance, c_area: float, c_conn: float) -> float:
    """Exact optimum of c_A(W+H) + c_C/sum(c) * sum(c_e * hpwl_e) by enumeration."""
    n = len(instance.rectangles)
    pairs = list(itertools.combinations(range(n), 2))
    dist = {p: instance.distance(*p) for p in pairs}
    total = sum(net.cost for net in instance.nets)
    conn = c_conn / total if total > 0 else 0.0
    nets = [(net.members, net.cost) for net in instance.nets]
    best = math.inf

    for choice in itertools.product(*(range(len(r.variants)) for r in instance.rectangles)):
        ws = tuple(instance.rectangles[i].variants[k].width for i, k in enumerate(choice))
        hs = tuple(instance.rectangles[i].variants[k].height for i, k in enumerate(choice))

        @lru_cache(maxsize=None)
        def x_cost(pattern):
            edges = [(i, j, ws[i] + dist[(i, j)]) if d == 1 else (j, i, ws[j] + dist[(i, j)])
                     for (i, j), d in zip(pairs, pattern) if d]
            lb = _longest(n, ws, edges)
            if lb is None:
                return math.inf, math.inf
            exact = lb * c_area if conn == 0 else None
            return c_area * lb, exact if exact is not None else (edges,)

        @lru_cache(maxsize=None)
        def y_cost(pattern):
            edges = [(i, j, hs[i] + dist[(i, j)]) if d == 1 else (j, i, hs[j] + dist[(i, j)])
                     for (i, j), d in zip(pairs, pattern) if d]
            lb = _longest(n, hs, edges)
            if lb is None:
                return math.inf, math.inf
            exact = lb * c_area if conn == 0 else None
            return c_area * lb, exact if exact is not None else (edges,)

        @lru_cache(maxsize=None)
        def solve_x(pattern):
            _, info = x_cost(pattern)
            return info if isinstance(info, float) else _axis_lp(n, ws, info[0], nets, c_area, conn)

        @lru_cache(maxsize=None)
        def solve_y(pattern):
            _, info = y_cost(pattern)
            return info if isinstance(info, float) else _axis_lp(n, hs, info[0], nets, c_area, conn)

        combos = []
        for rel in itertools.product(range(4), repeat=len(pairs)):
            # relation 1: i left of j, 2: i below j, 3: j left of i, 4: j below i
            xp = tuple(1 if r == 0 else (2 if r == 2 else 0) for r in rel)
            yp = tuple(1 if r == 1 else (2 if r == 3 else 0) for r in rel)
            lb = x_cost(xp)[0] + y_cost(yp)[0]
            if math.isfinite(lb):
                combos.append((lb, xp, yp))
        combos.sort(key=lambda t: t[0])
        for lb, xp, yp in combos:
            if lb >= best - 1e-12:
                break
            best = min(best, solve_x(xp) + solve_y(yp))
    return best


def hand_hpwl(instance: Instance, xs, ys, ws, hs) -> float:
    """Cost-weighted HPWL by plain loops."""
    total = 0.0
    for net in instance.nets:
        cx = [xs[i] + ws[i] / 2 for i in net.members]
        cy = [ys[i] + hs[i] / 2 for i in net.members]
        total += net.cost * (max(cx) - min(cx) + max(cy) - min(cy))
    return total


def rects_overlap(a, b, gap) -> bool:
    """True when boxes (x, y, w, h) a and b are closer than ``gap`` on both axes."""
    ax, ay, aw, ah = a
    bx, by, bw, bh = b
    return (ax + aw + gap > bx + 1e-6 and bx + bw + gap > ax + 1e-6
            and ay + ah + gap > by + 1e-6 and by + bh + gap > ay + 1e-6)
