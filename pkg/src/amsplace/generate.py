"""Seeded synthetic instances shaped like analog netlists."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .core.model import (
    Blockage,
    DistanceRule,
    Instance,
    Net,
    Rectangle,
    SymmetryGroup,
    Variant,
)


class SpecError(ValueError):
    """Contradictory generator parameters."""


@dataclass(frozen=True)
class GenSpec:
    n: int
    seed: int = 0
    with_symmetry: bool = False
    symmetry_groups: int = 3
    pairs_per_group: tuple[int, int] = (1, 3)
    self_per_group: tuple[int, int] = (0, 1)
    small_fraction: float = 0.7
    variant_count: tuple[int, int] = (3, 6)
    area_spread: float = 0.1
    size_range: tuple[float, float] = (2.0, 40.0)
    grid: float = 0.1
    nets_per_rect: float = 1.2
    net_size: tuple[int, int] = (2, 6)
    default_distance: float = 1.0
    merge_fraction: float = 0.1
    merge_distance: float = -0.5
    blockages: int = 0
    aspect: tuple[float, float] = (0.0, 1.0)
    name: str | None = None

    def __post_init__(self):
        if self.n < 2:
            raise SpecError("n must be >= 2")
        lo, hi = self.size_range
        if not 0 < lo < hi:
            raise SpecError("size_range must satisfy 0 < min < max")
        if not 0 <= self.small_fraction <= 1:
            raise SpecError("small_fraction must lie in [0, 1]")
        if not 1 <= self.variant_count[0] <= self.variant_count[1]:
            raise SpecError("variant_count must be an increasing range starting at >= 1")
        if self.with_symmetry:
            if self.symmetry_groups < 1:
                raise SpecError("symmetry requested but symmetry_groups < 1")
            need = self.symmetry_groups * (2 * self.pairs_per_group[0] + self.self_per_group[0])
            if need > self.n:
                raise SpecError(f"{self.symmetry_groups} groups need at least {need} rectangles, n={self.n}")
        if self.net_size[0] < 2:
            raise SpecError("nets need at least two members")
        if self.blockages and self.with_symmetry:
            raise SpecError("blockages and symmetry groups are not generated together")

    def label(self) -> str:
        return self.name or f"gen_n{self.n}_{'sym' if self.with_symmetry else 'free'}_s{self.seed}"


def _snap(v: float, grid: float) -> float:
    return round(round(v / grid) * grid, 6)


def _small_variants(rng, spec: GenSpec) -> tuple[Variant, ...]:
    lo, hi = spec.size_range
    top = lo + 0.35 * (hi - lo)
    w = _snap(rng.uniform(lo, top), spec.grid)
    h = _snap(rng.uniform(lo, top), spec.grid)
    if w == h:
        return (Variant(w, h),)
    return (Variant(w, h), Variant(h, w))


def _large_variants(rng, spec: GenSpec) -> tuple[Variant, ...]:
    """Shapes of roughly equal area: the same device folded differently."""
    lo, hi = spec.size_range
    base = rng.uniform(0.3 * hi, hi) * rng.uniform(0.3 * hi, hi)
    count = int(rng.integers(spec.variant_count[0], spec.variant_count[1] + 1))
    out: list[Variant] = []
    for _ in range(8 * count):
        if len(out) == count:
            break
        area = base * rng.uniform(1.0, 1.0 + spec.area_spread)
        ratio = math.exp(rng.uniform(math.log(0.4), math.log(2.5)))
        w = _snap(math.sqrt(area * ratio), spec.grid)
        h = _snap(area / w, spec.grid) if w > 0 else 0.0
        if not (lo <= w <= hi and lo <= h <= hi):
            continue
        cand = Variant(w, h)
        areas = [v.area for v in out] + [cand.area]
        if (max(areas) - min(areas)) / min(areas) > spec.area_spread:
            continue
        if all((v.width, v.height) != (w, h) for v in out):
            out.append(cand)
    if not out:
        side = _snap(min(max(math.sqrt(base), lo), hi), spec.grid)
        out.append(Variant(side, side))
    return tuple(out)


def _nets(rng, spec: GenSpec, ids: list[int]) -> tuple[Net, ...]:
    n = len(ids)
    if n < 2:
        return ()
    count = max(1, round(spec.nets_per_rect * n))
    nets = []
    touched = set()
    for _ in range(count):
        size = int(rng.integers(spec.net_size[0], min(spec.net_size[1], n) + 1))
        members = sorted(int(i) for i in rng.choice(ids, size=size, replace=False))
        touched.update(members)
        nets.append([members, float(rng.choice([1.0, 1.0, 1.0, 2.0, 3.0]))])
    # every rectangle gets at least one connection
    for i in ids:
        if i not in touched:
            e = int(rng.integers(len(nets)))
            nets[e][0] = sorted(set(nets[e][0]) | {i})
    return tuple(Net(tuple(m), c) for m, c in nets)


def _symmetry(rng, spec: GenSpec, rects: list[Rectangle]) -> tuple[SymmetryGroup, ...]:
    pool = [int(i) for i in rng.permutation(spec.n)]
    groups = []
    for _ in range(spec.symmetry_groups):
        pairs_n = int(rng.integers(spec.pairs_per_group[0], spec.pairs_per_group[1] + 1))
        self_n = int(rng.integers(spec.self_per_group[0], spec.self_per_group[1] + 1))
        pairs_n = min(pairs_n, len(pool) // 2)
        self_n = min(self_n, len(pool) - 2 * pairs_n)
        if pairs_n + self_n == 0:
            break
        pairs = []
        for _ in range(pairs_n):
            i, j = sorted((pool.pop(), pool.pop()))
            # mirrored devices share their layout options
            rects[j] = Rectangle(j, rects[i].variants)
            pairs.append((i, j))
        selfs = tuple(sorted(pool.pop() for _ in range(self_n)))
        groups.append(SymmetryGroup(tuple(pairs), selfs))
    return tuple(groups)


def _distance(rng, spec: GenSpec) -> DistanceRule:
    n = spec.n
    total = n * (n - 1) // 2
    k = round(spec.merge_fraction * total)
    overrides = {}
    if k:
        flat = rng.choice(total, size=k, replace=False)
        iu, ju = np.triu_indices(n, 1)
        for f in sorted(int(v) for v in flat):
            overrides[(int(iu[f]), int(ju[f]))] = spec.merge_distance
    return DistanceRule(spec.default_distance, overrides)


def _blockages(rng, spec: GenSpec, rects: list[Rectangle]) -> tuple[Blockage, ...]:
    out = []
    lo, hi = spec.size_range
    for b in range(spec.blockages):
        w = _snap(rng.uniform(lo, hi), spec.grid)
        h = _snap(rng.uniform(lo, hi), spec.grid)
        x = _snap(rng.uniform(0, hi), spec.grid)
        y = _snap(rng.uniform(0, hi), spec.grid)
        k = max(1, round(0.3 * spec.n))
        blocked = frozenset(int(i) for i in rng.choice(spec.n, size=min(k, spec.n), replace=False))
        out.append(Blockage(x, y, w, h, blocked))
        rects.append(Rectangle(spec.n + b, (Variant(w, h),), selectable=False))
    return tuple(out)


def generate(spec: GenSpec) -> Instance:
    """Deterministic in ``spec``: the same spec yields an identical instance."""
    rng = np.random.default_rng(spec.seed)
    rects = []
    for i in range(spec.n):
        small = rng.random() < spec.small_fraction
        variants = _small_variants(rng, spec) if small else _large_variants(rng, spec)
        rects.append(Rectangle(i, variants))
    groups = _symmetry(rng, spec, rects) if spec.with_symmetry else ()
    nets = _nets(rng, spec, list(range(spec.n)))
    dist = _distance(rng, spec)
    blockages = _blockages(rng, spec, rects)
    genspec = {k: (list(v) if isinstance(v, tuple) else v) for k, v in asdict(spec).items()}
    return Instance(tuple(rects), nets, dist, groups, blockages, spec.aspect, spec.label(), genspec)
