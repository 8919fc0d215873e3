"""Domain data model: rectangles, nets, distance rules, instances, placements."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

GEOM_TOL = 1e-6
CRIT_RTOL = 1e-9


class InstanceError(ValueError):
    """Raised when an instance violates a structural invariant."""


class DanglingReferenceError(InstanceError):
    """Raised when a net, group, blockage or override names an unknown rectangle."""


@dataclass(frozen=True)
class Variant:
    width: float
    height: float

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise InstanceError(f"variant sizes must be positive, got {self.width}x{self.height}")

    @property
    def area(self) -> float:
        return self.width * self.height

    def transposed(self) -> "Variant":
        return Variant(self.height, self.width)


@dataclass(frozen=True)
class Rectangle:
    id: int
    variants: tuple[Variant, ...]
    selectable: bool = True

    def __post_init__(self):
        object.__setattr__(self, "variants", tuple(self.variants))
        if not self.variants:
            raise InstanceError(f"rectangle {self.id} has no variants")

    @property
    def max_dim(self) -> float:
        return max(max(v.width, v.height) for v in self.variants)

    @property
    def max_area(self) -> float:
        return max(v.area for v in self.variants)


@dataclass(frozen=True)
class Net:
    members: tuple[int, ...]
    cost: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        if not self.members:
            raise InstanceError("net has no members")
        if self.cost < 0:
            raise InstanceError(f"net cost must be nonnegative, got {self.cost}")


@dataclass(frozen=True)
class DistanceRule:
    """Minimum pairwise distances: a default plus symmetric per-pair overrides.

    Overrides are stored with the smaller id first. Negative values allow
    pocket merging.
    """

    default: float = 0.0
    overrides: Mapping[tuple[int, int], float] = field(default_factory=dict)

    def __post_init__(self):
        norm = {}
        for (i, j), a in dict(self.overrides).items():
            if i == j:
                raise InstanceError(f"distance override on the diagonal ({i}, {j})")
            key = (min(i, j), max(i, j))
            if key in norm and norm[key] != a:
                raise InstanceError(f"asymmetric distance override for pair {key}")
            if not np.isfinite(a):
                raise InstanceError(f"distance for pair {key} is not finite")
            norm[key] = float(a)
        object.__setattr__(self, "overrides", dict(sorted(norm.items())))

    def __call__(self, i: int, j: int) -> float:
        return self.overrides.get((min(i, j), max(i, j)), self.default)

    @property
    def max_value(self) -> float:
        """a_M: the largest minimum distance over all pairs."""
        return max([self.default, *self.overrides.values()])

    def __hash__(self):
        return hash((self.default, tuple(self.overrides.items())))


@dataclass(frozen=True)
class SymmetryGroup:
    """Rectangle pairs and self-symmetric rectangles sharing one vertical axis."""

    pairs: tuple[tuple[int, int], ...] = ()
    self_symmetric: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple((int(i), int(j)) for i, j in self.pairs))
        object.__setattr__(self, "self_symmetric", tuple(int(i) for i in self.self_symmetric))
        members = self.members
        if len(members) != len(set(members)):
            raise InstanceError(f"rectangle repeated inside symmetry group {members}")

    @property
    def members(self) -> tuple[int, ...]:
        return tuple(i for p in self.pairs for i in p) + self.self_symmetric


@dataclass(frozen=True)
class Blockage:
    """A fixed dummy rectangle that the ``blocked`` rectangles must keep clear of."""

    x: float
    y: float
    width: float
    height: float
    blocked: frozenset[int] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "blocked", frozenset(int(i) for i in self.blocked))
        if self.width < 0 or self.height < 0:
            raise InstanceError("blockage sizes must be nonnegative")


@dataclass(frozen=True)
class CriterionWeights:
    c_A: float = 1.0
    c_C: float = 1.0

    def __post_init__(self):
        if self.c_A < 0 or self.c_C < 0:
            raise InstanceError("criterion weights must be nonnegative")


@dataclass(frozen=True, eq=False)
class Instance:
    """An immutable placement problem.

    Blockage dummies sit in ``rectangles`` with ``selectable=False`` and a
    single variant; the k-th dummy (in id order) belongs to the k-th entry of
    ``blockages``.
    """

    rectangles: tuple[Rectangle, ...]
    nets: tuple[Net, ...] = ()
    distance: DistanceRule = field(default_factory=DistanceRule)
    symmetry: tuple[SymmetryGroup, ...] = ()
    blockages: tuple[Blockage, ...] = ()
    aspect: tuple[float, float] = (0.0, 1.0)
    name: str = "instance"
    genspec: Mapping | None = None

    def __post_init__(self):
        for attr in ("rectangles", "nets", "symmetry", "blockages"):
            object.__setattr__(self, attr, tuple(getattr(self, attr)))
        object.__setattr__(self, "aspect", (float(self.aspect[0]), float(self.aspect[1])))
        self._check()

    def _check(self):
        ids = [r.id for r in self.rectangles]
        if ids != list(range(len(ids))):
            raise InstanceError("rectangle ids must be unique and contiguous from 0")
        n_all = len(ids)
        movable = set(self.movable)

        def known(i, where):
            if not (0 <= i < n_all):
                raise DanglingReferenceError(f"{where} references unknown rectangle {i}")

        for k, net in enumerate(self.nets):
            for i in net.members:
                known(i, f"net {k}")
                if i not in movable:
                    raise InstanceError(f"net {k} references blockage dummy {i}")
        seen: set[int] = set()
        for g, grp in enumerate(self.symmetry):
            for i in grp.members:
                known(i, f"symmetry group {g}")
                if i not in movable:
                    raise InstanceError(f"symmetry group {g} references blockage dummy {i}")
                if i in seen:
                    raise InstanceError(f"rectangle {i} appears in more than one symmetry group")
                seen.add(i)
            for i, j in grp.pairs:
                if self.rectangles[i].variants != self.rectangles[j].variants:
                    raise InstanceError(
                        f"symmetric pair ({i}, {j}) must have identical variant lists"
                    )
        for (i, j) in self.distance.overrides:
            known(i, "distance override")
            known(j, "distance override")
        dummies = self.dummies
        if len(dummies) != len(self.blockages):
            raise InstanceError(
                f"{len(self.blockages)} blockages but {len(dummies)} non-selectable rectangles"
            )
        for b, (d, blk) in enumerate(zip(dummies, self.blockages)):
            v = self.rectangles[d].variants
            if len(v) != 1 or (v[0].width, v[0].height) != (blk.width, blk.height):
                raise InstanceError(f"blockage {b} does not match its dummy rectangle {d}")
            for i in blk.blocked:
                known(i, f"blockage {b}")
                if i not in movable:
                    raise InstanceError(f"blockage {b} blocks a dummy rectangle {i}")
        lo, hi = self.aspect
        if not (0.0 <= lo <= hi <= 1.0):
            raise InstanceError(f"aspect bounds must satisfy 0 <= l <= u <= 1, got {self.aspect}")

    # derived views -----------------------------------------------------

    @cached_property
    def movable(self) -> tuple[int, ...]:
        return tuple(r.id for r in self.rectangles if r.selectable)

    @cached_property
    def dummies(self) -> tuple[int, ...]:
        return tuple(r.id for r in self.rectangles if not r.selectable)

    @property
    def n(self) -> int:
        """Number of selectable rectangles."""
        return len(self.movable)

    @cached_property
    def total_net_cost(self) -> float:
        return float(sum(net.cost for net in self.nets))

    @cached_property
    def distance_matrix(self) -> np.ndarray:
        """Dense a_{i,j} over all rectangle ids (diagonal zero)."""
        n = len(self.rectangles)
        a = np.full((n, n), self.distance.default, dtype=float)
        for (i, j), v in self.distance.overrides.items():
            a[i, j] = a[j, i] = v
        np.fill_diagonal(a, 0.0)
        return a

    @cached_property
    def group_of(self) -> dict[int, int]:
        return {i: g for g, grp in enumerate(self.symmetry) for i in grp.members}

    @cached_property
    def partner_of(self) -> dict[int, int]:
        out = {}
        for grp in self.symmetry:
            for i, j in grp.pairs:
                out[i] = j
                out[j] = i
        return out

    @cached_property
    def net_csr(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Nets as (ptr, member ids, costs) arrays."""
        ptr = np.zeros(len(self.nets) + 1, dtype=np.int64)
        idx: list[int] = []
        for k, net in enumerate(self.nets):
            idx.extend(net.members)
            ptr[k + 1] = len(idx)
        cost = np.array([net.cost for net in self.nets], dtype=float)
        return ptr, np.asarray(idx, dtype=np.int64), cost

    def blockage_of_dummy(self, d: int) -> Blockage:
        return self.blockages[self.dummies.index(d)]

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return (
            self.rectangles == other.rectangles
            and self.nets == other.nets
            and self.distance == other.distance
            and self.symmetry == other.symmetry
            and self.blockages == other.blockages
            and self.aspect == other.aspect
            and self.name == other.name
        )

    __hash__ = object.__hash__


@dataclass(eq=False)
class Placement:
    """Positions (bottom-left corners) and variant choices for every rectangle.

    Arrays are indexed by rectangle id and include blockage dummies, which
    sit at their blockage coordinates with variant 0.
    """

    x: np.ndarray
    y: np.ndarray
    variant: np.ndarray
    W: float
    H: float
    axes: tuple[float, ...] = ()

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        self.variant = np.asarray(self.variant, dtype=np.int64)
        self.W = float(self.W)
        self.H = float(self.H)
        self.axes = tuple(float(a) for a in self.axes)
        if not (len(self.x) == len(self.y) == len(self.variant)):
            raise ValueError("placement arrays differ in length")

    def __len__(self):
        return len(self.x)

    def copy(self) -> "Placement":
        return Placement(self.x.copy(), self.y.copy(), self.variant.copy(), self.W, self.H, self.axes)

    def __eq__(self, other):
        if not isinstance(other, Placement):
            return NotImplemented
        return (
            np.array_equal(self.x, other.x)
            and np.array_equal(self.y, other.y)
            and np.array_equal(self.variant, other.variant)
            and self.W == other.W
            and self.H == other.H
            and self.axes == other.axes
        )

    def sizes(self, instance: Instance) -> tuple[np.ndarray, np.ndarray]:
        """Widths and heights of the chosen variants."""
        if len(self.x) != len(instance.rectangles):
            raise InstanceError(
                f"placement has {len(self.x)} rectangles, instance has {len(instance.rectangles)}"
            )
        w = np.empty(len(self.x))
        h = np.empty(len(self.x))
        for r in instance.rectangles:
            v = r.variants[self.variant[r.id]]
            w[r.id] = v.width
            h[r.id] = v.height
        return w, h

    def centroids(self, instance: Instance) -> tuple[np.ndarray, np.ndarray]:
        w, h = self.sizes(instance)
        return self.x + w / 2, self.y + h / 2

    @classmethod
    def from_arrays(
        cls,
        instance: Instance,
        x: Sequence[float],
        y: Sequence[float],
        variant: Sequence[int] | None = None,
        axes: Iterable[float] | None = None,
    ) -> "Placement":
        """Build a placement with a tight bounding box; axes inferred when omitted."""
        x = np.asarray(x, dtype=float).copy()
        y = np.asarray(y, dtype=float).copy()
        variant = np.zeros(len(x), dtype=np.int64) if variant is None else np.asarray(variant)
        for d, blk in zip(instance.dummies, instance.blockages):
            x[d], y[d], variant[d] = blk.x, blk.y, 0
        p = cls(x, y, variant, 0.0, 0.0)
        w, h = p.sizes(instance)
        mov = list(instance.movable)
        p.W = float(np.max(x[mov] + w[mov])) if mov else 0.0
        p.H = float(np.max(y[mov] + h[mov])) if mov else 0.0
        if axes is None:
            axes = [infer_axis(instance, grp, p, w) for grp in instance.symmetry]
        p.axes = tuple(float(a) for a in axes)
        return p


def infer_axis(instance: Instance, grp: SymmetryGroup, p: Placement, w: np.ndarray) -> float:
    vals = [(p.x[i] + p.x[j] + w[i]) / 2 for i, j in grp.pairs]
    vals += [p.x[i] + w[i] / 2 for i in grp.self_symmetric]
    return float(np.mean(vals)) if vals else 0.0


def check_complete(instance: Instance, placement: Placement) -> None:
    """Raise ``InstanceError`` unless the placement covers every rectangle."""
    if len(placement.x) != len(instance.rectangles):
        raise InstanceError(
            f"placement has {len(placement.x)} rectangles, instance has {len(instance.rectangles)}"
        )
    if len(placement.axes) != len(instance.symmetry):
        raise InstanceError(
            f"placement has {len(placement.axes)} axes, instance has {len(instance.symmetry)} groups"
        )
