"""JSON file formats for instances and placements.

Serialization is canonical: a fixed key order and Python's shortest float
repr, so write -> read -> write is byte-identical.
"""
from __future__ import annotations

import json
import numbers
from pathlib import Path
from typing import Any

from .geometry import criterion_parts
from .model import (
    Blockage,
    CriterionWeights,
    DistanceRule,
    Instance,
    Net,
    Placement,
    Rectangle,
    SymmetryGroup,
    Variant,
)


class SchemaError(ValueError):
    """A file does not match the expected schema; ``path`` locates the field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def _get(obj: Any, key: str, path: str, kind, default=...):
    if not isinstance(obj, dict):
        raise SchemaError(path, "expected an object")
    if key not in obj:
        if default is ...:
            raise SchemaError(f"{path}.{key}", "missing required field")
        return default
    return _typed(obj[key], f"{path}.{key}", kind)


def _typed(value: Any, path: str, kind):
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, numbers.Real):
            raise SchemaError(path, f"expected a number, got {value!r}")
        return float(value)
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, numbers.Integral):
            raise SchemaError(path, f"expected an integer, got {value!r}")
        return int(value)
    if kind is bool and not isinstance(value, bool):
        raise SchemaError(path, f"expected true/false, got {value!r}")
    if kind is str and not isinstance(value, str):
        raise SchemaError(path, f"expected a string, got {value!r}")
    if kind is list and not isinstance(value, list):
        raise SchemaError(path, f"expected a list, got {type(value).__name__}")
    if kind is dict and not isinstance(value, dict):
        raise SchemaError(path, f"expected an object, got {type(value).__name__}")
    return value


def _ints(value: Any, path: str) -> list[int]:
    return [_typed(v, f"{path}[{k}]", int) for k, v in enumerate(_typed(value, path, list))]


# instance ----------------------------------------------------------------

def instance_to_dict(inst: Instance) -> dict:
    d: dict[str, Any] = {
        "name": inst.name,
        "rectangles": [
            {
                "id": r.id,
                "selectable": r.selectable,
                "variants": [{"w": v.width, "h": v.height} for v in r.variants],
            }
            for r in inst.rectangles
        ],
        "nets": [{"cost": net.cost, "members": list(net.members)} for net in inst.nets],
        "distance": {
            "default": inst.distance.default,
            "overrides": [{"i": i, "j": j, "a": a} for (i, j), a in inst.distance.overrides.items()],
        },
        "symmetry": [
            {"pairs": [list(p) for p in g.pairs], "self": list(g.self_symmetric)}
            for g in inst.symmetry
        ],
        "blockages": [
            {"x": b.x, "y": b.y, "w": b.width, "h": b.height, "blocked": sorted(b.blocked)}
            for b in inst.blockages
        ],
        "aspect": {"l": inst.aspect[0], "u": inst.aspect[1]},
    }
    if inst.genspec is not None:
        d["genspec"] = dict(inst.genspec)
    return d


def instance_from_dict(d: Any) -> Instance:
    p = "$"
    name = _get(d, "name", p, str, "instance")
    rects = []
    for k, r in enumerate(_get(d, "rectangles", p, list)):
        rp = f"$.rectangles[{k}]"
        variants = []
        for q, v in enumerate(_get(r, "variants", rp, list)):
            vp = f"{rp}.variants[{q}]"
            w, h = _get(v, "w", vp, float), _get(v, "h", vp, float)
            if w <= 0 or h <= 0:
                raise SchemaError(vp, "variant sizes must be positive")
            variants.append(Variant(w, h))
        if not variants:
            raise SchemaError(f"{rp}.variants", "at least one variant required")
        rects.append(Rectangle(_get(r, "id", rp, int), tuple(variants), _get(r, "selectable", rp, bool, True)))
    nets = []
    for k, n in enumerate(_get(d, "nets", p, list, [])):
        np_ = f"$.nets[{k}]"
        members = _ints(_get(n, "members", np_, list), f"{np_}.members")
        if not members:
            raise SchemaError(f"{np_}.members", "net must have at least one member")
        cost = _get(n, "cost", np_, float, 1.0)
        if cost < 0:
            raise SchemaError(f"{np_}.cost", "cost must be nonnegative")
        nets.append(Net(tuple(members), cost))
    dist = _get(d, "distance", p, dict, {})
    overrides = {}
    for k, o in enumerate(_get(dist, "overrides", "$.distance", list, [])):
        op = f"$.distance.overrides[{k}]"
        overrides[(_get(o, "i", op, int), _get(o, "j", op, int))] = _get(o, "a", op, float)
    rule = DistanceRule(_get(dist, "default", "$.distance", float, 0.0), overrides)
    groups = []
    for k, g in enumerate(_get(d, "symmetry", p, list, [])):
        gp = f"$.symmetry[{k}]"
        pairs = []
        for q, pr in enumerate(_get(g, "pairs", gp, list, [])):
            ids = _ints(pr, f"{gp}.pairs[{q}]")
            if len(ids) != 2:
                raise SchemaError(f"{gp}.pairs[{q}]", "a pair needs exactly two ids")
            pairs.append(tuple(ids))
        groups.append(SymmetryGroup(tuple(pairs), tuple(_ints(_get(g, "self", gp, list, []), f"{gp}.self"))))
    blockages = []
    for k, b in enumerate(_get(d, "blockages", p, list, [])):
        bp = f"$.blockages[{k}]"
        blockages.append(
            Blockage(
                _get(b, "x", bp, float), _get(b, "y", bp, float),
                _get(b, "w", bp, float), _get(b, "h", bp, float),
                frozenset(_ints(_get(b, "blocked", bp, list, []), f"{bp}.blocked")),
            )
        )
    asp = _get(d, "aspect", p, dict, {})
    aspect = (_get(asp, "l", "$.aspect", float, 0.0), _get(asp, "u", "$.aspect", float, 1.0))
    genspec = _get(d, "genspec", p, dict, None)
    return Instance(tuple(rects), tuple(nets), rule, tuple(groups), tuple(blockages), aspect, name, genspec)


def dumps(obj: dict) -> str:
    return json.dumps(obj, indent=1, ensure_ascii=False) + "\n"


def _load(path) -> Any:
    text = Path(path).read_text(encoding="utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}:{exc.lineno}:{exc.colno}", exc.msg) from None


def read_instance(path) -> Instance:
    return instance_from_dict(_load(path))


def write_instance(instance: Instance, path) -> None:
    Path(path).write_text(dumps(instance_to_dict(instance)), encoding="utf-8")


# placement ----------------------------------------------------------------

def placement_to_dict(
    instance: Instance, placement: Placement, weights: CriterionWeights | None = None
) -> dict:
    weights = weights or CriterionWeights()
    crit, l_a, l_c = criterion_parts(instance, placement, weights)
    return {
        "instance": instance.name,
        "rects": [
            {
                "id": i,
                "x": float(placement.x[i]),
                "y": float(placement.y[i]),
                "variant": int(placement.variant[i]),
            }
            for i in range(len(placement))
        ],
        "W": placement.W,
        "H": placement.H,
        "axes": list(placement.axes),
        "hpwl": l_c,
        "area": placement.W * placement.H,
        "criterion": crit,
        "weights": {"cA": weights.c_A, "cC": weights.c_C},
    }


def placement_from_dict(d: Any) -> Placement:
    p = "$"
    rects = _get(d, "rects", p, list)
    xs, ys, vs = [0.0] * len(rects), [0.0] * len(rects), [0] * len(rects)
    seen = set()
    for k, r in enumerate(rects):
        rp = f"$.rects[{k}]"
        i = _get(r, "id", rp, int)
        if not 0 <= i < len(rects) or i in seen:
            raise SchemaError(f"{rp}.id", f"ids must be a permutation of 0..{len(rects) - 1}")
        seen.add(i)
        xs[i], ys[i], vs[i] = _get(r, "x", rp, float), _get(r, "y", rp, float), _get(r, "variant", rp, int)
    axes = [_typed(a, f"$.axes[{k}]", float) for k, a in enumerate(_get(d, "axes", p, list, []))]
    return Placement(xs, ys, vs, _get(d, "W", p, float), _get(d, "H", p, float), tuple(axes))


def read_placement(path) -> Placement:
    return placement_from_dict(_load(path))


def read_placement_weights(path) -> CriterionWeights:
    d = _load(path)
    w = _get(d, "weights", "$", dict, {})
    return CriterionWeights(_get(w, "cA", "$.weights", float, 1.0), _get(w, "cC", "$.weights", float, 1.0))


def write_placement(
    instance: Instance, placement: Placement, path, weights: CriterionWeights | None = None
) -> None:
    Path(path).write_text(dumps(placement_to_dict(instance, placement, weights)), encoding="utf-8")
