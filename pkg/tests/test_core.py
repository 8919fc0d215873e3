import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from amsplace.core import (
    Blockage,
    CriterionWeights,
    DanglingReferenceError,
    DistanceRule,
    InstanceError,
    Net,
    Placement,
    SchemaError,
    SymmetryGroup,
    Variant,
    criterion,
    criterion_parts,
    hpwl,
    proximity,
    read_instance,
    read_placement,
    validate,
    write_instance,
    write_placement,
)
from amsplace.core.io import dumps, instance_from_dict, instance_to_dict
from amsplace.generate import GenSpec, generate
from conftest import instance, place, rect
from oracles import hand_hpwl, rects_overlap


# data model -------------------------------------------------------------------

def test_variant_sizes_must_be_positive():
    with pytest.raises(InstanceError):
        Variant(0.0, 1.0)
    with pytest.raises(InstanceError):
        Variant(1.0, -2.0)


def test_distance_rule_is_symmetric_and_reports_max():
    rule = DistanceRule(1.0, {(3, 1): -0.5, (0, 2): 2.5})
    assert rule(1, 3) == rule(3, 1) == -0.5
    assert rule(0, 1) == 1.0
    assert rule.max_value == 2.5
    with pytest.raises(InstanceError):
        DistanceRule(0.0, {(1, 2): 1.0, (2, 1): 2.0})


def test_ids_must_be_contiguous():
    with pytest.raises(InstanceError):
        instance([rect(0, (1, 1)), rect(2, (1, 1))])


def test_dangling_net_member():
    with pytest.raises(DanglingReferenceError):
        instance([rect(0, (1, 1))], nets=[Net((0, 5))])


def test_rectangle_in_two_groups_rejected():
    rs = [rect(i, (1, 1)) for i in range(3)]
    with pytest.raises(InstanceError):
        instance(rs, symmetry=[SymmetryGroup(((0, 1),)), SymmetryGroup((), (1,))])


def test_symmetric_pair_needs_identical_variants():
    with pytest.raises(InstanceError):
        instance([rect(0, (1, 2)), rect(1, (2, 1))], symmetry=[SymmetryGroup(((0, 1),))])


def test_blockage_dummy_must_match():
    rs = [rect(0, (1, 1)), rect(1, (2, 3), selectable=False)]
    instance(rs, blockages=[Blockage(0, 0, 2, 3, frozenset({0}))])
    with pytest.raises(InstanceError):
        instance(rs, blockages=[Blockage(0, 0, 3, 3, frozenset({0}))])
    with pytest.raises(InstanceError):
        instance(rs, nets=[Net((0, 1))], blockages=[Blockage(0, 0, 2, 3, frozenset({0}))])


def test_aspect_bounds_checked():
    with pytest.raises(InstanceError):
        instance([rect(0, (1, 1))], aspect=(0.8, 0.5))


def test_criterion_weights_nonnegative():
    with pytest.raises(ValueError):
        CriterionWeights(-1.0, 1.0)


# hpwl / criterion ---------------------------------------------------------------

def test_hpwl_hand_example():
    inst = instance([rect(0, (4, 2)), rect(1, (2, 4))], nets=[Net((0, 1), 2.0)])
    pl = place(inst, [0, 10], [0, 10])
    assert hpwl(inst, pl) == pytest.approx(40.0)


def test_single_member_net_contributes_nothing():
    inst = instance([rect(0, (4, 2)), rect(1, (2, 4))], nets=[Net((1,), 5.0)])
    assert hpwl(inst, place(inst, [0, 10], [0, 10])) == 0.0


def test_hpwl_matches_naive_scan():
    rng = np.random.default_rng(4)
    rs = [rect(i, tuple(rng.uniform(1, 5, 2))) for i in range(5)]
    nets = [Net((0, 1, 4), 1.5), Net((2, 3), 2.0), Net((0, 2, 3, 4), 0.5)]
    inst = instance(rs, nets=nets)
    xs, ys = rng.uniform(0, 20, 5), rng.uniform(0, 20, 5)
    pl = place(inst, xs, ys)
    ws, hs = pl.sizes(inst)
    assert hpwl(inst, pl) == pytest.approx(hand_hpwl(inst, xs, ys, ws, hs), rel=1e-12)


def test_criterion_hand_examples():
    inst = instance([rect(0, (10, 5))])
    pl = Placement([0.0], [0.0], [0], 10.0, 5.0)
    assert criterion(inst, pl, CriterionWeights(1.0, 1.0)) == 15.0

    inst = instance([rect(0, (4, 2)), rect(1, (2, 4))], nets=[Net((0, 1), 2.0)])
    pl = place(inst, [0, 10], [0, 10])
    pl.W, pl.H = 10.0, 5.0
    # hpwl 40, total cost 2: 15 + 40 / 2
    assert criterion(inst, pl, CriterionWeights(1.0, 1.0)) == pytest.approx(35.0)


def test_criterion_recombines_on_generated_instance():
    inst = generate(GenSpec(12, seed=7))
    rng = np.random.default_rng(0)
    pl = place(inst, rng.uniform(0, 100, 12), rng.uniform(0, 100, 12))
    ws, hs = pl.sizes(inst)
    w = CriterionWeights(0.7, 8.0)
    crit, l_a, l_c = criterion_parts(inst, pl, w)
    total = sum(net.cost for net in inst.nets)
    assert l_a == pl.W + pl.H
    assert l_c == pytest.approx(hand_hpwl(inst, pl.x, pl.y, ws, hs), rel=1e-12)
    assert crit == pytest.approx(0.7 * l_a + 8.0 / total * l_c, rel=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.floats(-50, 50), st.floats(-50, 50), st.integers(0, 10_000))
def test_hpwl_translation_invariant(dx, dy, seed):
    rng = np.random.default_rng(seed)
    rs = [rect(i, tuple(rng.uniform(1, 5, 2))) for i in range(6)]
    nets = [Net(tuple(sorted(rng.choice(6, size=3, replace=False).tolist())), 1.0 + k) for k in range(3)]
    inst = instance(rs, nets=nets)
    xs, ys = rng.uniform(0, 30, 6), rng.uniform(0, 30, 6)
    a = hpwl(inst, Placement(xs, ys, np.zeros(6), 0, 0))
    b = hpwl(inst, Placement(xs + dx, ys + dy, np.zeros(6), 0, 0))
    assert b == pytest.approx(a, rel=1e-9, abs=1e-9)


# proximity -----------------------------------------------------------------------

def test_proximity_examples():
    assert proximity(0.0, 0.0, 3.0, 4.0, 2.0, 1.0) == 5.0
    assert proximity(5.0, 5.0, 4.0, 4.0, 2.0, 2.0) == 1.0


def test_proximity_argmin_matches_formula():
    rng = np.random.default_rng(11)
    x, y = rng.uniform(0, 50, 10), rng.uniform(0, 50, 10)
    w, h = rng.uniform(1, 8, 10), rng.uniform(1, 8, 10)
    px, py = 21.3, 17.9
    vec = proximity(px, py, x, y, w, h)
    naive = [max(abs(x[i] - px), abs(x[i] + w[i] - px), abs(y[i] - py), abs(y[i] + h[i] - py))
             for i in range(10)]
    assert np.allclose(vec, naive)
    assert int(np.argmin(vec)) == int(np.argmin(naive))


# validate --------------------------------------------------------------------------

def _two_squares(a):
    return instance([rect(0, (1, 1)), rect(1, (1, 1))], default=a)


def test_gap_equal_to_distance_is_feasible():
    inst = _two_squares(1.0)
    assert validate(inst, place(inst, [0, 2], [0, 0])) == []


def test_gap_below_distance_reports_deficit():
    inst = _two_squares(1.5)
    v = validate(inst, place(inst, [0, 2], [0, 0]))
    assert len(v) == 1 and v[0].kind == "overlap"
    assert v[0].ids == (0, 1) and v[0].magnitude == pytest.approx(0.5)


def test_negative_distance_allows_merging():
    inst = _two_squares(-0.5)
    assert validate(inst, place(inst, [0, 0.5], [0, 0])) == []
    assert validate(inst, place(inst, [0, 0.4], [0, 0]))[0].magnitude == pytest.approx(0.1)


def test_symmetric_pair_on_axis():
    inst = instance([rect(0, (2, 1)), rect(1, (2, 1))], symmetry=[SymmetryGroup(((0, 1),))])
    assert validate(inst, place(inst, [0, 6], [0, 0], axes=[4.0])) == []
    bad = validate(inst, place(inst, [0, 6], [0, 0], axes=[4.5]))
    assert [v.kind for v in bad] == ["symmetry"]
    bad = validate(inst, place(inst, [0, 6], [0, 1], axes=[4.0]))
    assert bad[0].kind == "symmetry" and bad[0].magnitude == pytest.approx(1.0)


def test_self_symmetric_member():
    inst = instance([rect(0, (2, 1))], symmetry=[SymmetryGroup((), (0,))])
    assert validate(inst, place(inst, [3], [0], axes=[4.0])) == []
    assert validate(inst, place(inst, [3], [0], axes=[3.0]))[0].kind == "symmetry"


def test_bounds_and_variant_violations():
    inst = instance([rect(0, (2, 2)), rect(1, (1, 1))])
    pl = place(inst, [0, 5], [0, 0])
    pl.W = 5.5
    assert [v.kind for v in validate(inst, pl)] == ["bounds"]
    pl = Placement([0, 5], [0, 0], [0, 3], 10, 10)
    assert [v.kind for v in validate(inst, pl)] == ["variant"]


def test_blockage_violation_only_for_blocked_ids():
    rs = [rect(0, (2, 2)), rect(1, (2, 2)), rect(2, (4, 4), selectable=False)]
    blk = Blockage(0.0, 0.0, 4.0, 4.0, frozenset({0}))
    inst = instance(rs, blockages=[blk])
    pl = place(inst, [5, 1, 0], [0, 1, 0])
    assert validate(inst, pl) == []
    pl = place(inst, [1, 5, 0], [1, 0, 0])
    v = validate(inst, pl)
    assert [x.kind for x in v] == ["blockage"] and v[0].ids == (0, 2)


def test_aspect_ratio_checks():
    inst = instance([rect(0, (4, 1))], aspect=(0.5, 1.0))
    pl = place(inst, [0], [0])
    assert [v.kind for v in validate(inst, pl)] == ["aspect-ratio"]
    pl.H = 2.0
    assert validate(inst, pl) == []
    inst = instance([rect(0, (4, 4))], aspect=(0.0, 0.5))
    assert [v.kind for v in validate(inst, place(inst, [0], [0]))] == ["aspect-ratio"]


def test_missing_rectangle_is_input_error():
    inst = _two_squares(0.0)
    with pytest.raises(InstanceError):
        validate(inst, Placement([0.0], [0.0], [0], 1, 1))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 100_000))
def test_overlap_detection_matches_interval_oracle(seed):
    rng = np.random.default_rng(seed)
    n = 5
    rs = [rect(i, tuple(rng.integers(1, 5, 2))) for i in range(n)]
    a = float(rng.choice([-0.5, 0.0, 1.0]))
    inst = instance(rs, default=a)
    xs, ys = rng.integers(0, 10, n).astype(float), rng.integers(0, 10, n).astype(float)
    pl = place(inst, xs, ys)
    ws, hs = pl.sizes(inst)
    found = {v.ids for v in validate(inst, pl) if v.kind == "overlap"}
    expected = {
        (i, j) for i in range(n) for j in range(i + 1, n)
        if rects_overlap((xs[i], ys[i], ws[i], hs[i]), (xs[j], ys[j], ws[j], hs[j]), a)
    }
    assert found == expected


# file formats ------------------------------------------------------------------------

def test_minimal_instance_round_trip(tmp_path):
    inst = instance([rect(0, (1.5, 2))], name="one")
    write_instance(inst, tmp_path / "i.json")
    assert read_instance(tmp_path / "i.json") == inst


def test_negative_distance_round_trip(tmp_path):
    inst = instance([rect(0, (1, 1)), rect(1, (1, 1))], default=0.5, overrides={(0, 1): -1.0})
    write_instance(inst, tmp_path / "i.json")
    back = read_instance(tmp_path / "i.json")
    assert back.distance(0, 1) == -1.0
    assert validate(back, place(back, [0, 0], [0, 0])) == []


def test_generated_instance_serializes_byte_identically(tmp_path):
    inst = generate(GenSpec(50, seed=3, blockages=1))
    write_instance(inst, tmp_path / "a.json")
    write_instance(read_instance(tmp_path / "a.json"), tmp_path / "b.json")
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_placement_round_trip(tmp_path):
    inst = instance([rect(0, (2, 1)), rect(1, (2, 1)), rect(2, (1, 1))],
                    symmetry=[SymmetryGroup(((0, 1),))], nets=[Net((0, 2))])
    pl = place(inst, [0, 3, 6], [0, 0, 0], axes=[2.5])
    write_placement(inst, pl, tmp_path / "p.json", CriterionWeights(1.0, 8.0))
    assert read_placement(tmp_path / "p.json") == pl
    d = json.loads((tmp_path / "p.json").read_text())
    assert d["criterion"] == pytest.approx(criterion(inst, pl, CriterionWeights(1.0, 8.0)))
    assert d["area"] == pytest.approx(pl.W * pl.H)


@pytest.mark.parametrize("mutate, where", [
    (lambda d: d["rectangles"][0]["variants"][0].pop("w"), "$.rectangles[0].variants[0].w"),
    (lambda d: d["rectangles"][0]["variants"][0].update(h="x"), "$.rectangles[0].variants[0].h"),
    (lambda d: d["nets"][0].update(members=[0, "a"]), "$.nets[0].members[1]"),
    (lambda d: d.update(rectangles={}), "$.rectangles"),
])
def test_schema_errors_name_the_field(mutate, where):
    d = instance_to_dict(instance([rect(0, (1, 1)), rect(1, (1, 1))], nets=[Net((0, 1))]))
    mutate(d)
    with pytest.raises(SchemaError) as err:
        instance_from_dict(d)
    assert err.value.path == where


def test_dangling_reference_in_file(tmp_path):
    d = instance_to_dict(instance([rect(0, (1, 1))]))
    d["nets"] = [{"cost": 1.0, "members": [0, 3]}]
    (tmp_path / "bad.json").write_text(dumps(d))
    with pytest.raises(DanglingReferenceError):
        read_instance(tmp_path / "bad.json")


def test_invalid_json_reports_location(tmp_path):
    (tmp_path / "bad.json").write_text("{\n  \"name\": }\n")
    with pytest.raises(SchemaError) as err:
        read_instance(tmp_path / "bad.json")
    assert ":2:" in err.value.path
