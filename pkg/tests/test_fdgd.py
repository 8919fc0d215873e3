import numpy as np
import pytest
from conftest import AREA_ONLY, BALANCED, Net, SymmetryGroup, instance, place, rect

from amsplace.builder import BuildOptions
from amsplace.core import criterion, is_feasible
from amsplace.fdgd import FdgdParams, RoughLayout, fdgd_layout, legalize
from amsplace.generate import GenSpec, generate


def _centroid_gap(layout, i, j):
    return float(np.hypot(layout.cx[i] - layout.cx[j], layout.cy[i] - layout.cy[j]))


def test_params_are_validated():
    with pytest.raises(ValueError):
        FdgdParams(iterations=0)
    with pytest.raises(ValueError):
        FdgdParams(decay=0.0)


def test_net_pulls_members_closer():
    rects = [rect(i, (2, 2)) for i in range(4)]
    free = instance(rects, default=0.5)
    wired = instance(rects, nets=[Net((0, 3), 1.0)], default=0.5)
    a = fdgd_layout(free, FdgdParams(seed=2))
    b = fdgd_layout(wired, FdgdParams(seed=2))
    assert _centroid_gap(b, 0, 3) < _centroid_gap(a, 0, 3)


def test_without_nets_boxes_do_not_overlap_inflated():
    inst = instance([rect(i, (3, 2)) for i in range(3)], default=1.0)
    lay = fdgd_layout(inst, FdgdParams(iterations=800))
    p = lay.to_placement(inst)
    w, h = p.sizes(inst)
    for i in range(3):
        for j in range(i + 1, 3):
            ox = (w[i] + w[j]) / 2 + 1.0 - abs(lay.cx[i] - lay.cx[j])
            oy = (h[i] + h[j]) / 2 + 1.0 - abs(lay.cy[i] - lay.cy[j])
            assert min(ox, oy) <= 1e-6


def test_layout_is_deterministic():
    inst = generate(GenSpec(n=12, seed=4))
    a = fdgd_layout(inst, FdgdParams(seed=9))
    b = fdgd_layout(inst, FdgdParams(seed=9))
    assert np.array_equal(a.cx, b.cx) and np.array_equal(a.cy, b.cy)


def test_layout_starts_at_origin():
    inst = generate(GenSpec(n=8, seed=1))
    p = fdgd_layout(inst).to_placement(inst)
    mov = list(inst.movable)
    assert p.x[mov].min() == pytest.approx(0.0, abs=1e-9)
    assert p.y[mov].min() == pytest.approx(0.0, abs=1e-9)


def test_symmetry_group_moves_rigidly():
    rects = [rect(0, (2, 3)), rect(1, (2, 3)), rect(2, (4, 1)), rect(3, (1, 1))]
    inst = instance(rects, nets=[Net((0, 3), 1.0), Net((2, 3), 1.0)], default=0.5,
                    symmetry=[SymmetryGroup(pairs=((0, 1),), self_symmetric=(2,))])
    lay = fdgd_layout(inst)
    axis = lay.axes[0]
    assert (lay.cx[0] + lay.cx[1]) / 2 == pytest.approx(axis)
    assert lay.cx[2] == pytest.approx(axis)
    assert lay.cy[0] == pytest.approx(lay.cy[1])


def test_legalize_overlapping_squares():
    inst = instance([rect(i, (2, 2)) for i in range(3)], default=0.5)
    rough = RoughLayout(np.array([1.0, 1.2, 1.4]), np.array([1.0, 1.1, 0.9]), ())
    p = legalize(inst, rough, 5.0, BuildOptions(AREA_ONLY))
    assert is_feasible(inst, p)


def test_legalize_never_worsens_a_feasible_start():
    inst = instance([rect(i, (2, 2)) for i in range(3)], nets=[Net((0, 2), 1.0)], default=0.5)
    start = place(inst, [0, 3, 6], [0, 0, 0])
    p = legalize(inst, start, 5.0, BuildOptions(BALANCED))
    assert is_feasible(inst, p)
    assert criterion(inst, p, BALANCED) <= criterion(inst, start, BALANCED) + 1e-9


def test_legalize_rejects_empty_budget():
    inst = instance([rect(0, (1, 1)), rect(1, (1, 1))])
    with pytest.raises(ValueError):
        legalize(inst, place(inst, [0, 2], [0, 0]), 0.0)


def test_generated_instance_legalizes():
    inst = generate(GenSpec(n=10, seed=3, with_symmetry=True, symmetry_groups=2))
    p = legalize(inst, fdgd_layout(inst), 10.0, BuildOptions(BALANCED))
    assert is_feasible(inst, p)
