import sys
from pathlib import Path

import numpy as np
import pytest

from amsplace import kernels
from amsplace.core import (
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

sys.path.insert(0, str(Path(__file__).parent))

BACKENDS = [kernels.fallback] + ([kernels.native] if kernels.native is not None else [])


@pytest.fixture(params=BACKENDS, ids=lambda m: m.BACKEND)
def kernel(request):
    return request.param


def rect(i, *sizes, selectable=True):
    """rect(0, (2, 3), (3, 2)) -> Rectangle with two variants."""
    return Rectangle(i, tuple(Variant(float(w), float(h)) for w, h in sizes), selectable)


def instance(rects, nets=(), default=0.0, overrides=None, symmetry=(), blockages=(),
             aspect=(0.0, 1.0), name="t"):
    return Instance(
        tuple(rects), tuple(nets), DistanceRule(default, overrides or {}), tuple(symmetry),
        tuple(blockages), aspect, name,
    )


def place(inst, xs, ys, variants=None, axes=None):
    return Placement.from_arrays(inst, xs, ys, variants, axes)


AREA_ONLY = CriterionWeights(1.0, 0.0)
BALANCED = CriterionWeights(1.0, 1.0)

__all__ = [
    "rect", "instance", "place", "AREA_ONLY", "BALANCED", "Blockage", "Net", "SymmetryGroup",
    "np",
]


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: dict[int, str] = {}


def report(number: int, passed: bool, detail: str) -> bool:
    ACCEPTANCE_LINES[number] = f"criterion {number}: {'PASS' if passed else 'FAIL'} {detail}"
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
