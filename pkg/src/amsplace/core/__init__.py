from .geometry import (
    Violation,
    criterion,
    criterion_parts,
    hpwl,
    is_feasible,
    proximity,
    validate,
)
from .io import (
    SchemaError,
    read_instance,
    read_placement,
    write_instance,
    write_placement,
)
from .model import (
    CRIT_RTOL,
    GEOM_TOL,
    Blockage,
    CriterionWeights,
    DanglingReferenceError,
    DistanceRule,
    Instance,
    InstanceError,
    Net,
    Placement,
    Rectangle,
    SymmetryGroup,
    Variant,
)

__all__ = [
    "Violation", "criterion", "criterion_parts", "hpwl", "is_feasible", "proximity",
    "validate", "SchemaError", "read_instance", "read_placement", "write_instance",
    "write_placement", "CRIT_RTOL", "GEOM_TOL", "Blockage", "CriterionWeights",
    "DanglingReferenceError", "DistanceRule", "Instance", "InstanceError", "Net",
    "Placement", "Rectangle", "SymmetryGroup", "Variant",
]
