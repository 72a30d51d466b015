"""Non-singular extension of Morse germs, decided on signed Reeb diagrams."""

from .diagram import (
    Edge,
    GermDiagram,
    GermError,
    GermReport,
    Vertex,
    VertexKind,
    export_dot,
    parse_germ,
    serialize_germ,
    validate_germ,
    validate_klein_germ,
)
from .search import (
    BudgetExceeded,
    ExtensionDiagram,
    KleinRejected,
    Verdict,
    Witness,
    build_extension_diagram,
    check_klein_conditions,
    decide_general,
    decide_klein,
    enumerate_witnesses,
)
from .surface import SurfaceClass, lambda_valid
from .sweep import Choice, Step, SweepState, canonicalize, check_trace, initial_state, successors

__all__ = [
    "BudgetExceeded", "Choice", "Edge", "ExtensionDiagram", "GermDiagram", "GermError", "GermReport",
    "KleinRejected", "Step", "SurfaceClass", "SweepState", "Verdict", "Vertex", "VertexKind", "Witness",
    "build_extension_diagram", "canonicalize", "check_klein_conditions", "check_trace", "decide_general",
    "decide_klein", "enumerate_witnesses", "export_dot", "initial_state", "lambda_valid", "parse_germ",
    "serialize_germ", "successors", "validate_germ", "validate_klein_germ",
]
