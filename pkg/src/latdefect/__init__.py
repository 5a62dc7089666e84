"""Defects of unimodular pairs: the series sum f = 2, cropped polygons and the lattice envelope F."""

from .errors import (
    BudgetExhausted,
    DivergenceSuspected,
    EdgeValidationFailed,
    LatticeError,
    LevelTooDeep,
    NotPrimitive,
    NotUnimodular,
    Uncertified,
    UnsupportedFormat,
    VertexCheckFailed,
    VertexOutsideDisc,
    ZeroVector,
)
from .lattice import (
    ROOT,
    DefectTerm,
    ExtendedMatrix,
    PrimitiveVector,
    UnimodularPair,
    defect,
    defect_naive,
    enumerate_pairs,
    extended_defect,
    make_primitive,
    mediant_children,
)
from .polygon import Polygon, PolygonMetrics, build_polygon, check_unimodular, cropped_triangle, metrics, vertices
from .series import (
    SIGMA_F,
    SIGMA_F2,
    CornerState,
    SumReport,
    corner_state,
    exact_partial_sum,
    extended_sum,
    truncated_sum,
    zeta_scan,
)
from .tropical import FValue, corner_locus, evaluate_F, integrate_F, lemma_cubes_check, vertex_of_pair
from .emit import emit_geometry, emit_grid, emit_locus

__version__ = "0.1.0"

__all__ = [
    "BudgetExhausted",
    "DivergenceSuspected",
    "EdgeValidationFailed",
    "LatticeError",
    "LevelTooDeep",
    "NotPrimitive",
    "NotUnimodular",
    "Uncertified",
    "UnsupportedFormat",
    "VertexCheckFailed",
    "VertexOutsideDisc",
    "ZeroVector",
    "ROOT",
    "DefectTerm",
    "ExtendedMatrix",
    "PrimitiveVector",
    "UnimodularPair",
    "defect",
    "defect_naive",
    "enumerate_pairs",
    "extended_defect",
    "make_primitive",
    "mediant_children",
    "Polygon",
    "PolygonMetrics",
    "build_polygon",
    "check_unimodular",
    "cropped_triangle",
    "metrics",
    "vertices",
    "SIGMA_F",
    "SIGMA_F2",
    "CornerState",
    "SumReport",
    "corner_state",
    "exact_partial_sum",
    "extended_sum",
    "truncated_sum",
    "zeta_scan",
    "FValue",
    "corner_locus",
    "evaluate_F",
    "integrate_F",
    "lemma_cubes_check",
    "vertex_of_pair",
    "emit_geometry",
    "emit_grid",
    "emit_locus",
]
