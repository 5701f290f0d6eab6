"""relaxlab: exact biconjugate-relaxation laboratory for countably
constrained convex programs on an eventually-constant sequence model."""

from .extreal import MINUS_INF, PLUS_INF, ExtReal
from .patterns import Pattern
from .expr import (
    Arity,
    Point,
    Space,
    StructureReport,
    add,
    at_index,
    coord_abs,
    coord_lin,
    const_seq,
    evaluate,
    indicator,
    limsup,
    pos,
    rconst,
    scale,
    scale_indexed,
    series,
    smax,
    sterm,
    sup,
    validate,
)
from .regions import LinRow, Region

__all__ = [
    "Arity",
    "ExtReal",
    "LinRow",
    "MINUS_INF",
    "PLUS_INF",
    "Pattern",
    "Point",
    "Region",
    "Space",
    "StructureReport",
    "add",
    "at_index",
    "coord_abs",
    "coord_lin",
    "const_seq",
    "evaluate",
    "indicator",
    "limsup",
    "pos",
    "rconst",
    "scale",
    "scale_indexed",
    "series",
    "smax",
    "sterm",
    "sup",
    "validate",
]

__version__ = "0.1.0"
