"""Problem documents: JSON with exact rationals.

Rationals serialize as "p/q" strings (or plain integers), so exactness
survives the round trip; float literals are rejected.  Expressions are
nested single-key objects per node variant; patterns carry an optional
prefix and one tail law.  Schema violations report the JSON path of the
offending node.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any, Dict, List, Optional

from .errors import ConvexityError, ParseError
from .patterns import ConstantTail, GeometricTail, Pattern
from .regions import LinRow, Region, TAIL
from .relax import Problem
from . import expr as ex
from .expr import Expr, Space


def parse_rat(value: Any, path: str) -> Fraction:
    if isinstance(value, bool):
        raise ParseError("expected a rational, got a boolean", path)
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        raise ParseError(
            "float literals are rejected; write an exact 'p/q' string", path
        )
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError):
            raise ParseError(f"not an exact rational: {value!r}", path) from None
    raise ParseError(f"expected a rational, got {type(value).__name__}", path)


def rat_str(q: Fraction) -> str:
    return str(q)


# ---------------------------------------------------------------------------
# patterns
# ---------------------------------------------------------------------------


def parse_pattern(doc: Any, path: str) -> Pattern:
    if not isinstance(doc, dict):
        raise ParseError("pattern must be an object", path)
    prefix = [
        parse_rat(v, f"{path}.prefix[{i}]")
        for i, v in enumerate(doc.get("prefix", []))
    ]
    tail = doc.get("tail")
    if not isinstance(tail, dict) or len(tail) != 1:
        raise ParseError("pattern tail must be {'constant': c} or {'geometric': ...}", path)
    (kind, body), = tail.items()
    if kind == "constant":
        return Pattern.constant(parse_rat(body, f"{path}.tail.constant"), prefix)
    if kind == "geometric":
        if not isinstance(body, dict):
            raise ParseError("geometric tail needs 'a' and 'ratio'", f"{path}.tail")
        a = parse_rat(body.get("a"), f"{path}.tail.geometric.a")
        rho = parse_rat(body.get("ratio"), f"{path}.tail.geometric.ratio")
        return Pattern.geometric(a, rho, prefix)
    raise ParseError(f"unknown tail kind {kind!r}", f"{path}.tail")


def pattern_doc(p: Pattern) -> Dict[str, Any]:
    out: Dict[str, Any] = {}
    if p.prefix:
        out["prefix"] = [rat_str(v) for v in p.prefix]
    if isinstance(p.tail, ConstantTail):
        out["tail"] = {"constant": rat_str(p.tail.c)}
    else:
        out["tail"] = {
            "geometric": {"a": rat_str(p.tail.a), "ratio": rat_str(p.tail.rho)}
        }
    return out


# ---------------------------------------------------------------------------
# regions
# ---------------------------------------------------------------------------


def parse_region(doc: Any, path: str) -> Region:
    if not isinstance(doc, dict):
        raise ParseError("region must be an object", path)
    rows = []
    for i, rdoc in enumerate(doc.get("rows", [])):
        rpath = f"{path}.rows[{i}]"
        if not isinstance(rdoc, dict):
            raise ParseError("region row must be an object", rpath)
        coeffs = {}
        for name, c in rdoc.get("coeffs", {}).items():
            var = TAIL if name == "tail" else name
            coeffs[var] = parse_rat(c, f"{rpath}.coeffs.{name}")
        rows.append(LinRow.of(coeffs, parse_rat(rdoc.get("rhs", 0), f"{rpath}.rhs")))
    box = None
    if "box" in doc:
        box = (
            parse_pattern(doc["box"].get("lo"), f"{path}.box.lo"),
            parse_pattern(doc["box"].get("hi"), f"{path}.box.hi"),
        )
    return Region(tuple(rows), bool(doc.get("tail_free", True)), box)


def region_doc(r: Region) -> Dict[str, Any]:
    out: Dict[str, Any] = {
        "rows": [
            {
                "coeffs": {
                    ("tail" if name == TAIL else name): rat_str(c)
                    for name, c in row.coeffs
                },
                "rhs": rat_str(row.rhs),
            }
            for row in r.rows
        ],
        "tail_free": r.tail_free,
    }
    if r.coord_box is not None:
        out["box"] = {
            "lo": pattern_doc(r.coord_box[0]),
            "hi": pattern_doc(r.coord_box[1]),
        }
    return out


# ---------------------------------------------------------------------------
# expressions
# ---------------------------------------------------------------------------


def parse_expr(doc: Any, path: str) -> Expr:
    if not isinstance(doc, dict) or len(doc) != 1:
        raise ParseError("expression must be a single-key object", path)
    (kind, body), = doc.items()
    p = f"{path}.{kind}"
    try:
        if kind == "coord_abs":
            return ex.coord_abs(parse_pattern(body.get("center"), f"{p}.center"))
        if kind == "coord_lin":
            return ex.coord_lin(parse_pattern(body.get("coeff"), f"{p}.coeff"))
        if kind == "scalar":
            name = body.get("name")
            if not isinstance(name, str) or not name:
                raise ParseError("scalar term needs a name", p)
            return ex.sterm(name, parse_rat(body.get("coeff", 1), f"{p}.coeff"))
        if kind == "const_seq":
            return ex.const_seq(parse_pattern(body, p))
        if kind == "const":
            return ex.rconst(parse_rat(body, p))
        if kind == "add":
            return ex.add(*[parse_expr(c, f"{p}[{i}]") for i, c in enumerate(body)])
        if kind == "max":
            return ex.smax(*[parse_expr(c, f"{p}[{i}]") for i, c in enumerate(body)])
        if kind == "scale":
            return ex.scale(
                parse_rat(body.get("coeff"), f"{p}.coeff"),
                parse_expr(body.get("of"), f"{p}.of"),
            )
        if kind == "scale_indexed":
            return ex.scale_indexed(
                parse_pattern(body.get("weights"), f"{p}.weights"),
                parse_expr(body.get("of"), f"{p}.of"),
            )
        if kind == "pos":
            return ex.pos(parse_expr(body, p))
        if kind == "series":
            return ex.series(
                parse_pattern(body.get("weights"), f"{p}.weights"),
                parse_expr(body.get("term"), f"{p}.term"),
            )
        if kind == "sup":
            return ex.sup(parse_expr(body, p))
        if kind == "limsup":
            return ex.limsup(parse_expr(body, p))
        if kind == "at_index":
            k = body.get("k")
            if not isinstance(k, int) or k < 1:
                raise ParseError("at_index needs an integer k >= 1", p)
            return ex.at_index(k, parse_expr(body.get("term"), f"{p}.term"))
        if kind == "indicator":
            return ex.indicator(parse_region(body, p))
    except ConvexityError as err:
        raise ParseError(f"non-convex construction: {err}", p) from None
    except (AttributeError, TypeError):
        raise ParseError("malformed expression body", p) from None
    raise ParseError(f"unknown expression kind {kind!r}", path)


def expr_doc(e: Expr) -> Dict[str, Any]:
    if isinstance(e, ex.CoordAbs):
        return {"coord_abs": {"center": pattern_doc(e.center)}}
    if isinstance(e, ex.CoordLin):
        return {"coord_lin": {"coeff": pattern_doc(e.coeff)}}
    if isinstance(e, ex.ScalarTerm):
        return {"scalar": {"name": e.name, "coeff": rat_str(e.coeff)}}
    if isinstance(e, ex.Const):
        return {"const_seq": pattern_doc(e.values)}
    if isinstance(e, ex.TailConst):
        return {"const": rat_str(e.value)}
    if isinstance(e, ex.AddFinite):
        return {"add": [expr_doc(c) for c in e.children]}
    if isinstance(e, ex.MaxFinite):
        return {"max": [expr_doc(c) for c in e.children]}
    if isinstance(e, ex.ScaleNonneg):
        return {"scale": {"coeff": rat_str(e.coeff), "of": expr_doc(e.child)}}
    if isinstance(e, ex.ScaleIndexed):
        return {
            "scale_indexed": {
                "weights": pattern_doc(e.weights),
                "of": expr_doc(e.child),
            }
        }
    if isinstance(e, ex.PosPart):
        return {"pos": expr_doc(e.child)}
    if isinstance(e, ex.SeriesK):
        return {"series": {"weights": pattern_doc(e.weights), "term": expr_doc(e.term)}}
    if isinstance(e, ex.SupK):
        return {"sup": expr_doc(e.term)}
    if isinstance(e, ex.LimSupK):
        return {"limsup": expr_doc(e.term)}
    if isinstance(e, ex.AtIndex):
        return {"at_index": {"k": e.k, "term": expr_doc(e.term)}}
    if isinstance(e, ex.IndicatorRegion):
        return {"indicator": region_doc(e.region)}
    raise ParseError(f"cannot serialize {type(e).__name__}")


# ---------------------------------------------------------------------------
# problems
# ---------------------------------------------------------------------------


def parse_problem(doc: Any, path: str = "$") -> Problem:
    if isinstance(doc, str):
        doc = json.loads(doc)
    if not isinstance(doc, dict):
        raise ParseError("problem document must be an object", path)
    name = doc.get("name", "problem")
    if not isinstance(name, str):
        raise ParseError("name must be a string", f"{path}.name")
    scalars = doc.get("scalars", [])
    if not isinstance(scalars, list) or not all(isinstance(s, str) for s in scalars):
        raise ParseError("scalars must be a list of names", f"{path}.scalars")
    if "objective" not in doc:
        raise ParseError("missing objective", path)
    objective = parse_expr(doc["objective"], f"{path}.objective")
    constraints = [
        parse_expr(c, f"{path}.constraints[{i}]")
        for i, c in enumerate(doc.get("constraints", []))
    ]
    try:
        return Problem(name, objective, tuple(constraints), tuple(scalars))
    except ConvexityError as err:
        raise ParseError(str(err), path) from None


def problem_doc(p: Problem) -> Dict[str, Any]:
    return {
        "name": p.name,
        "scalars": list(p.scalars),
        "objective": expr_doc(p.objective),
        "constraints": [expr_doc(c) for c in p.constraints],
    }


def dump_problem(p: Problem) -> str:
    return json.dumps(problem_doc(p), indent=2, sort_keys=True)
