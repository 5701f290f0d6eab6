"""Command-line interface: problem files in, reports out.

Exit codes: 0 success, 2 parse/validation error, 3 conjugacy refusal,
4 internal invariant violation.  Machine output (--format json) is
byte-stable across runs for identical inputs.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .conjugacy import dom_region
from .errors import (
    ConjugacyRefusal,
    ConvexityError,
    GalleryError,
    InternalInvariantError,
    ParseError,
    RelaxlabError,
)
from .extreal import ExtReal
from .galleries import DualBallGallery, gallery
from .oracle import cross_check
from .patterns import Pattern
from .regions import Region, TAIL
from .relax import ChainReport, Problem, Variant, build_relaxation, duality_chain_report
from .serialize import (
    dump_problem,
    parse_pattern,
    parse_problem,
    parse_rat,
    problem_doc,
)
from . import expr as ex
from . import solve as sv

ALL_VARIANTS = (
    Variant.PSTAR2,
    Variant.P1,
    Variant.P2,
    Variant.P3,
    Variant.PINF,
)


def fmt_value(v: ExtReal) -> str:
    if v.is_finite():
        return str(v.as_rat())
    return "+inf" if v > 0 else "-inf"


def fmt_point(p: Optional[ex.Point]) -> str:
    if p is None:
        return "-"
    scal = ", ".join(f"{k}={v}" for k, v in p.scalar_items)
    return f"prefix={[str(v) for v in list(p.prefix)]} tail={p.tail_value} {scal}"


def fmt_region(r: Region) -> str:
    if r.is_whole():
        return "whole space"
    parts = []
    for row in r.rows:
        lhs = " + ".join(
            f"{c}*{'t' if name == TAIL else name}" for name, c in row.coeffs
        )
        parts.append(f"{lhs} <= {row.rhs}")
    if not r.tail_free:
        parts.append("tail = 0")
    return "; ".join(parts) if parts else "whole space"


@dataclass
class GapReport:
    values: Dict[str, ExtReal]
    argmins: Dict[str, str]
    regions: Dict[str, str]
    slater: Optional[sv.SlaterCertificate]
    chain: Optional[ChainReport]
    caveats: List[str] = field(default_factory=list)
    refusals: Dict[str, str] = field(default_factory=dict)

    def verify(self):
        """Re-check the printed weak-duality inequalities before emission."""
        v_p = self.values["p"]
        for key, v in self.values.items():
            if key != "p" and not v <= v_p:
                raise InternalInvariantError(
                    f"weak inequality violated: v({key}) = {v} > {v_p} = v(P)"
                )
        v_inf = self.values.get(Variant.PINF.value)
        if v_inf is not None:
            for key in (Variant.P1.value, Variant.P2.value):
                if key in self.values and not v_inf <= self.values[key]:
                    raise InternalInvariantError(
                        f"chain inequality violated: v(pinf) > v({key})"
                    )

    def to_json(self) -> Dict:
        out = {
            "values": {k: fmt_value(v) for k, v in sorted(self.values.items())},
            "argmins": dict(sorted(self.argmins.items())),
            "regions": dict(sorted(self.regions.items())),
            "slater": None,
            "chain": None,
            "caveats": list(self.caveats),
            "refusals": dict(sorted(self.refusals.items())),
        }
        if self.slater is not None:
            out["slater"] = {
                "point": fmt_point(self.slater.point),
                "margin": str(self.slater.margin),
                "reinforced": self.slater.reinforced,
            }
        if self.chain is not None:
            out["chain"] = {
                "v_p": fmt_value(self.chain.v_p),
                "v_lower": fmt_value(self.chain.v_lower),
                "lower_variant": self.chain.lower_variant.value,
                "certified_equal": self.chain.certified_equal,
                "dual_bounds": [fmt_value(b) for b in self.chain.dual_bounds],
            }
        return out

    def to_text(self) -> str:
        lines = ["variant    value        argmin / region"]
        for key in sorted(self.values):
            lines.append(
                f"{key:<10} {fmt_value(self.values[key]):<12} "
                f"{self.argmins.get(key, '-')}"
            )
            if key in self.regions:
                lines.append(f"{'':<10} region: {self.regions[key]}")
        for key, msg in sorted(self.refusals.items()):
            lines.append(f"{key:<10} refused: {msg}")
        if self.slater is not None:
            lines.append(
                f"slater: margin {self.slater.margin} at {fmt_point(self.slater.point)}"
            )
        else:
            lines.append("slater: not found")
        if self.chain is not None:
            lines.append(f"chain: {self.chain.describe()}")
        for c in self.caveats:
            lines.append(f"caveat: {c}")
        return "\n".join(lines)


def run_report(p: Problem, variants: Sequence[Variant] = ALL_VARIANTS) -> GapReport:
    """Solve the primal and every requested variant; collect refusals."""
    base = sv.solve_problem(p)
    values = {"p": base.value}
    argmins = {"p": fmt_point(base.argmin)}
    regions: Dict[str, str] = {}
    refusals: Dict[str, str] = {}
    for variant in variants:
        try:
            rel = build_relaxation(p, variant)
            res = sv.solve_relaxation(rel)
        except ConjugacyRefusal as err:
            refusals[variant.value] = str(err)
            continue
        values[variant.value] = res.value
        argmins[variant.value] = fmt_point(res.argmin)
        regions[variant.value] = fmt_region(rel.region)
    caveats: List[str] = []
    slater = sv.check_slater(p)
    sup = p.sup_expr()
    structurally_fine = sup is None or ex.validate(sup).continuous_everywhere
    if slater is None or not structurally_fine:
        caveats.append(
            "model infimum: no Slater certificate or continuity flag; values are "
            "infima over the eventually-constant model class"
        )
    chain: Optional[ChainReport] = None
    try:
        chain = duality_chain_report(p)
    except ConjugacyRefusal as err:
        refusals["chain"] = str(err)
    report = GapReport(values, argmins, regions, slater, chain, caveats, refusals)
    report.verify()
    return report


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _load_problem(path: str) -> Problem:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_problem(json.load(fh))


def _emit(args, payload_json: Dict, text: str) -> int:
    if args.format == "json":
        print(json.dumps(payload_json, sort_keys=True, indent=2))
    else:
        print(text)
    return 0


def cmd_solve(args) -> int:
    p = _load_problem(args.file)
    res = sv.solve_problem(p)
    return _emit(
        args,
        {"value": fmt_value(res.value), "argmin": fmt_point(res.argmin)},
        f"v(P) = {fmt_value(res.value)}\nargmin: {fmt_point(res.argmin)}",
    )


def cmd_relax(args) -> int:
    p = _load_problem(args.file)
    variant = Variant(args.variant)
    rel = build_relaxation(p, variant)
    res = sv.solve_relaxation(rel)
    payload = {
        "variant": variant.value,
        "value": fmt_value(res.value),
        "argmin": fmt_point(res.argmin),
        "region": fmt_region(rel.region),
        "provenance": list(rel.provenance),
        "caveats": list(rel.caveats),
    }
    text = (
        f"v({variant.value}) = {fmt_value(res.value)}\n"
        f"argmin: {fmt_point(res.argmin)}\nregion: {fmt_region(rel.region)}\n"
        + "\n".join(rel.provenance)
    )
    return _emit(args, payload, text)


def cmd_report(args) -> int:
    p = _load_problem(args.file)
    variants = ALL_VARIANTS
    if args.variants:
        variants = tuple(Variant(v.strip()) for v in args.variants.split(","))
    report = run_report(p, variants)
    return _emit(args, report.to_json(), report.to_text())


def cmd_slater(args) -> int:
    p = _load_problem(args.file)
    weights = None
    if args.weights:
        weights = parse_pattern(json.loads(args.weights), "$.weights")
    cert = sv.check_slater(p, reinforced=args.reinforced, weights=weights)
    if cert is None:
        return _emit(args, {"found": False}, "no Slater certificate (infimum >= 0)")
    payload = {
        "found": True,
        "point": fmt_point(cert.point),
        "margin": str(cert.margin),
        "reinforced": cert.reinforced,
    }
    return _emit(
        args, payload, f"Slater margin {cert.margin} at {fmt_point(cert.point)}"
    )


def cmd_certify(args) -> int:
    p = _load_problem(args.file)
    alpha = parse_rat(args.alpha, "$.alpha")
    ok = sv.certify_value(p.objective, p.constraints, alpha, p.scalars)
    return _emit(
        args,
        {"alpha": str(alpha), "certified": ok},
        f"alpha = {alpha}: {'certified optimal' if ok else 'not the optimal value'}",
    )


def cmd_multipliers(args) -> int:
    p = _load_problem(args.file)
    rec = sv.recover_multipliers(p)
    payload = {
        "lambda_prefix": [str(v) for v in rec.lam.prefix],
        "lambda_inf": str(rec.lam_inf),
        "lambda_hat_tail": str(rec.lam_hat.tail.c),
        "penalized_value": fmt_value(rec.penalized_value),
    }
    text = (
        f"lambda prefix: {[str(v) for v in rec.lam.prefix]}\n"
        f"lambda_inf: {rec.lam_inf}\nlambda_hat tail: {rec.lam_hat.tail.c}\n"
        f"penalized value: {fmt_value(rec.penalized_value)}"
    )
    return _emit(args, payload, text)


def cmd_gallery(args) -> int:
    item = gallery(args.name)
    if isinstance(item, DualBallGallery):
        if not args.query:
            raise GalleryError("dual-ball gallery needs --query PATTERN")
        q = parse_pattern(json.loads(args.query), "$.query")
        rep = item.query(q)
        payload = {
            "v_p": fmt_value(rep.v_p),
            "v_pstar": fmt_value(rep.v_pstar),
            "gap": rep.gap,
        }
        text = (
            f"v(P_x*) = {fmt_value(rep.v_p)}, v(P**_x*) = {fmt_value(rep.v_pstar)}"
            + ("  [GAP]" if rep.gap else "  [no gap]")
        )
        return _emit(args, payload, text)
    if args.format == "json":
        print(json.dumps(problem_doc(item), sort_keys=True, indent=2))
    else:
        print(dump_problem(item))
    return 0


def cmd_oracle(args) -> int:
    p = _load_problem(args.file)
    lo_s, hi_s = args.range.split(":")
    lo, hi = parse_rat(lo_s, "$.range"), parse_rat(hi_s, "$.range")
    report = cross_check(p.objective, args.var, lo, hi, args.samples)
    payload = {
        "variable": report.variable,
        "deviation": report.deviation,
        "modulus": report.modulus,
        "ok": report.ok,
    }
    text = (
        f"cross-check on {report.variable}: deviation {report.deviation:.3g} "
        f"(grid modulus {report.modulus:.3g}) -> {'ok' if report.ok else 'FAIL'}"
    )
    return _emit(args, payload, text)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="relaxlab",
        description="biconjugate-relaxation laboratory for countable convex programs",
    )
    ap.add_argument("--format", choices=("human", "json"), default="human")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="exact optimal value of the primal problem")
    s.add_argument("file")
    s.set_defaults(fn=cmd_solve)

    s = sub.add_parser("relax", help="build and solve one relaxation variant")
    s.add_argument("file")
    s.add_argument("--variant", required=True,
                   choices=[v.value for v in Variant])
    s.set_defaults(fn=cmd_relax)

    s = sub.add_parser("report", help="full gap report across variants")
    s.add_argument("file")
    s.add_argument("--variants", default="")
    s.set_defaults(fn=cmd_report)

    s = sub.add_parser("slater", help="search for a Slater certificate")
    s.add_argument("file")
    s.add_argument("--reinforced", action="store_true")
    s.add_argument("--weights", default="")
    s.set_defaults(fn=cmd_slater)

    s = sub.add_parser("certify", help="check 0 = inf max{f0 - alpha, f}")
    s.add_argument("file")
    s.add_argument("--alpha", required=True)
    s.set_defaults(fn=cmd_certify)

    s = sub.add_parser("multipliers", help="recover validated multipliers")
    s.add_argument("file")
    s.set_defaults(fn=cmd_multipliers)

    s = sub.add_parser("gallery", help="print a built-in gallery problem")
    s.add_argument("name")
    s.add_argument("--query", default="")
    s.set_defaults(fn=cmd_gallery)

    s = sub.add_parser("oracle", help="numerical cross-check along one variable")
    s.add_argument("file")
    s.add_argument("--var", required=True)
    s.add_argument("--range", required=True, metavar="LO:HI")
    s.add_argument("--samples", type=int, default=257)
    s.set_defaults(fn=cmd_oracle)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ParseError, ConvexityError, GalleryError, FileNotFoundError,
            json.JSONDecodeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except ConjugacyRefusal as err:
        print(f"refused: {err}", file=sys.stderr)
        return 3
    except InternalInvariantError as err:
        print(f"internal invariant violated: {err}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
