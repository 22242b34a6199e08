"""Command line entry point: ``artifact <command> ...``.

Exit status: 0 when every check passes, 1 when a mathematical check fails,
2 on usage or parse errors, 3 when a resource bound is hit.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .abgroup import Group
from .classification import classify_involutive
from .errors import (ArtifactError, IntegralityViolation, InvalidArgument, NotFound, ParseError, Rejected,
                     ResourceLimit)
from .exactnum import Phase
from .families import FamilyInput, admissibility_report, family_build, family_instance_make
from .metric import QuadraticForm, as_phase, gauss_sum
from .moddata import (DEFAULT_TOL_INT, DEFAULT_TOL_REL, ModularData, check_fs2, check_fs3, verify_relations,
                      verlinde_numeric)
from .workbench import SearchSpec, export_json, fixture_names, reproduce, search

OK, FAILED, USAGE, LIMIT = 0, 1, 2, 3


def _read_json(path: str):
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def _emit(args, payload: dict, text: str) -> None:
    print(json.dumps(payload, indent=1) if args.json else text)


def _build(args) -> int:
    inp = FamilyInput.from_json(_read_json(args.input))
    rep = admissibility_report(inp)
    if not rep.ok:
        _emit(args, {"admissibility": rep.to_json()}, rep.summary())
        return FAILED
    md = family_build(family_instance_make(inp), args.tol_rel)
    if args.output:
        export_json(md, args.output)
    if args.json or not args.output:
        print(json.dumps(md.to_json(), indent=1))
    else:
        print(f"wrote {md.name} to {args.output}")
    return OK


def _export(args) -> int:
    data = _read_json(args.input)
    if "family" in data:
        inp = FamilyInput.from_json(data)
        try:
            md = family_build(family_instance_make(inp), args.tol_rel)
        except Rejected as exc:
            print(exc.report.summary(), file=sys.stderr)
            return FAILED
    else:
        md = ModularData.from_json(data)
    export_json(md, args.output)
    print(f"wrote rank {md.rank} data to {args.output}")
    return OK


def _verify(args) -> int:
    md = ModularData.from_json(_read_json(args.input))
    rel = verify_relations(md, args.tol_rel)
    out = {"relations": rel.to_json()}
    lines = [f"rank {md.rank}"]
    lines += [f"  {'ok  ' if rel.passes[k] else 'FAIL'} {k}: {v:.2e}" for k, v in rel.residuals.items()]
    ok = rel.ok
    if rel.ok:
        try:
            fusion = verlinde_numeric(md, args.tol_int)
        except IntegralityViolation as exc:
            out["verlinde"] = {"ok": False, "error": str(exc)}
            lines.append(f"  FAIL verlinde: {exc}")
            ok = False
        else:
            defects = fusion.symmetry_defect(md.duality)
            out["verlinde"] = {"ok": not defects, "residual": fusion.residual, "defects": defects}
            lines.append(f"  {'ok  ' if not defects else 'FAIL'} verlinde: residual {fusion.residual:.2e}"
                         + (f" ({', '.join(defects)})" if defects else ""))
            for name, checks in (("fs2", check_fs2(md, fusion, args.tol_int)),
                                 ("fs3", check_fs3(md, fusion, args.tol_int))):
                bad = [str(c.label) for c in checks if not c.ok]
                out[name] = {"ok": not bad, "failing": bad}
                lines.append(f"  {'ok  ' if not bad else 'FAIL'} {name}" + (f": {', '.join(bad)}" if bad else ""))
                ok = ok and not bad
            ok = ok and not defects
    out["ok"] = ok
    _emit(args, out, "\n".join(lines))
    return OK if ok else FAILED


def _shape(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad group shape {text!r}; use e.g. 4 or 3x3") from None


def _search(args) -> int:
    if args.spec:
        spec = SearchSpec.from_json(_read_json(args.spec))
    else:
        if not (args.family and args.first and args.second):
            raise InvalidArgument("give --spec, or --family with --first and --second")
        spec = SearchSpec(args.family, tuple(args.first), tuple(args.second), args.involution,
                          not args.no_fs, True)
    hits = search(spec, args.threads)
    payload = {"spec": spec.to_json(), "count": len(hits),
               "found": [h.instance.source.to_json() for h in hits]}
    lines = [f"{len(hits)} solution(s) found"]
    lines += [f"  {h.instance.summary()}" for h in hits]
    _emit(args, payload, "\n".join(lines))
    return OK


def _classify(args) -> int:
    rep = classify_involutive(args.fixed, args.max_order)
    _emit(args, rep.to_json(), rep.summary())
    return OK if rep.ok else FAILED


def _gauss(args) -> int:
    if args.form:
        form = QuadraticForm.from_json(_read_json(args.form))
    else:
        if not args.orders or not args.diag:
            raise InvalidArgument("give --form, or --orders with --diag")
        g = Group(_shape(args.orders))
        off = []
        for item in args.offdiag or ():
            i, j, p = item.split(",")
            off.append((int(i), int(j), Phase.parse(p)))
        form = QuadraticForm.make(g, [Phase.parse(p) for p in args.diag.split(",")], off)
    rows = []
    for k in range(1, args.k_max + 1):
        g = gauss_sum(form, k)
        ph = as_phase(g)
        rows.append({"k": k, "value": [g.value.real, g.value.imag], "phase": str(ph) if ph else None})
    text = [f"{form}"] + [f"  G(q,{r['k']}) = {complex(*r['value']):.6f}" + (f"  = exp(2 pi i {r['phase']})"
                                                                           if r["phase"] else "") for r in rows]
    _emit(args, {"form": form.to_json(), "sums": rows}, "\n".join(text))
    return OK


def _reproduce(args) -> int:
    names = fixture_names() if args.name == "all" else [args.name]
    if args.list:
        print("\n".join(fixture_names()))
        return OK
    reports = [reproduce(n, args.tol_rel, args.tol_int) for n in names]
    _emit(args, {"reports": [r.to_json() for r in reports]}, "\n".join(r.summary() for r in reports))
    return OK if all(r.passed for r in reports) else FAILED


def parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol-rel", type=float, default=DEFAULT_TOL_REL, help="relation tolerance")
    common.add_argument("--tol-int", type=float, default=DEFAULT_TOL_INT, help="integrality tolerance")
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--threads", type=int, default=None, help="worker threads for search")

    p = argparse.ArgumentParser(prog="artifact",
                                description="Modular data from pairs of involutive metric groups.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", parents=[common], help="family input JSON -> modular data JSON")
    b.add_argument("input")
    b.add_argument("-o", "--output")
    b.set_defaults(run=_build)

    e = sub.add_parser("export", parents=[common], help="write modular data JSON from family input or data")
    e.add_argument("input")
    e.add_argument("-o", "--output", required=True)
    e.set_defaults(run=_export)

    v = sub.add_parser("verify", parents=[common], help="check relations, Verlinde integrality and FS2/FS3")
    v.add_argument("input")
    v.set_defaults(run=_verify)

    s = sub.add_parser("search", parents=[common], help="admissible pairs for a family")
    s.add_argument("--spec")
    s.add_argument("--family", choices=list("ABCDE"))
    s.add_argument("--first", type=_shape, action="append", help="shape of G, e.g. 5 or 3x3 (repeatable)")
    s.add_argument("--second", type=_shape, action="append", help="shape of Gamma (repeatable)")
    s.add_argument("--involution", choices=["minus", "enumerate"], default="minus")
    s.add_argument("--no-fs", action="store_true", help="skip the indicator filters")
    s.set_defaults(run=_search)

    c = sub.add_parser("classify", parents=[common], help="involutive metric 2-groups with given fixed points")
    c.add_argument("--fixed", choices=["z2", "z2z2"], required=True)
    c.add_argument("--max-order", type=int, default=16)
    c.set_defaults(run=_classify)

    g = sub.add_parser("gauss", parents=[common], help="Gauss sums G(q,k) of a form")
    g.add_argument("--form", help="quadratic form JSON")
    g.add_argument("--orders", help="group shape, e.g. 2x4")
    g.add_argument("--diag", help="q on generators, e.g. 1/4,3/8")
    g.add_argument("--offdiag", action="append", help="i,j,phase for a generator pairing (repeatable)")
    g.add_argument("--k-max", type=int, default=4)
    g.set_defaults(run=_gauss)

    r = sub.add_parser("reproduce", parents=[common], help="run a fixture from the corpus (or 'all')")
    r.add_argument("name", nargs="?", default="all")
    r.add_argument("--list", action="store_true")
    r.set_defaults(run=_reproduce)
    return p


def main(argv=None) -> int:
    args = parser().parse_args(argv)
    try:
        return args.run(args)
    except ResourceLimit as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return LIMIT
    except Rejected as exc:
        print(exc.report.summary() if exc.report else str(exc), file=sys.stderr)
        return FAILED
    except (ParseError, InvalidArgument, NotFound) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE
    except ArtifactError as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return FAILED


if __name__ == "__main__":
    sys.exit(main())
