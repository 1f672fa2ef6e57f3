"""Command line interface.

Exit codes: 0 the property holds, 1 it fails (a table is printed), 2 bad
input, 3 inconclusive.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from . import fixtures
from .covering import compute_sheet_labeling
from .docfile import load_document, serialize_document
from .errors import InconclusiveError, ParseError, QPError
from .fixtures import QPFixture, cover_from_document
from .grading import build_extended_cyclic_cover, check_nice_grading, check_non_wrapping, find_nice_grading
from .grassmannian import QuotCalculator, euler_gr, verify_projection_euler
from .jacobian import build_truncated_jacobian, supports
from .quiver import Potential
from .scattering import (TruncatedSeries, compare_theta_covering, format_rational, format_series,
                         initial_cluster_walls, initial_cover_walls, rank2_complete, restrict_walls, same_walls,
                         theta_stability)
from .seeds import dimension_vectors, seed_covering, seed_from_quiver
from .surface import SurfaceCoverSpec, cyclic_surface_cover, four_punctured_sphere, once_punctured_torus

OK, FAIL, INPUT, INCONCLUSIVE = 0, 1, 2, 3

SURFACES = {"torus1p": once_punctured_torus, "sphere4p": four_punctured_sphere}


class Reporter:
    def __init__(self, as_json: bool, out):
        self.as_json = as_json
        self.out = out
        self.data = {}
        self.lines = []

    def line(self, text=""):
        self.lines.append(text)

    def table(self, header, rows):
        widths = [max(len(str(x)) for x in col) for col in zip(header, *rows)] if rows else [len(h) for h in header]
        self.lines.append("  ".join(str(h).ljust(w) for h, w in zip(header, widths)).rstrip())
        for r in rows:
            self.lines.append("  ".join(str(x).ljust(w) for x, w in zip(r, widths)).rstrip())

    def flush(self):
        if self.as_json:
            self.out.write(json.dumps(_jsonable(self.data), sort_keys=True, indent=2) + "\n")
        else:
            self.out.write("\n".join(self.lines) + ("\n" if self.lines else ""))


def _jsonable(x):
    if isinstance(x, Fraction):
        return format_rational(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def _dimvec(text, vertices):
    parts = [p for p in text.replace(" ", "").split(",") if p]
    if any(":" in p for p in parts):
        out = {v: 0 for v in vertices}
        for p in parts:
            v, _, k = p.rpartition(":")
            if v not in out:
                raise ParseError(f"unknown vertex {v!r} in dimension vector")
            out[v] = int(k)
        return out
    if len(parts) != len(vertices):
        raise ParseError(f"dimension vector needs {len(vertices)} entries ({', '.join(vertices)})")
    return dict(zip(vertices, (int(p) for p in parts)))


def _fmt_n(n):
    return "(" + ",".join(str(x) for x in n) + ")"


# input resolution


def _doc(args):
    return load_document(args.file) if getattr(args, "file", None) else None


def _cover(args):
    name = args.cover
    if not name:
        raise ParseError("--cover is required")
    doc = _doc(args)
    if doc is not None:
        return cover_from_document(doc, name)
    return fixtures.load_cover(name)


def _qp(args) -> QPFixture:
    doc = _doc(args)
    if doc is not None:
        qname = args.quiver or (next(iter(doc.quivers)) if len(doc.quivers) == 1 else None)
        if qname is None:
            raise ParseError("the file holds several quivers; pick one with --quiver")
        if qname not in doc.quivers:
            raise ParseError(f"no quiver named {qname!r}")
        q = doc.quivers[qname]
        w = next((p for p in doc.potentials.values() if p.quiver == q), Potential.zero(q))
        return QPFixture(qname, q, w)
    if getattr(args, "cover", None):
        cf = _cover(args)
        return QPFixture(cf.name, cf.covering.total, cf.potential)
    name = args.quiver or args.fixture
    if not name:
        raise ParseError("give --fixture, --quiver or --file")
    return fixtures.load_qp(name)


# commands


def cmd_validate(args, rep):
    doc = _doc(args)
    if doc is not None:
        covers = [(n, c) for n, c in doc.covers.items() if not args.cover or n == args.cover]
        rep.data["quivers"] = sorted(doc.quivers)
    elif args.cover:
        cf = _cover(args)
        covers = [(cf.name, cf.covering)]
    else:
        covers = [(n, fixtures.load_cover(n).covering) for n in sorted(fixtures.COVER_FILES)]
    status = OK
    rep.data["covers"] = {}
    for name, c in covers:
        report = c.validate()
        rep.data["covers"][name] = [f"{kind}: {msg}" for kind, msg, _ in report.problems]
        rep.line(f"{name}: {'valid' if report.ok else 'INVALID'}")
        for kind, msg, _ in report.problems:
            rep.line(f"  {kind}: {msg}")
        if not report.ok:
            status = FAIL
    return status


def cmd_jacobian(args, rep):
    f = _qp(args)
    alg = build_truncated_jacobian(f.quiver, f.potential, args.order)
    rep.data.update({"quiver": f.name, "order": args.order, "dimension": alg.dim()})
    rep.line(f"{f.name}: dim A^{args.order} = {alg.dim()}")
    if args.projective:
        p = alg.projective(args.projective)
        rep.data["projective"] = {"vertex": args.projective, "dimension": p.dim, "basis": p.labels,
                                  "dimension_vector": p.dim_vector()}
        rep.line(f"P_{args.projective}: dimension {p.dim}")
        rep.table(["basis element", "vertex"], list(zip(p.labels, p.vertex_of)))
    else:
        rows = [(k, len(alg.block(k).basis)) for k in f.quiver.vertices]
        rep.data["projectives"] = dict(rows)
        rep.table(["vertex", "dim P_k"], rows)
    return OK


def cmd_supports(args, rep):
    cf = _cover(args)
    alg = build_truncated_jacobian(cf.covering.total, cf.potential, args.order)
    p = alg.projective(args.vertex)
    s = supports(p)
    verts = [v for v in cf.covering.total.vertices if v in s.vertices]
    arrows = sorted(s.arrows)
    rep.data.update({"vertex": args.vertex, "order": args.order, "vertices": verts, "arrows": arrows})
    rep.line(f"support of P_{args.vertex} at order {args.order}")
    rep.line("vertices: " + " ".join(verts))
    rep.line("arrows: " + " ".join(arrows))
    return OK


def cmd_grading(args, rep):
    cf = _cover(args)
    c = cf.covering
    alg = build_truncated_jacobian(c.total, cf.potential, args.order)
    verts = [args.vertex] if args.vertex else list(c.total.vertices)
    status = OK
    rep.data.update({"bound": args.bound, "order": args.order, "gradings": {}})
    for k in verts:
        p = alg.projective(k)
        g = find_nice_grading(c, p, args.bound, cf.sheets)
        if g is None:
            status = FAIL
            rep.data["gradings"][k] = None
            rep.line(f"P_{k}: no nice grading within bound {args.bound}")
            continue
        ok, problems = check_nice_grading(c, p, g.vertex_degrees)
        if not ok:
            raise QPError(f"search returned an invalid grading for P_{k}: {problems}")
        rep.data["gradings"][k] = {"vertices": g.vertex_degrees, "arrows": g.arrow_degrees}
        rep.line(f"P_{k}: nice grading found (bound {args.bound})")
        rep.table(["vertex", "degree"], list(g.vertex_degrees.items()))
    return status


def _sheets(cf):
    return cf.sheets if cf.sheets is not None else compute_sheet_labeling(cf.covering)


def cmd_nonwrap(args, rep):
    cf = _cover(args)
    sl = _sheets(cf)
    wa = check_non_wrapping(cf.covering, sl, cf.base_potential, allow_large=args.allow_large)
    if wa is None:
        rep.data["assignment"] = None
        rep.line(f"{cf.name}: no assignment; the potential wraps")
        return FAIL
    rep.data["assignment"] = wa.degrees
    rep.line(f"{cf.name}: non-wrapping assignment")
    rep.table(["arrow", "shift", "degree"], [(a, sl.shifts[a], d) for a, d in wa.degrees.items()])
    return OK


def cmd_extend(args, rep):
    cf = _cover(args)
    sl = _sheets(cf)
    wa = check_non_wrapping(cf.covering, sl, cf.base_potential, allow_large=args.allow_large)
    if wa is None:
        rep.line(f"{cf.name}: potential wraps; no extended cover")
        rep.data["extended"] = None
        return FAIL
    ext = build_extended_cyclic_cover(cf.covering, sl, wa, args.order)
    ext.covering.sigma_potential(cf.base_potential)
    rep.data["extended"] = {"sheets": ext.covering.deck_order, "vertices": len(ext.covering.total.vertices),
                            "arrows": len(ext.covering.total.arrows), "factor_degree": ext.factor.deck_order}
    rep.line(f"{cf.name}: {ext.covering.deck_order}:1 extended cover with "
             f"{len(ext.covering.total.vertices)} vertices; factors through the input with degree "
             f"{ext.factor.deck_order}")
    return OK


def cmd_euler(args, rep):
    if args.kind == "compare-cover":
        return _euler_compare(args, rep)
    f = _qp(args)
    if not args.vertex:
        raise ParseError("--vertex is required")
    n = _dimvec(args.dim, f.quiver.vertices)
    method = {"loc": "loc", "ff": "ff", None: "auto"}[args.method]
    calc = QuotCalculator(f.quiver, f.potential, use_opposite=args.opposite)
    if args.kind == "quot":
        res = calc.quot(args.vertex, n, method)
    else:
        order = args.order if args.order is not None else max(sum(n.values()) - 1, 1)
        res = euler_gr(calc.projective(args.vertex, order), n, method)
    rep.data.update({"kind": args.kind, "vertex": args.vertex, "dim": n, "value": res.value,
                     "method": res.method, "certificate": {k: str(v) for k, v in res.certificate.items()}})
    if res.value is None:
        rep.line(f"chi inconclusive ({res.method}): {res.certificate}")
        return INCONCLUSIVE
    rep.line(f"chi = {res.value}  [{res.method}{', ' + res.caveat if res.caveat else ''}]")
    return OK


def _euler_compare(args, rep):
    cf = _cover(args)
    c = cf.covering
    base_vs = list(c.base.vertices)
    if args.dim:
        dims = [_dimvec(args.dim, base_vs)]
    else:
        dims = [dict(zip(base_vs, n)) for n in dimension_vectors(len(base_vs), args.max_total)]
    if args.vertex:
        ks = [args.vertex]
    else:
        ks = [c.fiber(vb)[0] for vb in base_vs]
    method = {"loc": "loc", "ff": "ff", None: "auto"}[args.method]
    bc, cc = QuotCalculator(c.base, cf.base_potential), QuotCalculator(c.total, cf.potential)
    rows, status, data = [], OK, []
    for k in ks:
        for nb in dims:
            r = verify_projection_euler(c, cf.base_potential, cf.potential, k, nb, mode=args.mode,
                                        method=method, base_calc=bc, cover_calc=cc)
            parts = [x.value for _, x in r["rows"] if x.value != 0]
            if not r["conclusive"]:
                status = max(status, INCONCLUSIVE) if status != FAIL else FAIL
                verdict = "inconclusive"
            elif r["equal"]:
                verdict = "ok"
            else:
                status = FAIL
                verdict = "MISMATCH"
            fiber = "+".join(str(v) for v in parts) if parts else "0"
            rows.append((k, _fmt_n(nb[v] for v in base_vs), r["base"], fiber, r["sum"], verdict))
            data.append({"vertex": k, "nbar": nb, "base": r["base"], "sum": r["sum"], "verdict": verdict,
                         "fiber": [{"n": n, "value": x.value} for n, x in r["rows"] if x.value]})
    rep.data.update({"cover": cf.name, "mode": args.mode, "rows": data})
    rep.line(f"{cf.name}: base chi against fiber sums ({args.mode})")
    rep.table(["k", "nbar", "base", "fiber values", "sum", "verdict"], rows)
    return status


def cmd_theta(args, rep):
    if args.kind == "compare":
        cf = _cover(args)
        res = compare_theta_covering(cf.covering, cf.base_potential, cf.potential, args.order)
        table = [(i, _fmt_n(n), format_rational(a), format_rational(b)) for i, n, a, b in res.table]
        rep.data.update({"cover": cf.name, "order": args.order, "discrepancies": table})
        rep.line(f"{cf.name}: projected cover theta against base theta at order {args.order}")
        if not table:
            rep.line("no discrepancies")
            return OK
        rep.table(["index", "n", "projected cover", "base"], table)
        return FAIL
    f = _qp(args)
    th = theta_stability(f.quiver, f.potential, None, args.order, principal=args.principal,
                         opposite=args.opposite)
    names = [f"y[{v}]" for v in th.seed.unfrozen]
    images = {i: format_series(s, names) for i, s in th.images.items()}
    rep.data.update({"quiver": f.name, "order": args.order, "identity": th.is_identity(), "images": images})
    if th.is_identity():
        rep.line(f"{f.name}: identity at order {args.order}")
    for i, s in images.items():
        rep.line(f"theta(x[{i}]) = x[{i}] * ({s})")
    return OK


def _rank2_seed(args):
    f = _qp(args)
    sd = seed_from_quiver(f.quiver)
    return f, sd


def cmd_rank2(args, rep):
    f, sd = _rank2_seed(args)
    walls = initial_cluster_walls(sd, args.order)
    diagram = rank2_complete(sd, walls, args.order)
    if args.kind == "complete":
        rows = []
        for w in diagram.nontrivial():
            fn = w.function(args.order)
            series = format_series(TruncatedSeries(1, len(fn) - 1, {(j,): c for j, c in enumerate(fn)}), ["z"])
            rows.append((_fmt_n(w.n0), w.kind, "-" if w.direction is None else _fmt_n(
                format_rational(x) for x in w.direction), series))
        rep.data.update({"quiver": f.name, "order": args.order,
                         "walls": [{"n0": r[0], "kind": r[1], "direction": r[2], "function": r[3]} for r in rows]})
        rep.line(f"{f.name}: {len(rows)} nontrivial walls at order {args.order}")
        rep.table(["n0", "kind", "direction", "function of z = y^n0"], rows)
        return OK
    ok = diagram.loop_product().is_identity()
    lower = rank2_complete(sd, walls, args.order - 1) if args.order > 1 else None
    coherent = lower is None or diagram.truncate(args.order - 1).signature() == lower.signature()
    rep.data.update({"quiver": f.name, "order": args.order, "loop_identity": ok, "order_coherent": coherent})
    rep.line(f"loop product is the identity: {ok}")
    rep.line(f"agrees with order {args.order - 1} after truncation: {coherent}")
    return OK if ok and coherent else FAIL


def cmd_restrict(args, rep):
    cf = _cover(args)
    c = cf.covering
    sd = seed_from_quiver(c.total)
    sc = seed_covering(sd, {i: c.vmap[i] for i in sd.indices})
    restricted = restrict_walls(sc, initial_cover_walls(sd, args.order), args.order)
    folded = initial_cluster_walls(sc.base, args.order)
    same = same_walls(restricted, folded, args.order)
    rows = [(_fmt_n(w.n0), w.kind, " ".join(f"{j}:{format_rational(v)}" for j, v in sorted(w.hamiltonian.items())))
            for w in restricted]
    rep.data.update({"cover": cf.name, "order": args.order, "matches_folded_seed": same,
                     "walls": [{"n0": r[0], "kind": r[1], "hamiltonian": r[2]} for r in rows]})
    rep.line(f"{cf.name}: restricted initial walls (Hamiltonian coefficients j:c of y^(j n0))")
    rep.table(["n0", "kind", "hamiltonian"], rows)
    rep.line(f"equal to the initial walls of the folded seed: {same}")
    return OK if same else FAIL


def cmd_surface(args, rep):
    if args.fixture not in SURFACES:
        raise ParseError(f"unknown surface {args.fixture!r}; known: {', '.join(sorted(SURFACES))}")
    t = SURFACES[args.fixture]()
    cut = args.cut or t.arcs[1]
    name = args.name or f"{args.fixture}-cover{args.sheets}"
    total, c, sl = cyclic_surface_cover(SurfaceCoverSpec(t, args.sheets, cut), name=name)
    c.total.name = f"{args.fixture}{args.sheets}"
    c.base.name = args.fixture
    from .fixtures import _cover_doc
    from .surface import surface_potential

    wbar = surface_potential(t)
    text = serialize_document(_cover_doc(c, sl, wbar, c.sigma_potential(wbar)))
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    rep.data.update({"cover": name, "sheets": args.sheets, "cut": cut, "vertices": list(c.total.vertices),
                     "shifts": sl.shifts})
    rep.line(f"{name}: {args.sheets}-sheeted cover of {args.fixture} cut along {cut}")
    rep.table(["arrow", "sheet shift"], sorted(sl.shifts.items()))
    if not args.output and not rep.as_json:
        rep.line("")
        rep.lines.extend(text.rstrip("\n").split("\n"))
    return OK


def cmd_fixtures(args, rep):
    names = fixtures.fixture_names()
    names["surfaces"] = sorted(SURFACES)
    rep.data.update(names)
    for kind, ns in names.items():
        rep.line(f"{kind}: {' '.join(ns)}")
    return OK


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--file", help="input document")
    common.add_argument("--fixture", help="named fixture")
    common.add_argument("--quiver", help="quiver name inside --file, or a named fixture")
    common.add_argument("--cover", help="cover name inside --file, or a named cover fixture")
    common.add_argument("--json", action="store_true", help="machine-readable output")

    p = argparse.ArgumentParser(prog="qpcover", description="Coverings of quivers with potential.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", parents=[common])
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("jacobian", parents=[common])
    s.add_argument("--order", type=int, required=True)
    s.add_argument("--projective")
    s.set_defaults(func=cmd_jacobian)

    s = sub.add_parser("supports", parents=[common])
    s.add_argument("--vertex", required=True)
    s.add_argument("--order", type=int, required=True)
    s.set_defaults(func=cmd_supports)

    s = sub.add_parser("grading", parents=[common])
    s.add_argument("kind", choices=["nice"])
    s.add_argument("--vertex")
    s.add_argument("--order", type=int, default=3)
    s.add_argument("--bound", type=int, default=1)
    s.set_defaults(func=cmd_grading)

    s = sub.add_parser("nonwrap", parents=[common])
    s.add_argument("--allow-large", action="store_true", help="search beyond 24 binary variables")
    s.set_defaults(func=cmd_nonwrap)

    s = sub.add_parser("extend-cover", parents=[common])
    s.add_argument("--order", type=int, required=True)
    s.add_argument("--allow-large", action="store_true")
    s.set_defaults(func=cmd_extend)

    s = sub.add_parser("euler", parents=[common])
    s.add_argument("kind", choices=["gr", "quot", "compare-cover"])
    s.add_argument("--dim")
    s.add_argument("--vertex")
    s.add_argument("--order", type=int)
    s.add_argument("--method", choices=["loc", "ff"])
    s.add_argument("--opposite", action="store_true")
    s.add_argument("--max-total", type=int, default=3)
    s.add_argument("--mode", choices=["gr", "quot"], default="gr")
    s.set_defaults(func=cmd_euler)

    s = sub.add_parser("theta", parents=[common])
    s.add_argument("kind", choices=["stability", "compare"])
    s.add_argument("--order", type=int, required=True)
    s.add_argument("--principal", action="store_true")
    s.add_argument("--opposite", action="store_true")
    s.set_defaults(func=cmd_theta)

    s = sub.add_parser("rank2", parents=[common])
    s.add_argument("kind", choices=["complete", "loopcheck"])
    s.add_argument("--order", type=int, required=True)
    s.set_defaults(func=cmd_rank2)

    s = sub.add_parser("restrict-walls", parents=[common])
    s.add_argument("--order", type=int, default=4)
    s.set_defaults(func=cmd_restrict)

    s = sub.add_parser("surface", parents=[common])
    s.add_argument("kind", choices=["cover"])
    s.add_argument("--sheets", type=int, required=True)
    s.add_argument("--cut")
    s.add_argument("--name")
    s.add_argument("--output")
    s.set_defaults(func=cmd_surface)

    s = sub.add_parser("fixtures", parents=[common])
    s.add_argument("kind", choices=["list"])
    s.set_defaults(func=cmd_fixtures)
    return p


def run_command(argv, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return INPUT if e.code else OK
    threads = os.environ.get("QPCOVER_THREADS")
    if threads is not None and not (threads.isdigit() and int(threads) > 0):
        err.write("error: QPCOVER_THREADS must be a positive integer\n")
        return INPUT
    rep = Reporter(args.json, out)
    try:
        code = args.func(args, rep)
    except InconclusiveError as e:
        err.write(f"inconclusive: {e}\n")
        return INCONCLUSIVE
    except (QPError, OSError, KeyError) as e:
        err.write(f"error: {e}\n")
        return INPUT
    rep.flush()
    return code


def main(argv=None):
    sys.exit(run_command(sys.argv[1:] if argv is None else argv))


if __name__ == "__main__":
    main()
