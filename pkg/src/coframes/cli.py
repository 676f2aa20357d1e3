"""Command line front end.

Subcommands cover model listing, page tables, complex reports, verification
suites, operator application, and 7-variable orbit classification.  Output
is text by default; --format json emits canonical JSON (sorted keys, no
timings) so identical seed and config give byte-identical bytes, and
--format csv emits flat rows for spreadsheets.

Exit codes: 0 all checks pass, 1 at least one verification failure,
2 usage or data error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import random
import sys
from typing import Dict, List, Optional, Sequence

from . import operators as ops
from . import ratpoly as rp
from . import splitting as sp
from . import verify as ver
from .forms import form_zero
from .models import (GeometryModel, builtin_model, builtin_names,
                     levi_apply, model_from_json, orbit_invariant,
                     verify_structure)
from .pages import Page0, Page1, check_function_linear, e0_apply

GEOMETRIES = builtin_names() + ["symplectic4"]

DEFAULT_SEED = int(os.environ.get("COFRAMES_SEED", "7"))
DEFAULT_DEGREE = int(os.environ.get("COFRAMES_DEGREE", "3"))


class UsageError(Exception):
    pass


def _complex_names(geom: str) -> List[str]:
    if geom == "symplectic4":
        return ["rs"]
    if geom == "g2_5":
        return ["bgg", "ambient", "basic"]
    return ["bgg"]


def _load_model(geom: str) -> GeometryModel:
    if geom in builtin_names():
        return builtin_model(geom)
    raise UsageError("unknown geometry %r; choose from %s"
                     % (geom, ", ".join(GEOMETRIES)))


def _resolution(geom: str, variant: Optional[str]) -> ops.Resolution:
    if geom == "symplectic4":
        if variant not in (None, "rs"):
            raise UsageError("symplectic4 has only the rs complex")
        return ops.build_rs_complex(2)
    model = _load_model(geom)
    want = variant or "bgg"
    if want not in _complex_names(geom):
        raise UsageError("geometry %s has no complex named %r" % (geom, want))
    return ops.named_complex(model, want)


def _emit(args, payload: dict, text_lines: Sequence[str],
          csv_rows: Sequence[Sequence[object]]) -> None:
    if args.format == "json":
        sys.stdout.write(json.dumps(payload, sort_keys=True, indent=2))
        sys.stdout.write("\n")
    elif args.format == "csv":
        w = csv.writer(sys.stdout)
        for row in csv_rows:
            w.writerow(row)
    else:
        for line in text_lines:
            print(line)


# #### list ################################################################

def cmd_list(args) -> int:
    rows = []
    for g in GEOMETRIES:
        if g == "symplectic4":
            nvars, weights = 4, (1, 1, 1, 1)
        else:
            m = builtin_model(g)
            nvars, weights = m.nvars, m.weights
        rows.append({"geometry": g, "nvars": nvars,
                     "weights": list(weights),
                     "complexes": _complex_names(g)})
    text = ["%-12s %2s  %-14s %s" % ("geometry", "n", "weights", "complexes")]
    for r in rows:
        text.append("%-12s %2d  %-14s %s"
                    % (r["geometry"], r["nvars"],
                       ",".join(str(w) for w in r["weights"]),
                       " ".join(r["complexes"])))
    csv_rows = [("geometry", "nvars", "weights", "complexes")]
    for r in rows:
        csv_rows.append((r["geometry"], r["nvars"],
                         " ".join(str(w) for w in r["weights"]),
                         " ".join(r["complexes"])))
    _emit(args, {"geometries": rows}, text, csv_rows)
    return 0


# #### page ################################################################

def cmd_page(args) -> int:
    model = _load_model(args.geometry)
    if args.level == 0:
        dims = Page0(model).dims()
    else:
        dims = Page1(model).dims()
    labels = ver.SCHUR_LABELS.get(model.name, {}) if args.level == 1 else {}
    cells = [{"p": p, "q": q, "dim": d,
              "label": ",".join(str(c) for c in labels[(p, q)])
              if (p, q) in labels else ""}
             for (p, q), d in sorted(dims.items())]
    ps = sorted({c["p"] for c in cells})
    qs = sorted({c["q"] for c in cells})
    grid = {(c["p"], c["q"]): c["dim"] for c in cells}
    arrow = "E0 arrows: (p,q) -> (p+1,q-1)" if args.level == 0 \
        else "E1 arrows: (p,q) -> (p+1,q)"
    text = ["%s level %d  (%s)" % (model.name, args.level, arrow),
            "      " + "".join("p=%-4d" % p for p in ps)]
    for q in reversed(qs):
        row = "q=%-3d " % q
        for p in ps:
            d = grid.get((p, q))
            row += "%-6s" % (d if d else ".")
        text.append(row)
    if labels:
        text.append("labels: " + "  ".join(
            "(%d,%d)=%s" % (p, q, ",".join(str(c) for c in lab))
            for (p, q), lab in sorted(labels.items())))
    csv_rows = [("p", "q", "dim", "label")]
    for c in cells:
        csv_rows.append((c["p"], c["q"], c["dim"], c["label"]))
    _emit(args, {"geometry": model.name, "level": args.level,
                 "cells": cells}, text, csv_rows)
    return 0


# #### report ##############################################################

def cmd_report(args) -> int:
    res = _resolution(args.geometry, args.complex)
    rng = random.Random(args.seed)
    ranks = res.ranks()
    orders = res.orders(rng)
    checks: Dict[str, bool] = {}
    if res.variant in ("bgg", "rs"):
        checks["palindrome"] = ranks == ranks[::-1]
    if res.model is not None and res.model.name in ver.SCHUR_LABELS \
            and (args.complex or "bgg") == "bgg":
        checks["schur_dims"] = ver.cross_check_dims(res.model).ok
    ok = all(checks.values())
    nodes = [{"index": i, "rank": n.rank,
              "weights": sorted(set(n.weights))}
             for i, n in enumerate(res.nodes)]
    operators = [{"index": i, "order": h.order,
                  "order_bound": h.order_bound}
                 for i, h in enumerate(res.operators)]
    text = ["%s complex %s" % (res.name, res.variant),
            "ranks:  " + " ".join(str(r) for r in ranks),
            "orders: " + " ".join(str(o) for o in orders)]
    for cid in sorted(checks):
        text.append("%s: %s" % (cid, "PASS" if checks[cid] else "FAIL"))
    csv_rows = [("kind", "index", "value")]
    for i, r in enumerate(ranks):
        csv_rows.append(("rank", i, r))
    for i, o in enumerate(orders):
        csv_rows.append(("order", i, o))
    for cid in sorted(checks):
        csv_rows.append(("check", cid, "PASS" if checks[cid] else "FAIL"))
    _emit(args, {"geometry": args.geometry, "complex": res.variant,
                 "ranks": ranks, "orders": orders, "nodes": nodes,
                 "operators": operators, "checks": checks, "ok": ok},
          text, csv_rows)
    return 0 if ok else 1


# #### verify ##############################################################

def _check_lines(model: GeometryModel, degree: int, samples: int,
                 seed: int, skip: Sequence[str]) -> List[dict]:
    out: List[dict] = []

    def add(cid: str, fn) -> None:
        if cid.split("[")[0] in skip:
            return
        try:
            okflag, detail = fn()
        except Exception as exc:  # present, never hide
            okflag, detail = False, "%s: %s" % (type(exc).__name__, exc)
        out.append({"id": cid, "ok": bool(okflag), "detail": detail})

    def structure():
        rep = verify_structure(model)
        return rep.ok, "congruences=%d" % len(rep.congruences)
    add("structure", structure)

    nvars = model.nvars
    mults = [rp.var(0, nvars),
             rp.add(rp.const(2, nvars), rp.var(nvars - 1, nvars)),
             rp.mul(rp.var(0, nvars), rp.var(nvars - 1, nvars))]

    def mono(idx):
        f = form_zero(nvars, len(idx), model.basis_tag)
        f.add_term(tuple(idx), rp.const(1, nvars))
        return f

    def e0_linear():
        secs = [mono((i,)) for i in range(nvars)]
        secs += [mono((i, j)) for i in range(nvars)
                 for j in range(i + 1, min(nvars, i + 3))]
        okflag, fails = check_function_linear(
            lambda a: e0_apply(model, a), secs, mults)
        return okflag, "%d sections" % len(secs)
    add("e0_linear", e0_linear)

    vert = model.selectors.get("vertical", ())
    if vert:
        def levi_linear():
            secs = [mono((a,)) for a in vert]
            okflag, fails = check_function_linear(
                lambda a: levi_apply(model, a), secs, mults)
            return okflag, "%d vertical covectors" % len(secs)
        add("levi_linear", levi_linear)

    shape = (len(model.selectors.get("vertical", ())),
             len(model.selectors.get("horizontal", ())))
    if shape in ((3, 3), (3, 4)):
        def obstruction_linear():
            fn, inputs = sp.obstruction_hom(model)
            okflag, fails = check_function_linear(fn, inputs, mults)
            return okflag, "%d inputs" % len(inputs)
        add("obstruction_linear", obstruction_linear)

        def splitting_flat():
            rep = sp.normalize_splitting(model)
            okflag = rep.obstruction_zero
            detail = "iterations=%d" % rep.iterations
            if model.name == "dist3in6":
                cert = sp.certify_two_adapted(rep.normalized)
                okflag = okflag and cert.ok
                detail += " two_adapted=%s" % cert.ok
            return okflag, detail
        add("splitting", splitting_flat)

    def palindrome():
        ladder = Page1(model).ladder()
        return ladder == ladder[::-1], " ".join(str(d) for d in ladder)
    add("palindrome", palindrome)

    if model.name in ver.SCHUR_LABELS:
        def schur_dims():
            rep = ver.cross_check_dims(model)
            return rep.ok, "%d labelled cells" % len(rep.rows)
        add("schur_dims", schur_dims)

    if shape == (3, 4):
        def orbit():
            rep = orbit_invariant(model)
            expected = {"elliptic7": "elliptic",
                        "hyperbolic7": "hyperbolic"}.get(model.name)
            okflag = rep.kind == expected if expected \
                else rep.kind in ("elliptic", "hyperbolic")
            return okflag, "kind=%s inertia=%s" % (rep.kind, rep.inertia)
        add("orbit", orbit)

    return out


def _complex_checks(geom: str, variant: str, degree: int, samples: int,
                    seed: int, skip: Sequence[str]) -> List[dict]:
    out: List[dict] = []
    res = _resolution(geom, variant)

    def add(cid, fn):
        if cid.split("[")[0] in skip:
            return
        try:
            okflag, detail = fn()
        except Exception as exc:
            okflag, detail = False, "%s: %s" % (type(exc).__name__, exc)
        out.append({"id": cid, "ok": bool(okflag), "detail": detail})

    def composition():
        rep = ver.composition_check(res, random.Random(seed),
                                    sections=samples,
                                    max_degree=min(degree, 3))
        return rep.ok, "%d sections per pair" % samples
    add("composition[%s]" % variant, composition)

    def exactness():
        expected = None
        if variant == "rs":
            expected = [1, 1] + [0] * (len(res.nodes) - 2)
        rep = ver.exactness_check(res, max_degree=degree,
                                  expected=expected)
        return rep.ok, "homology " + " ".join(
            str(t) for t in rep.totals)
    add("exactness[%s]" % variant, exactness)
    return out


def cmd_verify(args) -> int:
    skip = set(args.skip or ())
    checks: List[dict] = []
    if args.geometry == "symplectic4":
        checks = []
    else:
        model = _load_model(args.geometry)
        checks = _check_lines(model, args.degree, args.samples,
                              args.seed, skip)
    for variant in _complex_names(args.geometry):
        checks += _complex_checks(args.geometry, variant, args.degree,
                                  args.samples, args.seed, skip)
    ok = all(c["ok"] for c in checks)
    text = []
    for c in checks:
        text.append("%-24s %s  %s"
                    % (c["id"], "PASS" if c["ok"] else "FAIL", c["detail"]))
    text.append("result: %s (%d checks)" % ("PASS" if ok else "FAIL",
                                            len(checks)))
    csv_rows = [("check", "ok", "detail")]
    for c in checks:
        csv_rows.append((c["id"], "PASS" if c["ok"] else "FAIL",
                         c["detail"]))
    _emit(args, {"geometry": args.geometry, "seed": args.seed,
                 "degree": args.degree, "samples": args.samples,
                 "checks": checks, "ok": ok}, text, csv_rows)
    return 0 if ok else 1


# #### apply ###############################################################

def _named_operator(geom: str, name: str,
                    variant: Optional[str]):
    """Resolve an operator name to a handle plus its resolution context."""
    aliases: Dict[str, object] = {}
    if geom == "engel4":
        model = builtin_model(geom)
        aliases["P"] = lambda: ops.derive_operator(model, (1, 0), (2, 1))
        aliases["S"] = lambda: ops.derive_operator(model, (2, 1), (3, 3))
    if name in aliases:
        return aliases[name](), None
    fixed = {"dH": 0}
    if geom == "contact5":
        fixed["dperp2"] = 2
    if geom == "g2_5":
        fixed["E"] = 1
    idx: Optional[int] = fixed.get(name)
    if idx is None and name.startswith("d") and name[1:].isdigit():
        idx = int(name[1:])
    if idx is None:
        raise UsageError("unknown operator %r for %s" % (name, geom))
    res = _resolution(geom, variant)
    if not 0 <= idx < len(res.operators):
        raise UsageError("operator index %d out of range for %s %s"
                         % (idx, geom, res.variant))
    return res.operators[idx], (res, idx)


def cmd_apply(args) -> int:
    try:
        with open(args.input, "r", encoding="utf-8") as fh:
            section = ops.GradedSection.from_json(json.load(fh))
    except (OSError, ValueError, KeyError) as exc:
        raise UsageError("cannot read section: %s" % exc)
    handle, ctx = _named_operator(args.geometry, args.operator,
                                  args.complex or section.variant)
    need = handle.source.rank
    if len(section.coeffs) != need:
        raise UsageError("section has %d components, operator wants %d"
                         % (len(section.coeffs), need))
    out = handle.apply(section.coeffs)
    node = ctx[1] + 1 if ctx else section.node + 1
    nvars = handle.source.forms[0].nvars
    result = ops.GradedSection(
        resolution=args.geometry,
        variant=ctx[0].variant if ctx else section.variant,
        node=node, coeffs=out)
    payload = result.to_json(nvars)
    data = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(data)
    else:
        sys.stdout.write(data)
    return 0


# #### classify7 ###########################################################

def cmd_classify7(args) -> int:
    name = args.model
    if name in ("elliptic7", "hyperbolic7"):
        model = builtin_model(name)
    elif os.path.exists(name):
        try:
            with open(name, "r", encoding="utf-8") as fh:
                model = model_from_json(json.load(fh))
        except (OSError, ValueError, KeyError) as exc:
            raise UsageError("cannot read model file: %s" % exc)
    else:
        raise UsageError("model must be elliptic7, hyperbolic7, or a "
                         "JSON model file")
    rep = orbit_invariant(model)
    payload = {"model": model.name, "kind": rep.kind,
               "inertia": list(rep.inertia),
               "gram_constant": rep.gram_constant,
               "levi_injective": rep.levi_injective}
    text = ["%s: %s (inertia %s)" % (model.name, rep.kind, rep.inertia)]
    csv_rows = [("model", "kind", "inertia"),
                (model.name, rep.kind,
                 " ".join(str(i) for i in rep.inertia))]
    _emit(args, payload, text, csv_rows)
    return 0 if rep.kind in ("elliptic", "hyperbolic") else 1


# #### entry point #########################################################

def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="coframes",
        description="Exact calculus of filtered coframes: pages, derived "
                    "operators, verified resolutions.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--format", choices=("text", "json", "csv"),
                       default="text")
        p.add_argument("--seed", type=int, default=DEFAULT_SEED)

    p = sub.add_parser("list", help="models and their named complexes")
    common(p)
    p.set_defaults(fn=cmd_list)

    p = sub.add_parser("page", help="graded page tables")
    p.add_argument("geometry")
    p.add_argument("--level", type=int, choices=(0, 1), default=1)
    common(p)
    p.set_defaults(fn=cmd_page)

    p = sub.add_parser("report", help="rank and order table of a complex")
    p.add_argument("geometry")
    p.add_argument("--complex", dest="complex", default=None)
    common(p)
    p.set_defaults(fn=cmd_report)

    p = sub.add_parser("verify", help="verification suite for a geometry")
    p.add_argument("geometry")
    p.add_argument("--degree", type=int, default=DEFAULT_DEGREE)
    p.add_argument("--samples", type=int, default=20)
    p.add_argument("--skip", action="append", default=[],
                   help="check id to skip (repeatable)")
    common(p)
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("apply", help="apply a derived operator to a section")
    p.add_argument("geometry")
    p.add_argument("--operator", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output", default=None)
    p.add_argument("--complex", dest="complex", default=None)
    common(p)
    p.set_defaults(fn=cmd_apply)

    p = sub.add_parser("classify7", help="orbit class of a 7-variable model")
    p.add_argument("--model", required=True)
    common(p)
    p.set_defaults(fn=cmd_classify7)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = _build_parser()
    args = ap.parse_args(argv)
    if getattr(args, "degree", 1) < 1:
        ap.error("--degree must be at least 1")
    if getattr(args, "samples", 1) < 1:
        ap.error("--samples must be at least 1")
    try:
        return args.fn(args)
    except UsageError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
