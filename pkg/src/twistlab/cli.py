"""Command-line front end.

Exit codes: 0 when the computation ran and every ``expect`` in the file
holds, 1 when an expectation fails, 2 on parse or validation errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from .analysis import (
    AnalysisError,
    TheoremViolation,
    classify,
    commute_classify,
    is_spherical,
    is_strongly_spherical,
    thick_membership,
)
from .complexes import (ComplexError, ext_table, is_isomorphic, projective, reset_max_shift,
                        set_max_shift)
from .decompose import recover_collection, split_summands
from .ktheory import LatticeModel, class_of, reflect
from .ledger import Contradiction, LedgerError
from .ledger_dsl import LedgerSyntaxError, run_ledger, run_program
from .scenario import Context, Scenario, ScenarioError, parse_scenario, render_expr
from .twists import inverse_twist, twist

EXIT_OK, EXIT_EXPECT, EXIT_INVALID = 0, 1, 2


# -- reports ------------------------------------------------------------------

def _plain(x):
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    return x


def _text(x, indent=0) -> list:
    pad = "  " * indent
    if isinstance(x, dict):
        if not x:
            return [pad + "{}"]
        width = max(len(str(k)) for k in x)
        out = []
        for k, v in x.items():
            if isinstance(v, (dict, list)) and v and not _flat(v):
                out.append(f"{pad}{str(k):<{width}} :")
                out += _text(v, indent + 1)
            else:
                out.append(f"{pad}{str(k):<{width}} : {_inline(v)}")
        return out
    if isinstance(x, list):
        out = []
        for v in x:
            if isinstance(v, (dict, list)) and v and not _flat(v):
                out.append(f"{pad}-")
                out += _text(v, indent + 1)
            else:
                out.append(f"{pad}- {_inline(v)}")
        return out
    return [pad + _inline(x)]


def _flat(v) -> bool:
    items = v.values() if isinstance(v, dict) else v
    return all(not isinstance(i, (dict, list)) for i in items) and len(v) <= 8


def _inline(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return "-"
    if isinstance(v, dict):
        return "{" + ", ".join(f"{k}: {_inline(i)}" for k, i in v.items()) + "}"
    if isinstance(v, list):
        return "[" + ", ".join(_inline(i) for i in v) + "]"
    return str(v)


def emit_report(result: dict, fmt: str = "text") -> bytes:
    """Serialise a report; machine output is deterministic JSON."""
    result = _plain(result)
    if fmt == "machine":
        return (json.dumps(result, indent=2, ensure_ascii=False) + "\n").encode("utf-8")
    return ("\n".join(_text(result)) + "\n").encode("utf-8")


# -- expectations -------------------------------------------------------------

def _ext_dict(t) -> dict:
    return {str(k): v for k, v in sorted(t.items())}


def check_expect(ctx: Context, ex, seed: int, budget: int):
    """Return (ok, actual) for one expectation."""
    k, a = ex.kind, ex.args
    d = ctx.sc.cy
    if k == "ledger":
        blocks = [b for b in ctx.sc.ledgers if b.name == a[0]]
        if not blocks:
            raise ScenarioError(f"unknown ledger {a[0]!r}", ex.line)
        rep = run_program(blocks[0].program)
        return rep.ok, "ok" if rep.ok else "failed"
    if k == "strongly_spherical":
        got = is_strongly_spherical(ctx.collection(a[0]))[0]
        return got == ex.value, got
    objs = [ctx.eval(e) for e in a]
    if k == "spherical":
        got = is_spherical(objs[0], d)
    elif k == "ext":
        got = dict(ext_table(objs[0], objs[1]))
        return got == ex.value, _ext_dict(got)
    elif k == "commute":
        got = commute_classify(objs[0], objs[1], d=d, seed=seed).verdict.value
    elif k == "member":
        got = thick_membership(objs[0], objs[1], d=d, seed=seed).in_thick_subcategory
    elif k == "iso":
        got = bool(is_isomorphic(objs[0], objs[1], seed=seed))
    elif k == "summands":
        rep = split_summands(objs[0], seed=seed, budget=budget)
        got = sum(m for _, m, _ in rep.pieces)
    elif k == "class":
        got = class_of(objs[0], LatticeModel.of_algebra(ctx.algebra))
        return tuple(got) == tuple(ex.value), list(got)
    else:
        raise ScenarioError(f"unknown expectation {k}", ex.line)
    return got == ex.value, got


def run_expectations(ctx: Context, seed: int, budget: int) -> list:
    out = []
    for ex in ctx.sc.expects:
        try:
            ok, got = check_expect(ctx, ex, seed, budget)
        except (AnalysisError, TheoremViolation) as exc:
            ok, got = False, f"error: {exc}"
        out.append({"line": ex.line, "expect": ex.describe(), "ok": bool(ok), "actual": got})
    return out


# -- subcommands ----------------------------------------------------------------

def _split(s: str) -> list:
    parts, depth, cur = [], 0, ""
    for ch in s:
        if ch in "([{":
            depth += 1
        elif ch in ")]}":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append(cur.strip())
            cur = ""
        else:
            cur += ch
    if cur.strip():
        parts.append(cur.strip())
    return parts


def cmd_check_spherical(ctx, args):
    x = ctx.resolve(args.object)
    c = classify(x, ctx.sc.cy)
    return {"object": args.object, "ext_table": _ext_dict(c.table), **c.as_dict()}


def cmd_commute(ctx, args):
    pair = _split(args.pair)
    if len(pair) != 2:
        raise ScenarioError("--pair takes two names separated by a comma")
    e, f = (ctx.resolve(p) for p in pair)
    if args.generators in (None, "all-proj"):
        names = [f"P({v})" for v in ctx.algebra.idempotents]
    else:
        names = _split(args.generators)
    gens = [ctx.resolve(n) for n in names]
    rep = commute_classify(e, f, gens, d=ctx.sc.cy, seed=args.seed)
    return {"pair": pair, **rep.as_dict(names)}


def cmd_member(ctx, args):
    e, g = ctx.resolve(args.e), ctx.resolve(args.g)
    rep = thick_membership(e, g, d=ctx.sc.cy, seed=args.seed)
    return {"e": args.e, "g": args.g, **rep.as_dict()}


def cmd_twist(ctx, args):
    e, g = ctx.resolve(args.e), ctx.resolve(args.g)
    out = inverse_twist(e, g) if args.inverse else twist(e, g)
    lat = LatticeModel.of_algebra(ctx.algebra)
    want = reflect(lat, class_of(e, lat), class_of(g, lat))
    return {
        "e": args.e, "g": args.g, "inverse": bool(args.inverse),
        "result": out.describe(),
        "summands": [[v, s] for v, s in out.summands],
        "class": list(class_of(out, lat)),
        "k_theory_consistent": None if args.inverse else list(class_of(out, lat)) == list(want),
    }


def cmd_decompose(ctx, args):
    m = ctx.resolve(args.object)
    rep = split_summands(m, seed=args.seed, budget=args.budget)
    rec = recover_collection(m, ctx.sc.cy, seed=args.seed)
    return {"object": args.object, "summands": rep.as_dict(), "recovery": rec.as_dict()}


def cmd_ktheory(ctx, args):
    lat = LatticeModel.of_algebra(ctx.algebra)
    objs = {d.name: ctx.object(d.name) for d in ctx.sc.decls if d.kind == "object"}
    classes = {n: list(class_of(x, lat)) for n, x in objs.items()}
    checks = []
    spherical = [(f"P({v})", projective(ctx.algebra, v)) for v in ctx.algebra.idempotents]
    spherical += [(n, x) for n, x in objs.items() if is_spherical(x, ctx.sc.cy)]
    targets = [(f"P({v})", projective(ctx.algebra, v)) for v in ctx.algebra.idempotents]
    targets += list(objs.items())
    for en, e in spherical:
        for gn, g in targets:
            got = list(class_of(twist(e, g), lat))
            want = list(reflect(lat, class_of(e, lat), class_of(g, lat)))
            checks.append({"e": en, "g": gn, "class": got, "reflection": want, "ok": got == want})
    return {
        "labels": list(lat.labels),
        "gram": [list(r) for r in lat.gram],
        "invariant_violations": lat.invariant_violations(),
        "classes": classes,
        "reflection_checks": checks,
        "all_consistent": all(c["ok"] for c in checks) and not lat.invariant_violations(),
    }


def cmd_validate(ctx, args):
    counts = {"object": 0, "map": 0, "collection": 0}
    for d in ctx.sc.decls:
        if d.kind == "object":
            ctx.object(d.name)
        elif d.kind == "map":
            ctx.map(d.name)
        else:
            ctx.collection(d.name)
        counts[d.kind] += 1
    return {"algebra": repr(ctx.algebra), "objects": counts["object"], "maps": counts["map"],
            "collections": counts["collection"], "ledgers": len(ctx.sc.ledgers)}


COMMANDS = {
    "check-spherical": cmd_check_spherical,
    "commute": cmd_commute,
    "member": cmd_member,
    "twist": cmd_twist,
    "decompose": cmd_decompose,
    "ktheory": cmd_ktheory,
    "validate": cmd_validate,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="twistlab", description="Spherical twists on zigzag models.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("file")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--max-shift", type=int, default=16, dest="max_shift")
    common.add_argument("--budget", type=int, default=200)
    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("check-spherical", parents=[common])
    p.add_argument("--object", required=True)
    p = sub.add_parser("commute", parents=[common])
    p.add_argument("--pair", required=True)
    p.add_argument("--generators", default=None)
    p = sub.add_parser("member", parents=[common])
    p.add_argument("--e", required=True)
    p.add_argument("--g", required=True)
    p = sub.add_parser("twist", parents=[common])
    p.add_argument("--e", required=True)
    p.add_argument("--g", required=True)
    p.add_argument("--inverse", action="store_true")
    p = sub.add_parser("decompose", parents=[common])
    p.add_argument("--object", required=True)
    sub.add_parser("ledger", parents=[common])
    sub.add_parser("ktheory", parents=[common])
    sub.add_parser("validate", parents=[common])
    return ap


def _run_ledger_cmd(text, path, sc: Scenario | None):
    if sc is None:
        rep = run_ledger(text)
        return {"ledgers": {path: rep.as_dict()}}, rep.ok, rep
    out, ok = {}, True
    for b in sc.ledgers:
        rep = run_program(b.program)
        out[b.name] = rep.as_dict()
        ok &= rep.ok
    return {"ledgers": out}, ok, None


def run(argv=None, out=None) -> int:
    out = out or sys.stdout.buffer
    args = build_parser().parse_args(argv)
    token = set_max_shift(args.max_shift)
    try:
        return _run(args, out)
    finally:
        reset_max_shift(token)


def _run(args, out) -> int:
    fmt = "machine" if args.json else "text"
    try:
        with open(args.file, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        sys.stderr.write(f"twistlab: {exc}\n")
        return EXIT_INVALID
    try:
        if args.command == "ledger" and args.file.endswith(".ledger"):
            result, ok, rep = _run_ledger_cmd(text, args.file, None)
            if rep is not None and not args.json:
                out.write(rep.format_text().encode("utf-8"))
                out.write(f"status: {'ok' if ok else 'expectation failed'}\n".encode())
                return EXIT_OK if ok else EXIT_EXPECT
            result["ok"] = ok
            out.write(emit_report(result, fmt))
            return EXIT_OK if ok else EXIT_EXPECT
        sc = parse_scenario(text)
        if args.command == "ledger":
            result, ok, _ = _run_ledger_cmd(text, args.file, sc)
            result["ok"] = ok
            out.write(emit_report(result, fmt))
            return EXIT_OK if ok else EXIT_EXPECT
        ctx = Context(sc)
        result = {"command": args.command, "file": args.file, "seed": args.seed}
        result.update(COMMANDS[args.command](ctx, args))
        exps = run_expectations(ctx, args.seed, args.budget)
        if exps:
            result["expectations"] = exps
        ok = all(e["ok"] for e in exps)
        result["ok"] = ok
        out.write(emit_report(result, fmt))
        if not ok:
            for e in exps:
                if not e["ok"]:
                    sys.stderr.write(f"{args.file}:{e['line']}: expectation failed: {e['expect']}"
                                     f" (got {_inline(_plain(e['actual']))})\n")
        return EXIT_OK if ok else EXIT_EXPECT
    except (ScenarioError, LedgerSyntaxError) as exc:
        sys.stderr.write(f"{args.file}:{exc}\n")
        return EXIT_INVALID
    except Contradiction as exc:
        sys.stderr.write(f"{args.file}: contradiction: {exc}\n")
        for c in exc.chain:
            sys.stderr.write(f"  . {c}\n")
        return EXIT_EXPECT
    except (LedgerError, AnalysisError, ComplexError) as exc:
        sys.stderr.write(f"{args.file}: {exc}\n")
        return EXIT_INVALID


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
