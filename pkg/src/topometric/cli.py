"""Command line driver.

Every command prints a short text report followed by a line ``---`` and a
JSON object with the same content.  Exit status is 0 on success, 1 when a
check is refuted (the report carries the witness) and 2 on usage errors or
malformed input.

Family files list one generator function term per ``gen`` line, plus
optional ``depth <n>`` and ``cap <n>`` lines; ``#`` starts a comment.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from .approximation import ApproximationError, dump_approx, urysohn
from .functions import parse_function
from .lone import GeneratedFamily, induced_metric_roundtrip, l1_membership_refute, lemma_properties_check
from .lone import theorem_direction_holds
from .pieces import Left, Right
from .rational import Bracket, as_rational, fmt, Q
from .regularity import (
    FunctionFamily,
    GlueInteriorAndIntegers,
    GridRationals,
    dense_extension,
    is_sufficient,
    star_star_failure,
    stone_cech_verify,
    verify_embedding,
)
from .separation import SeparationError, check_star, check_star_star, closed_metric_ball, parse_open_set, separate
from .separation import split_cover
from .space import Space
from .textio import parse_points, parse_set
from .tietze import tietze_extend

OK, REFUTED, USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _jsonable(v):
    if isinstance(v, (Q, Fraction)):
        return fmt(v)
    if isinstance(v, Bracket):
        return [fmt(v.lo), fmt(v.hi)]
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (Left, Right)):
        return str(v)
    return v


def emit(out, title, lines, data):
    print(title, file=out)
    for line in lines:
        print("  " + line, file=out)
    print("---", file=out)
    print(json.dumps(_jsonable(data), sort_keys=True), file=out)


# -- input ---------------------------------------------------------------------

def _read(path, what):
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {what} {path}: {exc.strerror}") from exc


def load_space_arg(args) -> Space:
    if not args.space:
        raise UsageError("--space is required")
    try:
        return Space.parse(_read(args.space, "space file"))
    except ValueError as exc:
        raise UsageError(f"{args.space}: {exc}") from exc


def _parse(kind, fn, text):
    try:
        return fn(text)
    except (ValueError, TypeError, KeyError, IndexError) as exc:
        raise UsageError(f"malformed {kind} {text!r}: {exc}") from exc


def _set(space, text, name):
    return _parse(name, lambda t: parse_set(space, t), text)


def _q(text, name):
    return _parse(name, as_rational, text)


def _points(space, text):
    return _parse("points", lambda t: parse_points(space, t), text) if text else []


def _function(space, text):
    return _parse("function", lambda t: parse_function(space, t), text)


def load_family(space, path, kind="plain"):
    depth, cap, gens = 0, 200, []
    for lineno, raw in enumerate(_read(path, "family file").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, rest = line.partition(" ")
        try:
            if key == "depth":
                depth = int(rest)
            elif key == "cap":
                cap = int(rest)
            elif key == "gen":
                gens.append(parse_function(space, rest))
            else:
                raise ValueError(f"unknown record {key!r}")
        except (ValueError, TypeError) as exc:
            raise UsageError(f"{path}: line {lineno}: {exc}") from exc
    try:
        if kind == "generated":
            return GeneratedFamily(space, gens, depth=depth, cap=cap)
        return FunctionFamily(gens, depth)
    except ValueError as exc:
        raise UsageError(f"{path}: {exc}") from exc


# -- commands --------------------------------------------------------------------

def cmd_check_axioms(args, out):
    space = load_space_arg(args)
    rep = space.verify_axioms(sample_budget=args.samples, seed=args.seed)
    lines = [f"factors: {len(space.factors)}", f"checked pairs: {rep.checked}", f"verdict: {rep.verdict}"]
    if not rep.passed:
        lines.append(f"witness: {space.fmt_point(rep.witness[0])}, {space.fmt_point(rep.witness[1])} ({rep.reason})")
    emit(out, "check-axioms", lines, {"verdict": rep.verdict, "checked": rep.checked, "reason": rep.reason})
    return OK if rep.passed else REFUTED


def cmd_ball(args, out):
    space = load_space_arg(args)
    F, r = _set(space, args.set, "set"), _q(args.radius, "radius")
    B = closed_metric_ball(space, F, r)
    text = space.fmt_set(B)
    emit(out, "ball", [f"F = {space.fmt_set(F)}", f"r = {fmt(r)}", f"B(F, r) = {text}"],
         {"F": space.fmt_set(F), "r": r, "ball": text})
    return OK


def cmd_separate(args, out):
    space = load_space_arg(args)
    K, L = _set(space, args.K, "K"), _set(space, args.L, "L")
    try:
        sep = separate(space, K, L)
        A, B = split_cover(space, K, L)
    except SeparationError as exc:
        emit(out, "separate", [f"verdict: FAIL ({exc})"],
             {"verdict": "FAIL", "witness": space.fmt_point(exc.witness) if exc.witness else None})
        return REFUTED
    lines = [f"d(K, L) = {fmt(sep.delta)}", f"X \\ U = {space.fmt_set(A)}", f"X \\ V = {space.fmt_set(B)}",
             "verdict: PASS"]
    emit(out, "separate", lines, {"verdict": "PASS", "distance": sep.delta, "U_complement": space.fmt_set(A),
                                  "V_complement": space.fmt_set(B)})
    return OK


def _star(args, out, which):
    space = load_space_arg(args)
    U = _parse("open set", lambda t: parse_open_set(space, t), args.open)
    r = _q(args.radius, "radius")
    extra = _points(space, args.at)
    fn = check_star if which == "check-star" else check_star_star
    v = fn(space, U, r, grid=args.grid, extra=extra)
    lines = [f"points checked: {v.checked}", f"verdict: {v.status}"]
    data = {"verdict": v.status, "checked": v.checked}
    if v.witness is not None:
        lines.append(f"witness: {space.fmt_point(v.witness)} ({v.note})")
        lines.append("escapes: " + ", ".join(space.fmt_point(z) for z in v.escapes[:6]))
        data.update(witness=space.fmt_point(v.witness), escapes=[space.fmt_point(z) for z in v.escapes])
    emit(out, which, lines, data)
    return OK if v.holds else REFUTED


def _values(space, f, pts, k):
    rows = [(space.fmt_point(x), f.eval(x, k)) for x in pts]
    return [f"f{p} in {b}" for p, b in rows], {p: b for p, b in rows}


def cmd_urysohn(args, out):
    space = load_space_arg(args)
    F, G, r = _set(space, args.F, "F"), _set(space, args.G, "G"), _q(args.r, "r")
    try:
        u = urysohn(space, F, G, r, args.prec)
    except ApproximationError as exc:
        raise UsageError(str(exc)) from exc
    pts = _points(space, args.at) or space.grid(4)
    lines, vals = _values(space, u, pts, args.prec)
    lines.insert(0, f"d(F, G) = {fmt(space.dist_sets(F, G))}, r = {fmt(r)}, levels = {len(u.approx.alphas)}")
    data = {"distance": space.dist_sets(F, G), "r": r, "values": vals}
    if args.dump:
        data["approximation"] = dump_approx(u.approx)
    emit(out, "urysohn", lines, data)
    return OK


def cmd_tietze(args, out):
    space = load_space_arg(args)
    Y, f = _set(space, args.Y, "Y"), _function(space, args.f)
    c, cp = _q(args.c, "c"), _q(args.cprime, "cprime")
    try:
        g = tietze_extend(space, Y, f, c, cp, args.prec)
    except ApproximationError as exc:
        raise UsageError(str(exc)) from exc
    pts = _points(space, args.at) or space.grid(4)
    lines, vals = _values(space, g, pts, args.prec)
    emit(out, "tietze", [f"c = {fmt(c)}, c' = {fmt(cp)}"] + lines, {"c": c, "cprime": cp, "values": vals})
    return OK


def _report_lines(rep, space):
    lines = [f"verdict: {rep.verdict}", f"pairs: {rep.pairs}", f"defect: {fmt(rep.defect)}"]
    data = {"verdict": rep.verdict, "pairs": rep.pairs, "defect": rep.defect, "separations": rep.separations}
    if rep.witness is not None:
        w = rep.witness
        text = ", ".join(space.fmt_point(p) if isinstance(p, tuple) else str(p) for p in w)
        lines.append(f"witness: {text} ({rep.note})")
        data["witness"] = text
    return lines, data


def cmd_embed(args, out):
    space = load_space_arg(args)
    A = load_family(space, args.family)
    pts = _points(space, args.at) or None
    rep = verify_embedding(A, space, samples=args.samples, tol=_q(args.tol, "tol"), seed=args.seed,
                           grid=args.grid, k=args.prec, points=pts)
    lines, data = _report_lines(rep, space)
    emit(out, "embed", lines, data)
    return OK if rep.passed else REFUTED


def cmd_sufficient(args, out):
    space = load_space_arg(args)
    A = load_family(space, args.family)
    rep = is_sufficient(A, space, samples=args.samples, tol=_q(args.tol, "tol"), seed=args.seed,
                        grid=args.grid, k=args.prec)
    lines, data = _report_lines(rep, space)
    emit(out, "sufficient", lines, data)
    return OK if rep.passed else REFUTED


def cmd_stone_cech(args, out):
    space = load_space_arg(args)
    A = load_family(space, args.family)
    rep = stone_cech_verify(space, A, samples=args.samples, seed=args.seed, grid=args.grid,
                            tol=_q(args.tol, "tol"), k=args.prec)
    lines = [f"verdict: {rep['verdict']}", rep["note"]]
    lines += [f"{r['function']}: monotone={r['monotone']} gap={fmt(r['sup_gap'])}" for r in rep["functions"]]
    emit(out, "stone-cech", lines, rep)
    return OK if rep["verdict"] == "PASS" else REFUTED


def _dense_subset(space, text):
    if text == "glue":
        return _parse("dense subset", lambda _: GlueInteriorAndIntegers(space), text)
    if text.startswith("grid:"):
        return _parse("dense subset", lambda t: GridRationals(space, int(t[5:])), text)
    raise UsageError(f"unknown dense subset {text!r}; use grid:<q> or glue")


def cmd_dense_extend(args, out):
    space = load_space_arg(args)
    X0 = _dense_subset(space, args.dense)
    f = _function(space, args.f)
    pts = _points(space, args.at) or None
    try:
        rep = dense_extension(space, X0, f, samples=args.samples, seed=args.seed, grid=args.grid,
                              tol=_q(args.tol, "tol"), points=pts)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    vals = {space.fmt_point(x): b for x, b in rep.values.items()}
    lines = [f"extension{p} in {b}" for p, b in vals.items()] + [f"verdict: {rep.verdict}"]
    data = {"verdict": rep.verdict, "values": vals}
    if rep.witness is not None:
        lines.append(f"witness: {space.fmt_point(rep.witness)} ({rep.note})")
        data["witness"] = space.fmt_point(rep.witness)
        data["escapes"] = [space.fmt_point(z) for z in rep.escapes]
    emit(out, "dense-extend", lines, data)
    return OK if rep.passed else REFUTED


def cmd_l1(args, out):
    space = load_space_arg(args)
    A = load_family(space, args.family, "generated")
    if args.l1_command == "refute":
        f = _function(space, args.f)
        eps = _q(args.eps, "eps")
        ref = l1_membership_refute(A, f, _points(space, args.at) or None, eps, grid=args.grid)
        if ref is None:
            emit(out, "l1 refute", ["no refutation found at this depth and sample", "verdict: NONE"],
                 {"verdict": "NONE", "members": len(A.members())})
            return OK
        lines = [f"witness pair: {space.fmt_point(ref.x)}, {space.fmt_point(ref.y)}",
                 f"|f(x) - f(y)| = {fmt(ref.fgap)} >= d_A(x, y) + eps = {fmt(ref.dA)} + {fmt(eps)}",
                 f"(iv') agrees: {ref.iv_prime}", f"not 1-Lipschitz for d_A: {theorem_direction_holds(A, f, ref)}",
                 "verdict: REFUTED"]
        emit(out, "l1 refute", lines, {"verdict": "REFUTED", "x": space.fmt_point(ref.x), "y": space.fmt_point(ref.y),
                                       "fgap": ref.fgap, "dA": ref.dA, "iv_prime": ref.iv_prime})
        return REFUTED
    if args.l1_command == "lemma-check":
        pts = _points(space, args.point)
        if len(pts) != 1:
            raise UsageError("--point takes exactly one point")
        rep = lemma_properties_check(A, pts[0], _set(space, args.set, "set"), grid=args.grid,
                                     tol=_q(args.tol, "tol"))
        lines = [f"translation: {rep.translation} (error {fmt(rep.translation_error)})",
                 f"separation: {rep.separation}" + (f" (r = {fmt(rep.separation_r)})" if rep.separation_r else ""),
                 f"closure: {rep.closure}"] + rep.notes
        emit(out, "l1 lemma-check", lines, {"translation": rep.translation, "translation_error": rep.translation_error,
                                            "separation": rep.separation, "r": rep.separation_r,
                                            "closure": rep.closure})
        return OK if rep.passed else REFUTED
    rep = induced_metric_roundtrip(space, A, tol=_q(args.tol, "tol"), grid=args.grid, sufficient=args.sufficient)
    lines = [f"d_A <= d: {rep.below_d}", f"pseudometric: {rep.pseudometric}", f"lsc: {rep.lsc}",
             f"members 1-Lipschitz for d_A: {rep.members_lipschitz}", f"monotone in depth: {rep.monotone}",
             "gap by depth: " + ", ".join(fmt(g) for g in rep.gaps), f"verdict: {rep.verdict}"]
    emit(out, "l1 roundtrip", lines, {"verdict": rep.verdict, "gaps": rep.gaps, "final_gap": rep.final_gap,
                                      "monotone": rep.monotone, "lsc": rep.lsc, "below_d": rep.below_d})
    return REFUTED if rep.verdict == "FAIL" else OK


SCENARIOS = {"star-star-failure": star_star_failure}


def cmd_examples(args, out):
    if args.name not in SCENARIOS:
        raise UsageError(f"unknown scenario {args.name!r}; available: {', '.join(SCENARIOS)}")
    rep = SCENARIOS[args.name]()
    lines = [f"[{'ok' if a.holds else 'FAILED'}] {a.name}: {a.detail}" for a in rep.assertions]
    verdict = "PASS" if rep.passed else "FAIL"
    lines.append(f"verdict: {verdict} (expected failure of (**) reproduced)" if rep.passed else f"verdict: {verdict}")
    emit(out, f"examples run {args.name}", lines,
         {"verdict": verdict, "assertions": {a.name: a.holds for a in rep.assertions}})
    return OK if rep.passed else REFUTED


# -- parser ----------------------------------------------------------------------

def _common(p):
    p.add_argument("--space", help="space description file")
    p.add_argument("--prec", type=int, default=6, help="output precision k (brackets of width <= 2**-k)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=32)
    p.add_argument("--tol", default="1/64")
    p.add_argument("--grid", type=int, default=16, help="grid resolution for sampled audits")


def build_parser():
    ap = argparse.ArgumentParser(prog="topometric", description="Exact topometric constructions and audits.")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, **kw):
        p = sub.add_parser(name, **kw)
        _common(p)
        p.set_defaults(fn=fn)
        return p

    add("check-axioms", cmd_check_axioms)
    p = add("ball", cmd_ball)
    p.add_argument("--set", required=True)
    p.add_argument("--radius", required=True)
    p = add("separate", cmd_separate)
    p.add_argument("--K", required=True)
    p.add_argument("--L", required=True)
    for name in ("check-star", "check-star-star"):
        p = add(name, lambda a, o, n=name: _star(a, o, n))
        p.add_argument("--open", required=True, help="open set literal")
        p.add_argument("--radius", required=True)
        p.add_argument("--at", help="extra points, ';'-separated")
    p = add("urysohn", cmd_urysohn)
    p.add_argument("--F", required=True)
    p.add_argument("--G", required=True)
    p.add_argument("--r", required=True)
    p.add_argument("--at")
    p.add_argument("--dump", action="store_true", help="include the realized approximation")
    p = add("tietze", cmd_tietze)
    p.add_argument("--Y", required=True)
    p.add_argument("--f", required=True)
    p.add_argument("--c", required=True)
    p.add_argument("--cprime", required=True)
    p.add_argument("--at")
    for name, fn in (("embed", cmd_embed), ("sufficient", cmd_sufficient), ("stone-cech", cmd_stone_cech)):
        p = add(name, fn)
        p.add_argument("--family", required=True)
        if name == "embed":
            p.add_argument("--at")
    p = add("dense-extend", cmd_dense_extend)
    p.add_argument("--dense", required=True, help="grid:<q> or glue")
    p.add_argument("--f", required=True)
    p.add_argument("--at")

    p = sub.add_parser("l1")
    l1 = p.add_subparsers(dest="l1_command", required=True)
    for name in ("refute", "lemma-check", "roundtrip"):
        q = l1.add_parser(name)
        _common(q)
        q.add_argument("--family", required=True)
        q.set_defaults(fn=cmd_l1)
        if name == "refute":
            q.add_argument("--f", required=True)
            q.add_argument("--eps", default="1/8")
            q.add_argument("--at")
        elif name == "lemma-check":
            q.add_argument("--point", required=True)
            q.add_argument("--set", required=True)
        else:
            q.add_argument("--sufficient", action="store_true")

    p = sub.add_parser("examples")
    ex = p.add_subparsers(dest="examples_command", required=True)
    q = ex.add_parser("run")
    q.add_argument("name")
    q.set_defaults(fn=cmd_examples)
    return ap


def run(argv=None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.fn(args, out)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
