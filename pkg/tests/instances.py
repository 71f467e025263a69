"""Deterministic instance generators shared by the test modules."""
from __future__ import annotations

import random
from fractions import Fraction

from topometric.space import Space
from topometric.textio import parse_set

SPACES = {
    "min": "min 0 1",
    "max": "max 0 1",
    "min2": "min 0 1\nmin 0 1",
    "maxmin": "max 0 1\nmin 0 1",
    "minseq": "min 0 1\nconvseq",
    "disc": "disc 4\nmin 0 1",
    "glue": "exampleglue",
    "gluedisc": "exampleglue\ndisc 3",
}


def space(name):
    return Space.parse(SPACES[name])


def _interval(rng, lo=0, hi=1, den=16):
    a = Fraction(rng.randrange(den), den)
    b = Fraction(rng.randrange(den), den)
    a, b = min(a, b), max(a, b) + Fraction(1, den)
    return f"[{a},{b}]"


def _piece(rng, factor_line):
    kind = factor_line.split()[0]
    if kind in ("min", "max"):
        return _interval(rng)
    if kind == "disc":
        n = int(factor_line.split()[1])
        picks = sorted(rng.sample(range(n), rng.randrange(1, n)))
        return "{" + ",".join(map(str, picks)) + "}"
    if kind == "convseq":
        return rng.choice(["{0,1}", "{2}", "tail(3)", "{0}+tail(5)", "all"])
    if kind == "exampleglue":
        return rng.choice([f"L{_interval(rng)}", "R{1,2}", f"L{_interval(rng)}+R{{3}}", "L[0,1/4]+Rtail(4)",
                           "R{0}", f"L{_interval(rng)}"])
    raise ValueError(kind)


def random_box(rng, desc):
    return " * ".join(_piece(rng, line) for line in desc.splitlines())


def separated_pair(rng, name, tries=200):
    """Nonempty closed sets at positive distance, as ``(space, F, G, d)``."""
    sp = space(name)
    desc = SPACES[name]
    for _ in range(tries):
        F = parse_set(sp, random_box(rng, desc))
        G = parse_set(sp, random_box(rng, desc))
        if F.is_empty() or G.is_empty():
            continue
        d = sp.dist_sets(F, G)
        if d != 0:
            return sp, F, G, d
    raise RuntimeError("no separated pair found")


def urysohn_instances(n, seed=0, names=("min", "max", "min2", "maxmin", "minseq", "disc", "glue", "gluedisc")):
    rng = random.Random(seed)
    out = []
    for i in range(n):
        name = names[i % len(names)]
        sp, F, G, d = separated_pair(rng, name)
        top = min(d, Fraction(1))
        r = top * Fraction(rng.randrange(1, 8), 8)
        out.append((name, sp, F, G, r))
    return out


def points_in(sp, S, m=16, limit=50, seed=0):
    """Up to ``limit`` grid points of ``S``, refining the grid while too few are found."""
    pts = [x for x in sp.grid(m) if S.contains(x)]
    while len(pts) < limit and m < 256 and len(sp.factors) == 1:
        m *= 2
        pts = [x for x in sp.grid(m) if S.contains(x)]
    if len(pts) > limit:
        rng = random.Random(seed)
        pts = [pts[i] for i in sorted(rng.sample(range(len(pts)), limit))]
    return pts


def fast_cauchy(rng, n_terms=40):
    """A ``[0,1]``-sequence with ``|x_n - x_{n+1}| <= 2**-(n+1)``, constant from ``n_terms`` on, and its limit."""
    x = Fraction(rng.randrange(1025), 1024)
    xs = [x]
    for n in range(n_terms - 1):
        step = Fraction(rng.randrange(-64, 65), 64 * 2 ** (n + 1))
        x = min(Fraction(1), max(Fraction(0), x + step))
        xs.append(x)
    return xs, x


def extend_constant(xs, m):
    return list(xs) + [xs[-1]] * max(0, m - len(xs))


def mesh_points(sp, m=128, limit=400, seed=0):
    """The ``1/m`` mesh, or a deterministic sample of it when it has more than ``limit`` points."""
    pts = sp.grid(m)
    if len(pts) <= limit:
        return pts
    rng = random.Random(seed)
    return [pts[i] for i in sorted(rng.sample(range(len(pts)), limit))]


TIETZE = [
    ("min", "[0,1/4] | [3/4,1]", "pieces([0,1/4]: 0, [3/4,1]: 1/4)"),
    ("min", "[0,1/2]", "pwl(0, 0:0, 1/2:1/2)"),
    ("min", "[1/8,3/8] | [5/8,7/8]", "pwl(0, 0:1/4, 1:3/4)"),
    ("max", "[0,1/4] | [1/2,1]", "pwl(0, 0:0, 1:1/2)"),
    ("min2", "[0,1/2] * all", "pwl(1, 0:1/4, 1:1/2)"),
    ("glue", "L[0,1/2]+R{1,2}", "glue(0, 0)"),
    ("maxmin", "all * [0,1/4] | all * [3/4,1]", "pwl(1, 0:0, 1/4:1/8, 3/4:1/8, 1:1/4)"),
    ("disc", "{0,1} * [0,1/2]", "pwl(1, 0:1/2, 1:0)"),
    ("minseq", "[1/4,3/4] * tail(2)", "pwl(0, 0:0, 1:1)"),
    ("gluedisc", "L[1/4,1] * {0,1}", "glue(0, 0)"),
]


def tietze_instances():
    """``(name, space, Y, f, c)`` with ``c`` the certified constant of ``f``."""
    from topometric.functions import parse_function
    out = []
    for name, Y, f in TIETZE:
        sp = space(name)
        fn = parse_function(sp, f)
        out.append((name, sp, parse_set(sp, Y), fn, fn.lipschitz))
    return out
