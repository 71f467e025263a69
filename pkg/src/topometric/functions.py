"""Continuous Lipschitz functions evaluable to any precision.

Every function answers ``eval(x, k)`` with a rational bracket of width at
most ``2**-k`` containing its value, carries a certified Lipschitz
constant for the topometric distance, and a hull bracket of its range.
Kinds that know their sublevel sets ``{f <= a}`` and superlevel sets
``{f >= a}`` exactly expose them as box-unions; the approximation engine
consumes only those.
"""
from __future__ import annotations

import math

from .factors import ExampleGlue, MinInterval, _IntervalFactor
from .pieces import GlueSet, Intervals, Left, NatSet
from .rational import INF, Bracket, as_rational, fmt, Q
from .space import Box, BoxUnion, Space
from .textio import _split_top, parse_set

ZERO, ONE = Q(0), Q(1)


def space_diameter(space: Space):
    out = ZERO
    for f in space.factors:
        if isinstance(f, MinInterval):
            out = max(out, f.hi - f.lo)
        elif isinstance(f, _IntervalFactor):
            out = max(out, ONE if f.hi > f.lo else ZERO)
        elif getattr(f, "n", 2) > 1:
            out = max(out, ONE)
    return out


def _precision_boost(total_weight) -> int:
    """Extra bits so that a weighted sum of brackets stays below the target width."""
    if total_weight <= 1:
        return 0
    return (math.ceil(total_weight) - 1).bit_length()


class LazyFunction:
    """Base class; subclasses set ``lipschitz``, ``hull`` and ``term``."""

    space: Space
    lipschitz: Q
    hull: Bracket
    term: str = "?"
    domain: BoxUnion | None = None

    def eval(self, x, k: int) -> Bracket:
        raise NotImplementedError

    def exact(self, x):
        """The exact value when the kind knows it, else ``None``."""
        return None

    def value(self, x, k: int = 40) -> Q:
        v = self.exact(x)
        return v if v is not None else self.eval(x, k).mid

    def sublevel(self, alpha):
        return None

    def superlevel(self, alpha):
        return None

    def has_levels(self):
        return self.sublevel(self.hull.lo) is not None and self.superlevel(self.hull.lo) is not None

    def __repr__(self):
        return self.term


class _Exact(LazyFunction):
    def eval(self, x, k):
        return Bracket.point(self._at(x))

    def exact(self, x):
        return self._at(x)

    def _at(self, x):
        raise NotImplementedError


def _whole(space, domain):
    return domain if domain is not None else space.full()


def _box_on(space, i, piece):
    pieces = [f.full() for f in space.factors]
    pieces[i] = piece
    return BoxUnion((Box(tuple(pieces)),))


class Constant(_Exact):
    def __init__(self, space: Space, v):
        self.space, self.v = space, as_rational(v)
        self.lipschitz = ZERO
        self.hull = Bracket.point(self.v)
        self.term = f"const({fmt(self.v)})"

    def _at(self, x):
        return self.v

    def sublevel(self, alpha):
        return self.space.full() if self.v <= alpha else BoxUnion()

    def superlevel(self, alpha):
        return self.space.full() if self.v >= alpha else BoxUnion()


class PiecewiseLinear(_Exact):
    """Piecewise-linear function of one interval coordinate.

    ``knots`` are ``(t, v)`` pairs with increasing ``t``; the function is
    constant beyond the outer knots.  On a minimal factor the certificate
    is the largest slope; on a factor with the 0/1 distance it is the
    oscillation.
    """

    def __init__(self, space: Space, i: int, knots):
        f = space.factors[i]
        if not isinstance(f, _IntervalFactor):
            raise ValueError("piecewise-linear functions need an interval factor")
        knots = [(as_rational(t), as_rational(v)) for t, v in knots]
        if not knots or any(a[0] >= b[0] for a, b in zip(knots, knots[1:])):
            raise ValueError("knots must be strictly increasing and nonempty")
        self.space, self.i, self.knots = space, i, tuple(knots)
        vals = [v for _, v in knots]
        self.hull = Bracket(min(vals), max(vals))
        if isinstance(f, MinInterval):
            self.lipschitz = max((abs(b[1] - a[1]) / (b[0] - a[0]) for a, b in zip(knots, knots[1:])), default=ZERO)
        else:
            self.lipschitz = self.hull.width
        self.term = f"pwl({i}, " + ", ".join(f"{fmt(t)}:{fmt(v)}" for t, v in knots) + ")"

    def at(self, t):
        ks = self.knots
        if t <= ks[0][0]:
            return ks[0][1]
        for (a, va), (b, vb) in zip(ks, ks[1:]):
            if t <= b:
                return va + (vb - va) * (t - a) / (b - a)
        return ks[-1][1]

    def _at(self, x):
        return self.at(x[self.i])

    def _level(self, alpha, sign):
        f = self.space.factors[self.i]
        pts = [(f.lo, self.at(f.lo))]
        pts += [(t, v) for t, v in self.knots if f.lo < t < f.hi]
        pts.append((f.hi, self.at(f.hi)))
        parts = []
        for (a, va), (b, vb) in zip(pts, pts[1:]):
            ga, gb = sign * (va - alpha), sign * (vb - alpha)
            if ga <= 0 and gb <= 0:
                parts.append((a, b))
            elif ga <= 0:
                parts.append((a, a + (b - a) * ga / (ga - gb)))
            elif gb <= 0:
                parts.append((a + (b - a) * ga / (ga - gb), b))
        return _box_on(self.space, self.i, Intervals(tuple(parts)))

    def sublevel(self, alpha):
        return self._level(as_rational(alpha), 1)

    def superlevel(self, alpha):
        return self._level(as_rational(alpha), -1)


def Coordinate(space: Space, i: int, a=1, b=0):
    """``x -> a * x_i + b`` on an interval factor."""
    f = space.factors[i]
    a, b = as_rational(a), as_rational(b)
    if f.lo == f.hi:
        return PiecewiseLinear(space, i, [(f.lo, a * f.lo + b)])
    return PiecewiseLinear(space, i, [(f.lo, a * f.lo + b), (f.hi, a * f.hi + b)])


class DistanceTo(_Exact):
    """``x -> min(cap, d(x, F))``; continuous whenever closed metric balls of ``F`` are open-enough.

    On minimal factors this is the usual continuous distance function.
    """

    def __init__(self, space: Space, F: BoxUnion, cap=None):
        if F.is_empty():
            raise ValueError("distance to the empty set is infinite")
        self.space, self.F = space, F
        self.cap = as_rational(cap) if cap is not None else space_diameter(space)
        self.lipschitz = ONE
        self.hull = Bracket(ZERO, self.cap)
        self.term = f"dist({space.fmt_set(F)}, {fmt(self.cap)})"

    def _at(self, x):
        return min(self.cap, self.space.dist_point_set(x, self.F))

    def sublevel(self, alpha):
        alpha = as_rational(alpha)
        if alpha < 0:
            return BoxUnion()
        if alpha >= self.cap:
            return self.space.full()
        return self.space.ball(self.F, alpha)


class PiecewiseConstant(_Exact):
    """Locally constant function on a finite union of positively distant closed pieces."""

    def __init__(self, space: Space, parts):
        parts = [(P, as_rational(v)) for P, v in parts]
        if not parts:
            raise ValueError("no pieces")
        lip = ZERO
        for a, (P, v) in enumerate(parts):
            for R, w in parts[a + 1:]:
                if v == w:
                    continue
                dd = space.dist_sets(P, R)
                if dd == 0:
                    raise ValueError("pieces with different values touch; not Lipschitz")
                if dd is not INF:
                    lip = max(lip, abs(v - w) / dd)
        self.space, self.parts = space, tuple(parts)
        self.lipschitz = lip
        vals = [v for _, v in parts]
        self.hull = Bracket(min(vals), max(vals))
        self.domain = BoxUnion(tuple(b for P, _ in parts for b in P.boxes))
        self.term = "pieces(" + ", ".join(f"{space.fmt_set(P)}: {fmt(v)}" for P, v in parts) + ")"

    def _at(self, x):
        for P, v in self.parts:
            if P.contains(x):
                return v
        raise ValueError(f"{self.space.fmt_point(x)} is outside the domain")

    def sublevel(self, alpha):
        return BoxUnion(tuple(b for P, v in self.parts if v <= alpha for b in P.boxes))

    def superlevel(self, alpha):
        return BoxUnion(tuple(b for P, v in self.parts if v >= alpha for b in P.boxes))


class GlueCoordinate(_Exact):
    """Coordinate ``j`` of the embedding of the glued space in ``[0,1]^N``.

    ``Left t`` goes to ``(t, 0, 0, ...)`` and ``Right n`` to the sequence
    with ``n`` leading zeros followed by ones.
    """

    def __init__(self, space: Space, i: int, j: int):
        if not isinstance(space.factors[i], ExampleGlue):
            raise ValueError("glue coordinates need an exampleglue factor")
        self.space, self.i, self.j = space, i, int(j)
        self.lipschitz = ONE
        self.hull = Bracket(ZERO, ONE)
        self.term = f"glue({i}, {self.j})"

    def _at(self, x):
        c = x[self.i]
        if isinstance(c, Left):
            return c.t if self.j == 0 else ZERO
        return ONE if self.j >= c.n else ZERO

    def sublevel(self, alpha):
        alpha = as_rational(alpha)
        if alpha < 0:
            return BoxUnion()
        if alpha >= 1:
            return self.space.full()
        if self.j == 0:
            return _box_on(self.space, self.i, GlueSet(Intervals.of(0, alpha), NatSet(tail=1)))
        return _box_on(self.space, self.i, GlueSet(Intervals.of(0, 1), NatSet(tail=self.j + 1)))

    def superlevel(self, alpha):
        alpha = as_rational(alpha)
        if alpha <= 0:
            return self.space.full()
        if alpha > 1:
            return BoxUnion()
        right = NatSet(frozenset(range(self.j + 1)))
        left = Intervals.of(alpha, 1) if self.j == 0 else Intervals()
        return _box_on(self.space, self.i, GlueSet(left, right))


class GlueLeftIndicator(_Exact):
    """``1`` on the interval part and ``0`` on the integer part of a glued factor.

    1-Lipschitz, and continuous on any subset avoiding ``Left 0``.
    """

    def __init__(self, space: Space, i: int):
        if not isinstance(space.factors[i], ExampleGlue):
            raise ValueError("needs an exampleglue factor")
        self.space, self.i = space, i
        self.lipschitz = ONE
        self.hull = Bracket(ZERO, ONE)
        self.term = f"leftind({i})"

    def _at(self, x):
        return ONE if isinstance(x[self.i], Left) else ZERO


class Affine(LazyFunction):
    """``sum w_i f_i + const``."""

    def __init__(self, terms, const=0):
        terms = tuple((as_rational(w), f) for w, f in terms if as_rational(w) != 0)
        if not terms:
            raise ValueError("empty combination; use Constant")
        self.terms, self.const = terms, as_rational(const)
        self.space = terms[0][1].space
        self.lipschitz = sum((abs(w) * f.lipschitz for w, f in terms), ZERO)
        h = Bracket.point(self.const)
        for w, f in terms:
            h = h + f.hull.scale(w)
        self.hull = h
        self._boost = _precision_boost(sum(abs(w) for w, _ in terms))
        doms = [f.domain for _, f in terms if f.domain is not None]
        self.domain = doms[0] if len(doms) == 1 else (None if not doms else _meet_all(doms))
        parts = [f"{fmt(w)}*{f.term}" for w, f in terms]
        if self.const:
            parts.append(fmt(self.const))
        self.term = "sum(" + ", ".join(parts) + ")"

    def eval(self, x, k):
        out = Bracket.point(self.const)
        for w, f in self.terms:
            out = out + f.eval(x, k + self._boost).scale(w)
        return out

    def exact(self, x):
        vals = [f.exact(x) for _, f in self.terms]
        if any(v is None for v in vals):
            return None
        return self.const + sum((w * v for (w, _), v in zip(self.terms, vals)), ZERO)

    def sublevel(self, alpha):
        if len(self.terms) != 1:
            return None
        (w, f), = self.terms
        a = (as_rational(alpha) - self.const) / w
        return f.sublevel(a) if w > 0 else f.superlevel(a)

    def superlevel(self, alpha):
        if len(self.terms) != 1:
            return None
        (w, f), = self.terms
        a = (as_rational(alpha) - self.const) / w
        return f.superlevel(a) if w > 0 else f.sublevel(a)


def _meet_all(doms):
    out = doms[0]
    for d in doms[1:]:
        out = out & d
    return out


def scale(w, f):
    return Affine([(w, f)])


def shift(t, f):
    return Affine([(1, f)], t)


def average(fs):
    fs = list(fs)
    return Affine([(Q(1, len(fs)), f) for f in fs])


class Abs(LazyFunction):
    def __init__(self, f: LazyFunction):
        self.f, self.space = f, f.space
        self.lipschitz, self.hull, self.domain = f.lipschitz, abs(f.hull), f.domain
        self.term = f"abs({f.term})"

    def eval(self, x, k):
        return abs(self.f.eval(x, k))

    def exact(self, x):
        v = self.f.exact(x)
        return None if v is None else abs(v)

    def sublevel(self, alpha):
        lo, hi = self.f.superlevel(-as_rational(alpha)), self.f.sublevel(alpha)
        if lo is None or hi is None:
            return None
        return (lo & hi) if as_rational(alpha) >= 0 else BoxUnion()

    def superlevel(self, alpha):
        alpha = as_rational(alpha)
        if alpha <= 0:
            return _whole(self.space, self.domain)
        hi, lo = self.f.superlevel(alpha), self.f.sublevel(-alpha)
        if lo is None or hi is None:
            return None
        return hi | lo


class Truncate(LazyFunction):
    """``min(f, cap)``."""

    def __init__(self, f: LazyFunction, cap):
        self.f, self.cap, self.space = f, as_rational(cap), f.space
        self.lipschitz, self.domain = f.lipschitz, f.domain
        self.hull = Bracket(min(f.hull.lo, self.cap), min(f.hull.hi, self.cap))
        self.term = f"min({f.term}, {fmt(self.cap)})"

    def eval(self, x, k):
        b = self.f.eval(x, k)
        return Bracket(min(b.lo, self.cap), min(b.hi, self.cap))

    def exact(self, x):
        v = self.f.exact(x)
        return None if v is None else min(v, self.cap)

    def sublevel(self, alpha):
        if as_rational(alpha) >= self.cap:
            return _whole(self.space, self.domain)
        return self.f.sublevel(alpha)

    def superlevel(self, alpha):
        if as_rational(alpha) > self.cap:
            return BoxUnion()
        return self.f.superlevel(alpha)


class Clamp(LazyFunction):
    """``min(hi, max(lo, f))``."""

    def __init__(self, f: LazyFunction, lo, hi):
        self.f, self.space = f, f.space
        self.lo, self.hi = as_rational(lo), as_rational(hi)
        self.lipschitz, self.domain = f.lipschitz, f.domain
        self.hull = f.hull.clamp(self.lo, self.hi)
        self.term = f"clamp({f.term}, {fmt(self.lo)}, {fmt(self.hi)})"

    def eval(self, x, k):
        return self.f.eval(x, k).clamp(self.lo, self.hi)

    def exact(self, x):
        v = self.f.exact(x)
        return None if v is None else min(self.hi, max(self.lo, v))


class Restrict(LazyFunction):
    """``f`` read on a closed subset ``Y``; level sets are intersected with ``Y``."""

    def __init__(self, f: LazyFunction, Y: BoxUnion):
        self.f, self.space, self.domain = f, f.space, Y
        self.lipschitz, self.hull = f.lipschitz, f.hull
        self.term = f"restrict({f.term}, {f.space.fmt_set(Y)})"

    def eval(self, x, k):
        return self.f.eval(x, k)

    def exact(self, x):
        return self.f.exact(x)

    def sublevel(self, alpha):
        s = self.f.sublevel(alpha)
        return None if s is None else s & self.domain

    def superlevel(self, alpha):
        s = self.f.superlevel(alpha)
        return None if s is None else s & self.domain


# -- text form --------------------------------------------------------------

def _call(text):
    text = text.strip()
    if "(" not in text or not text.endswith(")"):
        raise ValueError(f"malformed function term {text!r}")
    name, body = text.split("(", 1)
    return name.strip(), _split_top(body[:-1], ",")


def _last_colon(text):
    depth = 0
    for pos in range(len(text) - 1, -1, -1):
        ch = text[pos]
        if ch in "]})":
            depth += 1
        elif ch in "[{(":
            depth -= 1
        elif ch == ":" and depth == 0:
            return text[:pos], text[pos + 1:]
    raise ValueError(f"expected 'set: value' in {text!r}")


def parse_function(space: Space, text: str) -> LazyFunction:
    """Parse a function term.

    Terms: ``const(q)``, ``coord(i)`` or ``coord(i, a, b)``,
    ``pwl(i, t:v, ...)``, ``dist(set[, cap])``, ``glue(i, j)``,
    ``leftind(i)``, ``pieces(set: q, ...)``, ``abs(f)``, ``min(f, q)``,
    ``scale(q, f)``, ``shift(q, f)``, ``clamp(f, lo, hi)``, ``avg(f, ...)``, ``sum(q*f, ..., q)``,
    ``restrict(f, set)``.
    """
    name, args = _call(text)
    p = lambda t: parse_function(space, t)
    if name == "const":
        return Constant(space, args[0])
    if name == "coord":
        i = int(args[0])
        return Coordinate(space, i, *(args[1:3] if len(args) >= 3 else ()))
    if name == "pwl":
        return PiecewiseLinear(space, int(args[0]), [a.split(":") for a in args[1:]])
    if name == "dist":
        return DistanceTo(space, parse_set(space, args[0]), args[1] if len(args) > 1 else None)
    if name == "glue":
        return GlueCoordinate(space, int(args[0]), int(args[1]))
    if name == "leftind":
        return GlueLeftIndicator(space, int(args[0]))
    if name == "pieces":
        parts = []
        for a in args:
            s, v = _last_colon(a)
            parts.append((parse_set(space, s), v))
        return PiecewiseConstant(space, parts)
    if name == "abs":
        return Abs(p(args[0]))
    if name == "min":
        return Truncate(p(args[0]), args[1])
    if name == "scale":
        return scale(args[0], p(args[1]))
    if name == "shift":
        return shift(args[0], p(args[1]))
    if name == "avg":
        return average(p(a) for a in args)
    if name == "sum":
        terms, const = [], 0
        for a in args:
            if "*" in a and "(" in a:
                w, f = a.split("*", 1)
                terms.append((w, p(f)))
            else:
                const = a
        return Affine(terms, const)
    if name == "clamp":
        return Clamp(p(args[0]), args[1], args[2])
    if name == "restrict":
        return Restrict(p(args[0]), parse_set(space, args[1]))
    raise ValueError(f"unknown function kind {name!r}")
