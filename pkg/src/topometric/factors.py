"""Catalog factors.

Every factor carries a point set, a metric ``d`` (the topometric distance)
and a gauge ``rho`` metrizing its topology.  Factors also know how to
measure, inflate and subdivide their own closed pieces.
"""
from __future__ import annotations

from fractions import Fraction

import re

from .pieces import OMEGA, Finite, GlueSet, Intervals, Left, NatSet, Right, SeqSet
from .rational import INF, as_rational, fmt, Q

ZERO, ONE = Q(0), Q(1)


def _split_terms(text):
    depth, cur, out = 0, [], []
    for ch in text:
        if ch in "[{(":
            depth += 1
        elif ch in "]})":
            depth -= 1
        if ch == "+" and depth == 0:
            out.append("".join(cur).strip())
            cur = []
        else:
            cur.append(ch)
    out.append("".join(cur).strip())
    return [t for t in out if t]


def _bracket_body(term, opener, closer):
    if not (term.startswith(opener) and term.endswith(closer)):
        raise ValueError(f"malformed piece term {term!r}")
    return [s.strip() for s in term[1:-1].split(",") if s.strip()]


class Factor:
    """Base class for catalog factors."""

    kind = "factor"
    #: True when radius < 1 metric balls can move this coordinate
    moving = False

    def spec_line(self) -> str:
        return self.kind

    def __repr__(self):
        return f"<{self.spec_line()}>"

    def __eq__(self, other):
        return type(self) is type(other) and self.spec_line() == other.spec_line()

    def __hash__(self):
        return hash((type(self).__name__, self.spec_line()))

    def check(self, c):
        if not self.contains(c):
            raise ValueError(f"coordinate {c!r} is not a point of factor {self.spec_line()!r}")
        return c

    def approach(self, c, j):
        """Points converging to ``c`` in the gauge at scale roughly ``2**-j``."""
        return []


class _IntervalFactor(Factor):
    def __init__(self, lo, hi):
        self.lo, self.hi = as_rational(lo), as_rational(hi)
        if self.lo > self.hi:
            raise ValueError("empty interval factor")

    def spec_line(self):
        return f"{self.kind} {fmt(self.lo)} {fmt(self.hi)}"

    def contains(self, c):
        return isinstance(c, (Q, Fraction, int)) and not isinstance(c, bool) and self.lo <= c <= self.hi

    def coerce(self, c):
        return as_rational(c)

    def rho(self, a, b):
        return abs(a - b)

    def full(self):
        return Intervals.of(self.lo, self.hi)

    def point_piece(self, c):
        return Intervals.of(c, c)

    def empty(self):
        return Intervals()

    def rho_to(self, c, piece):
        g = piece.gap_to(c)
        return INF if g is None else g

    def initial_cell(self):
        return self.full()

    def split(self, cell):
        (a, b), = cell.parts
        m = (a + b) / 2
        return [Intervals.of(a, m), Intervals.of(m, b)]

    def diam(self, cell):
        (a, b), = cell.parts
        return b - a

    def anchor(self, cell):
        (a, b), = cell.parts
        return (a + b) / 2

    def atoms(self, pieces):
        pts = {self.lo, self.hi}
        for p in pieces:
            pts |= p.points()
        pts = sorted(pts)
        reps = list(pts)
        reps += [(a + b) / 2 for a, b in zip(pts, pts[1:])]
        return reps

    def grid(self, m):
        return [self.lo + (self.hi - self.lo) * Q(j, m) for j in range(m + 1)]

    def random(self, rng):
        return self.lo + (self.hi - self.lo) * Q(rng.randrange(1025), 1024)

    def approach(self, c, j):
        step = (self.hi - self.lo) / 2**j
        return [x for x in (c - step, c + step) if self.lo <= x <= self.hi and x != c]

    def parse_coord(self, s):
        return self.check(as_rational(s))

    def fmt_coord(self, c):
        return fmt(c)

    def parse_piece(self, text):
        text = text.strip()
        if text == "all":
            return self.full()
        out = Intervals()
        if text == "empty":
            return out
        for term in _split_terms(text):
            if term.startswith("["):
                a, b = (as_rational(v) for v in _bracket_body(term, "[", "]"))
                if a > b or a < self.lo or b > self.hi:
                    raise ValueError(f"interval {term} outside factor {self.spec_line()}")
                out = out.union(Intervals.of(a, b))
            elif term.startswith("{"):
                for v in _bracket_body(term, "{", "}"):
                    out = out.union(Intervals.of(*(2 * [self.parse_coord(v)])))
            else:
                raise ValueError(f"malformed interval piece {term!r}")
        return out

    def fmt_piece(self, p):
        if p.is_empty():
            return "empty"
        return "+".join(f"[{fmt(a)},{fmt(b)}]" for a, b in p.parts)


class MinInterval(_IntervalFactor):
    """``[lo, hi]`` where metric and topology agree."""

    kind = "min"
    moving = True

    def d(self, a, b):
        return abs(a - b)

    def piece_dist(self, p, q):
        if p.is_empty() or q.is_empty():
            return INF, None, None
        return p.gap(q)

    def inflate(self, p, r):
        return p.inflate(r, self.lo, self.hi)


class _ZeroOne:
    """Mixin for factors whose metric is the discrete 0/1 distance."""

    def d(self, a, b):
        return ZERO if a == b else ONE

    def piece_dist(self, p, q):
        if p.is_empty() or q.is_empty():
            return INF, None, None
        common = p.intersect(q)
        if not common.is_empty():
            x = self.anchor_of(common)
            return ZERO, x, x
        return ONE, self.anchor_of(p), self.anchor_of(q)

    def inflate(self, p, r):
        if r >= 1 and not p.is_empty():
            return self.full()
        return p


class MaxInterval(_ZeroOne, _IntervalFactor):
    """``[lo, hi]`` with its usual topology and the 0/1 distance."""

    kind = "max"

    def anchor_of(self, p):
        return p.parts[0][0]


class FiniteDiscrete(_ZeroOne, Factor):
    kind = "disc"

    def __init__(self, n):
        n = int(n)
        if n < 1:
            raise ValueError("a discrete factor needs at least one point")
        self.n = n

    def spec_line(self):
        return f"disc {self.n}"

    def contains(self, c):
        return isinstance(c, int) and not isinstance(c, bool) and 0 <= c < self.n

    def coerce(self, c):
        return int(c)

    def rho(self, a, b):
        return ZERO if a == b else ONE

    def full(self):
        return Finite(frozenset(range(self.n)))

    def point_piece(self, c):
        return Finite(frozenset({c}))

    def empty(self):
        return Finite()

    def anchor_of(self, p):
        return min(p.elems)

    def rho_to(self, c, piece):
        if piece.is_empty():
            return INF
        return ZERO if c in piece.elems else ONE

    def initial_cell(self):
        return self.full()

    def split(self, cell):
        e = sorted(cell.elems)
        h = len(e) // 2
        return [Finite(frozenset(e[:h])), Finite(frozenset(e[h:]))]

    def diam(self, cell):
        return ONE if len(cell.elems) > 1 else ZERO

    def anchor(self, cell):
        return min(cell.elems)

    def atoms(self, pieces):
        return list(range(self.n))

    def grid(self, m):
        return list(range(self.n))

    def random(self, rng):
        return rng.randrange(self.n)

    def parse_coord(self, s):
        return self.check(int(s))

    def fmt_coord(self, c):
        return str(c)

    def parse_piece(self, text):
        text = text.strip()
        if text == "all":
            return self.full()
        if text == "empty":
            return self.empty()
        elems = set()
        for term in _split_terms(text):
            elems |= {self.parse_coord(v) for v in _bracket_body(term, "{", "}")}
        return Finite(frozenset(elems))

    def fmt_piece(self, p):
        return "{" + ",".join(str(e) for e in sorted(p.elems)) + "}" if p.elems else "empty"


def _seq_pos(c):
    return ZERO if c is OMEGA else Q(1, c + 1)


def _is_nat(c):
    return isinstance(c, int) and not isinstance(c, bool) and c >= 0


class ConvergentSeq(_ZeroOne, Factor):
    """One-point compactification of N with the 0/1 distance."""

    kind = "convseq"

    def contains(self, c):
        return c is OMEGA or _is_nat(c)

    def coerce(self, c):
        return c if c is OMEGA else int(c)

    def rho(self, a, b):
        return abs(_seq_pos(a) - _seq_pos(b))

    def full(self):
        return SeqSet(NatSet(tail=0), True)

    def point_piece(self, c):
        return SeqSet(omega=True) if c is OMEGA else SeqSet(NatSet(frozenset({c})))

    def empty(self):
        return SeqSet()

    def anchor_of(self, p):
        n = p.nat.some()
        return OMEGA if n is None else n

    def rho_to(self, c, piece):
        if piece.is_empty():
            return INF
        if piece.contains(c):
            return ZERO
        v = _seq_pos(c)
        best = INF
        for n in piece.nat.finite:
            best = min(best, abs(v - _seq_pos(n)))
        if piece.omega:
            best = min(best, v)
        if piece.nat.tail is not None:
            best = min(best, v - Q(1, piece.nat.tail + 1))
        return best

    def initial_cell(self):
        return self.full()

    def split(self, cell):
        if cell.nat.tail is not None:
            k = cell.nat.tail
            return [SeqSet(NatSet(frozenset({k}))), SeqSet(NatSet(tail=k + 1), True)]
        e = sorted(cell.nat.finite)
        h = len(e) // 2
        return [SeqSet(NatSet(frozenset(e[:h]))), SeqSet(NatSet(frozenset(e[h:])), cell.omega)]

    def diam(self, cell):
        if cell.nat.tail is not None:
            return Q(1, cell.nat.tail + 1)
        pos = [_seq_pos(n) for n in cell.nat.finite] + ([ZERO] if cell.omega else [])
        return max(pos) - min(pos) if pos else ZERO

    def anchor(self, cell):
        if cell.nat.tail is not None or not cell.nat.finite:
            return OMEGA
        return min(cell.nat.finite)

    def atoms(self, pieces):
        m = max((p.nat.bound() for p in pieces), default=0)
        return list(range(m + 1)) + [OMEGA]

    def grid(self, m):
        return list(range(min(m, 32))) + [OMEGA]

    def random(self, rng):
        return OMEGA if rng.randrange(8) == 0 else rng.randrange(32)

    def approach(self, c, j):
        return [2**j - 1] if c is OMEGA else []

    def parse_coord(self, s):
        s = s.strip()
        if s in ("omega", "w"):
            return OMEGA
        return self.check(int(s))

    def fmt_coord(self, c):
        return "omega" if c is OMEGA else str(c)

    def parse_piece(self, text):
        text = text.strip()
        if text == "all":
            return self.full()
        out = self.empty()
        if text == "empty":
            return out
        for term in _split_terms(text):
            m = re.fullmatch(r"tail\((\d+)\)", term)
            if m:
                out = out.union(SeqSet(NatSet(tail=int(m.group(1))), True))
                continue
            vals = [self.parse_coord(v) for v in _bracket_body(term, "{", "}")]
            out = out.union(SeqSet(NatSet(frozenset(v for v in vals if v is not OMEGA)), OMEGA in vals))
        return out

    def fmt_piece(self, p):
        if p.is_empty():
            return "empty"
        terms = []
        fin = sorted(p.nat.finite)
        if p.omega and p.nat.tail is None:
            fin = fin + ["omega"]
        if fin:
            terms.append("{" + ",".join(str(v) for v in fin) + "}")
        if p.nat.tail is not None:
            terms.append(f"tail({p.nat.tail})")
        return "+".join(terms)


def _glue_pos(c):
    return c.t if isinstance(c, Left) else -Q(1, c.n + 1)


class ExampleGlue(Factor):
    """Disjoint union of the minimal ``[0,1]`` with the 0/1 space ``N``.

    ``Right n`` converges to ``Left 0`` in the topology; every Left/Right
    pair is at distance one.  The gauge places ``Left t`` at ``t`` and
    ``Right n`` at ``-1/(n+1)`` on the real line.
    """

    kind = "exampleglue"
    moving = True

    def contains(self, c):
        if isinstance(c, Left):
            return isinstance(c.t, (Q, Fraction, int)) and 0 <= c.t <= 1
        return isinstance(c, Right) and _is_nat(c.n)

    def coerce(self, c):
        return c

    def d(self, a, b):
        if isinstance(a, Left) and isinstance(b, Left):
            return abs(a.t - b.t)
        return ZERO if a == b else ONE

    def rho(self, a, b):
        return abs(_glue_pos(a) - _glue_pos(b))

    def full(self):
        return GlueSet(Intervals.of(0, 1), NatSet(tail=0))

    def point_piece(self, c):
        if isinstance(c, Left):
            return GlueSet(Intervals.of(c.t, c.t))
        return GlueSet(right=NatSet(frozenset({c.n})))

    def empty(self):
        return GlueSet()

    def piece_dist(self, p, q):
        if p.is_empty() or q.is_empty():
            return INF, None, None
        best = (INF, None, None)
        if p.left.parts and q.left.parts:
            g, x, y = p.left.gap(q.left)
            best = (g, Left(x), Left(y))
        if p.right.intersects(q.right):
            n = p.right.intersect(q.right).some()
            return ZERO, Right(n), Right(n)
        if best[0] > 1:
            if not p.right.is_empty() and not q.right.is_empty():
                best = (ONE, Right(p.right.some()), Right(q.right.some()))
            elif p.left.parts and not q.right.is_empty():
                best = (ONE, Left(p.left.parts[0][0]), Right(q.right.some()))
            elif not p.right.is_empty() and q.left.parts:
                best = (ONE, Right(p.right.some()), Left(q.left.parts[0][0]))
        return best

    def rho_to(self, c, piece):
        if piece.is_empty():
            return INF
        if piece.contains(c):
            return ZERO
        v = _glue_pos(c)
        best = INF
        g = piece.left.gap_to(v)
        if g is not None:
            best = g
        for n in piece.right.finite:
            best = min(best, abs(v + Q(1, n + 1)))
        k = piece.right.tail
        if k is not None:
            best = min(best, v if isinstance(c, Left) else -Q(1, k + 1) - v)
        return best

    def inflate(self, p, r):
        if p.is_empty():
            return p
        if r >= 1:
            return self.full()
        return GlueSet(p.left.inflate(r, ZERO, ONE), p.right)

    def initial_cell(self):
        return self.full()

    def split(self, cell):
        if cell.right.tail is not None:
            (_, b), = cell.left.parts
            k = cell.right.tail
            return [
                GlueSet(Intervals.of(0, b / 2), NatSet(tail=k + 1)),
                GlueSet(Intervals.of(b / 2, b)),
                GlueSet(right=NatSet(frozenset({k}))),
            ]
        if cell.left.parts:
            (a, b), = cell.left.parts
            m = (a + b) / 2
            return [GlueSet(Intervals.of(a, m)), GlueSet(Intervals.of(m, b))]
        e = sorted(cell.right.finite)
        h = len(e) // 2
        return [GlueSet(right=NatSet(frozenset(e[:h]))), GlueSet(right=NatSet(frozenset(e[h:])))]

    def diam(self, cell):
        if cell.right.tail is not None:
            return cell.left.parts[0][1] + Q(1, cell.right.tail + 1)
        if cell.left.parts:
            (a, b), = cell.left.parts
            return b - a
        pos = [Q(1, n + 1) for n in cell.right.finite]
        return max(pos) - min(pos) if pos else ZERO

    def anchor(self, cell):
        if cell.right.tail is not None:
            return Left(ZERO)
        if cell.left.parts:
            (a, b), = cell.left.parts
            return Left((a + b) / 2)
        return Right(min(cell.right.finite))

    def atoms(self, pieces):
        pts = {ZERO, ONE}
        m = 0
        for p in pieces:
            pts |= p.left.points()
            m = max(m, p.right.bound())
        pts = sorted(pts)
        reps = [Left(t) for t in pts] + [Left((a + b) / 2) for a, b in zip(pts, pts[1:])]
        return reps + [Right(n) for n in range(m + 1)]

    def grid(self, m):
        return [Left(Q(j, m)) for j in range(m + 1)] + [Right(n) for n in range(min(m, 32))]

    def random(self, rng):
        if rng.randrange(2):
            return Left(Q(rng.randrange(1025), 1024))
        return Right(rng.randrange(32))

    def approach(self, c, j):
        if isinstance(c, Right):
            return []
        step = Q(1, 2**j)
        out = [Left(x) for x in (c.t - step, c.t + step) if 0 <= x <= 1]
        if c.t == 0:
            out.append(Right(2**j - 1))
        return out

    def parse_coord(self, s):
        s = s.strip()
        m = re.fullmatch(r"([LR]):?(.+)", s)
        if not m:
            raise ValueError(f"glue coordinate must look like L:t or R:n, got {s!r}")
        c = Left(as_rational(m.group(2))) if m.group(1) == "L" else Right(int(m.group(2)))
        return self.check(c)

    def fmt_coord(self, c):
        return f"L:{fmt(c.t)}" if isinstance(c, Left) else f"R:{c.n}"

    def parse_piece(self, text):
        text = text.strip()
        if text == "all":
            return self.full()
        if text == "empty":
            return self.empty()
        left, right = Intervals(), NatSet()
        for term in _split_terms(text):
            if term.startswith("L["):
                a, b = (as_rational(v) for v in _bracket_body(term[1:], "[", "]"))
                if not 0 <= a <= b <= 1:
                    raise ValueError(f"left interval {term} outside [0,1]")
                left = left.union(Intervals.of(a, b))
            elif term.startswith("L{"):
                for v in _bracket_body(term[1:], "{", "}"):
                    t = as_rational(v)
                    left = left.union(Intervals.of(t, t))
            elif term.startswith("R{"):
                right = right.union(NatSet(frozenset(int(v) for v in _bracket_body(term[1:], "{", "}"))))
            elif re.fullmatch(r"Rtail\(\d+\)", term):
                right = right.union(NatSet(tail=int(term[6:-1])))
            else:
                raise ValueError(f"malformed glue piece term {term!r}")
        return GlueSet(left, right)

    def fmt_piece(self, p):
        if p.is_empty():
            return "empty"
        terms = [f"L[{fmt(a)},{fmt(b)}]" for a, b in p.left.parts]
        if p.right.finite:
            terms.append("R{" + ",".join(str(n) for n in sorted(p.right.finite)) + "}")
        if p.right.tail is not None:
            terms.append(f"Rtail({p.right.tail})")
        return "+".join(terms)


FACTOR_KINDS = {
    "min": MinInterval,
    "max": MaxInterval,
    "disc": FiniteDiscrete,
    "convseq": ConvergentSeq,
    "exampleglue": ExampleGlue,
}


def parse_factor(line: str) -> Factor:
    parts = line.split()
    if not parts:
        raise ValueError("empty factor line")
    kind, args = parts[0], parts[1:]
    cls = FACTOR_KINDS.get(kind)
    if cls is None:
        raise ValueError(f"unknown factor kind {kind!r}")
    expected = {"min": 2, "max": 2, "disc": 1, "convseq": 0, "exampleglue": 0}[kind]
    if len(args) != expected:
        raise ValueError(f"factor {kind!r} takes {expected} argument(s), got {len(args)}")
    return cls(*args)
