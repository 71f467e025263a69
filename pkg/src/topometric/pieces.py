"""Per-factor closed pieces.

A piece is a closed subset of a single catalog factor.  Pieces are pure
set objects: membership, intersection, union and inclusion.  Anything
metric lives on the factor that owns the piece.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional

from .rational import Q


class _Omega:
    """The limit point of a convergent sequence factor."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "omega"

    def __reduce__(self):
        return (_Omega, ())

    def __lt__(self, other):
        return False

    def __gt__(self, other):
        return other is not self


OMEGA = _Omega()


class Left(NamedTuple):
    """A point of the interval part of the glued example space."""

    t: Q

    # tuples of different tags must never compare equal
    def __eq__(self, other):
        return type(other) is Left and tuple.__eq__(self, other)

    def __ne__(self, other):
        return not self.__eq__(other)

    def __hash__(self):
        return hash(("L", tuple.__getitem__(self, 0)))


class Right(NamedTuple):
    """A point of the discrete part of the glued example space."""

    n: int

    # tuples of different tags must never compare equal
    def __eq__(self, other):
        return type(other) is Right and tuple.__eq__(self, other)

    def __ne__(self, other):
        return not self.__eq__(other)

    def __hash__(self):
        return hash(("R", tuple.__getitem__(self, 0)))


def _merge(intervals):
    out = []
    for a, b in sorted(intervals):
        if a > b:
            continue
        if out and a <= out[-1][1]:
            if b > out[-1][1]:
                out[-1] = (out[-1][0], b)
        else:
            out.append((a, b))
    return tuple(out)


@dataclass(frozen=True)
class Intervals:
    """Finite union of closed rational intervals, kept merged and sorted."""

    parts: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "parts", _merge(self.parts))

    @classmethod
    def of(cls, a, b):
        return cls(((Q(a), Q(b)),))

    def is_empty(self):
        return not self.parts

    def contains(self, t):
        for a, b in self.parts:
            if a <= t <= b:
                return True
            if t < a:
                return False
        return False

    def intersect(self, other):
        out = []
        for a, b in self.parts:
            for c, d in other.parts:
                lo, hi = max(a, c), min(b, d)
                if lo <= hi:
                    out.append((lo, hi))
        return Intervals(tuple(out))

    def union(self, other):
        return Intervals(self.parts + other.parts)

    def issubset(self, other):
        return all(any(c <= a and b <= d for c, d in other.parts) for a, b in self.parts)

    def intersects(self, other):
        i = j = 0
        p, q = self.parts, other.parts
        while i < len(p) and j < len(q):
            if max(p[i][0], q[j][0]) <= min(p[i][1], q[j][1]):
                return True
            if p[i][1] < q[j][1]:
                i += 1
            else:
                j += 1
        return False

    def gap_to(self, t):
        """Distance from the number ``t`` to the union (``None`` when empty)."""
        best = None
        for a, b in self.parts:
            g = a - t if t < a else (t - b if t > b else Q(0))
            if best is None or g < best:
                best = g
        return best

    def nearest(self, t):
        best, arg = None, None
        for a, b in self.parts:
            cand = min(max(t, a), b)
            g = abs(cand - t)
            if best is None or g < best:
                best, arg = g, cand
        return arg

    def gap(self, other):
        """Smallest distance between the two unions, with a minimizing pair."""
        best = None
        for a, b in self.parts:
            for c, d in other.parts:
                if max(a, c) <= min(b, d):
                    m = max(a, c)
                    return Q(0), m, m
                g, x, y = (c - b, b, c) if b < c else (a - d, a, d)
                if best is None or g < best[0]:
                    best = (g, x, y)
        return best

    def inflate(self, r, lo, hi):
        return Intervals(tuple((max(lo, a - r), min(hi, b + r)) for a, b in self.parts))

    def points(self):
        return {x for ab in self.parts for x in ab}


@dataclass(frozen=True)
class Finite:
    """Finite subset of a discrete factor."""

    elems: frozenset = frozenset()

    def is_empty(self):
        return not self.elems

    def contains(self, c):
        return c in self.elems

    def intersect(self, other):
        return Finite(self.elems & other.elems)

    def union(self, other):
        return Finite(self.elems | other.elems)

    def issubset(self, other):
        return self.elems <= other.elems

    def intersects(self, other):
        return not self.elems.isdisjoint(other.elems)


@dataclass(frozen=True)
class NatSet:
    """``finite`` together with ``{n >= tail}`` when ``tail`` is set."""

    finite: frozenset = frozenset()
    tail: Optional[int] = None

    def __post_init__(self):
        fin = frozenset(self.finite)
        tail = self.tail
        if tail is not None:
            fin = frozenset(n for n in fin if n < tail)
            while tail - 1 in fin:
                tail -= 1
                fin = fin - {tail}
        object.__setattr__(self, "finite", fin)
        object.__setattr__(self, "tail", tail)

    def is_empty(self):
        return not self.finite and self.tail is None

    def contains(self, n):
        return n in self.finite or (self.tail is not None and n >= self.tail)

    def intersect(self, other):
        fin = {n for n in self.finite if other.contains(n)}
        fin |= {n for n in other.finite if self.contains(n)}
        tail = None
        if self.tail is not None and other.tail is not None:
            tail = max(self.tail, other.tail)
        return NatSet(frozenset(fin), tail)

    def union(self, other):
        tails = [t for t in (self.tail, other.tail) if t is not None]
        return NatSet(self.finite | other.finite, min(tails) if tails else None)

    def issubset(self, other):
        if self.tail is not None and (other.tail is None or other.tail > self.tail):
            return False
        return all(other.contains(n) for n in self.finite)

    def intersects(self, other):
        return not self.intersect(other).is_empty()

    def some(self):
        if self.finite:
            return min(self.finite)
        return self.tail

    def bound(self):
        """One past the largest integer this set mentions explicitly."""
        m = max(self.finite, default=-1) + 1
        if self.tail is not None:
            m = max(m, self.tail + 1)
        return m


@dataclass(frozen=True)
class SeqSet:
    """Closed subset of the convergent sequence ``N u {omega}``."""

    nat: NatSet = field(default_factory=NatSet)
    omega: bool = False

    def __post_init__(self):
        if self.nat.tail is not None and not self.omega:
            raise ValueError("an infinite tail of the sequence must contain omega to be closed")

    def is_empty(self):
        return self.nat.is_empty() and not self.omega

    def contains(self, c):
        if c is OMEGA:
            return self.omega
        return self.nat.contains(c)

    def intersect(self, other):
        return SeqSet(self.nat.intersect(other.nat), self.omega and other.omega)

    def union(self, other):
        return SeqSet(self.nat.union(other.nat), self.omega or other.omega)

    def issubset(self, other):
        return self.nat.issubset(other.nat) and (other.omega or not self.omega)

    def intersects(self, other):
        return (self.omega and other.omega) or self.nat.intersects(other.nat)


@dataclass(frozen=True)
class GlueSet:
    """Closed subset of ``[0,1] u N`` with ``Right n -> Left 0``."""

    left: Intervals = field(default_factory=Intervals)
    right: NatSet = field(default_factory=NatSet)

    def __post_init__(self):
        if self.right.tail is not None and not self.left.contains(Q(0)):
            raise ValueError("an infinite tail of Right points must contain Left 0 to be closed")

    def is_empty(self):
        return self.left.is_empty() and self.right.is_empty()

    def contains(self, c):
        if isinstance(c, Left):
            return self.left.contains(c.t)
        return self.right.contains(c.n)

    def intersect(self, other):
        return GlueSet(self.left.intersect(other.left), self.right.intersect(other.right))

    def union(self, other):
        return GlueSet(self.left.union(other.left), self.right.union(other.right))

    def issubset(self, other):
        return self.left.issubset(other.left) and self.right.issubset(other.right)

    def intersects(self, other):
        return self.left.intersects(other.left) or self.right.intersects(other.right)
