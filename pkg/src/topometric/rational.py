"""Exact numbers: rationals, the extended value ``INF`` and rational brackets."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

from gmpy2 import mpq as Q


class _Infinity:
    """Distinguished ``+infinity`` for extended distances.

    Compares above every rational, absorbs under ``+`` and ``max``.
    """

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    __str__ = lambda self: "inf"

    def __reduce__(self):
        return (_Infinity, ())

    def __hash__(self):
        return hash("topometric.INF")

    def __eq__(self, other):
        return other is self

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is self

    def __gt__(self, other):
        return other is not self

    def __ge__(self, other):
        return True

    def __add__(self, other):
        return self

    __radd__ = __add__

    def __mul__(self, other):
        if other == 0:
            raise ValueError("INF * 0 is undefined")
        if other < 0:
            raise ValueError("negative multiple of INF")
        return self

    __rmul__ = __mul__

    def __truediv__(self, other):
        if other <= 0:
            raise ValueError("INF divided by a non-positive number")
        return self

    def __rtruediv__(self, other):
        return Q(0)


INF = _Infinity()


def is_inf(v) -> bool:
    return v is INF


def ext_sub(a, b):
    """``a - b`` on extended values with ``INF - INF = 0``."""
    if a is INF and b is INF:
        return Q(0)
    if a is INF:
        return INF
    if b is INF:
        raise ValueError("finite minus INF is not an extended distance")
    return a - b


def as_rational(v) -> Q:
    """Coerce ``v`` to an exact rational (a ``gmpy2.mpq``).

    Strings are parsed exactly (``"0.1"`` is one tenth); floats go through
    their shortest decimal representation for the same reason.
    """
    if isinstance(v, Q):
        return v
    if isinstance(v, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(v, int):
        return Q(v)
    if isinstance(v, Rational):
        return Q(v.numerator, v.denominator)
    if isinstance(v, float):
        v = repr(v)
    if isinstance(v, str):
        try:
            fr = Fraction(v.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not a rational literal: {v!r}") from exc
        return Q(fr.numerator, fr.denominator)
    raise TypeError(f"cannot interpret {type(v).__name__} as a rational")


def fmt(q) -> str:
    if q is INF:
        return "inf"
    q = as_rational(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class Bracket:
    """Closed rational interval ``[lo, hi]`` known to contain a real value."""

    lo: Q
    hi: Q

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty bracket [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, v):
        v = as_rational(v)
        return cls(v, v)

    @property
    def width(self) -> Q:
        return self.hi - self.lo

    @property
    def mid(self) -> Q:
        return (self.lo + self.hi) / 2

    def contains(self, v) -> bool:
        return self.lo <= v <= self.hi

    def within(self, other: "Bracket") -> bool:
        return other.lo <= self.lo and self.hi <= other.hi

    def __add__(self, other):
        if isinstance(other, Bracket):
            return Bracket(self.lo + other.lo, self.hi + other.hi)
        return Bracket(self.lo + other, self.hi + other)

    __radd__ = __add__

    def __neg__(self):
        return Bracket(-self.hi, -self.lo)

    def __sub__(self, other):
        return self + (-other if isinstance(other, Bracket) else -other)

    def scale(self, s):
        a, b = self.lo * s, self.hi * s
        return Bracket(min(a, b), max(a, b))

    def __abs__(self):
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return Bracket(Q(0), max(-self.lo, self.hi))

    def clamp(self, lo, hi):
        return Bracket(min(max(self.lo, lo), hi), min(max(self.hi, lo), hi))

    def meet(self, other: "Bracket") -> "Bracket":
        return Bracket(max(self.lo, other.lo), min(self.hi, other.hi))

    def __str__(self):
        return f"[{fmt(self.lo)}, {fmt(self.hi)}]"


def bmax(brackets):
    brackets = list(brackets)
    return Bracket(max(b.lo for b in brackets), max(b.hi for b in brackets))


def bmin(brackets):
    brackets = list(brackets)
    return Bracket(min(b.lo for b in brackets), min(b.hi for b in brackets))
