"""Closed metric neighbourhoods, open separation and conditions (*)/(**)."""
from __future__ import annotations

from dataclasses import dataclass, field

from .factors import ConvergentSeq, ExampleGlue, FiniteDiscrete, MaxInterval, MinInterval
from .pieces import Left
from .rational import INF, as_rational, fmt, Q
from .space import BoxUnion, HalfSpace, Space
from .textio import _split_top

ZERO, ONE = Q(0), Q(1)

HOLDS = "HOLDS-ON-SAMPLES"
FAILS = "FAILS"


class SeparationError(ValueError):
    """Raised when two closed sets are at distance zero."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


def closed_metric_ball(space: Space, F: BoxUnion, r) -> BoxUnion:
    """``{x : d(x, F) <= r}`` as a box-union, computed factor by factor."""
    r = as_rational(r)
    if r < 0:
        raise ValueError(f"negative radius {fmt(r)}")
    return space.ball(F, r)


def _lt(a, b):
    # INF < INF is false, which keeps tie points out of both sides
    return a < b


@dataclass(frozen=True)
class OpenSeparator:
    """Disjoint open sets ``U ⊇ K`` and ``V ⊇ L`` given by gauge comparison."""

    space: Space
    K: BoxUnion
    L: BoxUnion
    K_inflated: BoxUnion
    L_inflated: BoxUnion
    delta: object

    def in_U(self, x):
        return _lt(self.space.rho_dist(x, self.K_inflated), self.space.rho_dist(x, self.L_inflated))

    def in_V(self, x):
        return _lt(self.space.rho_dist(x, self.L_inflated), self.space.rho_dist(x, self.K_inflated))

    def U_complement(self) -> HalfSpace:
        return HalfSpace(self.space, self.K_inflated, self.L_inflated, ZERO)

    def V_complement(self) -> HalfSpace:
        return HalfSpace(self.space, self.L_inflated, self.K_inflated, ZERO)


def separate(space: Space, K: BoxUnion, L: BoxUnion) -> OpenSeparator:
    delta, a, _ = space.dist_sets_witness(K, L)
    if delta == 0:
        raise SeparationError(f"sets meet at {space.fmt_point(a)}; distance is 0", witness=a)
    if delta is INF:
        Kp, Lp = K, L
    else:
        Kp, Lp = space.ball(K, delta / 3), space.ball(L, delta / 3)
    return OpenSeparator(space, K, L, Kp, Lp, delta)


def _apart_axes(K, L, region):
    """Factors on which the parts of ``K`` and ``L`` inside ``region`` project apart.

    Splitting only along such a factor keeps the resulting sets products
    of simple pieces instead of staircases.
    """
    ks = [b.intersect(region) for b in K.boxes if b.intersects(region)]
    ls = [b.intersect(region) for b in L.boxes if b.intersects(region)]
    out = []
    for i in range(len(region.pieces)):
        pk, pl = ks[0].pieces[i], ls[0].pieces[i]
        for b in ks[1:]:
            pk = pk.union(b.pieces[i])
        for b in ls[1:]:
            pl = pl.union(b.pieces[i])
        if not pk.intersects(pl):
            out.append(i)
    return out


def split_cover(space: Space, K: BoxUnion, L: BoxUnion, max_depth: int = 400):
    """Closed box-unions ``A``, ``B`` with ``A ∪ B = X``, ``A ∩ K = ∅``, ``B ∩ L = ∅``.

    ``X`` is subdivided until no region meets both sets; regions meeting
    neither go to the side whose gauge distance from the region anchor is
    smaller.  ``A`` and ``B`` are the complements of an open pair
    ``U ⊇ K``, ``V ⊇ L``.  Requires ``K ∩ L = ∅``.
    """
    A, B = [], []
    stack = [(space.whole_region(), 0)]
    while stack:
        region, depth = stack.pop()
        mk, ml = K.meets(region), L.meets(region)
        if mk and ml:
            axes = _apart_axes(K, L, region) if len(region.pieces) > 1 else None
            children = space.split_region(region, axes) if depth < max_depth else None
            if children is None:
                raise SeparationError("closed sets could not be separated by subdivision",
                                      witness=space.anchor(region))
            stack.extend((c, depth + 1) for c in reversed(children))
        elif mk:
            B.append(region)
        elif ml:
            A.append(region)
        else:
            anchor = space.anchor(region)
            (B if space.rho_dist(anchor, K) <= space.rho_dist(anchor, L) else A).append(region)
    return BoxUnion(tuple(A)).simplified(), BoxUnion(tuple(B)).simplified()


# -- open sets for conditions (*) and (**) --------------------------------

@dataclass(frozen=True)
class OpenPiece:
    """Open subset of one factor.

    ``intervals`` are open rational intervals on the continuous part
    (interval factors, or the Left part of the glued space, where they must
    avoid ``0``); ``finite`` are isolated points (integers of discrete,
    sequence and Right parts).
    """

    intervals: tuple = ()
    finite: frozenset = frozenset()
    full: bool = False


def _interval_contains(parts, t):
    return any(a < t < b for a, b in parts)


def _closure_gap(parts, t, lo, hi):
    best = INF
    for a, b in parts:
        a2, b2 = max(a, lo), min(b, hi)
        if a2 > b2 or (a2 == b2 and not (a < a2 < b)):
            continue
        g = a2 - t if t < a2 else (t - b2 if t > b2 else ZERO)
        best = min(best, g)
    return best


def open_contains(factor, c, piece: OpenPiece) -> bool:
    if piece.full:
        return True
    if isinstance(factor, (MinInterval, MaxInterval)):
        return _interval_contains(piece.intervals, c)
    if isinstance(factor, ExampleGlue):
        return _interval_contains(piece.intervals, c.t) if isinstance(c, Left) else c.n in piece.finite
    return c in piece.finite


def open_dist(factor, c, piece: OpenPiece):
    """``inf d_i(c, u)`` over ``u`` in the open piece."""
    if piece.full:
        return ZERO
    if isinstance(factor, MinInterval):
        return _closure_gap(piece.intervals, c, factor.lo, factor.hi)
    if isinstance(factor, ExampleGlue):
        nonempty = bool(piece.finite) or _closure_gap(piece.intervals, Q(1, 2), ZERO, ONE) is not INF
        if isinstance(c, Left):
            g = _closure_gap(piece.intervals, c.t, ZERO, ONE)
            return g if g is not INF else (ONE if nonempty else INF)
        if c.n in piece.finite:
            return ZERO
        return ONE if nonempty else INF
    if open_contains(factor, c, piece):
        return ZERO
    if isinstance(factor, MaxInterval):
        nonempty = _closure_gap(piece.intervals, factor.lo, factor.lo, factor.hi) is not INF
    else:
        nonempty = bool(piece.finite)
    return ONE if nonempty else INF


@dataclass(frozen=True)
class OpenSet:
    """Finite union of products of open pieces."""

    space: Space
    boxes: tuple = field(default_factory=tuple)

    def contains(self, x):
        return any(all(open_contains(f, c, p) for f, c, p in zip(self.space.factors, x, b)) for b in self.boxes)

    __contains__ = contains

    def dist(self, x):
        """Exact ``d(x, U)``; coordinates minimize independently under the sup metric."""
        best = INF
        for b in self.boxes:
            per = [open_dist(f, c, p) for f, c, p in zip(self.space.factors, x, b)]
            if any(v is INF for v in per):
                continue
            best = min(best, max(per))
        return best

    def in_ball(self, x, r):
        """Membership in the open metric neighbourhood ``B(U, r)``."""
        return self.dist(x) < r

    def in_metric_closure(self, x):
        return self.dist(x) == 0


def _parse_open_piece(factor, text):
    text = text.strip()
    if text == "all":
        return OpenPiece(full=True)
    if text == "empty":
        return OpenPiece()
    intervals, finite = [], set()
    for term in _split_top(text, "+"):
        if isinstance(factor, ExampleGlue):
            if term.startswith("L("):
                a, b = (as_rational(v) for v in term[2:-1].split(","))
                if a < 0:
                    raise ValueError("open Left intervals must avoid Left 0")
                intervals.append((a, b))
            elif term.startswith("R{"):
                finite |= {int(v) for v in term[2:-1].split(",") if v.strip()}
            else:
                raise ValueError(f"malformed open glue term {term!r}")
        elif isinstance(factor, (MinInterval, MaxInterval)):
            if not (term.startswith("(") and term.endswith(")")):
                raise ValueError(f"open interval must be written (a,b), got {term!r}")
            a, b = (as_rational(v) for v in term[1:-1].split(","))
            intervals.append((a, b))
        elif isinstance(factor, (FiniteDiscrete, ConvergentSeq)):
            vals = [v.strip() for v in term.strip("{}").split(",") if v.strip()]
            if any(v in ("omega", "w") for v in vals):
                raise ValueError("omega is not isolated; finite open sets must avoid it")
            finite |= {int(v) for v in vals}
        else:
            raise ValueError(f"unsupported factor {factor!r}")
    return OpenPiece(tuple(intervals), frozenset(finite))


def parse_open_set(space: Space, text: str) -> OpenSet:
    boxes = []
    for term in _split_top(text.strip(), "|"):
        pieces = _split_top(term, "*")
        if len(pieces) != len(space.factors):
            raise ValueError(f"open box {term!r} needs one piece per factor")
        boxes.append(tuple(_parse_open_piece(f, p) for f, p in zip(space.factors, pieces)))
    return OpenSet(space, tuple(boxes))


# -- conditions (*) and (**) ---------------------------------------------

@dataclass
class Verdict:
    status: str
    checked: int = 0
    witness: tuple | None = None
    escapes: list = field(default_factory=list)
    note: str = ""

    @property
    def holds(self):
        return self.status == HOLDS


def escapes_everywhere(space: Space, x, member, j_lo=4, j_hi=14):
    """Approach points leaving ``member`` at every scale, or ``None``.

    ``x`` is refuted as an interior point when each sampled gauge
    neighbourhood contains a point failing ``member``.
    """
    found = []
    for j in range(j_lo, j_hi + 1):
        out = [z for z in space.approach(x, j) if not member(z)]
        if not out:
            return None
        found.append(out[0])
    return found


def _candidates(space, grid, extra):
    pts = list(space.grid(grid))
    pts += [space.check_point(p) for p in (extra or [])]
    return pts


def check_star(space: Space, U: OpenSet, r, grid: int = 64, extra=None) -> Verdict:
    """Refutation test that ``B(U, r)`` is open."""
    r = as_rational(r)
    checked = 0
    for x in _candidates(space, grid, extra):
        if not U.in_ball(x, r):
            continue
        checked += 1
        esc = escapes_everywhere(space, x, lambda z: U.in_ball(z, r))
        if esc is not None:
            return Verdict(FAILS, checked, x, esc, "point of B(U,r) is not interior")
    return Verdict(HOLDS, checked)


def check_star_star(space: Space, U: OpenSet, r, grid: int = 64, extra=None) -> Verdict:
    """Refutation test that the metric closure of ``U`` lies in the interior of ``B(U, r)``."""
    r = as_rational(r)
    checked = 0
    for x in _candidates(space, grid, extra):
        if not U.in_metric_closure(x):
            continue
        checked += 1
        if not U.in_ball(x, r):
            return Verdict(FAILS, checked, x, [], "metric closure point outside B(U,r)")
        esc = escapes_everywhere(space, x, lambda z: U.in_ball(z, r))
        if esc is not None:
            return Verdict(FAILS, checked, x, esc, "metric closure point not interior to B(U,r)")
    return Verdict(HOLDS, checked)
