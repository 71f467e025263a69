"""Finite c-Lipschitz approximations and the functions they determine.

An approximation is a finite family of levels ``(a, F_a, G_a)`` of closed
sets with ``d(F_a, G_b) * c > b - a`` whenever ``a < b``; it is total at
``a`` when ``F_a`` and ``G_a`` cover the space.  The ledger records, for
each pair of levels, a certified lower bound on ``d(F_a, G_b)`` and how it
was obtained, so the defining inequality never has to be re-derived from
the (possibly complicated) sets themselves.
"""
from __future__ import annotations

import bisect
import threading
from dataclasses import dataclass, field, replace
from types import MappingProxyType

from .functions import LazyFunction
from .rational import INF, Bracket, as_rational, fmt, Q
from .separation import SeparationError, split_cover
from .space import BoxUnion, RepClosedSet, Space
from .textio import parse_set

ZERO, ONE = Q(0), Q(1)


class ApproximationError(ValueError):
    """Structural failure: a precondition or a separation step did not hold."""

    def __init__(self, message, witness=None, distance=None):
        super().__init__(message)
        self.witness = witness
        self.distance = distance


@dataclass(frozen=True)
class LedgerEntry:
    bound: object
    strict: bool
    provenance: str

    def ratio(self, gap):
        """``gap / bound``: the Lipschitz constant this entry certifies."""
        if self.bound is INF:
            return ZERO
        if self.bound == 0:
            return INF
        return gap / self.bound


@dataclass(frozen=True)
class Ledger:
    """Lower bounds on ``d(F_a, G_b)`` for ``a < b``.

    ``base`` holds bounds computed exactly on the seed sets (absent pairs
    involve an empty set and are unbounded).  ``uniform`` replaces ``base``
    with the bound ``(b - a) / uniform`` inherited from a Lipschitz
    function's level sets.  Saturating a level replaces every bound
    involving it by ``|b - a| / c'`` with the ``c'`` used; these bounds are
    strict, since the saturated sets are compact and stay outside the
    closed metric balls of that radius.  The most recent saturation among
    the two levels of a pair decides its entry.
    """

    base: MappingProxyType = field(default_factory=lambda: MappingProxyType({}))
    uniform: object = None
    events: MappingProxyType = field(default_factory=lambda: MappingProxyType({}))
    clock: int = 0

    def entry(self, a, b) -> LedgerEntry:
        ea, eb = self.events.get(a), self.events.get(b)
        ev = max((e for e in (ea, eb) if e is not None), default=None)
        if ev is not None:
            return LedgerEntry(abs(b - a) / ev[1], True, f"saturation #{ev[0]}")
        if self.uniform is not None:
            bound = INF if self.uniform == 0 else (b - a) / self.uniform
            return LedgerEntry(bound, False, "lipschitz level sets")
        return LedgerEntry(self.base.get((a, b), INF), False, "exact box distance")

    def with_event(self, level, cprime):
        ev = self.events.copy()
        ev[level] = (self.clock + 1, cprime)
        return replace(self, events=MappingProxyType(ev), clock=self.clock + 1)


@dataclass(frozen=True)
class LipApprox:
    space: Space
    c: Q
    alphas: tuple
    F: MappingProxyType
    G: MappingProxyType
    total: frozenset
    ledger: Ledger
    cprime: object = None

    # -- construction ----------------------------------------------------
    @classmethod
    def from_levels(cls, space: Space, c, levels, uniform=None):
        """Approximation from explicit ``(a, F_a, G_a)``; the ledger is computed exactly.

        The defining inequality is not enforced here; ``violations`` reports
        it and every operation checks it before building anything.
        """
        c = as_rational(c)
        if c <= 0:
            raise ValueError("the Lipschitz bound must be positive")
        levels = sorted(((as_rational(a), F, G) for a, F, G in levels), key=lambda t: t[0])
        alphas = tuple(a for a, _, _ in levels)
        if len(set(alphas)) != len(alphas):
            raise ValueError("repeated level")
        F = {a: f for a, f, _ in levels}
        G = {a: g for a, _, g in levels}
        total = frozenset(a for a in alphas if space.covers(F[a] | G[a]))
        base = {}
        if uniform is None:
            for i, a in enumerate(alphas):
                for b in alphas[i + 1:]:
                    base[(a, b)] = space.dist_sets(F[a], G[b])
        ledger = Ledger(MappingProxyType(base), None if uniform is None else as_rational(uniform))
        return cls(space, c, alphas, MappingProxyType(F), MappingProxyType(G), total, ledger)

    # -- inspection ------------------------------------------------------
    @property
    def hull(self) -> Bracket:
        return Bracket(self.alphas[0], self.alphas[-1])

    def is_total(self):
        return len(self.total) == len(self.alphas)

    def entry(self, a, b) -> LedgerEntry:
        return self.ledger.entry(a, b)

    def pairs(self):
        for i, a in enumerate(self.alphas):
            for b in self.alphas[i + 1:]:
                yield a, b

    def violations(self):
        """Ledger pairs that fail to certify ``d(F_a, G_b) * c > b - a``."""
        out = []
        led = self.ledger
        if not led.events and led.uniform is not None and led.uniform < self.c:
            return out  # every entry certifies exactly ``uniform``
        for a, b in self.pairs():
            e = self.entry(a, b)
            r = e.ratio(b - a)
            if r > self.c or (r == self.c and not e.strict):
                out.append((a, b, e))
        return out

    def F_rep(self, a) -> RepClosedSet:
        return RepClosedSet(self.F[a])

    def G_rep(self, a) -> RepClosedSet:
        return RepClosedSet(self.G[a])

    def _with(self, **kw):
        return replace(self, **kw)

    # -- the c' of the saturation step -------------------------------------
    def choose_cprime(self):
        if self.cprime is not None:
            return self.cprime
        bad = self.violations()
        if bad:
            a, b, e = bad[0]
            raise ApproximationError(
                f"levels {fmt(a)} < {fmt(b)}: bound {fmt(e.bound)} * c = {fmt(e.bound * self.c)} "
                f"does not exceed {fmt(b - a)}",
                witness=(a, b),
            )
        exact_max, strict_max = ZERO, ZERO
        led = self.ledger
        if not led.events and led.uniform is not None:
            exact_max = led.uniform if len(self.alphas) > 1 else ZERO
            return (self.c + exact_max) / 2
        for a, b in self.pairs():
            e = self.entry(a, b)
            if e.strict:
                strict_max = max(strict_max, e.ratio(b - a))
            else:
                exact_max = max(exact_max, e.ratio(b - a))
        return max(strict_max, (self.c + exact_max) / 2)


def _inflations(approx: LipApprox, beta, cprime, below: bool, prune: bool):
    """Closed metric balls whose union is ``K`` (``below``) or ``L``.

    With ``prune`` a ball around a level is skipped when it lies inside the
    ball around a total level closer to ``beta``: balls of radius below one
    compose additively in every catalog factor, and a radius of at least
    one already fills the 0/1 factors.
    """
    alphas = approx.alphas
    side = alphas[:bisect.bisect_left(alphas, beta)][::-1] if below else alphas[bisect.bisect_right(alphas, beta):]
    sets = approx.F if below else approx.G
    radius = lambda a: abs(beta - a) / cprime
    chosen = []
    near = far = None
    i = 0
    while i < len(side):
        a = side[i]
        i += 1
        if sets[a].is_empty():
            continue
        r = radius(a)
        chosen.append(a)
        if a in approx.total:
            near = a if near is None else near
            if r >= 1:
                far = a
        if prune and far is not None:
            break
        if prune and near is not None and r < 1:
            # everything closer than radius one is dominated by ``near``
            edge = beta - cprime if below else beta + cprime
            i = max(i, _first_beyond(side, edge, below))
    return [(a, radius(a)) for a in chosen]


def _first_beyond(side, edge, below):
    """Index of the first level of ``side`` at distance at least ``cprime`` from beta."""
    if below:
        # ``side`` is decreasing
        lo, hi = 0, len(side)
        while lo < hi:
            mid = (lo + hi) // 2
            if side[mid] <= edge:
                hi = mid
            else:
                lo = mid + 1
        return lo
    return bisect.bisect_left(side, edge)


def saturate_level(approx: LipApprox, beta, prune: bool = True) -> LipApprox:
    """Enlarge ``F_beta``, ``G_beta`` to cover the space, keeping the defining inequality."""
    beta = as_rational(beta)
    if beta not in approx.F:
        raise ValueError(f"{fmt(beta)} is not a level")
    cprime = approx.choose_cprime()
    if beta in approx.total:
        return approx
    space = approx.space
    K = BoxUnion(tuple(b for a, r in _inflations(approx, beta, cprime, True, prune)
                       for b in space.ball(approx.F[a], r).boxes))
    L = BoxUnion(tuple(b for a, r in _inflations(approx, beta, cprime, False, prune)
                       for b in space.ball(approx.G[a], r).boxes))
    delta, wa, _ = space.dist_sets_witness(K, L)
    if delta == 0:
        raise ApproximationError(
            f"inflated level sets meet at {space.fmt_point(wa)}; cannot separate at level {fmt(beta)}",
            witness=wa, distance=ZERO)
    try:
        A, B = split_cover(space, K.simplified(), L.simplified())
    except SeparationError as exc:
        raise ApproximationError(str(exc), witness=exc.witness) from exc
    F = approx.F.copy()
    G = approx.G.copy()
    F[beta] = (approx.F[beta] | B).simplified() if not approx.F[beta].is_empty() else B
    G[beta] = (approx.G[beta] | A).simplified() if not approx.G[beta].is_empty() else A
    return approx._with(
        F=MappingProxyType(F), G=MappingProxyType(G), total=approx.total | {beta},
        ledger=approx.ledger.with_event(beta, cprime), cprime=cprime,
    )


def insert_level(approx: LipApprox, beta, prune: bool = True) -> LipApprox:
    beta = as_rational(beta)
    if beta in approx.F:
        return approx
    F = approx.F.copy()
    G = approx.G.copy()
    F[beta] = G[beta] = BoxUnion()
    alphas = list(approx.alphas)
    bisect.insort(alphas, beta)
    grown = approx._with(alphas=tuple(alphas), F=MappingProxyType(F), G=MappingProxyType(G))
    return saturate_level(grown, beta, prune)


def from_sublevels(f: LazyFunction, S, cprime) -> LipApprox:
    """Approximation of ``f`` at the levels ``S`` with constant ``cprime > cert(f)``."""
    cprime = as_rational(cprime)
    if cprime <= f.lipschitz:
        raise ApproximationError(f"c' = {fmt(cprime)} must exceed the certificate {fmt(f.lipschitz)}")
    levels = []
    for a in sorted({as_rational(s) for s in S}):
        Fa, Ga = f.sublevel(a), f.superlevel(a)
        if Fa is None or Ga is None:
            raise ApproximationError(f"{f.term} does not expose level sets")
        levels.append((a, Fa, Ga))
    return LipApprox.from_levels(f.space, cprime, levels, uniform=f.lipschitz)


def extend_approx_from_subspace(space: Space, Y: BoxUnion, approx_Y: LipApprox, prune: bool = True) -> LipApprox:
    """Saturate every level in increasing order; the result is total on the whole space."""
    for a in approx_Y.alphas:
        if not (space.is_subset(approx_Y.F[a], Y) and space.is_subset(approx_Y.G[a], Y)):
            raise ApproximationError(f"level {fmt(a)} has sets outside the subspace")
    out = approx_Y
    for a in approx_Y.alphas:
        out = saturate_level(out, a, prune)
    return out


def dyadic_levels(hull: Bracket, j: int):
    w = hull.width
    return [hull.lo + w * Q(i, 2**j) for i in range(2**j + 1)]


class RealizedFunction(LazyFunction):
    """The function a total approximation determines, refined on demand.

    Precision ``k`` uses the original levels together with the dyadic
    points of depth ``j(k)`` of the hull; deeper points are inserted
    lazily and never change shallower levels, so brackets nest in ``k``.
    """

    def __init__(self, approx: LipApprox, prune: bool = True):
        if not approx.is_total():
            raise ApproximationError("realize needs a total approximation")
        self.space = approx.space
        self.approx = approx
        self.prune = prune
        self.lipschitz = approx.c
        self.hull = approx.hull
        self.term = f"realized(c={fmt(approx.c)}, levels={len(approx.alphas)})"
        self._seed = tuple(approx.alphas)
        self._depth = 0
        self._by_depth = {0: tuple(sorted(set(self._seed) | set(dyadic_levels(self.hull, 0))))}
        self._depths = {}
        self._lock = threading.Lock()
        self.refine(0)

    def depth_for(self, k: int) -> int:
        j = self._depths.get(k)
        if j is None:
            w, j = self.hull.width, 0
            while w > Q(1, 2**k) * 2**j:
                j += 1
            self._depths[k] = j
        return j

    def refine(self, j: int):
        with self._lock:
            approx = self.approx
            if self._depth == 0:
                for a in self._by_depth[0]:
                    approx = insert_level(approx, a, self.prune)
            for jj in range(self._depth + 1, j + 1):
                new = dyadic_levels(self.hull, jj)[1::2]
                for a in new:
                    approx = insert_level(approx, a, self.prune)
                self._by_depth[jj] = tuple(sorted(set(self._by_depth[jj - 1]) | set(new)))
            self.approx = approx
            self._depth = max(self._depth, j)

    def levels(self, k: int):
        j = self.depth_for(k)
        if j > self._depth:
            self.refine(j)
        return self._by_depth[j]

    def eval(self, x, k: int) -> Bracket:
        levels = self.levels(k)
        F, G = self.approx.F, self.approx.G
        lo, hi = 0, len(levels)
        while lo < hi:
            mid = (lo + hi) // 2
            if F[levels[mid]].contains(x):
                hi = mid
            else:
                lo = mid + 1
        upper = levels[lo] if lo < len(levels) else self.hull.hi
        lo2, hi2 = -1, len(levels) - 1
        while lo2 < hi2:
            mid = (lo2 + hi2 + 1) // 2
            if G[levels[mid]].contains(x):
                lo2 = mid
            else:
                hi2 = mid - 1
        lower = levels[lo2] if lo2 >= 0 else self.hull.lo
        return Bracket(lower, upper)

    def sublevel(self, alpha):
        return self.approx.F.get(as_rational(alpha))

    def superlevel(self, alpha):
        return self.approx.G.get(as_rational(alpha))


def realize(approx: LipApprox, k: int = 0, prune: bool = True) -> RealizedFunction:
    g = RealizedFunction(approx, prune)
    g.levels(k)
    return g


def urysohn(space: Space, F: BoxUnion, G: BoxUnion, r, k: int = 0) -> RealizedFunction:
    """Continuous 1-Lipschitz ``f`` into ``[0, r]``, zero on ``F`` and ``r`` on ``G``."""
    r = as_rational(r)
    d = space.dist_sets(F, G)
    if r <= 0:
        raise ApproximationError(f"r must be positive, got {fmt(r)}")
    if not r < d:
        raise ApproximationError(f"r = {fmt(r)} is not below d(F, G) = {fmt(d)}", distance=d)
    X = space.full()
    seed = LipApprox.from_levels(space, 1, [(ZERO, F, X), (r, X, G)])
    return realize(seed, k)


# -- text form --------------------------------------------------------------

def dump_approx(approx: LipApprox) -> str:
    sp = approx.space
    lines = ["approx 1", f"c {fmt(approx.c)}",
             f"cprime {fmt(approx.cprime) if approx.cprime is not None else 'none'}",
             f"uniform {fmt(approx.ledger.uniform) if approx.ledger.uniform is not None else 'none'}"]
    for a in approx.alphas:
        ev = approx.ledger.events.get(a)
        lines.append(f"level {fmt(a)} total={int(a in approx.total)} event={'-' if ev is None else f'{ev[0]}:{fmt(ev[1])}'}")
        lines.append(f"  F {sp.fmt_set(approx.F[a])}")
        lines.append(f"  G {sp.fmt_set(approx.G[a])}")
    for (a, b), v in sorted(approx.ledger.base.items()):
        lines.append(f"base {fmt(a)} {fmt(b)} {fmt(v)}")
    lines.append(f"clock {approx.ledger.clock}")
    return "\n".join(lines) + "\n"


def load_approx(space: Space, text: str) -> LipApprox:
    F, G, total, events, base = {}, {}, set(), {}, {}
    c = cprime = uniform = None
    clock = 0
    cur = None
    q = lambda s: None if s == "none" else (INF if s == "inf" else as_rational(s))
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            head, _, rest = line.partition(" ")
            if head == "approx":
                continue
            if head == "c":
                c = as_rational(rest)
            elif head == "cprime":
                cprime = q(rest)
            elif head == "uniform":
                uniform = q(rest)
            elif head == "level":
                a, tot, ev = rest.split()
                cur = as_rational(a)
                if tot == "total=1":
                    total.add(cur)
                ev = ev.split("=", 1)[1]
                if ev != "-":
                    s, cp = ev.split(":")
                    events[cur] = (int(s), as_rational(cp))
            elif head == "F":
                F[cur] = parse_set(space, rest)
            elif head == "G":
                G[cur] = parse_set(space, rest)
            elif head == "base":
                a, b, v = rest.split()
                base[(as_rational(a), as_rational(b))] = q(v)
            elif head == "clock":
                clock = int(rest)
            else:
                raise ValueError(f"unknown record {head!r}")
        except (ValueError, TypeError) as exc:
            raise ValueError(f"line {n}: {exc}") from exc
    if c is None or set(F) != set(G):
        raise ValueError("incomplete approximation text")
    ledger = Ledger(MappingProxyType(base), uniform, MappingProxyType(events), clock)
    return LipApprox(space, c, tuple(sorted(F)), MappingProxyType(F), MappingProxyType(G),
                     frozenset(total), ledger, cprime)
