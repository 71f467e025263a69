"""Forced limits and Lipschitz-preserving Tietze extension."""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field

from .approximation import (
    ApproximationError,
    extend_approx_from_subspace,
    from_sublevels,
    realize,
    urysohn,
)
from .audit import GridAudit, lipschitz_audit, sample_pairs
from .functions import Affine, Clamp, LazyFunction, PiecewiseConstant, Restrict, scale
from .rational import Bracket, as_rational, fmt, Q
from .separation import SeparationError, closed_metric_ball, separate
from .space import BoxUnion, Space

ZERO, ONE = Q(0), Q(1)
UNIT = Bracket(ZERO, ONE)


def flim(x, k: int) -> Bracket:
    """Forced limit of a ``[0,1]``-sequence, bracketed at precision ``k``.

    ``y_0 = x_0`` and ``y_{n+1}`` is ``x_{n+1}`` clamped to within
    ``2**-n`` of ``y_n``.  The limit of ``y`` lies within ``2**-k`` of
    ``y_{k+1}``, and it equals ``lim x`` whenever ``|x_n - lim x| <= 2**-n``.
    ``x`` is a sequence or a callable on indices; only ``x_0 .. x_{k+1}``
    are read.
    """
    at = x if callable(x) else x.__getitem__
    y = None
    for n in range(k + 2):
        v = as_rational(at(n))
        if not 0 <= v <= 1:
            raise ValueError(f"term {n} = {fmt(v)} is outside [0,1]")
        if y is None:
            y = v
        else:
            w = Q(1, 2 ** (n - 1))
            y = min(max(v, y - w), y + w)
    w = Q(1, 2**k)
    return Bracket(y - w, y + w)


class ForcedLimit(LazyFunction):
    """``x -> flim(g_n(x))`` for a sequence of functions into ``[0,1]``.

    Precision ``k`` reads ``g_0 .. g_{k+3}`` at precision ``k + 1`` and runs
    the recursion at ``k + 2``: its bracket has width ``2**-(k+1)`` and, the
    recursion being 1-Lipschitz in the supremum metric, the term brackets
    widen it by at most their own width.  Brackets are cached per point; a
    new one is met with the nearest coarser one, and a coarser request is
    answered by the nearest finer one, so answers nest.
    """

    def __init__(self, space: Space, terms, lipschitz, term="flim", cache_size: int = 1 << 16):
        self.space = space
        self._terms = terms
        self._cache = {}
        self._values = {}
        self._cache_size = cache_size
        self._lock = threading.Lock()
        self.lipschitz = as_rational(lipschitz)
        self.hull = UNIT
        self.term = term

    def g(self, n: int) -> LazyFunction:
        with self._lock:
            if n not in self._cache:
                self._cache[n] = self._terms(n)
            return self._cache[n]

    def _raw(self, x, k):
        brs = [self.g(n).eval(x, k + 1) for n in range(k + 4)]
        core = flim([b.mid for b in brs], k + 2)
        slack = max(b.width for b in brs) / 2
        return Bracket(core.lo - slack, core.hi + slack).meet(UNIT)

    def eval(self, x, k: int) -> Bracket:
        seen = self._values.get(x)
        if seen is None:
            seen = {}
            if len(self._values) < self._cache_size:
                self._values[x] = seen
        hit = seen.get(k)
        if hit is not None:
            return hit
        finer = [j for j in seen if j > k]
        if finer:
            out = seen[min(finer)]
        else:
            coarser = [j for j in seen if j < k]
            out = self._raw(x, k)
            if coarser:
                out = out.meet(seen[max(coarser)])
        seen[k] = out
        return out


def _first(lo, hi, pred):
    """Least ``j`` in ``[lo, hi)`` with ``pred(j)`` for a monotone ``pred``, else ``hi``."""
    while lo < hi:
        mid = (lo + hi) // 2
        if pred(mid):
            hi = mid
        else:
            lo = mid + 1
    return lo


def tietze_extend(space: Space, Y: BoxUnion, f: LazyFunction, c, cprime, k: int = 0, prune: bool = True) -> ForcedLimit:
    """Continuous ``cprime``-Lipschitz extension to the whole space of ``f`` on ``Y``."""
    c, cprime = as_rational(c), as_rational(cprime)
    if cprime <= c:
        raise ApproximationError(f"c' = {fmt(cprime)} must exceed c = {fmt(c)}")
    if f.lipschitz > c:
        raise ApproximationError(f"certificate {fmt(f.lipschitz)} of {f.term} exceeds c = {fmt(c)}")
    if not f.hull.within(UNIT):
        raise ApproximationError(f"{f.term} does not map into [0,1]")
    if f.sublevel(0) is None or f.superlevel(0) is None:
        raise ApproximationError(f"{f.term} does not expose level sets")
    fy = Restrict(f, Y)

    lo_f, hi_f = f.hull.lo, f.hull.hi

    def term(n):
        # dyadics of depth n bracketing f(Y): one empty sublevel below, one empty superlevel above
        m = 2**n
        a, b = math.floor(lo_f * m), math.ceil(hi_f * m)
        p = _first(a, b + 1, lambda j: not fy.sublevel(Q(j, m)).is_empty())
        q = _first(a, b + 1, lambda j: fy.superlevel(Q(j, m)).is_empty())
        levels = [Q(j, m) for j in range(max(p - 1, a), min(q, b) + 1)]
        seed = from_sublevels(fy, levels, cprime)
        return realize(extend_approx_from_subspace(space, Y, seed, prune), 0, prune)

    g = ForcedLimit(space, term, cprime, f"tietze({f.term}, c'={fmt(cprime)})")
    g.Y, g.f = Y, f
    g.eval(space.anchor(space.whole_region()), k)
    return g


# -- equivalence harness ------------------------------------------------------

PASS, FAIL, SKIPPED = "PASS", "FAIL", "SKIPPED"


@dataclass
class UrysohnCase:
    F: BoxUnion
    G: BoxUnion
    r: Q
    name: str = ""


@dataclass
class TietzeCase:
    Y: BoxUnion
    f: LazyFunction
    c: Q
    cprime: Q
    name: str = ""


@dataclass
class HarnessRow:
    instance: str
    direction: str
    status: str
    detail: str = ""


@dataclass
class HarnessReport:
    rows: list = field(default_factory=list)

    def add(self, *a):
        self.rows.append(HarnessRow(*a))

    def status(self, instance, direction):
        return next((r.status for r in self.rows if r.instance == instance and r.direction == direction), None)

    @property
    def consistent(self):
        """No instance passes Tietze while failing a direction derived from it."""
        for inst in {r.instance for r in self.rows}:
            if self.status(inst, "tietze") == PASS and any(
                r.status == FAIL for r in self.rows if r.instance == inst and r.direction != "tietze"
            ):
                return False
        return True

    @property
    def passed(self):
        return all(r.status != FAIL for r in self.rows)


def _boundary_exact(f, pts, S, value, k):
    """Brackets at points of ``S`` contain ``value``."""
    return all(f.eval(x, k).contains(value) for x in pts if S.contains(x))


def audit_urysohn(space, u, F, G, r, k, pts, pairs):
    if not _boundary_exact(u, pts, F, ZERO, k):
        return FAIL, "value on F not bracketed by 0"
    if not _boundary_exact(u, pts, G, r, k):
        return FAIL, f"value on G not bracketed by {fmt(r)}"
    la = lipschitz_audit(space, u, 1, pairs, k)
    if not la.passed:
        return FAIL, f"1-Lipschitz audit failed at {la.witness}"
    if not all(u.eval(x, k).within(Bracket(ZERO - Q(1, 2**k), r + Q(1, 2**k))) for x in pts):
        return FAIL, "range leaves [0, r]"
    return PASS, f"{len(pairs)} pairs"


def audit_proposition(grid: GridAudit, g):
    """The realized approximation is sound, total and approximates its function."""
    ap = g.approx
    bad = grid.ledger_violations(ap)
    if bad:
        return FAIL, f"ledger refuted at levels {fmt(bad[0][0])} < {fmt(bad[0][1])}"
    if grid.uncovered(ap) is not None:
        return FAIL, "a level does not cover the grid"
    for x in grid.points[:: max(1, len(grid.points) // 64)]:
        b = g.eval(x, 8)
        for a in ap.alphas:
            if (ap.F[a].contains(x) and b.lo > a) or (ap.G[a].contains(x) and b.hi < a):
                return FAIL, f"level {fmt(a)} not respected at {grid.space.fmt_point(x)}"
    return PASS, f"{len(ap.alphas)} levels"


def closed_ball_certificate(space, F, r, witness, outside, grid_pts, k):
    """The proof's sets ``{y : u(y) <= r}`` against the exact closed metric ball.

    ``witness(x, s)`` must return a 1-Lipschitz ``u`` vanishing on ``F``
    with ``u(x) = s``; each tested ``x`` outside the ball must be excluded
    and every grid point of the ball kept.
    """
    ball = closed_metric_ball(space, F, r)
    inside = [y for y in grid_pts if ball.contains(y)]
    for x in outside:
        dx = space.dist_point_set(x, F)
        s = (r + min(dx, r + 1)) / 2
        u = witness(x, s)
        if not u.eval(x, k).lo > r:
            return FAIL, f"{space.fmt_point(x)} not excluded"
        bad = next((y for y in inside if u.eval(y, k).lo > r), None)
        if bad is not None:
            return FAIL, f"ball point {space.fmt_point(bad)} excluded"
    return PASS, f"{len(outside)} outside points, {len(inside)} ball points"


def _tietze_urysohn(space, F, G, r, k):
    """Urysohn witness obtained from a Tietze extension of the 0/1 function on ``F u G``."""
    ind = PiecewiseConstant(space, [(F, 0), (G, 1)])
    c = ind.lipschitz
    cprime = 1 / r
    g = tietze_extend(space, F | G, ind, c, cprime, k)
    return scale(r, g), g


def equivalence_harness(space: Space, instances, k: int = 4, grid: int = 16, pairs: int = 100, seed: int = 0,
                        ball_points: int = 3) -> HarnessReport:
    rep = HarnessReport()
    audit = GridAudit.on_grid(space, grid)
    pts = audit.points
    prs = sample_pairs(space, pairs, seed, pts)
    for idx, inst in enumerate(instances):
        name = inst.name or f"#{idx}"
        if isinstance(inst, UrysohnCase):
            _urysohn_rows(rep, space, inst, name, k, audit, prs, ball_points)
        else:
            _tietze_rows(rep, space, inst, name, k, audit, prs, ball_points)
    return rep


def _urysohn_rows(rep, space, inst, name, k, audit, prs, ball_points):
    F, G, r = inst.F, inst.G, as_rational(inst.r)
    pts = audit.points
    dependent = ("urysohn", "proposition", "tietze", "tietze=>urysohn", "closed-neighbourhoods")
    try:
        separate(space, F, G)
        u = urysohn(space, F, G, r, k)
    except (SeparationError, ApproximationError) as exc:
        for dname in dependent:
            rep.add(name, dname, SKIPPED, str(exc))
        return
    rep.add(name, "urysohn", *audit_urysohn(space, u, F, G, r, k, pts, prs))
    rep.add(name, "proposition", *audit_proposition(audit, u))
    try:
        v, g = _tietze_urysohn(space, F, G, r, k)
    except ApproximationError as exc:
        rep.add(name, "tietze", FAIL, str(exc))
        return
    on_y = all(g.eval(y, k).contains(ZERO if F.contains(y) else ONE) for y in pts if (F | G).contains(y))
    rep.add(name, "tietze", PASS if on_y else FAIL, "restriction to F u G")
    rep.add(name, "tietze=>urysohn", *audit_urysohn(space, v, F, G, r, k, pts, prs))
    outside = _outside_points(space, F, r, pts, ball_points)
    rep.add(name, "closed-neighbourhoods", *closed_ball_certificate(
        space, F, r, lambda x, s: urysohn(space, F, space.singleton(x), s, k), outside, pts, k))


def _outside_points(space, F, r, pts, n):
    far = [x for x in pts if space.dist_point_set(x, F) > r]
    if len(far) <= n:
        return far
    step = len(far) / n
    return [far[int(i * step)] for i in range(n)]


def _attained_range(f, Y, depth):
    """Smallest dyadic ``a`` with ``{f <= a}`` meeting ``Y``, largest ``b`` with ``{f >= b}`` meeting ``Y``."""
    m = 2**depth
    lo, hi = math.floor(f.hull.lo * m), math.ceil(f.hull.hi * m)
    a = _first(lo, hi + 1, lambda j: not (f.sublevel(Q(j, m)) & Y).is_empty())
    b = _first(lo, hi + 1, lambda j: (f.superlevel(Q(j, m)) & Y).is_empty()) - 1
    return Q(min(a, hi), m), Q(max(b, lo), m)


def _tietze_rows(rep, space, inst, name, k, audit, prs, ball_points):
    Y, f, c, cprime = inst.Y, inst.f, as_rational(inst.c), as_rational(inst.cprime)
    pts = audit.points
    try:
        g = tietze_extend(space, Y, f, c, cprime, k)
    except ApproximationError as exc:
        for dname in ("tietze", "tietze=>urysohn", "closed-neighbourhoods"):
            rep.add(name, dname, SKIPPED if dname != "tietze" else FAIL, str(exc))
        return
    tol = Q(1, 2**k)
    ok = all(abs(g.eval(y, k).mid - f.value(y)) <= tol + g.eval(y, k).width for y in pts if Y.contains(y))
    la = lipschitz_audit(space, g, cprime, prs, k)
    rep.add(name, "tietze", PASS if ok and la.passed else FAIL,
            "restriction and c'-Lipschitz audit" if ok and la.passed else f"restriction={ok} lipschitz={la.passed}")
    rep.add(name, "proposition", *audit_proposition(audit, g.g(min(k, 3))))
    # derived Urysohn instance: the extreme attained dyadic level sets of f on Y
    a, b = _attained_range(f, Y, k + 2)
    Fs, Gs = f.sublevel(a) & Y, f.superlevel(b) & Y
    if a >= b:
        rep.add(name, "tietze=>urysohn", SKIPPED, "f is constant on Y")
        rep.add(name, "closed-neighbourhoods", SKIPPED, "f is constant on Y")
        return
    r = (b - a) / cprime
    u = Clamp(Affine([(1 / cprime, g)], -a / cprime), 0, r)
    rep.add(name, "tietze=>urysohn", *audit_urysohn(space, u, Fs, Gs, r, k, pts, prs))

    def witness(x, s):
        _, gx = _tietze_urysohn(space, Fs, space.singleton(x), s, max(k - 1, 2))
        return scale(s, gx)

    outside = _outside_points(space, Fs, r, pts, ball_points)
    rep.add(name, "closed-neighbourhoods", *closed_ball_certificate(space, Fs, r, witness, outside, pts, max(k - 1, 2)))
