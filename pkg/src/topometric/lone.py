"""Generated function families, the two-point refuter and the induced metric round trip."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .functions import Abs, Affine, Constant, LazyFunction
from .rational import as_rational, fmt, Q
from .space import BoxUnion, Space

ZERO, ONE = Q(0), Q(1)
PASS, FAIL = "PASS", "FAIL"
NONE = None

CONSTANTS = (ZERO, Q(1, 2), ONE)


def shift_weight(depth: int) -> Q:
    """``lambda`` used for convex shifts at ``depth``: ``1 - 2**-(depth + 2)``."""
    return 1 - Q(1, 2 ** (depth + 2))


def convex_shift(g: LazyFunction, t, lam) -> LazyFunction:
    """``lam * g + (1 - lam) * (t / (1 - lam))``, a convex combination of ``g`` and a constant."""
    return Affine([(lam, g)], as_rational(t))


def _value(f, x, k=24):
    v = f.exact(x)
    return v if v is not None else f.eval(x, k).mid


class GeneratedFamily:
    """Members obtained from generators by the closure operations, enumerated by depth.

    Depth 0 holds the generators and a few constants.  Each further depth
    applies negation, absolute value, halving, pairwise averages and a
    convex shift to the previous depth.  Members are deduplicated by their
    values on ``probe`` points and the enumeration keeps at most ``cap``
    members, so it is deterministic and increasing in depth.
    """

    def __init__(self, space: Space, generators, depth: int = 2, cap: int = 200, probe: int = 8,
                 constants=CONSTANTS):
        self.space = space
        self.generators = list(generators)
        for g in self.generators:
            if g.lipschitz > 1:
                raise ValueError(f"{g.term} is certified only {fmt(g.lipschitz)}-Lipschitz")
        self.depth, self.cap = depth, cap
        self.constants = tuple(as_rational(c) for c in constants)
        self._probe = space.grid(probe)
        self._layers = None

    def _key(self, f):
        return tuple(_value(f, x) for x in self._probe)

    def _enumerate(self):
        seen, members, layers = set(), [], []

        def add(f):
            if len(members) >= self.cap:
                return
            key = self._key(f)
            if key not in seen:
                seen.add(key)
                members.append(f)

        for c in self.constants:
            add(Constant(self.space, c))
        for g in self.generators:
            add(g)
        layers.append(len(members))
        for d in range(1, self.depth + 1):
            prev = members[:layers[-1]]
            lam = shift_weight(d)
            for g in prev:
                if isinstance(g, Constant):
                    continue
                add(Affine([(-1, g)]))
                add(Abs(g))
                add(Affine([(Q(1, 2), g)]))
                add(convex_shift(g, (1 - lam) * self.constants[-1], lam))
            for i, g in enumerate(prev):
                for h in prev[i + 1:]:
                    if not (isinstance(g, Constant) and isinstance(h, Constant)):
                        add(Affine([(Q(1, 2), g), (Q(1, 2), h)]))
            layers.append(len(members))
        self._members, self._layers = members, layers

    def members(self, depth: int | None = None):
        if self._layers is None:
            self._enumerate()
        depth = self.depth if depth is None else min(depth, self.depth)
        return self._members[:self._layers[depth]]

    def values(self, points, depth=None):
        """Exact member values, members by points."""
        return [[_value(f, x) for x in points] for f in self.members(depth)]


def _matrix(A, points, depth):
    vals = A.values(points, depth)
    return vals, np.array([[float(v) for v in row] for row in vals]) if vals else np.zeros((0, len(points)))


def induced_metric(A: GeneratedFamily, x, y, depth=None) -> Q:
    """``sup |g(x) - g(y)|`` over the enumerated members."""
    return max((abs(_value(g, x) - _value(g, y)) for g in A.members(depth)), default=ZERO)


@dataclass
class Refutation:
    x: tuple
    y: tuple
    fgap: Q
    dA: Q
    eps: Q
    iv_prime: bool

    @property
    def margin(self):
        return self.fgap - self.dA


def l1_membership_refute(A: GeneratedFamily, f: LazyFunction, points=None, eps=Q(1, 8), depth=None,
                         grid: int = 16):
    """Look for a pair with ``|f(x) - f(y)| >= sup_g |g(x) - g(y)| + eps``.

    Returns a :class:`Refutation` or ``None`` (nothing found at this depth
    and sample).  ``iv_prime`` records whether the alternate predicate
    ``|f(x) - g(x) - f(y) + g(y)| >= eps`` holds for every member at the pair.
    """
    eps = as_rational(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    pts = list(points) if points is not None else A.space.grid(grid)
    vals, M = _matrix(A, pts, depth)
    fv = [_value(f, x) for x in pts]
    fa = np.array([float(v) for v in fv])
    dF = np.abs(fa[:, None] - fa[None, :])
    dA = (np.abs(M[:, :, None] - M[:, None, :]).max(axis=0) if len(vals) else np.zeros_like(dF))
    cand = np.argwhere(dF >= dA + float(eps) - 1e-9)
    best = None
    for i, j in cand:
        if i >= j:
            continue
        fgap = abs(fv[i] - fv[j])
        da = max((abs(r[i] - r[j]) for r in vals), default=ZERO)
        if fgap >= da + eps and (best is None or fgap - da > best.margin):
            dfv = fv[i] - fv[j]
            ivp = all(abs(dfv - (r[i] - r[j])) >= eps for r in vals)
            best = Refutation(pts[i], pts[j], fgap, da, eps, ivp)
    return best


def theorem_direction_holds(A: GeneratedFamily, f: LazyFunction, ref: Refutation, depth=None) -> bool:
    """The refuting pair breaks 1-Lipschitzness of ``f`` for the induced metric."""
    dA = induced_metric(A, ref.x, ref.y, depth)
    return abs(_value(f, ref.x) - _value(f, ref.y)) >= dA + ref.eps


# -- the derived properties ---------------------------------------------------

@dataclass
class LemmaReport:
    translation: str
    translation_error: Q
    separation: str
    separation_r: Q | None
    closure: str
    witness: object = None
    notes: list = field(default_factory=list)

    @property
    def passed(self):
        return PASS == self.translation == self.separation == self.closure


def translation_check(A, points, shifts=(Q(1, 4),), depth=None, samples: int = 8, tol=Q(1, 64)):
    depth = A.depth if depth is None else depth
    lam = shift_weight(depth)
    worst = ZERO
    members = [g for g in A.members(depth) if not isinstance(g, Constant)][:samples]
    for g in members:
        for t in shifts:
            h = convex_shift(g, t, lam)
            worst = max(worst, max(abs(_value(h, x) - _value(g, x) - t) for x in points))
    return (PASS if worst <= tol else FAIL), worst


def averaging_separator(A, x, Fpts, depth=None):
    """The finite averaging construction separating ``x`` from ``Fpts``.

    Returns ``(f, r, chosen)`` with ``f(x) = 0`` and ``f >= r`` on ``Fpts``,
    or ``(None, None, y)`` when no member tells ``x`` from ``y``.
    """
    members = A.members(depth)
    normalized = {}
    for y in Fpts:
        best, gap = None, ZERO
        for g in members:
            dv = abs(_value(g, y) - _value(g, x))
            if dv > gap:
                best, gap = g, dv
        if best is None:
            return None, None, y
        normalized[y] = Abs(Affine([(1, best)], -_value(best, x)))
    chosen, covered = [], set()
    for y in Fpts:
        if y in covered:
            continue
        fy = normalized[y]
        chosen.append(y)
        half = _value(fy, y) / 2
        covered |= {z for z in Fpts if _value(fy, z) > half}
    k = len(chosen)
    f = Affine([(Q(1, k), normalized[y]) for y in chosen])
    r = min(_value(f, z) for z in Fpts)
    return f, r, chosen


def closure_check(A, points, eps=Q(1, 8), depth=None, samples: int = 6):
    """Refutation form: limits of member sequences are never refuted while a term sits within ``eps``."""
    depth = A.depth if depth is None else depth
    for g in [g for g in A.members(depth) if not isinstance(g, Constant)][:samples]:
        seq = [Affine([(shift_weight(n), g)]) for n in range(depth + 4)]
        ref = l1_membership_refute(A, g, points, eps, depth)
        if ref is None:
            continue
        for h in seq:
            if abs(_value(h, ref.x) - _value(g, ref.x)) < eps and abs(_value(h, ref.y) - _value(g, ref.y)) < eps:
                return FAIL, (g.term, ref)
    return PASS, None


def lemma_properties_check(A: GeneratedFamily, x, F: BoxUnion, grid: int = 16, shifts=(Q(1, 4),),
                           tol=Q(1, 64), depth=None) -> LemmaReport:
    space = A.space
    pts = space.grid(grid)
    tr, err = translation_check(A, pts, shifts, depth, tol=tol)
    Fpts = [y for y in pts if F.contains(y)]
    f, r, info = averaging_separator(A, x, Fpts, depth)
    notes = []
    if f is None:
        sep, r, wit = FAIL, None, info
        notes.append(f"no member separates {space.fmt_point(x)} from {space.fmt_point(info)}")
    else:
        ok = _value(f, x) == 0 and r > 0
        sep, wit = (PASS if ok else FAIL), None
        notes.append(f"averaged {len(info)} normalized members; f(x) = {fmt(_value(f, x))}, min on F = {fmt(r)}")
    cl, cwit = closure_check(A, pts, depth=depth)
    return LemmaReport(tr, err, sep, r, cl, wit or cwit, notes)


# -- the induced metric round trip ---------------------------------------------

@dataclass
class RoundTripReport:
    verdict: str
    below_d: bool
    pseudometric: bool
    lsc: bool
    members_lipschitz: bool
    gaps: list
    monotone: bool
    final_gap: Q
    witness: tuple | None = None

    @property
    def passed(self):
        return self.below_d and self.pseudometric and self.lsc and self.members_lipschitz and self.monotone


def _pairwise(A, pts, depth):
    vals, M = _matrix(A, pts, depth)
    n = len(pts)
    D = [[ZERO] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            D[i][j] = D[j][i] = max((abs(r[i] - r[j]) for r in vals), default=ZERO)
    return D


def induced_metric_roundtrip(space: Space, A: GeneratedFamily, points=None, tol=Q(1, 64), grid: int = 8,
                             sufficient: bool = False, lsc_tol=Q(1, 16), j_lo: int = 6, j_hi: int = 10):
    """Audit ``d_A = sup |g(x) - g(y)|`` against ``d`` on samples, at every depth up to ``A.depth``."""
    tol, lsc_tol = as_rational(tol), as_rational(lsc_tol)
    pts = list(points) if points is not None else space.grid(grid)
    n = len(pts)
    gaps, prev, monotone = [], None, True
    for depth in range(A.depth + 1):
        D = _pairwise(A, pts, depth)
        if prev is not None and any(D[i][j] < prev[i][j] for i in range(n) for j in range(n)):
            monotone = False
        gaps.append(max((space.dist(pts[i], pts[j]) - D[i][j] for i in range(n) for j in range(n)), default=ZERO))
        prev = D
    D = prev
    witness = None
    below = True
    for i in range(n):
        for j in range(n):
            if D[i][j] > space.dist(pts[i], pts[j]) + tol:
                below, witness = False, (pts[i], pts[j])
    pseudo = all(D[i][i] == 0 for i in range(n)) and all(
        D[i][j] <= D[i][m] + D[m][j] for i in range(n) for j in range(n) for m in range(n))
    lsc = True
    for i in range(n):
        for j in range(i + 1, n):
            for jj in range(j_lo, j_hi + 1):
                near_x = space.approach(pts[i], jj) or [pts[i]]
                near_y = space.approach(pts[j], jj) or [pts[j]]
                if induced_metric(A, near_x[0], near_y[0], A.depth) < D[i][j] - lsc_tol:
                    lsc, witness = False, (pts[i], pts[j])
                    break
    lip = all(abs(r[i] - r[j]) <= D[i][j] for r in A.values(pts) for i in range(n) for j in range(n))
    final = gaps[-1]
    verdict = PASS if below and pseudo and lsc and lip and monotone else FAIL
    if sufficient and final > tol:
        verdict = FAIL
    elif not sufficient and verdict == PASS and final > tol:
        verdict = "INSUFFICIENT"
    return RoundTripReport(verdict, below, pseudo, lsc, lip, gaps, monotone, final, witness)
