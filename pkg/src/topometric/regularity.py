"""Sufficient families, the evaluation embedding, Stone-Čech checks and dense extensions."""
from __future__ import annotations

import random
from dataclasses import dataclass, field

from .approximation import ApproximationError, urysohn
from .factors import ExampleGlue, _IntervalFactor
from .functions import DistanceTo, GlueCoordinate, GlueLeftIndicator, LazyFunction, Truncate
from .pieces import Left, Right
from .rational import INF, Bracket, as_rational, bmax, fmt, Q
from .separation import FAILS, OpenPiece, OpenSet, check_star_star, escapes_everywhere
from .space import BoxUnion, Space

ZERO, ONE = Q(0), Q(1)

SUFFICIENT = "SUFFICIENT-ON-SAMPLES"
INSUFFICIENT = "INSUFFICIENT"
PASS, FAIL = "PASS", "FAIL"


class FunctionFamily:
    """A finite list of certified 1-Lipschitz functions.

    ``depth`` adds truncations ``min(f, n / 2**depth)`` for ``n < 2**depth``;
    depth 0 is the generators alone.
    """

    def __init__(self, generators, depth: int = 0):
        self.generators = list(generators)
        for g in self.generators:
            if g.lipschitz > 1:
                raise ValueError(f"{g.term} is certified only {fmt(g.lipschitz)}-Lipschitz")
        self.depth = depth
        self.space = self.generators[0].space if self.generators else None

    def members(self):
        out = list(self.generators)
        for d in range(1, self.depth + 1):
            for n in range(1, 2**d, 2):
                out += [Truncate(g, Q(n, 2**d)) for g in self.generators]
        return out

    def __len__(self):
        return len(self.members())

    def extend(self, more):
        return FunctionFamily(self.generators + list(more), self.depth)

    def restrict(self, Y):
        """The same members, viewed on the subspace ``Y``."""
        fam = FunctionFamily(self.generators, self.depth)
        fam.subspace = Y
        return fam


def _value(f, x, k):
    v = f.exact(x)
    return Bracket.point(v) if v is not None else f.eval(x, k)


def induced_pseudometric(A: FunctionFamily, x, y, k: int = 12) -> Bracket:
    """``max |f(x) - f(y)|`` over the members of ``A``."""
    out = Bracket.point(ZERO)
    for f in A.members():
        out = bmax([out, abs(_value(f, x, k) - _value(f, y, k))])
    return out


@dataclass
class EmbeddingReport:
    verdict: str
    defect: Q = ZERO
    pairs: int = 0
    separations: int = 0
    witness: tuple | None = None
    note: str = ""
    details: dict = field(default_factory=dict)

    @property
    def passed(self):
        return self.verdict in (SUFFICIENT, PASS)


def neighbourhood_complement(space: Space, x, depth: int) -> BoxUnion:
    """A closed set missing ``x``: the subdivision cells shed while zooming in on ``x``."""
    region = space.whole_region()
    shed = []
    for _ in range(depth):
        children = space.split_region(region)
        if children is None:
            break
        inside = [c for c in children if c.contains(x)]
        shed += [c for c in children if not c.contains(x)]
        region = inside[0]
    return BoxUnion(tuple(shed)).simplified()


def _sample_points(space, samples, seed, grid):
    pts = list(space.grid(grid))
    if samples is not None and samples < len(pts):
        rng = random.Random(seed)
        pts = [pts[i] for i in sorted(rng.sample(range(len(pts)), samples))]
    return pts


def _separates(f, x, Fpts, k):
    vals = [_value(f, y, k) for y in Fpts]
    fx = _value(f, x, k)
    lo, hi = min(v.lo for v in vals), max(v.hi for v in vals)
    if hi - lo > 2 * Q(1, 2**k):
        return None
    gap = max(fx.lo - hi, lo - fx.hi)
    return gap if gap > 0 else None


def is_sufficient(A: FunctionFamily, space: Space, samples: int = 16, tol=Q(1, 64), seed: int = 0,
                  grid: int = 16, depth: int = 3, k: int = 12, closed_sets=None) -> EmbeddingReport:
    """Refutation audit of the two clauses of sufficiency on samples.

    ``closed_sets`` maps sampled points to closed sets missing them; by
    default each point gets the cells shed while subdividing towards it.
    """
    tol = as_rational(tol)
    pts = _sample_points(space, samples, seed, grid)
    allpts = list(space.grid(grid))
    members = A.members()
    seps = 0
    for x in pts:
        F = closed_sets(x) if closed_sets else neighbourhood_complement(space, x, depth)
        Fpts = [y for y in allpts if F.contains(y)]
        if not Fpts:
            continue
        if not any(_separates(f, x, Fpts, k) for f in members):
            return EmbeddingReport(INSUFFICIENT, separations=seps, witness=(x, space.fmt_set(F)),
                                   note="no member separates the point from the closed set")
        seps += 1
    worst, wit, n = ZERO, None, 0
    for i, x in enumerate(pts):
        for y in pts[i + 1:]:
            n += 1
            dA = induced_pseudometric(A, x, y, k)
            gap = abs(space.dist(x, y) - dA.mid)
            if gap > worst:
                worst, wit = gap, (x, y)
    if worst > tol:
        return EmbeddingReport(INSUFFICIENT, worst, n, seps, wit, "induced pseudometric misses the distance")
    return EmbeddingReport(SUFFICIENT, worst, n, seps)


def box_basis(space: Space, depth: int):
    """Subdivision cells of every depth up to ``depth``."""
    out, layer = [], [space.whole_region()]
    for _ in range(depth):
        nxt = []
        for region in layer:
            nxt += space.split_region(region) or []
        out += nxt
        layer = nxt
    return [BoxUnion((b,)) for b in out]


def distance_family(space: Space, sets, cap=ONE) -> FunctionFamily:
    """``min(cap, d(., S))`` for each closed set ``S``."""
    return FunctionFamily([DistanceTo(space, S, cap) for S in sets])


def urysohn_family(space: Space, pairs=(), separations=(), k: int = 0, shrink=Q(1, 128)) -> FunctionFamily:
    """One Urysohn witness per point pair and per (point, closed set).

    The radius is ``d - shrink`` (at least half of ``d``), capped at 1.
    """
    gens = []
    for F, G in list(pairs) + list(separations):
        d = space.dist_sets(F, G)
        if d == 0:
            raise ApproximationError("sets at distance 0", distance=d)
        d = ONE if d is INF else min(d, ONE)
        r = max(d - shrink, d / 2)
        gens.append(urysohn(space, F, G, r, k))
    return FunctionFamily(gens)


# -- the evaluation map ------------------------------------------------------

def embed_theta(A: FunctionFamily, x, k: int = 12):
    """``(f(x))`` over the members, exact where the kind allows."""
    return tuple(_value(f, x, k) for f in A.members())


def _sup_diff(tx, ty):
    return max((abs(a - b) for a, b in zip(tx, ty)), default=ZERO)


def verify_embedding(A: FunctionFamily, space: Space, samples: int = 32, tol=ZERO, seed: int = 0, grid: int = 16,
                     k: int = 12, points=None) -> EmbeddingReport:
    if not A.members():
        raise ValueError("empty family")
    tol = as_rational(tol)
    pts = list(points) if points is not None else _sample_points(space, samples, seed, grid)
    images = {x: tuple(b.mid for b in embed_theta(A, x, k)) for x in pts}
    slack = 2 * Q(1, 2**k) if any(f.exact(pts[0]) is None for f in A.members()) else ZERO
    worst, wit, n = ZERO, None, 0
    for i, x in enumerate(pts):
        for y in pts[i + 1:]:
            n += 1
            d, dt = space.dist(x, y), _sup_diff(images[x], images[y])
            if d > 0 and dt <= slack:
                return EmbeddingReport(FAIL, abs(d - dt), n, 0, (x, y), "two points share an image")
            gap = abs(d - dt)
            if gap > worst:
                worst, wit = gap, (x, y)
    verdict = PASS if worst <= tol + slack else FAIL
    return EmbeddingReport(verdict, worst, n, 0, wit if verdict == FAIL else None,
                           "isometry defect" if verdict == FAIL else "")


def glue_embedding_family(space: Space, i: int, m: int) -> FunctionFamily:
    """The first ``m`` coordinates of the glued space's embedding in ``[0,1]^N``."""
    return FunctionFamily([GlueCoordinate(space, i, j) for j in range(m)])


@dataclass
class ThetaData:
    points: list
    images: dict
    shifts: tuple = ()


def theta_data(A: FunctionFamily, points, k: int = 12) -> ThetaData:
    pts = list(points)
    return ThetaData(pts, {x: tuple(b.mid for b in embed_theta(A, x, k)) for x in pts})


def rescale_embedding(data: ThetaData, infima=None) -> ThetaData:
    """Shift each coordinate by its infimum (over the samples unless ``infima`` is given)."""
    cols = list(zip(*data.images.values()))
    if infima is None:
        infima = tuple(min(c) for c in cols)
    images = {x: tuple(v - s for v, s in zip(img, infima)) for x, img in data.images.items()}
    return ThetaData(data.points, images, tuple(infima))


def rescale_report(before: ThetaData, after: ThetaData, diameter=None):
    pts = before.points
    diffs_equal = all(
        tuple(a - b for a, b in zip(before.images[x], before.images[y]))
        == tuple(a - b for a, b in zip(after.images[x], after.images[y]))
        for x in pts for y in pts)
    cols = list(zip(*after.images.values()))
    zero_columns = all(min(c) == 0 for c in cols)
    in_unit = diameter is not None and diameter <= 1 and all(0 <= v <= 1 for c in cols for v in c)
    nearest_zero = min(max(img, default=ZERO) for img in after.images.values())
    return {"differences_identical": diffs_equal, "coordinate_minima_zero": zero_columns,
            "in_unit_cube": in_unit, "nearest_to_zero_tuple": nearest_zero}


# -- Stone-Čech at desk scale ------------------------------------------------

def stone_cech_verify(space: Space, A: FunctionFamily, depth: int = 4, samples: int = 32, seed: int = 0,
                      grid: int = 16, tol=Q(1, 64), k: int = 12):
    """Compact spaces are their own compactification: check the contract by identity.

    Truncations ``f ∧ n`` are taken at ``n = 1 .. depth`` on the scale of
    the family's largest value.
    """
    tol = as_rational(tol)
    pts = _sample_points(space, samples, seed, grid)
    compact = all(getattr(f, "compact", True) for f in space.factors)
    rows = []
    ok = compact
    for f in A.members():
        top = max(f.hull.hi, ONE)
        levels = [top * Q(n, depth) for n in range(1, depth + 1)]
        truncs = [Truncate(f, t) for t in levels]
        monotone = True
        worst = ZERO
        for x in pts:
            vals = [_value(g, x, k).mid for g in truncs]
            if any(a > b for a, b in zip(vals, vals[1:])):
                monotone = False
            worst = max(worst, abs(max(vals) - _value(f, x, k).mid))
        rows.append({"function": f.term, "monotone": monotone, "sup_gap": worst})
        ok = ok and monotone and worst <= tol
    return {"verdict": PASS if ok else FAIL, "compact": compact, "identity": compact,
            "note": "beta X = X; restriction is the identity on the family", "functions": rows}


# -- dense subsets and extensions -------------------------------------------

class DenseSubset:
    """A metrically dense subset given by membership and approximating points."""

    name = "?"

    def contains(self, x):
        raise NotImplementedError

    def approximants(self, x, j):
        """A point of the subset within ``2**-j`` of ``x``, or ``None``."""
        raise NotImplementedError


class GridRationals(DenseSubset):
    """Points whose interval coordinates have denominator dividing ``denominator``."""

    def __init__(self, space: Space, denominator: int = 64):
        self.space, self.q = space, int(denominator)
        self.name = f"grid(1/{self.q})"

    def _snap(self, f, c):
        if not isinstance(f, _IntervalFactor):
            return c
        return min(max(Q(round(c * self.q), self.q), f.lo), f.hi)

    def contains(self, x):
        return all(self._snap(f, c) == c for f, c in zip(self.space.factors, x))

    def approximants(self, x, j):
        z = tuple(self._snap(f, c) for f, c in zip(self.space.factors, x))
        return z if self.space.dist(x, z) <= Q(1, 2**j) else None


class GlueInteriorAndIntegers(DenseSubset):
    """``Left(0,1) ∪ Right(N)`` inside a glued factor."""

    name = "L(0,1)+R"

    def __init__(self, space: Space, i: int = 0):
        if not isinstance(space.factors[i], ExampleGlue):
            raise ValueError("needs an exampleglue factor")
        self.space, self.i = space, i

    def contains(self, x):
        c = x[self.i]
        return isinstance(c, Right) or 0 < c.t < 1

    def approximants(self, x, j):
        c = x[self.i]
        if isinstance(c, Left) and not 0 < c.t < 1:
            h = Q(1, 2 ** (j + 1))
            c = Left(h if c.t == 0 else 1 - h)
        return x[:self.i] + (c,) + x[self.i + 1:]


@dataclass
class DenseExtensionReport:
    verdict: str
    values: dict
    witness: tuple | None = None
    escapes: list = field(default_factory=list)
    note: str = ""

    @property
    def passed(self):
        return self.verdict == PASS


def extension_value(f: LazyFunction, X0: DenseSubset, x, j_lo: int = 4, j_hi: int = 12, k: int = 16) -> Bracket:
    """Bracket for the 1-Lipschitz extension of ``f`` from ``X0`` at ``x``.

    Each approximant ``z`` pins the value to ``f(z) ± d(x, z)``.
    """
    space = X0.space
    out = None
    for j in range(j_lo, j_hi + 1):
        z = X0.approximants(x, j)
        if z is None:
            continue
        d = space.dist(x, z)
        v = _value(f, z, k)
        b = Bracket(v.lo - d, v.hi + d)
        out = b if out is None else out.meet(b)
    if out is None:
        raise ValueError(f"{X0.name} has no point near {space.fmt_point(x)}")
    return out.meet(f.hull)


def dense_extension(space: Space, X0: DenseSubset, f: LazyFunction, samples: int = 16, seed: int = 0,
                    grid: int = 16, tol=Q(1, 16), points=None, j_lo: int = 4, j_hi: int = 12):
    """Extend ``f`` from ``X0`` and audit continuity along gauge-convergent points.

    A sampled ``x`` is a discontinuity witness when, at every scale, some
    nearby point has an extension value certifiably more than ``tol``
    away from the value at ``x``.
    """
    if f.lipschitz > 1:
        raise ValueError(f"{f.term} is not certified 1-Lipschitz")
    tol = as_rational(tol)
    pts = list(points) if points is not None else _sample_points(space, samples, seed, grid)
    values = {}
    for x in pts:
        vx = extension_value(f, X0, x, j_lo, j_hi)
        values[x] = vx

        def close(z, vx=vx):
            vz = extension_value(f, X0, z, j_lo, j_hi)
            return not (vz.lo - vx.hi > tol or vx.lo - vz.hi > tol)

        esc = escapes_everywhere(space, x, close, j_lo, j_hi)
        if esc is not None:
            return DenseExtensionReport(FAIL, values, x, esc, "extension is discontinuous")
    return DenseExtensionReport(PASS, values)


# -- the glued-space counterexample -------------------------------------------

@dataclass
class Assertion:
    name: str
    holds: bool
    detail: str = ""


@dataclass
class ScenarioReport:
    name: str
    assertions: list

    @property
    def passed(self):
        return all(a.holds for a in self.assertions)


def star_star_failure(r=Q(1, 2), grid: int = 64, j_lo: int = 4, j_hi: int = 14) -> ScenarioReport:
    """The glued interval-plus-integers space where (**) and dense extension fail."""
    space = Space.parse("exampleglue")
    r = as_rational(r)
    U = OpenSet(space, ((OpenPiece(((ZERO, ONE),)),),))
    left0, left1 = (Left(ZERO),), (Left(ONE),)
    out = []

    closure = U.in_metric_closure(left0) and U.in_metric_closure(left1)
    out.append(Assertion("Left 0 and Left 1 lie in the metric closure of U", closure,
                         f"d(Left 0, U) = {fmt(U.dist(left0))}, d(Left 1, U) = {fmt(U.dist(left1))}"))

    pts = space.grid(grid)
    mismatch = [x for x in pts if U.in_ball(x, r) != isinstance(x[0], Left)]
    out.append(Assertion("B(U, r) equals Left[0,1] on the grid", not mismatch,
                         f"{len(pts)} grid points" if not mismatch else f"mismatch at {space.fmt_point(mismatch[0])}"))

    esc = escapes_everywhere(space, left0, lambda z: U.in_ball(z, r), j_lo, j_hi)
    only_right = esc is not None and all(isinstance(z[0], Right) for z in esc)
    verdict = check_star_star(space, U, r, grid=grid)
    out.append(Assertion("Left 0 is not interior to B(U, r)", only_right and verdict.status == FAILS,
                         "escapes " + ", ".join(space.fmt_point(z) for z in (esc or [])[:4]) + " ..."))

    X0 = GlueInteriorAndIntegers(space)
    ind = GlueLeftIndicator(space, 0)
    at0 = extension_value(ind, X0, left0, j_lo, j_hi)
    seq = [ind.exact((Right(n),)) for n in (2**j - 1 for j in range(j_lo, j_hi + 1))]
    rep = dense_extension(space, X0, ind, points=[left0], j_lo=j_lo, j_hi=j_hi)
    out.append(Assertion("indicator extension is discontinuous at Left 0",
                         at0.contains(ONE) and at0.width <= Q(1, 2**j_hi) and all(v == 0 for v in seq) and rep.verdict == FAIL,
                         f"extension at Left 0 = {at0}, values along Right n = {sorted({fmt(v) for v in seq})}"))
    return ScenarioReport("star-star-failure", out)
