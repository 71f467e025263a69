"""Product spaces of catalog factors and their exact closed sets."""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .factors import Factor, parse_factor
from .pieces import Intervals
from .rational import INF, as_rational, Q

ZERO, ONE = Q(0), Q(1)


@dataclass(frozen=True)
class Box:
    """Product of one closed piece per factor."""

    pieces: tuple

    def is_empty(self):
        return any(p.is_empty() for p in self.pieces)

    def contains(self, x):
        return all(p.contains(c) for p, c in zip(self.pieces, x))

    def intersect(self, other):
        return Box(tuple(p.intersect(q) for p, q in zip(self.pieces, other.pieces)))

    def intersects(self, other):
        return all(p.intersects(q) for p, q in zip(self.pieces, other.pieces))

    def issubset(self, other):
        return self.is_empty() or all(p.issubset(q) for p, q in zip(self.pieces, other.pieces))


def _containment_candidates(boxes):
    """Boolean matrix, ``[i, j]`` false only when box ``i`` is certainly not inside box ``j``.

    Interval pieces are compared by the float images of their hulls, which
    rounding keeps ordered; other pieces are not filtered.
    """
    n, d = len(boxes), len(boxes[0].pieces) if boxes else 0
    lo = np.full((n, d), -np.inf)
    hi = np.full((n, d), np.inf)
    for i, bx in enumerate(boxes):
        for t, p in enumerate(bx.pieces):
            if isinstance(p, Intervals):
                lo[i, t], hi[i, t] = float(p.parts[0][0]), float(p.parts[-1][1])
    return ((lo[:, None, :] >= lo[None, :, :]) & (hi[:, None, :] <= hi[None, :, :])).all(axis=2)


@dataclass(frozen=True)
class BoxUnion:
    """Finite union of boxes; the exact closed-set currency of the package."""

    boxes: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "boxes", tuple(b for b in self.boxes if not b.is_empty()))

    def is_empty(self):
        return not self.boxes

    def contains(self, x):
        return any(b.contains(x) for b in self.boxes)

    __contains__ = contains

    def union(self, other):
        return BoxUnion(self.boxes + other.boxes)

    def __or__(self, other):
        return self.union(other)

    def intersect(self, other):
        return BoxUnion(tuple(a.intersect(b) for a in self.boxes for b in other.boxes))

    def __and__(self, other):
        return self.intersect(other)

    def meets(self, box: Box):
        return any(b.intersects(box) for b in self.boxes)

    def intersects(self, other):
        return any(other.meets(b) for b in self.boxes)

    def simplified(self):
        """Equal set with subsumed boxes dropped and mergeable boxes fused."""
        if self.boxes and len(self.boxes[0].pieces) == 1:
            piece = self.boxes[0].pieces[0]
            for b in self.boxes[1:]:
                piece = piece.union(b.pieces[0])
            return BoxUnion((Box((piece,)),))
        boxes = list(dict.fromkeys(self.boxes))
        d = len(boxes[0].pieces) if boxes else 0
        changed = True
        while changed:
            changed = False
            # fuse boxes that agree off one factor
            for i in range(d):
                groups = {}
                for bx in boxes:
                    key = bx.pieces[:i] + bx.pieces[i + 1:]
                    groups.setdefault(key, []).append(bx.pieces[i])
                if len(groups) < len(boxes):
                    changed = True
                    boxes = []
                    for key, ps in groups.items():
                        piece = ps[0]
                        for q in ps[1:]:
                            piece = piece.union(q)
                        boxes.append(Box(key[:i] + (piece,) + key[i:]))
            cand = _containment_candidates(boxes)
            keep = []
            for i, bx in enumerate(boxes):
                if any(j != i and bx.issubset(boxes[j]) and (not boxes[j].issubset(bx) or j < i)
                       for j in np.flatnonzero(cand[i])):
                    changed = True
                    continue
                keep.append(bx)
            boxes = keep
        return BoxUnion(tuple(boxes))


@dataclass(frozen=True)
class HalfSpace:
    """``{x : rho(x, A) - rho(x, B) >= theta}`` for box-unions ``A``, ``B``.

    Closed because both gauge distances are continuous.  An empty ``A``
    contributes ``rho = INF`` (the set is all of ``X`` when ``B`` is
    nonempty); an empty ``B`` makes the set empty unless ``A`` is empty too.
    """

    space: "Space"
    a: BoxUnion
    b: BoxUnion
    theta: Q = ZERO

    def contains(self, x):
        ra, rb = self.space.rho_dist(x, self.a), self.space.rho_dist(x, self.b)
        if ra is INF or rb is INF:
            return ra is INF and (rb is not INF or self.theta <= 0)
        return ra - rb >= self.theta

    __contains__ = contains


@dataclass(frozen=True)
class RepClosedSet:
    """Union of a box-union and finitely many gauge half-spaces."""

    boxes: BoxUnion = field(default_factory=BoxUnion)
    halfspaces: tuple = ()

    def contains(self, x):
        return self.boxes.contains(x) or any(h.contains(x) for h in self.halfspaces)

    __contains__ = contains

    def union(self, other):
        return RepClosedSet(self.boxes.union(other.boxes), self.halfspaces + other.halfspaces)


@dataclass(frozen=True)
class AxiomReport:
    passed: bool
    checked: int
    witness: tuple | None = None
    reason: str = ""

    @property
    def verdict(self):
        return "PASS" if self.passed else "FAIL"


class Space:
    """Finite product of catalog factors.

    ``dist`` is the supremum of the factor metrics; ``rho`` is the gauge
    ``sum_i 2**-i * min(1, rho_i)`` metrizing the product topology.
    """

    def __init__(self, factors: Sequence[Factor]):
        if not factors:
            raise ValueError("a space needs at least one factor")
        self.factors = tuple(factors)
        self.weights = tuple(Q(1, 2**i) for i in range(len(self.factors)))

    @classmethod
    def parse(cls, text: str) -> "Space":
        factors = []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                factors.append(parse_factor(line))
            except (ValueError, TypeError) as exc:
                raise ValueError(f"line {lineno}: {exc}") from exc
        return cls(factors)

    def describe(self) -> str:
        return "\n".join(f.spec_line() for f in self.factors) + "\n"

    def __repr__(self):
        return "Space(" + " x ".join(f.spec_line() for f in self.factors) + ")"

    def __eq__(self, other):
        return isinstance(other, Space) and self.factors == other.factors

    def __hash__(self):
        return hash(self.factors)

    def __len__(self):
        return len(self.factors)

    # -- points ---------------------------------------------------------
    def check_point(self, x):
        x = tuple(x)
        if len(x) != len(self.factors):
            raise ValueError(f"point {x!r} has {len(x)} coordinates, space has {len(self.factors)} factors")
        for f, c in zip(self.factors, x):
            f.check(c)
        return x

    def point(self, *coords):
        return self.check_point(f.coerce(c) for f, c in zip(self.factors, coords))

    def dist(self, x, y):
        return max(f.d(a, b) for f, a, b in zip(self.factors, x, y))

    def rho(self, x, y):
        return sum((w * min(ONE, f.rho(a, b)) for f, w, a, b in zip(self.factors, self.weights, x, y)), ZERO)

    def grid(self, m: int):
        return list(itertools.product(*(f.grid(m) for f in self.factors)))

    def random_point(self, rng: random.Random):
        return tuple(f.random(rng) for f in self.factors)

    def approach(self, x, j):
        """Points at gauge scale about ``2**-j`` from ``x``, moving one factor or all."""
        out = []
        moves = []
        for i, f in enumerate(self.factors):
            cand = f.approach(x[i], j)
            moves.append(cand)
            for c in cand:
                out.append(x[:i] + (c,) + x[i + 1:])
        if sum(1 for m in moves if m) > 1:
            out.append(tuple(m[0] if m else c for m, c in zip(moves, x)))
        return out

    # -- sets -----------------------------------------------------------
    def box(self, *pieces):
        if len(pieces) != len(self.factors):
            raise ValueError("one piece per factor required")
        return Box(tuple(pieces))

    def full(self) -> BoxUnion:
        return BoxUnion((Box(tuple(f.full() for f in self.factors)),))

    def empty(self) -> BoxUnion:
        return BoxUnion()

    def singleton(self, x) -> BoxUnion:
        x = self.check_point(x)
        return BoxUnion((Box(tuple(f.point_piece(c) for f, c in zip(self.factors, x))),))

    def atoms(self, *unions: BoxUnion):
        """Representative points, one per cell of the arrangement of ``unions``.

        Membership in every given union is constant on each cell, so any
        set-theoretic identity among them holds iff it holds on the atoms.
        """
        per = []
        for i, f in enumerate(self.factors):
            pieces = [b.pieces[i] for u in unions for b in u.boxes]
            per.append(f.atoms(pieces))
        return itertools.product(*per)

    def covers(self, union: BoxUnion):
        return next((x for x in self.atoms(union) if not union.contains(x)), None) is None

    def is_subset(self, a: BoxUnion, b: BoxUnion):
        return all(b.contains(x) for x in self.atoms(a, b) if a.contains(x))

    def set_equal(self, a: BoxUnion, b: BoxUnion):
        return all(a.contains(x) == b.contains(x) for x in self.atoms(a, b))

    def complement_cover_witness(self, union: BoxUnion):
        return next((x for x in self.atoms(union) if not union.contains(x)), None)

    # -- metric quantities ----------------------------------------------
    def box_dist(self, a: Box, b: Box):
        """Exact ``d(a, b)`` with a minimizing pair of points."""
        best, pa, pb = ZERO, [], []
        for f, p, q in zip(self.factors, a.pieces, b.pieces):
            dd, x, y = f.piece_dist(p, q)
            if dd is INF:
                return INF, None, None
            best = max(best, dd)
            pa.append(x)
            pb.append(y)
        return best, tuple(pa), tuple(pb)

    def dist_sets_witness(self, A: BoxUnion, B: BoxUnion):
        best = (INF, None, None)
        for a in A.boxes:
            for b in B.boxes:
                cand = self.box_dist(a, b)
                if cand[0] < best[0]:
                    best = cand
                if best[0] == 0:
                    return best
        return best

    def dist_sets(self, A: BoxUnion, B: BoxUnion):
        return self.dist_sets_witness(A, B)[0]

    def dist_point_set(self, x, A: BoxUnion):
        return self.dist_sets(A, self.singleton(x))

    def rho_box(self, x, box: Box):
        total = ZERO
        for f, w, c, p in zip(self.factors, self.weights, x, box.pieces):
            r = f.rho_to(c, p)
            if r is INF:
                return INF
            total += w * min(ONE, r)
        return total

    def rho_dist(self, x, A: BoxUnion):
        return min((self.rho_box(x, b) for b in A.boxes), default=INF)

    def ball(self, F: BoxUnion, r) -> BoxUnion:
        """Exact closed metric neighbourhood ``{x : d(x, F) <= r}``."""
        r = as_rational(r)
        if r < 0:
            raise ValueError("negative radius")
        return BoxUnion(tuple(
            Box(tuple(f.inflate(p, r) for f, p in zip(self.factors, b.pieces))) for b in F.boxes
        ))

    def gauge_shift(self, s):
        """Bound on ``rho(x, y)`` whenever ``d(x, y) <= s``."""
        s = as_rational(s)
        total = ZERO
        for f, w in zip(self.factors, self.weights):
            if s >= 1:
                total += w
            elif f.moving:
                total += w * s
        return total

    # -- subdivision ----------------------------------------------------
    def whole_region(self) -> Box:
        return Box(tuple(f.initial_cell() for f in self.factors))

    def region_diam(self, region: Box):
        return sum((w * min(ONE, f.diam(c)) for f, w, c in zip(self.factors, self.weights, region.pieces)), ZERO)

    def split_region(self, region: Box, axes=None):
        """Halve ``region`` along the widest factor, restricted to ``axes`` when given."""
        scores = [w * min(ONE, f.diam(c)) for f, w, c in zip(self.factors, self.weights, region.pieces)]
        cand = [k for k in (axes if axes else range(len(scores))) if scores[k] > 0]
        if not cand:
            return None
        i = max(cand, key=lambda k: (scores[k], -k))
        return [Box(region.pieces[:i] + (child,) + region.pieces[i + 1:])
                for child in self.factors[i].split(region.pieces[i])]

    def anchor(self, region: Box):
        return tuple(f.anchor(c) for f, c in zip(self.factors, region.pieces))

    # -- formatting -----------------------------------------------------
    def fmt_point(self, x) -> str:
        return "(" + ", ".join(f.fmt_coord(c) for f, c in zip(self.factors, x)) + ")"

    def fmt_set(self, A: BoxUnion) -> str:
        if A.is_empty():
            return "empty"
        return " | ".join(" * ".join(f.fmt_piece(p) for f, p in zip(self.factors, b.pieces)) for b in A.boxes)

    # -- axioms ---------------------------------------------------------
    def verify_axioms(self, sample_budget: int = 64, seed: int = 0, depth: int = 12) -> AxiomReport:
        """Refutation test of lower semi-continuity and metric refinement.

        For each sampled pair the sequences approach along every factor's
        convergence structure; lsc is refuted only when every tail term
        falls below ``d(x, y) - 1/16``.
        """
        if sample_budget < 1:
            raise ValueError("sample_budget must be >= 1")
        rng = random.Random(seed)
        pts = self.grid(4)[: sample_budget]
        pts += [self.random_point(rng) for _ in range(sample_budget)]
        checked = 0
        for i, x in enumerate(pts):
            y = pts[(i * 7 + 3) % len(pts)] if i % 3 else pts[rng.randrange(len(pts))]
            checked += 1
            dxy = self.dist(x, y)
            if x != y and dxy <= 0:
                return AxiomReport(False, checked, (x, y), "metric does not refine topology: d(x,y)=0 with x != y")
            if dxy != self.dist(y, x):
                return AxiomReport(False, checked, (x, y), "asymmetric distance")
            tail = []
            for j in range(depth // 2, depth + 1):
                xs = self.approach(x, j) or [x]
                ys = self.approach(y, j) or [y]
                tail.append(min(self.dist(a, b) for a in xs for b in ys))
            if tail and max(tail) < dxy - Q(1, 16):
                return AxiomReport(False, checked, (x, y), "lower semi-continuity refuted along a convergent sequence")
        return AxiomReport(True, checked)
