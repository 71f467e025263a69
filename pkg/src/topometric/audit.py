"""Grid audits: brute-force checks of the exact constructions on finite samples.

Distances between grid points are computed with numpy from per-factor
encodings.  Grid coordinates are dyadic in the usual cases, so the
floating values are exact; every reported violation is re-checked with
exact arithmetic before it is returned.
"""
from __future__ import annotations

import random
from dataclasses import dataclass

import numpy as np

from .factors import ExampleGlue, MinInterval, _IntervalFactor
from .pieces import OMEGA, Left
from .rational import as_rational, Q

ZERO = Q(0)


def _factor_dist(f, coords):
    if isinstance(f, MinInterval):
        t = np.array([float(c) for c in coords])
        return np.abs(t[:, None] - t[None, :])
    if isinstance(f, ExampleGlue):
        left = np.array([isinstance(c, Left) for c in coords])
        t = np.array([float(c.t) if isinstance(c, Left) else -1.0 - c.n for c in coords])
        same = t[:, None] == t[None, :]
        both = left[:, None] & left[None, :]
        return np.where(both, np.abs(t[:, None] - t[None, :]), np.where(same, 0.0, 1.0))
    if isinstance(f, _IntervalFactor):
        t = np.array([float(c) for c in coords])
    else:
        t = np.array([-1.0 if c is OMEGA else float(c) for c in coords])
    return (t[:, None] != t[None, :]).astype(float)


class GridAudit:
    """Pairwise distances and set masks over a fixed list of points."""

    def __init__(self, space, points):
        self.space = space
        self.points = [space.check_point(p) for p in points]
        n = len(self.points)
        D = np.zeros((n, n))
        for i, f in enumerate(space.factors):
            D = np.maximum(D, _factor_dist(f, [p[i] for p in self.points]))
        self.D = D

    @classmethod
    def on_grid(cls, space, m):
        return cls(space, space.grid(m))

    def mask(self, S):
        return np.array([S.contains(p) for p in self.points], dtype=bool)

    # -- approximations ----------------------------------------------------
    def ledger_violations(self, approx):
        """Grid pairs ``x in F_a``, ``y in G_b`` with ``d(x, y) * c <= b - a``."""
        alphas = approx.alphas
        Fm = [self.mask(approx.F[a]) for a in alphas]
        Gm = [self.mask(approx.G[a]) for a in alphas]
        n = len(self.points)
        DF = np.full((len(alphas), n), np.inf)
        for i, m in enumerate(Fm):
            if m.any():
                DF[i] = self.D[m].min(axis=0)
        c = float(approx.c)
        out = []
        for j, b in enumerate(alphas):
            if not Gm[j].any() or j == 0:
                continue
            sub = DF[:j][:, Gm[j]]
            mins = sub.min(axis=1)
            gaps = np.array([float(b - a) for a in alphas[:j]])
            for i in np.nonzero(mins * c <= gaps + 1e-9)[0]:
                a = alphas[i]
                xs = np.nonzero(Fm[i])[0]
                ys = np.nonzero(Gm[j])[0]
                blk = self.D[np.ix_(xs, ys)]
                xi, yi = np.unravel_index(np.argmin(blk), blk.shape)
                x, y = self.points[xs[xi]], self.points[ys[yi]]
                d = self.space.dist(x, y)
                if d * approx.c <= b - a:
                    out.append((a, b, x, y, d))
        return out

    def monotonicity_violation(self, approx):
        """A grid point in ``F_a`` but not ``F_b`` (or in ``G_b`` not ``G_a``) for some ``a < b``."""
        alphas = approx.alphas
        Fm = np.array([self.mask(approx.F[a]) for a in alphas])
        Gm = np.array([self.mask(approx.G[a]) for a in alphas])
        for i in range(len(alphas) - 1):
            bad = np.nonzero(Fm[i] & ~Fm[i + 1])[0]
            if bad.size:
                return ("F", alphas[i], alphas[i + 1], self.points[bad[0]])
            bad = np.nonzero(Gm[i + 1] & ~Gm[i])[0]
            if bad.size:
                return ("G", alphas[i], alphas[i + 1], self.points[bad[0]])
        return None

    def uncovered(self, approx):
        """A grid point outside ``F_a`` and ``G_a`` for some level ``a``."""
        for a in approx.alphas:
            m = self.mask(approx.F[a]) | self.mask(approx.G[a])
            if not m.all():
                return a, self.points[int(np.argmin(m))]
        return None

    def ball_mismatch(self, F, r, B):
        """A grid point whose membership in ``B`` differs from ``min d(x, F-grid) <= r``."""
        fm = self.mask(F)
        r = float(as_rational(r))
        near = self.D[fm].min(axis=0) <= r + 1e-12 if fm.any() else np.zeros(len(self.points), dtype=bool)
        bm = self.mask(B)
        bad = np.nonzero(near != bm)[0]
        return None if not bad.size else self.points[bad[0]]


@dataclass
class LipschitzAudit:
    checked: int
    worst_excess: Q
    witness: tuple | None

    @property
    def passed(self):
        return self.witness is None


def lipschitz_audit(space, f, c, pairs, k, slack=None):
    """Check ``|f(x) - f(y)| <= c d(x, y) + slack`` on midpoints at precision ``k``.

    ``slack`` defaults to ``2 * 2**-k``, the sum of two bracket widths.
    """
    c = as_rational(c)
    slack = Q(2, 2**k) if slack is None else as_rational(slack)
    worst, witness = None, None
    for x, y in pairs:
        fx, fy = f.eval(x, k).mid, f.eval(y, k).mid
        excess = abs(fx - fy) - c * space.dist(x, y) - slack
        if worst is None or excess > worst:
            worst = excess
        if excess > 0 and witness is None:
            witness = (x, y, fx, fy)
    return LipschitzAudit(len(pairs), worst if worst is not None else ZERO, witness)


def sample_pairs(space, n, seed=0, grid=None):
    """Deterministic pairs, drawn from ``grid`` when given, else from random points."""
    rng = random.Random(seed)
    if grid is not None:
        pts = list(grid)
        return [(pts[rng.randrange(len(pts))], pts[rng.randrange(len(pts))]) for _ in range(n)]
    return [(space.random_point(rng), space.random_point(rng)) for _ in range(n)]
