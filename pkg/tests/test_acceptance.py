"""The eight acceptance criteria, each run at its stated size and tolerance.

Every test records a one-line verdict (see ``_report``); the lines are
repeated at the end of the pytest run.  ``python tests/test_acceptance.py``
runs them without pytest.
"""
import random
from fractions import Fraction as Q

from _report import report
from instances import (fast_cauchy, mesh_points, points_in, space, tietze_instances,
                       urysohn_instances)

from topometric.approximation import LipApprox, insert_level, realize, saturate_level, urysohn
from topometric.audit import GridAudit, lipschitz_audit, sample_pairs
from topometric.functions import PiecewiseLinear, parse_function
from topometric.lone import GeneratedFamily, l1_membership_refute, theorem_direction_holds
from topometric.rational import Bracket
from topometric.regularity import (FunctionFamily, distance_family, embed_theta, glue_embedding_family,
                                   rescale_embedding, rescale_report, star_star_failure, theta_data)
from topometric.pieces import Left, Right
from topometric.tietze import TietzeCase, UrysohnCase, equivalence_harness, flim, tietze_extend

# [DERIVED] from the float brute-force oracle kept with the decision notes
ORACLE_FLIM_ALTERNATING = 0.6666666666666667
ORACLE_FLIM_HALF = 0.5
ORACLE_RAMP_MIN_DA = (0.0625, 0.125, 0.25, 0.5)
ORACLE_RAMP_FINAL_GAP = 0.5
ORACLE_FIRST_RIGHT_IN_BALL = {Q(1, 2): 2, Q(1, 4): 4, Q(1, 10): 10, Q(1, 100): 100}


def test_criterion_1_urysohn_contract():
    k = 6
    bad = []
    for i, (name, sp, F, G, r) in enumerate(urysohn_instances(20)):
        u = urysohn(sp, F, G, r, k)
        on_F = all(u.eval(x, k) == Bracket(0, 0) for x in points_in(sp, F, 64))
        on_G = all(u.eval(x, k) == Bracket(r, r) for x in points_in(sp, G, 64))
        pairs = sample_pairs(sp, 500, i)
        lip = lipschitz_audit(sp, u, 1, pairs, k)
        in_range = all(u.eval(x, k).within(Bracket(0, r)) for p in pairs for x in p)
        if not (on_F and on_G and lip.passed and in_range):
            bad.append(f"{i}:{name} F={on_F} G={on_G} lip={lip.passed} range={in_range}")
    assert report(1, "Urysohn contract on 20 instances", not bad, "; ".join(bad) or "boundary exact, 1-Lipschitz, range [0,r]")


def test_criterion_2_approximation_engine():
    bad = []
    for i, (name, sp, F, G, r) in enumerate(urysohn_instances(50, seed=1)):
        audit = GridAudit(sp, mesh_points(sp, 128, 300, i))
        X = sp.full()
        ap = LipApprox.from_levels(sp, 1, [(Q(0), F, X), (r, X, G)])
        rng = random.Random(i)
        ops = [("saturate", Q(0)), ("saturate", r)] + [("insert", r * Q(rng.randrange(1, 16), 16)) for _ in range(5)]
        for op, beta in ops:
            ap = saturate_level(ap, beta) if op == "saturate" else insert_level(ap, beta)
            problems = (len(ap.violations()) + len(audit.ledger_violations(ap))
                        + (audit.monotonicity_violation(ap) is not None))
            if problems:
                bad.append(f"{i}:{name} after {op} {beta}")
        g = realize(ap, 4)
        for x in audit.points[::10]:
            bs = [g.eval(x, k) for k in range(4, 9)]
            if not all(b2.within(b1) for b1, b2 in zip(bs, bs[1:])) or any(
                    b.width > Q(1, 2**k) for b, k in zip(bs, range(4, 9))):
                bad.append(f"{i}:{name} nesting at {x}")
                break
    assert report(2, "approximation engine on 50 instances", not bad,
                  "; ".join(bad[:5]) or "no ledger refutation, monotone levels, nested brackets 2^-4..2^-8")


def test_criterion_3_tietze_contract():
    k = 6
    bad = []
    for i, (name, sp, Y, f, c) in enumerate(tietze_instances()):
        g = tietze_extend(sp, Y, f, c, 2 * c, k)
        agree = all(abs(g.eval(y, k).mid - f.value(y)) <= Q(1, 2**k) + g.eval(y, k).width
                    for y in points_in(sp, Y, 16))
        lip = lipschitz_audit(sp, g, 2 * c, sample_pairs(sp, 500, i), k)
        if not (agree and lip.passed):
            bad.append(f"{i}:{name} agree={agree} lip={lip.passed} excess={lip.worst_excess}")
    assert report(3, "Tietze contract on 10 instances, c' = 2c", not bad,
                  "; ".join(bad) or "agrees on Y within 2^-6 + width, c'-Lipschitz on 500 pairs")


def test_criterion_4_forced_limit():
    rng = random.Random(4)
    misses = 0
    for _ in range(100):
        xs, L = fast_cauchy(rng)
        misses += sum(not flim(xs, K).contains(L) for K in (0, 2, 4, 8, 16, 30))
    alt = flim([Q(j % 2) for j in range(40)], 30)
    half = flim([Q(1, 2) + Q(1, 2 ** (n + 2)) for n in range(40)], 30)
    oracle = (abs(float(alt.mid) - ORACLE_FLIM_ALTERNATING) <= float(alt.width)
              and abs(float(half.mid) - ORACLE_FLIM_HALF) <= float(half.width))
    k, worst = 8, None
    for j in range(100):
        if j % 2:
            xs, _ = fast_cauchy(rng, k + 2)
        else:
            xs = [Q(rng.randrange(65), 64) for _ in range(k + 2)]
        eps = Q(rng.randrange(1, 17), 64)
        ys = [min(Q(1), max(Q(0), x + eps * Q(rng.randrange(-8, 9), 8))) for x in xs]
        sup = max(abs(a - b) for a, b in zip(xs, ys))
        excess = abs(flim(xs, k).mid - flim(ys, k).mid) - sup - 2 * Q(1, 2**k)
        worst = excess if worst is None else max(worst, excess)
    ok = misses == 0 and oracle and worst <= 0
    assert report(4, "forced limit", ok,
                  f"containment misses {misses}/600, oracle {oracle}, worst 1-Lipschitz excess {worst}")


def test_criterion_5_glued_space_scenario():
    rep = star_star_failure()
    sp = space("glue")
    # every rho-ball around Left 0 reaches Right n once 1/(n+1) < s
    reach = all(sp.rho(sp.point(Left(0)), sp.point(Right(n))) < s
                and not sp.rho(sp.point(Left(0)), sp.point(Right(n - 1))) < s
                for s, n in ORACLE_FIRST_RIGHT_IN_BALL.items())
    detail = "; ".join(f"{a.name}: {'holds' if a.holds else 'FAILS'}" for a in rep.assertions)
    assert report(5, "glued-space scenario", rep.passed and len(rep.assertions) == 4 and reach, detail)


def _image(A, x):
    return tuple(b.mid for b in embed_theta(A, x))


def _ramp(sp, a, w):
    knots = [(Q(0), Q(0)), (a, Q(0)), (a + w, Q(1)), (Q(1), Q(1))]
    knots = [kn for i, kn in enumerate(knots) if i == 0 or kn[0] != knots[i - 1][0]]
    return PiecewiseLinear(sp, 0, knots)


def test_criterion_6_embedding_round_trip():
    # minimal interval: distances to grid singletons embed isometrically
    mn = space("min")
    A = distance_family(mn, [mn.singleton(x) for x in mn.grid(8)])
    rng = random.Random(6)
    pairs = []
    while len(pairs) < 100:
        x, y = (mn.point(Q(rng.randrange(d + 1), d)) for d in (rng.randrange(2, 97), rng.randrange(2, 97)))
        if x != y:
            pairs.append((x, y))
    defect = max(abs(mn.dist(x, y) - max(abs(a - b) for a, b in zip(_image(A, x), _image(A, y))))
                 for x, y in pairs)
    exact = all(b.width == 0 for x, _ in pairs for b in embed_theta(A, x))

    # maximal interval: nested ramp families
    mx = space("max")
    pts = [mx.point(Q(j, 32)) for j in range(33)]
    ppairs = [(pts[i], pts[j]) for i in range(33) for j in range(i + 1, 33)]
    gens, levels = [], []
    for m in range(1, 5):
        w = Q(1, 2**m)
        gens += [_ramp(mx, j * w, w) for j in range(2**m)]
        fam = FunctionFamily(list(gens))
        vals = {x: _image(fam, x) for x in pts}
        levels.append([max(abs(a - b) for a, b in zip(vals[x], vals[y])) for x, y in ppairs])
    monotone = all(a <= b for lo, hi in zip(levels, levels[1:]) for a, b in zip(lo, hi))
    below = all(v <= mx.dist(x, y) for lv in levels for v, (x, y) in zip(lv, ppairs))
    mins = tuple(float(min(lv)) for lv in levels)
    gap = max(mx.dist(x, y) - v for v, (x, y) in zip(levels[-1], ppairs))

    # rescaling keeps coordinate differences
    g = space("glue")
    gpts = [g.point(Left(Q(j, 8))) for j in range(9)] + [g.point(Right(n)) for n in range(8)]
    data = theta_data(glue_embedding_family(g, 0, 8), gpts)
    identical = rescale_report(data, rescale_embedding(data), 1)["differences_identical"]
    data_min = theta_data(A, [x for p in pairs[:20] for x in p])
    identical &= rescale_report(data_min, rescale_embedding(data_min))["differences_identical"]

    ok = (defect == 0 and exact and monotone and below and identical
          and mins == ORACLE_RAMP_MIN_DA and float(gap) == ORACLE_RAMP_FINAL_GAP)
    assert report(6, "embedding and round trip", ok,
                  f"min defect {defect} on 100 pairs; max d_A minima {[str(Q(v)) for v in mins]} "
                  f"monotone={monotone} below d={below}, final gap {gap}; rescale identical={identical}")


FAMILIES = [
    ("min", ["coord(0)"]),
    ("min", ["pwl(0, 0:0, 1/2:1/2, 1:0)"]),
    ("min", ["dist([1/4,1/2])", "coord(0)"]),
    ("max", ["pwl(0, 0:0, 1:1)"]),
    ("max", ["pwl(0, 0:0, 1/2:1, 1:1)", "pwl(0, 0:1, 1/2:0, 1:0)"]),
    ("min2", ["coord(0)", "coord(1)"]),
    ("maxmin", ["pwl(1, 0:0, 1:1)", "pwl(0, 0:0, 1:1)"]),
    ("disc", ["pwl(1, 0:0, 1:1)"]),
    ("glue", ["glue(0, 0)", "glue(0, 1)"]),
    ("minseq", ["pwl(0, 0:1, 1:0)"]),
]

NON_MEMBERS = [
    (0, "scale(2, coord(0))", Q(1, 4)),
    (1, "pwl(0, 0:0, 1/4:1, 1/2:0, 3/4:1, 1:0)", Q(1, 4)),
    (2, "pwl(0, 0:0, 1/8:1/2, 1:1)", Q(1, 8)),
    (5, "sum(1*coord(0), 1*coord(1))", Q(1, 4)),
    (5, "pwl(1, 0:0, 1/2:1, 1:0)", Q(1, 4)),
    (0, "pwl(0, 0:0, 1/16:1/4, 1:1/4)", Q(1, 16)),
    (2, "scale(3/2, coord(0))", Q(1, 8)),
    (7, "pwl(1, 0:0, 1/4:1, 1:1)", Q(1, 4)),
    (9, "pwl(0, 0:0, 1/2:1, 1:0)", Q(1, 4)),
    (1, "scale(2, pwl(0, 0:0, 1/2:1/2, 1:0))", Q(1, 4)),
]


def _family(idx):
    name, gens = FAMILIES[idx]
    sp = space(name)
    return sp, GeneratedFamily(sp, [parse_function(sp, t) for t in gens], depth=2, cap=60)


def test_criterion_7_l1_refuter():
    fams = [_family(i) for i in range(len(FAMILIES))]
    checked, false = 0, []
    for i, (sp, A) in enumerate(fams):
        for f in A.members()[:20]:
            checked += 1
            if l1_membership_refute(A, f, eps=Q(1, 1024), grid=8) is not None:
                false.append(f"{i}:{f.term}")
    found, consistent = 0, 0
    for idx, term, eps in NON_MEMBERS:
        sp, A = fams[idx]
        f = parse_function(sp, term)
        ref = l1_membership_refute(A, f, eps=eps, grid=8)
        if ref is not None:
            found += 1
            consistent += theorem_direction_holds(A, f, ref)
    ok = checked == 200 and not false and found == len(NON_MEMBERS) and consistent == found
    assert report(7, "L(1) refuter", ok,
                  f"{len(false)} false refutations over {checked} members; "
                  f"{found}/{len(NON_MEMBERS)} non-members refuted, {consistent} witness pairs break d_A-Lipschitz")


def test_criterion_8_equivalence_harness():
    rows, inconsistent = 0, []
    picks = [t for i, t in enumerate(tietze_instances()) if i in (0, 3, 4, 5, 7)]
    for name, sp, Y, f, c in picks:
        rep = equivalence_harness(sp, [TietzeCase(Y, f, c, 2 * c, name)], k=4)
        rows += len(rep.rows)
        if not rep.consistent or rep.status(name, "tietze") != "PASS" or not all(
                rep.status(name, d) == "PASS" for d in ("tietze=>urysohn", "closed-neighbourhoods")):
            inconsistent.append(name + ": " + ", ".join(f"{r.direction}={r.status}" for r in rep.rows))
    for name, sp, F, G, r in urysohn_instances(8, seed=3)[::2]:
        rep = equivalence_harness(sp, [UrysohnCase(F, G, r, name)], k=4)
        rows += len(rep.rows)
        if not rep.consistent or (rep.status(name, "tietze") == "PASS" and not all(
                rep.status(name, d) == "PASS" for d in ("tietze=>urysohn", "closed-neighbourhoods"))):
            inconsistent.append(name + ": " + ", ".join(f"{r.direction}={r.status}" for r in rep.rows))
    assert report(8, "equivalence harness", not inconsistent,
                  "; ".join(inconsistent) or f"{rows} rows over 9 instances, derived directions pass wherever Tietze passes")


if __name__ == "__main__":
    import sys
    import time
    failed = 0
    for name, fn in list(globals().items()):
        if name.startswith("test_criterion_"):
            t = time.time()
            try:
                fn()
            except AssertionError:
                failed += 1
            print(f"    ({time.time() - t:.1f}s)")
    sys.exit(1 if failed else 0)
