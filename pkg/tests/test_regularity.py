from fractions import Fraction as Q

import pytest

from instances import space
from topometric.functions import Constant, Coordinate, DistanceTo, GlueLeftIndicator, PiecewiseLinear
from topometric.pieces import Left, Right
from topometric.regularity import (INSUFFICIENT, PASS, SUFFICIENT, FunctionFamily, GlueInteriorAndIntegers,
                                   GridRationals, box_basis, dense_extension, distance_family, extension_value,
                                   glue_embedding_family, induced_pseudometric, is_sufficient, neighbourhood_complement,
                                   rescale_embedding, rescale_report, star_star_failure, stone_cech_verify, theta_data,
                                   urysohn_family, verify_embedding)
from topometric.textio import parse_set


def _ramps(sp, m):
    # tent functions of height 1/2 on a 1/2**m mesh
    out = []
    for j in range(2**m):
        a, b = Q(j, 2**m), Q(j + 1, 2**m)
        out.append(PiecewiseLinear(sp, 0, [(a, 0), ((a + b) / 2, Q(1, 2)), (b, 0)]))
    return out


def test_identity_recovers_minimal_metric():
    mn = space("min")
    A = FunctionFamily([Coordinate(mn, 0)])
    assert induced_pseudometric(A, mn.point("0.2"), mn.point("0.9")).contains(Q(7, 10))


def test_identity_misses_zero_one_metric():
    mx = space("max")
    x, y = mx.point("0.2"), mx.point("0.9")
    assert induced_pseudometric(FunctionFamily([Coordinate(mx, 0)]), x, y).hi < mx.dist(x, y)


def test_induced_value_grows_with_family():
    mx = space("max")
    x, y = mx.point("0.1"), mx.point("0.8")
    gens, vals = [Coordinate(mx, 0)], []
    for m in range(1, 5):
        gens += _ramps(mx, m)
        vals.append(induced_pseudometric(FunctionFamily(gens), x, y).mid)
    assert vals == sorted(vals) and vals[-1] <= 1


def test_family_rejects_steep_members():
    with pytest.raises(ValueError):
        FunctionFamily([Coordinate(space("min"), 0, 2)])


def test_distance_family_is_sufficient_on_interval():
    mn = space("min")
    pts = mn.grid(16)
    sets = [neighbourhood_complement(mn, x, 3) for x in pts] + [mn.singleton(x) for x in pts] + box_basis(mn, 3)
    rep = is_sufficient(distance_family(mn, sets), mn, samples=12, grid=16)
    assert rep.verdict == SUFFICIENT and rep.separations > 0


def test_constant_family_is_insufficient():
    mn = space("min")
    rep = is_sufficient(FunctionFamily([Constant(mn, "0.5")]), mn, samples=6, grid=8)
    assert rep.verdict == INSUFFICIENT and rep.witness is not None


def test_urysohn_family_on_compact_space_is_sufficient():
    mx = space("max")
    pts = mx.grid(4)
    pairs = [(mx.singleton(x), mx.singleton(y)) for i, x in enumerate(pts) for y in pts[i + 1:]]
    seps = [(neighbourhood_complement(mx, x, 3), mx.singleton(x)) for x in pts]
    A = urysohn_family(mx, pairs, seps)
    rep = is_sufficient(A, mx, samples=None, grid=4, k=8)
    assert rep.verdict == SUFFICIENT, rep.note


def test_distance_family_embeds_isometrically():
    mn = space("min")
    rep = verify_embedding(distance_family(mn, [mn.singleton(mn.point(Q(j, 8))) for j in range(9)]), mn, grid=8)
    assert rep.verdict == PASS and rep.defect == 0


def test_glue_coordinates_match_distance():
    g = space("glue")
    m = 6
    pts = [g.point(Left(Q(j, 4))) for j in range(5)] + [g.point(Right(n)) for n in range(1, m)]
    rep = verify_embedding(glue_embedding_family(g, 0, m), g, points=pts)
    assert rep.verdict == PASS and rep.defect == 0


def test_non_separating_family_fails_injectivity():
    mn = space("min")
    flat = FunctionFamily([PiecewiseLinear(mn, 0, [(0, 0), (Q(1, 2), Q(1, 2))])])
    rep = verify_embedding(flat, mn, points=[mn.point("0.6"), mn.point("0.9")])
    assert rep.verdict != PASS and rep.witness is not None


def test_rescaling_keeps_differences():
    mn = space("min")
    A = FunctionFamily([Coordinate(mn, 0, Q(1, 2), Q(1, 4)), PiecewiseLinear(mn, 0, [(0, Q(1, 3)), (1, Q(2, 3))])])
    before = theta_data(A, mn.grid(8))
    after = rescale_embedding(before)
    rep = rescale_report(before, after, diameter=1)
    assert rep["differences_identical"] and rep["coordinate_minima_zero"] and rep["in_unit_cube"]


def test_rescaling_fixes_functions_attaining_zero():
    mn = space("min")
    A = distance_family(mn, [parse_set(mn, "[0,1/4]"), parse_set(mn, "[1/2,1]")])
    before = theta_data(A, mn.grid(8))
    assert rescale_embedding(before).images == before.images


def test_stone_cech_identity_and_truncations():
    mn = space("min")
    A = FunctionFamily([DistanceTo(mn, parse_set(mn, "[0,1/4]"))])
    rep = stone_cech_verify(mn, A, depth=4, samples=16)
    assert rep["verdict"] == PASS and rep["identity"]
    assert all(row["monotone"] and row["sup_gap"] == 0 for row in rep["functions"])


def test_dense_extension_on_minimal_interval():
    mn = space("min")
    rep = dense_extension(mn, GridRationals(mn, 64), Coordinate(mn, 0, Q(1, 2)), samples=8)
    assert rep.verdict == PASS
    assert dense_extension(mn, GridRationals(mn, 64), Constant(mn, "0.3"), samples=8).verdict == PASS


def test_dense_extension_breaks_on_glued_space():
    g = space("glue")
    X0 = GlueInteriorAndIntegers(g)
    ind = GlueLeftIndicator(g, 0)
    left0 = g.point(Left(0))
    assert extension_value(ind, X0, left0).contains(1)
    assert all(ind.exact(g.point(Right(n))) == 0 for n in range(10))
    rep = dense_extension(g, X0, ind, points=[left0])
    assert rep.verdict != PASS and rep.witness == left0


def test_star_star_scenario():
    rep = star_star_failure()
    assert rep.passed and len(rep.assertions) == 4
