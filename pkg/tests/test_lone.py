from fractions import Fraction as Q

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from instances import space
from topometric.functions import Coordinate, PiecewiseLinear
from topometric.lone import (PASS, GeneratedFamily, averaging_separator, induced_metric, induced_metric_roundtrip,
                             l1_membership_refute, lemma_properties_check, shift_weight, theorem_direction_holds)
from topometric.textio import parse_set


def _tents(sp, m):
    return [PiecewiseLinear(sp, 0, [(Q(j, m), 0), (Q(2 * j + 1, 2 * m), Q(1, 2 * m)), (Q(j + 1, m), 0)])
            for j in range(m)]


def test_shift_weight():
    assert shift_weight(0) == Q(3, 4) and shift_weight(4) == Q(63, 64)


def test_enumeration_grows_with_depth_and_keeps_constants():
    mn = space("min")
    A = GeneratedFamily(mn, [Coordinate(mn, 0)], depth=3, cap=120)
    sizes = [len(A.members(d)) for d in range(4)]
    assert sizes == sorted(sizes) and sizes[0] < sizes[-1]
    for d in range(4):
        assert all(any(all(g.exact(x) == c for x in mn.grid(4)) for g in A.members(d)) for c in (0, Q(1, 2), 1))


def test_members_are_never_refuted():
    mn = space("min2")
    A = GeneratedFamily(mn, [Coordinate(mn, 0), PiecewiseLinear(mn, 1, [(0, 1), (1, 0)])], depth=1, cap=60)
    for g in A.members():
        assert l1_membership_refute(A, g, eps=Q(1, 64), grid=4) is None


def test_slope_excess_is_refuted():
    mn = space("min")
    A = GeneratedFamily(mn, [Coordinate(mn, 0)], depth=2)
    ref = l1_membership_refute(A, Coordinate(mn, 0, 2), eps=Q(1, 2))
    assert ref is not None and {ref.x, ref.y} == {mn.point(0), mn.point(1)}
    assert ref.fgap == 2 and ref.dA == 1
    assert theorem_direction_holds(A, Coordinate(mn, 0, 2), ref)


def test_large_oscillation_on_maximal_interval():
    mx = space("max")
    A = GeneratedFamily(mx, _tents(mx, 4), depth=3, cap=150)
    f = PiecewiseLinear(mx, 0, [(0, 0), (1, Q(3, 2))])
    ref = l1_membership_refute(A, f, eps=Q(1, 4))
    assert ref is not None and theorem_direction_holds(A, f, ref)


def test_refuter_rejects_nonpositive_eps():
    mn = space("min")
    with pytest.raises(ValueError):
        l1_membership_refute(GeneratedFamily(mn, []), Coordinate(mn, 0), eps=0)


def test_averaging_separates_point_from_closed_set():
    mn = space("min")
    A = GeneratedFamily(mn, [Coordinate(mn, 0)], depth=4, cap=200)
    F = parse_set(mn, "[0,0.2] | [0.8,1]")
    rep = lemma_properties_check(A, mn.point("0.5"), F)
    assert rep.separation == PASS and rep.separation_r > 0
    f, r, _ = averaging_separator(A, mn.point("0.5"), [y for y in mn.grid(16) if F.contains(y)])
    assert f.exact(mn.point("0.5")) == 0 and r == rep.separation_r


def test_shifts_matched_at_depth_four():
    mn = space("min")
    A = GeneratedFamily(mn, [Coordinate(mn, 0), PiecewiseLinear(mn, 0, [(0, 1), (1, 0)])], depth=4, cap=200)
    rep = lemma_properties_check(A, mn.point("0.5"), parse_set(mn, "[0,0.2]"))
    assert rep.translation == PASS and rep.translation_error <= Q(1, 64)
    assert rep.closure == PASS


def test_constants_only_fail_to_separate():
    mn = space("min")
    rep = lemma_properties_check(GeneratedFamily(mn, [], depth=1), mn.point("0.5"), parse_set(mn, "[0,0.2]"))
    assert rep.separation != PASS and rep.witness is not None


def test_roundtrip_on_minimal_interval():
    mn = space("min")
    rep = induced_metric_roundtrip(mn, GeneratedFamily(mn, [Coordinate(mn, 0)], depth=1), grid=8, sufficient=True)
    assert rep.verdict == PASS and rep.final_gap == 0


def test_roundtrip_on_maximal_interval_improves():
    mx = space("max")
    rep = induced_metric_roundtrip(mx, GeneratedFamily(mx, _tents(mx, 2), depth=2, cap=80), grid=4)
    assert rep.verdict == "INSUFFICIENT" and rep.below_d and rep.monotone
    assert rep.gaps == sorted(rep.gaps, reverse=True) and rep.final_gap > 0


@settings(max_examples=20, deadline=None)
@given(st.lists(st.fractions(min_value=0, max_value=1, max_denominator=16), min_size=3, max_size=3))
def test_induced_metric_is_a_pseudometric_below_d(ts):
    sp = space("min2")
    A = GeneratedFamily(sp, [Coordinate(sp, 0), PiecewiseLinear(sp, 1, [(0, 0), (1, Q(1, 2))])], depth=1, cap=40)
    x, y, z = (sp.point(t, 1 - t) for t in ts)
    assert induced_metric(A, x, x) == 0 and induced_metric(A, x, y) == induced_metric(A, y, x)
    assert induced_metric(A, x, z) <= induced_metric(A, x, y) + induced_metric(A, y, z)
    assert induced_metric(A, x, y) <= sp.dist(x, y)
