import random
from fractions import Fraction as Q

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from instances import SPACES, separated_pair, space
from topometric.pieces import Left
from topometric.separation import (FAILS, HOLDS, SeparationError, check_star, check_star_star, parse_open_set,
                                   separate, split_cover)
from topometric.textio import parse_set


def test_interval_separation_on_grid():
    mn = space("min")
    K, L = parse_set(mn, "[0,0.2]"), parse_set(mn, "[0.8,1]")
    sep = separate(mn, K, L)
    assert sep.in_U(mn.point("0.1")) and sep.in_U(mn.point("0.45")) and sep.in_V(mn.point("0.9"))
    assert not any(sep.in_U(x) and sep.in_V(x) for x in mn.grid(128))
    assert sep.delta == Q(3, 5)


def test_touching_sets_raise():
    mn = space("min")
    K = parse_set(mn, "[0,1/2]")
    with pytest.raises(SeparationError):
        separate(mn, K, K)
    with pytest.raises(SeparationError):
        separate(mn, K, parse_set(mn, "[1/2,1]"))


def test_zero_one_factor_separation_partitions_samples():
    mx = space("max")
    K, L = parse_set(mx, "[0.3,0.3]"), parse_set(mx, "[0.7,0.7]")
    sep = separate(mx, K, L)
    assert sep.delta == 1
    assert sep.in_U(mx.point("0.3")) and sep.in_V(mx.point("0.7"))
    for x in mx.grid(128):
        if x[0] != Q(1, 2):
            assert sep.in_U(x) != sep.in_V(x)


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(sorted(SPACES)), st.integers(0, 10**6))
def test_split_cover_is_a_closed_cover(name, seed):
    sp, K, L, _ = separated_pair(random.Random(seed), name)
    A, B = split_cover(sp, K, L)
    for x in sp.grid(8):
        assert A.contains(x) or B.contains(x)
        assert not (A.contains(x) and K.contains(x))
        assert not (B.contains(x) and L.contains(x))


def test_star_on_minimal_interval():
    mn = space("min")
    assert check_star(mn, parse_open_set(mn, "(0.4,0.6)"), Q(1, 10)).status == HOLDS


def test_star_on_interval_products():
    sp = space("maxmin")
    assert check_star(sp, parse_open_set(sp, "(0.2,0.6) * (0.1,0.5)"), Q(1, 4), grid=16).status == HOLDS


def test_star_star_on_minimal_and_maximal():
    mn, mx = space("min2"), space("max")
    assert check_star_star(mn, parse_open_set(mn, "(0.4,0.6) * (0,1)"), Q(1, 8), grid=16).holds
    assert check_star_star(mx, parse_open_set(mx, "(0.4,0.6)"), Q(1, 2)).holds


def test_glued_space_breaks_both_conditions():
    g = space("glue")
    U = parse_open_set(g, "L(0,1)")
    star = check_star(g, U, Q(1, 2))
    star2 = check_star_star(g, U, Q(1, 2))
    assert star.status == FAILS and star.witness == (Left(0),)
    assert star2.status == FAILS and star2.witness == (Left(0),)
    assert U.in_metric_closure((Left(0),)) and U.in_metric_closure((Left(1),))


def test_open_glue_interval_must_avoid_left_zero():
    with pytest.raises(ValueError):
        parse_open_set(space("glue"), "L(-1,1)")
