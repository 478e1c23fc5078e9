import math
from fractions import Fraction as F

import pytest

from crpkit.errors import DimensionError, DomainError, UnsupportedNormError
from crpkit.exactnum import (
    INF,
    PNorm,
    Q,
    dist_point,
    dist_segment,
    dyadic,
    format_rational,
    format_vec,
    parse_rational,
    unit,
    vec,
)

A, B = vec("2/5", 0), vec(0, "2/5")


def test_dist_point_examples():
    assert not dist_point(A, B, INF).le(F(1, 10))
    x = vec("3/7", "-1/3", 5)
    for p in (1, 2, 3, INF):
        assert dist_point(x, x, p).le(0)
    d2 = dist_point(A, B, 2)
    assert d2.power == F(8, 25)
    assert d2.gt(F(1, 10))


def test_dist_point_length_mismatch():
    with pytest.raises(DimensionError):
        dist_point(vec(1, 2), vec(1, 2, 3))


def test_threshold_queries_are_exact_at_the_boundary():
    d = dist_point(vec(0, 0), vec(3, 4), 2)
    assert d.power == 25
    assert d.le(5) and not d.lt(5) and d.ge(5) and not d.gt(5)
    assert d.exact() is None
    assert dist_point(vec(0, 0), vec(3, 4), 1).exact() == 7
    assert dist_point(vec(0, 0), vec(3, 4), INF).exact() == 4


def test_negative_radius_never_contains():
    assert not dist_point(A, A).le(F(-1, 10))


def test_dist_segment_examples():
    assert dist_segment(vec("1/5", "1/5"), A, B, INF).le(0)
    for p in (1, 2, INF):
        assert dist_segment(A, A, B, p).le(0)
    d = dist_segment(vec("1/2", "1/2"), A, B, INF)
    # brute-force grid over t in [0, 1] gives 3/10 at t = 1/2
    assert d.power == F(3, 10)
    assert d.le(F(3, 10)) and not d.le(F(1, 10))


def test_dist_segment_p2_clamps_projection():
    # projection of (1, 0) onto the segment (0,0)-(0,1) clamps to (0,0)
    d = dist_segment(vec(1, 0), vec(0, 0), vec(0, 1), 2)
    assert d.power == 1
    d = dist_segment(vec(1, 1), vec(0, 0), vec(2, 0), 2)
    assert d.power == 1


def test_dist_segment_p1():
    d = dist_segment(vec(1, 1), vec(0, 0), vec(2, 0), 1)
    assert d.power == 1


def test_dist_segment_unsupported_norm():
    with pytest.raises(UnsupportedNormError):
        dist_segment(A, A, B, 3)


def test_degenerate_segment_is_a_point():
    assert dist_segment(vec(1, 1), A, A, INF) == dist_point(vec(1, 1), A, INF)


def test_dyadic():
    assert dyadic(0) == 1
    assert dyadic(3) == F(1, 8)
    assert dyadic(6) == F(1, 64)
    with pytest.raises(DomainError):
        dyadic(-1)


def test_rational_text_round_trip():
    assert format_rational(F(-6, 4)) == "-3/2"
    assert format_rational(F(0)) == "0/1"
    assert parse_rational("-3/2") == F(-3, 2)
    for bad in ("2/4", "3", "1/-2", "+1/2", "01/2", "a/b", "1/0"):
        with pytest.raises(DomainError):
            parse_rational(bad)
    assert parse_rational("2/4", strict=False) == F(1, 2)
    assert parse_rational("7", strict=False) == 7


def test_q_coercion():
    assert Q("3/6") == F(1, 2)
    assert Q(3) == F(3)
    assert Q(1, 4) == F(1, 4)
    with pytest.raises(TypeError):
        Q(0.5)
    with pytest.raises(TypeError):
        Q(True)


def test_pnorm():
    assert PNorm.parse("inf").is_inf
    assert PNorm.parse(2).p == 2
    assert str(PNorm(math.inf)) == "inf"
    for bad in (0, -1, 1.5, True):
        with pytest.raises(DomainError):
            PNorm(bad)
    with pytest.raises(DomainError):
        PNorm.parse("two")


def test_unit_and_format():
    assert unit(3, 2, F(2, 5)) == (0, F(2, 5), 0)
    assert format_vec(unit(2, 1, F(2, 5))) == "(2/5,0)"
    with pytest.raises(DimensionError):
        unit(2, 3)
