from fractions import Fraction as F

from hypothesis import given, settings
from hypothesis import strategies as st

from crpkit.exactnum import INF, PNorm, dist_point, dist_segment, parse_rational, format_rational
from crpkit.markov import Exact, Schedule, eval_coord, ground_truth, parse_descriptor, serialize
from crpkit.problems import (
    Dims,
    Family,
    InstanceParams,
    Point,
    Segment,
    build_instance,
    objective_value,
    optimal_value,
    solve_closed_form,
)
from crpkit.randomized import NeedsMoreBits, bernoulli_premeasure, or_ptm, run_ptm
from crpkit.trustworthy import Answer, tower_solve

rationals = st.fractions(min_value=-8, max_value=8, max_denominator=40)
norms = st.sampled_from([PNorm(1), PNorm(2), INF])
families = st.sampled_from([Family.lp(), Family.bp(), Family.lasso(), Family.lp(p=2), Family.bp(p=1)])


@st.composite
def vectors(draw, d=None):
    d = d or draw(st.integers(1, 4))
    return tuple(draw(rationals) for _ in range(d))


@st.composite
def vector_triples(draw):
    d = draw(st.integers(1, 4))
    return draw(vectors(d)), draw(vectors(d)), draw(vectors(d))


@st.composite
def params(draw, theta=F(1, 4)):
    other = draw(st.fractions(min_value=theta, max_value=F(1, 2), max_denominator=64))
    return InstanceParams(F(1, 2), other) if draw(st.booleans()) else InstanceParams(other, F(1, 2))


def _root_le(a: F, b: F, c: F) -> bool:
    """sqrt(a) <= sqrt(b) + sqrt(c) for nonnegative rationals, decided exactly."""
    lhs = a - b - c
    return lhs <= 0 or lhs * lhs <= 4 * b * c


@given(rationals, rationals, rationals)
def test_fraction_results_are_canonical(a, b, c):
    for q in (a + b, a * c, a - b * c, (a + 1) / (abs(b) + 1)):
        assert parse_rational(format_rational(q)) == q
        assert q.denominator > 0


@given(vector_triples(), norms)
def test_metric_axioms(xyz, p):
    x, y, z = xyz
    assert dist_point(x, x, p).le(0)
    assert dist_point(x, y, p) == dist_point(y, x, p)
    dxz, dxy, dyz = dist_point(x, z, p), dist_point(x, y, p), dist_point(y, z, p)
    if p.is_inf or p.p == 1:
        assert dxz.power <= dxy.power + dyz.power
    else:
        assert _root_le(dxz.power, dxy.power, dyz.power)


@given(vector_triples(), norms)
def test_segment_distance_below_endpoint_distances(xab, p):
    x, a, b = xab
    d = dist_segment(x, a, b, p)
    assert d.power <= dist_point(x, a, p).power
    assert d.power <= dist_point(x, b, p).power


@given(vector_triples(), norms)
def test_segment_distance_is_a_minimum_over_sampled_points(xab, p):
    x, a, b = xab
    d = dist_segment(x, a, b, p)
    for k in range(11):
        t = F(k, 10)
        pt = tuple(t * ai + (1 - t) * bi for ai, bi in zip(a, b))
        assert d.power <= dist_point(x, pt, p).power


@given(vectors(), vectors(), st.integers(1, 5))
def test_sup_norm_power_bound(x, y, p):
    if len(x) != len(y):
        return
    dinf = dist_point(x, y, INF).power
    assert dinf ** p <= dist_point(x, y, p).power


@given(families, params(), st.integers(2, 5))
@settings(max_examples=60)
def test_closed_form_optimal_and_feasible(fam, prm, N1):
    inst = build_instance(fam, Dims(N1, N1 - 1), prm)
    sol = solve_closed_form(inst)
    assert isinstance(sol, Segment) == (prm.u1 == prm.u2)
    assert isinstance(sol, Point) == (prm.u1 != prm.u2)
    values = {objective_value(inst, v).value for v in sol.points()}
    if isinstance(sol, Segment):
        values.add(objective_value(inst, sol.midpoint).value)
    assert values == {optimal_value(inst)}
    for v in sol.points():
        assert all(x == 0 for x in v[2:])
        if fam.kind != "LASSO":
            assert objective_value(inst, v).feasible


@given(families, params(), st.integers(1, 24))
def test_exact_input_correspondence(fam, prm, n):
    inp = Exact(build_instance(fam, Dims(2), prm))
    truth = ground_truth(inp)
    for i in range(1, inp.dims.k + 1):
        assert abs(eval_coord(inp, i, n) - truth.f(i)) <= F(1, 2**n)


@given(families, st.sampled_from([1, 2]), st.integers(1, 12), st.integers(1, 24))
def test_schedule_thresholding_and_correspondence(fam, j, t, n):
    inp = Schedule(fam, Dims(3), j, t)
    truth = ground_truth(inp)
    i0 = Exact(build_instance(fam, Dims(3), InstanceParams(F(1, 2), F(1, 2))))
    for i in range(1, inp.dims.k + 1):
        v = eval_coord(inp, i, n)
        assert abs(v - truth.f(i)) <= F(1, 2**n)
        assert v == (eval_coord(i0, i, n) if n < t else truth.f(i))


@given(families, st.sampled_from([1, 2]), st.integers(1, 40), st.integers(2, 30))
def test_descriptor_round_trip(fam, j, t, N1):
    for inp in (Schedule(fam, Dims(N1), j, t), Exact(build_instance(fam, Dims(N1), InstanceParams(F(1, 2), F(1, 3))))):
        assert parse_descriptor(serialize(inp)) == inp


@given(st.sampled_from([1, 2]), st.integers(1, 10), st.integers(1, 30))
@settings(max_examples=80)
def test_tower_never_wrong_and_monotone(j, t, n):
    inp = Schedule(Family.lp(), Dims(2), j, t)
    truth = solve_closed_form(ground_truth(inp))
    v = tower_solve(inp, n)
    if isinstance(v, Answer):
        assert truth.dist(v.v, INF).le(0)
        assert all(tower_solve(inp, m) == v for m in range(n + 1, n + 6))
    assert isinstance(v, Answer) == (n >= 2 * t + 2)


@given(st.fractions(min_value=0, max_value=1, max_denominator=30), st.text("01", max_size=8))
def test_bernoulli_additivity(p, sigma):
    pm = bernoulli_premeasure(p)
    assert pm("", 0) == 1
    assert pm(sigma, 3) == pm(sigma + "0", 3) + pm(sigma + "1", 3)


@given(st.integers(0, 9), st.text("01", max_size=10), st.text("01", min_size=1, max_size=6))
def test_or_ptm_prefix_consistency(x, bits, tail):
    ptm = or_ptm(lambda v: v % 2)
    out = run_ptm(ptm, x, bits)
    if out is not NeedsMoreBits:
        assert run_ptm(ptm, x, bits + tail) == out
