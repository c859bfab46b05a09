from fractions import Fraction as Q

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ofabs.errors import DomainMismatch, NotSupported, UnknownOutput
from ofabs.models import fig3_chain, fig4_modules, sigma1, sigma2
from ofabs.regions import (FiniteRegion, GeoRegion, IndexedRegion, IndexSet, as_symbolic,
                           region_algebra, stable_subset, union_all)
from ofabs.systems import FiniteSystem

HORIZON = 40

# -- index sets --------------------------------------------------------------

index_sets = st.builds(
    IndexSet,
    st.frozensets(st.integers(0, 12), max_size=5),
    st.integers(0, 14),
    st.booleans(),
    st.booleans(),
)


def members(s):
    return set(s.members_below(HORIZON))


@given(index_sets, index_sets)
def test_index_set_algebra_matches_explicit_sets(a, b):
    assert members(a | b) == members(a) | members(b)
    assert members(a & b) == members(a) & members(b)
    assert members(a - b) == members(a) - members(b)
    assert (a <= b) == (members(a) <= members(b))


@given(index_sets, st.integers(-4, 4))
def test_shift_moves_every_member(a, k):
    want = {i + k for i in range(HORIZON + 8) if i in a and 0 <= i + k < HORIZON}
    assert members(a.shift(k)) == want


@given(index_sets)
def test_canonical_form_is_unique(a):
    again = IndexSet.from_progressions(a.progressions())
    assert again == a and hash(again) == hash(a)


def test_progressions_and_text():
    assert IndexSet.parity(True, 1).progressions() == [(1, 2)]
    assert IndexSet.at_least(2).progressions() == [(2, 1)]
    r = IndexedRegion({"b": IndexSet.parity(False, 1), "a": IndexSet({1, 2})})
    assert r.key() == "a[1+0*i] | a[2+0*i] | b[2+2*i]"
    assert IndexedRegion.parse(r.key()) == r
    with pytest.raises(NotSupported):
        IndexSet.progression(1, 3)


def test_indexed_post_and_pre_on_the_chain():
    s = fig3_chain()
    b1 = IndexedRegion({"b": IndexSet({1})})
    assert s.post(b1, "u").key() == "a[2+0*i] | b[2+0*i]"
    odd = IndexedRegion({"b": IndexSet.parity(True, 1)})
    assert s.post(odd, "u").key() == "a[2+0*i] | b[2+2*i]"
    even = IndexedRegion({"b": IndexSet.parity(False, 1)})
    assert s.pre(even, "u").key() == "b[1+2*i]"


def test_fig4_successor_groups_do_not_consult_the_oracle():
    s = fig4_modules()
    c_odd = IndexedRegion({"c": IndexSet.parity(True, 1)})
    assert s.post(c_odd, "u").key() == "d[1+2*i] | dl[1+2*i] | dr[1+2*i]"
    assert s.output_of(s.post(c_odd, "u")) == "D"


# -- finite regions ------------------------------------------------------------


def test_finite_region_algebra():
    a, b = FiniteRegion({"x", "y"}), FiniteRegion({"y"})
    rep = region_algebra(b, a)
    assert rep.subset and not rep.equals and rep.intersect == b and rep.union_rep == a
    assert a.key() == "{x,y}"
    assert b < a and not a < b


def test_stable_subset_on_finite_system():
    s = FiniteSystem(["x", "y", "z"], ["x"], ["u"], ["A", "B"],
                     {"x": "A", "y": "A", "z": "B"},
                     {("x", "u"): {"x"}, ("y", "u"): {"z"}, ("z", "u"): {"z"}})
    sym = as_symbolic(s)
    q = FiniteRegion({"x", "y"})
    assert stable_subset(sym, q, {"u": FiniteRegion({"x", "y"})}) == FiniteRegion({"x"})
    with pytest.raises(UnknownOutput):
        sym.restrict_output(q, "C")


def test_domains_do_not_mix():
    with pytest.raises(DomainMismatch):
        FiniteRegion({"x"}).intersect(IndexedRegion({"a": IndexSet({1})}))


# -- diagonal boxes --------------------------------------------------------------

W = 3
coords = st.fractions(min_value=0, max_value=W, max_denominator=5)


@st.composite
def boxes(draw):
    a1, b1 = sorted((draw(coords), draw(coords)))
    a2, b2 = sorted((draw(coords), draw(coords)))
    a3, b3 = sorted((draw(st.fractions(-W, W, max_denominator=5)),
                     draw(st.fractions(-W, W, max_denominator=5))))
    return (a1, b1, a2, b2, a3, b3)


geo_regions = st.lists(boxes(), max_size=3).map(lambda bs: GeoRegion.from_boxes(W, bs))

# probe points avoid the 1/5 lattice so no point sits on a box boundary
PROBES = [(Q(2 * i + 1, 14), Q(2 * j + 1, 14)) for i in range(0, 21, 2) for j in range(0, 21, 3)]


def inside(box, p):
    a1, b1, a2, b2, a3, b3 = box
    return a1 <= p[0] < b1 and a2 <= p[1] < b2 and a3 <= p[0] - p[1] < b3


@given(st.lists(boxes(), max_size=3))
def test_geo_membership_matches_box_list(bs):
    r = GeoRegion.from_boxes(W, bs)
    for p in PROBES:
        assert r.contains_point(p) == any(inside(b, p) for b in bs)


@settings(max_examples=60)
@given(geo_regions, geo_regions)
def test_geo_algebra_pointwise(a, b):
    for p in PROBES:
        pa, pb = a.contains_point(p), b.contains_point(p)
        assert (a & b).contains_point(p) == (pa and pb)
        assert (a | b).contains_point(p) == (pa or pb)
        assert a.minus(b).contains_point(p) == (pa and not pb)
    assert (a & b) <= a
    assert a <= (a | b)
    assert (a & b).area() + (a.minus(b)).area() == a.area()


@settings(max_examples=60)
@given(geo_regions)
def test_geo_text_round_trip(a):
    assert GeoRegion.parse(W, a.key()) == a


@settings(max_examples=40)
@given(geo_regions, st.fractions(-3, 3, max_denominator=5), st.fractions(-3, 3, max_denominator=5))
def test_translate_preserves_area_and_moves_points(a, v1, v2):
    t = a.translate(v1, v2)
    assert t.area() == a.area()
    for p in PROBES:
        moved = ((p[0] + v1) % W, (p[1] + v2) % W)
        assert t.contains_point(moved) == a.contains_point(p)


def test_geo_text_form():
    r = GeoRegion.box(W, (0, Q(1, 2)), (1, 2))
    assert r.key() == "[0,1/2)x[1,2)&{-3<=x1-x2<3}"
    assert GeoRegion.empty_of(W).key() == "{}"


def test_sigma_outputs_partition_the_torus():
    for s in (sigma1(), sigma2()):
        total = union_all(s, s.output_partition().values())
        assert total == s.universe()
        assert sum(r.area() for r in s.output_partition().values()) == 9


def test_sigma2_diagonal_split():
    s = sigma2()
    assert s.output_at((Q(5, 2), Q(27, 10))) == "y22u"
    assert s.output_at((Q(27, 10), Q(5, 2))) == "y22l"
    assert s.output_at((Q(5, 2), Q(5, 2))) == "y22l"
    assert s.output_region("y22u").area() == Q(1, 2)


def test_translation_stable_subset():
    s = sigma1()
    q = s.output_region("y00")
    postq = {"u1": s.output_region("y00"), "u2": s.universe()}
    got = stable_subset(s, q, postq)
    assert got == GeoRegion.box(W, (0, Q(3, 5)), (0, Q(3, 5)))
