"""Affine presentations, point functors, and coefficient-expansion arcs.

The jet oracles are classical: restricting the affine line along k[t]/(t^n)
gives n free coefficient coordinates, and the double point x^2 = 0 picks up
the relations (x_0^2, 2 x_0 x_1) at the dual numbers.
"""

import pytest

from motivic.errors import AmbientMismatch, WorkbenchError
from motivic.fatpoints import base_point, make_fat_point, tensor_points
from motivic.fields import GF, QQ
from motivic.poly import Ideal, Poly, poly_str
from motivic.schemes import (AffineScheme, CoordMap, adjunction_check,
                             affine_space, arc_dimension, arc_of_map,
                             arc_var, count_points, identity_map, points,
                             product_scheme, truncation_map, validate_point,
                             weil_restrict)

F3 = GF(3)


def fat(field, k, name=""):
    t = Poly.variable("t", ("t",), field)
    return make_fat_point(("t",), field, [t ** k], name or "t%d" % k)


def parabola(field):
    vars = ("x", "y")
    x = Poly.variable("x", vars, field)
    y = Poly.variable("y", vars, field)
    return AffineScheme("P", Ideal(vars, field, [y - x * x]))


def test_point_counts_over_f3():
    A1 = affine_space(F3, ("x",), "A1")
    assert count_points(A1, base_point(F3)) == 3
    assert count_points(A1, fat(F3, 2)) == 9
    P = parabola(F3)
    assert count_points(P, base_point(F3)) == 3
    assert count_points(P, fat(F3, 2)) == 9


def test_points_satisfy_relations():
    P = parabola(F3)
    m = fat(F3, 2)
    for p in points(P, m):
        assert validate_point(P, m, p)


def test_jet_coordinates_are_free():
    for d in (1, 2):
        Ad = affine_space(QQ, tuple("x%d" % i for i in range(d)), "A%d" % d)
        for n in (1, 2, 3):
            arc = weil_restrict(Ad, fat(QQ, n))
            assert len(arc.vars) == d * n
            assert not arc.ideal.gens
            assert arc_dimension(Ad, fat(QQ, n)) == d * n


def test_arc_coordinate_naming():
    A1 = affine_space(QQ, ("x",), "A1")
    arc = weil_restrict(A1, fat(QQ, 3))
    assert arc.vars == ("x_0", "x_1", "x_2")
    assert arc_var("x", 1) == "x_1"


def test_double_point_arc_presentation():
    x = Poly.variable("x", ("x",), QQ)
    D = AffineScheme("D", Ideal(("x",), QQ, [x * x]))
    arc = weil_restrict(D, fat(QQ, 2))
    assert [poly_str(g) for g in arc.ideal.gens] == ["x_0^2", "2*x_0*x_1"]


def test_parabola_arc_presentation():
    arc = weil_restrict(parabola(QQ), fat(QQ, 2))
    assert arc.vars == ("x_0", "x_1", "y_0", "y_1")
    gens = [poly_str(g) for g in arc.ideal.gens]
    assert gens == ["-x_0^2 + y_0", "-2*x_0*x_1 + y_1"]


def test_restriction_counts_match_hom_sets():
    A1 = affine_space(F3, ("x",), "A1")
    m = fat(F3, 2)
    arc = weil_restrict(A1, m)
    assert count_points(arc, base_point(F3)) == count_points(A1, m)


def test_adjunction_bijection_for_smooth_and_fat():
    m = fat(GF(2), 2)
    a = fat(GF(2), 2)
    A1 = affine_space(GF(2), ("x",), "A1")
    rep = adjunction_check(A1, m, a)
    assert rep["bijection"] and rep["tensor_count"] == rep["arc_count"] == 16

    x = Poly.variable("x", ("x",), GF(2))
    D = AffineScheme("D", Ideal(("x",), GF(2), [x * x]))
    rep2 = adjunction_check(D, m, a)
    assert rep2["bijection"], rep2


def test_tensor_point_symmetry_in_counts():
    m = fat(GF(2), 2)
    a = fat(GF(2), 3)
    P = parabola(GF(2))
    left = count_points(P, tensor_points(a, m))
    right = count_points(P, tensor_points(m, a))
    assert left == right


def test_truncation_map_drops_high_coefficients():
    A1 = affine_space(F3, ("x",), "A1")
    big, small = fat(F3, 3), fat(F3, 2)
    tr = truncation_map(A1, big, small)
    arc_big = weil_restrict(A1, big)
    alg = base_point(F3).algebra
    for p in points(arc_big, base_point(F3)):
        q = tr.apply_point(alg, p)
        assert q == p[:2]


def test_arc_of_map_is_coefficientwise():
    A1 = affine_space(QQ, ("x",), "A1")
    x = Poly.variable("x", A1.vars, QQ)
    sq = CoordMap(A1, A1, {"x": x * x})
    arc_sq = arc_of_map(sq, fat(QQ, 2))
    images = [poly_str(arc_sq.images[v]) for v in arc_sq.target.vars]
    assert images == ["x_0^2", "2*x_0*x_1"]


def test_map_relation_respect():
    A1 = affine_space(QQ, ("u",), "A1")
    u = Poly.variable("u", A1.vars, QQ)
    P = parabola(QQ)
    good = CoordMap(A1, P, {"x": u, "y": u * u})
    assert good.respects_relations()
    bad = CoordMap(A1, P, {"x": u, "y": u})
    assert not bad.respects_relations()
    assert identity_map(P).respects_relations()


def test_map_composition_point_action():
    A1 = affine_space(F3, ("u",), "A1")
    u = Poly.variable("u", A1.vars, F3)
    one = Poly.constant(1, A1.vars, F3)
    sq = CoordMap(A1, A1, {"u": u * u})
    shift = CoordMap(A1, A1, {"u": u + one})
    comp = sq.compose(shift)
    alg = base_point(F3).algebra
    for p in points(A1, base_point(F3)):
        assert comp.apply_point(alg, p) == sq.apply_point(alg, shift.apply_point(alg, p))


def test_product_scheme_multiplies_counts():
    A1 = affine_space(F3, ("x",), "A1")
    P = parabola(F3)
    prod, _, _ = product_scheme(A1, P)
    assert count_points(prod, base_point(F3)) == 9


def test_iterated_restriction_names_stay_distinct():
    A1 = affine_space(QQ, ("x",), "A1")
    arc = weil_restrict(A1, fat(QQ, 2))
    tower = weil_restrict(arc, fat(QQ, 2))
    assert len(set(tower.vars)) == 4
    assert not tower.ideal.gens
