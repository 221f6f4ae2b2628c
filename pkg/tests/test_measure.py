"""Limit measures: stabilization windows, lax variants, indexed mode."""

from fractions import Fraction

import pytest

from motivic.config import DEFAULT
from motivic.errors import EvalError
from motivic.fatpoints import PointSystem, base_point, jet_rule, make_fat_point
from motivic.fields import GF, QQ
from motivic.kring import kclass_one, kclass_zero, lefschetz, lift_const
from motivic.measures import (MeasureQuery, counting_consistency,
                              finite_measure, forget_structure, indexed_mode,
                              integral_form, lax_measure, limit_measure,
                              stable_set_measure)
from motivic.poly import Ideal, Poly
from motivic.schemes import AffineScheme, affine_space, weil_restrict
from motivic.sieves import (Closed, ConstSieve, closed_sieve, empty_sieve,
                            full_sieve, limit_sieve)

A1 = affine_space(QQ, ("x",), "A1")
L = lefschetz(QQ)


def fat(field, k):
    t = Poly.variable("t", ("t",), field)
    return make_fat_point(("t",), field, [t ** k], "t%d" % k)


def jets(field, cfg=DEFAULT):
    return PointSystem(rule=jet_rule(field, cfg=cfg), label="jets")


class TestFiniteMeasure:
    def test_line_at_dual_numbers(self):
        assert finite_measure(A1, fat(QQ, 2)) == L * L

    def test_point_and_empty(self):
        pt = AffineScheme("pt", Ideal((), QQ, []))
        assert finite_measure(pt, fat(QQ, 2)) == kclass_one(QQ)
        assert finite_measure(empty_sieve(A1), fat(QQ, 2)) == kclass_zero(QQ)

    def test_integral_form_normalizes_by_dimension(self):
        k0 = base_point(QQ)
        assert integral_form(full_sieve(A1), A1, k0) == L
        assert integral_form(empty_sieve(A1), A1, k0) == kclass_zero(QQ)
        pt = AffineScheme("pt", Ideal((), QQ, []))
        assert integral_form(full_sieve(pt), pt, k0) == kclass_one(QQ)


class TestLimitMeasure:
    def test_full_arcs_normalize_to_one(self):
        for d in (1, 2, 3):
            Ad = affine_space(QQ, tuple("x%d" % i for i in range(d)), "A%d" % d)
            rep = limit_measure(MeasureQuery(limit_sieve(Ad, jets(QQ)), Q=1))
            assert rep.stabilized
            assert rep.value == lift_const(kclass_one(QQ))

    def test_origin_arcs_give_inverse_lefschetz(self):
        def origin_rule(m):
            arc = weil_restrict(A1, m)
            first = Poly.variable("x_0", arc.vars, QQ)
            return ConstSieve(arc, Closed((first,)))

        fam = limit_sieve(A1, jets(QQ), rule=origin_rule)
        rep = limit_measure(MeasureQuery(fam, Q=1))
        assert rep.stabilized
        assert rep.value == lift_const(lefschetz(QQ, -1))

    def test_singleton_chain_at_rate_zero_is_the_finite_measure(self):
        m = fat(QQ, 2)
        vx = closed_sieve(A1, [Poly.variable("x", A1.vars, QQ)])
        fam = limit_sieve(vx, PointSystem(members=[m], label="one"))
        rep = limit_measure(MeasureQuery(fam, Q=0))
        assert rep.stabilized
        assert rep.value == lift_const(finite_measure(vx, m))

    def test_empty_family_measures_zero(self):
        fam = limit_sieve(empty_sieve(A1), jets(QQ))
        rep = limit_measure(MeasureQuery(fam, Q=1))
        assert rep.stabilized and rep.value.is_zero()

    def test_growing_family_at_rate_zero_is_indeterminate(self):
        rep = limit_measure(MeasureQuery(limit_sieve(A1, jets(QQ)), Q=0))
        assert not rep.stabilized

    def test_horizon_extension_keeps_the_verdict(self):
        wide = DEFAULT.with_overrides(max_degree=10)
        fam = limit_sieve(A1, jets(QQ, cfg=wide))
        rep = limit_measure(MeasureQuery(fam, Q=1, horizon=10), wide)
        assert rep.stabilized and rep.value == lift_const(kclass_one(QQ))

    def test_query_validation(self):
        fam = limit_sieve(A1, jets(QQ))
        with pytest.raises(EvalError):
            MeasureQuery(fam, Q=-1)
        with pytest.raises(EvalError):
            MeasureQuery(fam, Q=1, window=1)
        with pytest.raises(EvalError):
            MeasureQuery(fam, Q=1, horizon=2, window=3)


class TestLaxMeasure:
    def test_zero_correction_is_verbatim(self):
        fam = limit_sieve(A1, jets(QQ))
        plain = limit_measure(MeasureQuery(fam, Q=1))
        lax0 = lax_measure(MeasureQuery(fam, Q=1, lax_rule=lambda m: 0))
        assert lax0.stabilized == plain.stabilized
        assert lax0.value == plain.value
        assert [v for _, v in lax0.sequence] == [v for _, v in plain.sequence]

    def test_length_correction_cancels_the_growth(self):
        fam = limit_sieve(A1, jets(QQ))
        rep = lax_measure(MeasureQuery(fam, Q=0, lax_rule=lambda m: m.length))
        assert rep.stabilized and rep.value == lift_const(kclass_one(QQ))

    def test_divergent_correction_is_indeterminate(self):
        fam = limit_sieve(A1, jets(QQ))
        rep = lax_measure(MeasureQuery(fam, Q=0, lax_rule=lambda m: 2 * m.length))
        assert not rep.stabilized


class TestStableSets:
    def test_validated_family_over_a_finite_field(self):
        F3 = GF(3)
        A1f = affine_space(F3, ("x",), "A1f")
        rep = stable_set_measure(limit_sieve(A1f, jets(F3)), horizon=6)
        assert rep.stabilized and rep.value == lift_const(kclass_one(F3))

    def test_counting_consistency_of_the_value(self):
        F3 = GF(3)
        A1f = affine_space(F3, ("x",), "A1f")
        rep = stable_set_measure(limit_sieve(A1f, jets(F3)), horizon=6)
        k3 = base_point(F3)
        assert counting_consistency(rep, [(k3, 0), (k3, 2)], window=3)

    def test_incompatible_family_is_refused(self):
        F3 = GF(3)
        A1f = affine_space(F3, ("x",), "A1f")

        def bad_rule(m):
            arc = weil_restrict(A1f, m)
            if m.length % 2 == 0:
                gens = tuple(Poly.variable(v, arc.vars, F3) for v in arc.vars)
                return ConstSieve(arc, Closed(gens))
            return ConstSieve(arc, Closed(()))

        fam = limit_sieve(A1f, jets(F3), rule=bad_rule)
        with pytest.raises(EvalError):
            stable_set_measure(fam, horizon=4)


class TestIndexedMode:
    def test_verdict_coincides_with_the_structured_one(self):
        F3 = GF(3)
        A1f = affine_space(F3, ("x",), "A1f")
        fam = limit_sieve(A1f, jets(F3))
        rep_i = indexed_mode(MeasureQuery(fam, Q=1))
        rep_p = limit_measure(MeasureQuery(fam, Q=1))
        assert rep_i.mode == "indexed"
        assert rep_i.stabilized == rep_p.stabilized
        assert rep_i.since == rep_p.since
        assert rep_i.per_level and all(e["stabilized"] for e in rep_i.per_level)

    def test_forget_structure_preserves_level_counts(self):
        F3 = GF(3)
        A1f = affine_space(F3, ("x",), "A1f")
        k3 = base_point(F3)
        from motivic.sieves import lift_sieve
        fib = lift_sieve(full_sieve(A1f), "fiber")
        flat = forget_structure(fib)
        for n in range(3):
            assert flat.count(k3, n) == fib.count(k3, n)
