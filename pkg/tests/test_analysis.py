from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from setcircuit import epset as ep
from setcircuit.analysis import (
    BoundedFormulaChecker,
    OutsideFragment,
    analyze,
    card_star,
    card_star_check,
    circuit_size,
    classify,
    dag_size,
    eval_bounded_formula,
    linear_bound,
    metric_distance,
    min_star,
    modulus,
    predicate_subcircuits,
    to_bounded_formula,
    uniformity_constants,
)
from setcircuit.epset import EpSet, GateKind
from setcircuit.lang import parse, unparse
from setcircuit.trieval import Trit, eval_circuit, query
from strategies import additive_circuits, epsets, finite_or_cofinite, identity_circuits
from support import linear_violations, uniformity_violations

PRIMES = "~{1} & ~(~{1} * ~{1})"


def agreeing_pair(x: EpSet, y: EpSet, m: int) -> tuple[EpSet, EpSet]:
    """Two sets that agree with x and y respectively on [0, m] and swap above."""
    low = EpSet.interval(0, m)
    x2 = ep.union(ep.intersection(x, low), ep.difference(y, low))
    y2 = ep.union(ep.intersection(y, low), ep.difference(x, low))
    return x2, y2


class TestClassify:
    def test_examples(self):
        assert classify(parse(PRIMES))[0] == "arithmetic"
        assert classify(parse("down(x) + {1}"))[0] == "additive+gates"
        assert classify(parse("{2}+{3}")) == ("additive", 3)
        assert classify(parse("max(x * y)"))[0] == "arithmetic+gates"

    def test_sharing_counts_in_size_not_dag(self):
        node = parse("let p = x + {1} in p | p")
        assert circuit_size(node) == 7
        assert dag_size(node) < circuit_size(node)


class TestPredicates:
    def test_examples(self):
        outer = predicate_subcircuits(parse("eps(fin(x) + {1})"))
        assert [unparse(p) for p in outer] == ["eps(fin(x) + {1})"]
        assert predicate_subcircuits(parse(PRIMES)) == []
        both = predicate_subcircuits(parse("eps(x) | fin(y)"))
        assert [p.kind for p in both] == [GateKind.EPSILON, GateKind.FIN]


class TestModulus:
    def test_identity(self):
        assert modulus(parse("{1} + (x & ~y)")).kind == "identity"
        assert modulus(parse("x . y + {1}")).kind == "identity"
        assert modulus(parse("{3} * x")).kind == "identity"

    def test_discontinuous(self):
        m = modulus(parse("card(x)"))
        assert m.kind == "discontinuous"
        assert len(m.culprits) == 1 and m.culprits[0].startswith("card")
        assert modulus(parse("x * y")).kind == "discontinuous"
        assert modulus(parse("{0,1} * x")).kind == "discontinuous"

    def test_iterates(self):
        m = modulus(parse("fminus1(x) + fminus1(fminus1(x))"))
        assert m.iterations == 2 and m.bound(10) == 12

    @settings(max_examples=100)
    @given(identity_circuits(), epsets(), epsets(), st.sampled_from([8, 32]))
    def test_identity_modulus_holds(self, c, x, y, m):
        assert modulus(c).kind == "identity"
        x2, y2 = agreeing_pair(x, y, m)
        a = eval_circuit(c, {"x": x, "y": y}, m).tri()
        b = eval_circuit(c, {"x": x2, "y": y2}, m).tri()
        assert a.unknown_count == 0 and b.unknown_count == 0
        assert a.certain == b.certain


class TestUniformity:
    def test_examples(self):
        assert uniformity_constants(parse("{3}")) == (4, 4)
        assert uniformity_constants(parse("{1} + x"))[0] == 2
        k, l = uniformity_constants(parse("x + x"))
        assert k == 0
        assert uniformity_violations(parse("x + x"), k, l) == []

    def test_fragment_enforced(self):
        with pytest.raises(OutsideFragment):
            uniformity_constants(parse("x * {2}"))
        with pytest.raises(OutsideFragment):
            uniformity_constants(parse("x + y"))
        with pytest.raises(OutsideFragment):
            uniformity_constants(parse("down(x)"))
        assert uniformity_constants(parse("down(x)"), allow_down=True) == (0, 1)

    @settings(max_examples=40)
    @given(additive_circuits(gates=(GateKind.EPSILON, GateKind.FIN)))
    def test_constants_valid(self, c):
        k, l = uniformity_constants(c)
        assert uniformity_violations(c, k, l, 120) == []


class TestLinearBound:
    def test_examples(self):
        assert linear_bound(parse("x + x")) == 2
        assert linear_bound(parse("~x")) == 1
        body = parse("~(~(x + N) + ~(x + N))")
        assert linear_violations(body, linear_bound(body)) == []

    def test_gates_rejected(self):
        with pytest.raises(OutsideFragment):
            linear_bound(parse("eps(x) + x"))

    def test_differences_with_infinite_tails(self):
        c = parse("((x + N) \\ x) + ((x + N) \\ x)")
        assert linear_violations(c, linear_bound(c)) == []

    @settings(max_examples=40)
    @given(additive_circuits())
    def test_bound_valid(self, c):
        assert linear_violations(c, linear_bound(c), 120) == []


class TestBoundedFormulas:
    def test_translation_shapes(self):
        assert str(to_bounded_formula(parse("{2}"))) == "n = 2"
        assert str(to_bounded_formula(parse("{2}+{3}"))) == "E u <= n . E v <= n . (u + v = n & u = 2 & v = 3)"

    def test_examples(self):
        assert eval_bounded_formula(to_bounded_formula(parse("{2}")), 2)
        evens = to_bounded_formula(parse("({2} . ~{0}) | {0}"))
        assert eval_bounded_formula(evens, 4)
        assert not eval_bounded_formula(evens, 7)
        primes = to_bounded_formula(parse("~{1} & ~(~{1} . ~{1}) & ~{0}"))
        assert eval_bounded_formula(primes, 13)
        assert not eval_bounded_formula(primes, 15)

    def test_rejects_full_product(self):
        with pytest.raises(OutsideFragment):
            to_bounded_formula(parse("{2} * N"))
        with pytest.raises(OutsideFragment):
            to_bounded_formula(parse("x + {1}"))

    def test_free_variable_error(self):
        phi = to_bounded_formula(parse("{2}"), target="m")
        with pytest.raises(ValueError):
            eval_bounded_formula(phi, 2)

    @settings(max_examples=30)
    @given(identity_circuits(variables=()))
    def test_matches_evaluator(self, c):
        check = BoundedFormulaChecker(to_bounded_formula(c))
        for n in range(61):
            t = query(c, {}, 60, n)
            if t is not Trit.UNKNOWN:
                assert check(n) == (t is Trit.IN)


class TestCardStar:
    def test_examples(self):
        r = card_star_check(EpSet.finite([1, 2]), EpSet.finite([10, 20]))
        assert card_star(ep.sumset(EpSet.finite([1, 2]), EpSet.finite([10, 20]))) == 4
        assert r.ok
        r = card_star_check(EpSet.empty(), EpSet.finite([4]))
        assert r.ok and min_star(EpSet.empty()) == -1
        s = ep.complement(EpSet.finite([0, 1]))
        r = card_star_check(s, EpSet.singleton(3))
        cof = [c for c in r.checks if c.name == "cofinite-sumset"][0]
        assert (cof.lhs, cof.rhs) == (5, 5)

    def test_undefined_for_other_sets(self):
        with pytest.raises(ValueError):
            card_star(EpSet(0, 0, 2, 1))

    def test_power_bound(self):
        c = parse("x + {2} | eps(x)")
        r = card_star_check(EpSet.finite([1, 5]), EpSet.empty(), circuit=c)
        assert r.circuit_check is not None and r.circuit_check.holds

    @settings(max_examples=200)
    @given(finite_or_cofinite(), finite_or_cofinite())
    def test_inequalities_hold(self, s, t):
        assert card_star_check(s, t).ok


class TestMetric:
    def test_examples(self):
        assert metric_distance(EpSet.finite([1, 2]), EpSet.finite([1, 3])) == Fraction(1, 3)
        s = EpSet.finite([4])
        assert metric_distance(s, s) == 0
        assert metric_distance(EpSet.empty(), EpSet.naturals()) == 1

    @given(epsets(), epsets(), epsets())
    def test_ultrametric(self, s, t, u):
        assert metric_distance(s, u) <= max(metric_distance(s, t), metric_distance(t, u))


def test_report_fields():
    report = analyze(parse("x + x")).as_dict()
    assert report["fragment"] == "additive"
    assert report["linear_bound"] == 2
    assert report["modulus"]["kind"] == "identity"
    assert analyze(parse("card(x) * y")).as_dict()["uniformity"] is None
