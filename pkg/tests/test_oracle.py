import pytest
from hypothesis import given, settings, strategies as st

from setcircuit.epset import EpSet, GateKind
from setcircuit.lang import parse
from setcircuit.oracle import oracle_eval, oracle_gate, raw_is_empty, raw_is_finite, truncated_eval
from setcircuit.trieval import Trit, query
from strategies import circuits, epsets

PRIMES = parse("~{1} & ~(~{1} * ~{1})")


def test_examples():
    assert oracle_eval(parse("{2} * N"), {}, 400, 20) is Trit.IN
    assert oracle_eval(PRIMES, {}, 400, 91) is Trit.OUT
    assert oracle_eval(parse("eps(x)"), {"x": EpSet.empty()}, 100, 0) is Trit.IN


def test_primes_match_trial_division():
    for n in range(101):
        want = n > 1 and all(n % d for d in range(2, n))
        assert oracle_eval(PRIMES, {}, 404, n) is Trit.of(want)


def test_margin_enforced():
    with pytest.raises(ValueError):
        oracle_eval(PRIMES, {}, 100, 26)


def test_abstains_on_uncertifiable_gate():
    # finiteness of a set cut off at the universe is not observable
    assert oracle_eval(parse("fin(x)"), {"x": EpSet(0, 0, 3, 1)}, 100, 0) is not Trit.IN


def test_certified_flags():
    values = truncated_eval(parse("{3} + {4}"), {}, 64)
    assert values[-1].certified and values[-1].trit(7) is Trit.IN


def test_gate_examples():
    assert oracle_gate(GateKind.DOWN, [3, 7]) == EpSet.interval(0, 7)
    assert oracle_gate(GateKind.SUM, [1, 2, 3]) == EpSet.singleton(6)
    assert oracle_gate(GateKind.PROD, EpSet(0, 0, 2, 1)) == EpSet.naturals()


@given(epsets())
def test_raw_predicates(s):
    assert raw_is_empty(s) == s.is_empty
    assert raw_is_finite(s) == s.is_finite


@settings(max_examples=300)
@given(circuits(), epsets(), epsets(), st.integers(0, 40))
def test_never_contradicts_evaluator(c, x, y, n):
    env = {"x": x, "y": y}
    a = oracle_eval(c, env, 4 * 40, n)
    b = query(c, env, 40, n)
    assert Trit.UNKNOWN in (a, b) or a is b
