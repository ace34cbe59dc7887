import pytest
from hypothesis import given, settings, strategies as st

from setcircuit import numtheory as nt
from setcircuit.epset import EpSet, GateKind, gate_lift
from setcircuit.lang import parse, walk
from setcircuit.catalog import build
from setcircuit.trieval import (
    BoundMismatch,
    EvalCache,
    TriPrefixSet,
    Trit,
    UnboundVariableError,
    boolean3,
    eval_circuit,
    from_epset,
    gate3,
    query,
    sumset3,
    times3,
)
from strategies import additive_circuits, circuits, epsets, identity_circuits
from support import contradictions

I, O, U = Trit.IN, Trit.OUT, Trit.UNKNOWN
EVENS = EpSet(0, 0, 2, 1)
PRIMES = "~{1} & ~(~{1} * ~{1})"


def tri(trits: str, tail: str) -> TriPrefixSet:
    return TriPrefixSet.from_trits(trits, tail)


class TestKleene:
    def test_tables(self):
        assert I & U is U and O & U is O and I & I is I
        assert I | U is I and O | U is U and O | O is O
        assert ~U is U and ~I is O and ~O is I

    @given(st.sampled_from(list(Trit)), st.sampled_from(list(Trit)))
    def test_de_morgan(self, a, b):
        assert ~(a & b) is (~a | ~b)
        assert ~(a | b) is (~a & ~b)


class TestFromEpset:
    def test_examples(self):
        assert str(from_epset(EpSet.naturals(), 5)) == "tri[111111;1]"
        assert str(from_epset(EpSet.singleton(3), 5)) == "tri[000100;0]"
        assert str(from_epset(EVENS, 5)) == "tri[101010;?]"

    @given(epsets(), st.integers(0, 60))
    def test_exact_prefix(self, s, bound):
        t = from_epset(s, bound)
        assert t.unknown_count == 0
        for n in range(bound + 40):
            v = t.trit(n)
            assert v is U or v is Trit.of(s.member(n))


class TestBoolean3:
    def test_examples(self):
        assert boolean3("complement", tri("1", "?")).tail is U
        assert boolean3("union", tri("1", "0"), tri("?", "0")).trit(0) is I
        evens = from_epset(EVENS, 10)
        both = boolean3("inter", evens, boolean3("complement", evens))
        assert str(both) == "tri[00000000000;?]"

    def test_bound_mismatch(self):
        with pytest.raises(BoundMismatch):
            boolean3("union", tri("1", "0"), tri("10", "0"))


class TestSumset3:
    def test_singletons(self):
        a = from_epset(EpSet.singleton(2), 10)
        b = from_epset(EpSet.singleton(3), 10)
        assert str(sumset3(a, b)) == "tri[00000100000;0]"

    def test_primes_sum(self):
        primes = eval_circuit(parse(PRIMES), {}, 100).tri()
        assert sumset3(primes, primes).trit(12) is I

    def test_empty_operand(self):
        empty = from_epset(EpSet.empty(), 8)
        other = TriPrefixSet.unknown(8)
        out = sumset3(empty, other)
        assert out.possible == 0 and out.tail is O


class TestTimes3:
    def test_evens(self):
        out = times3(from_epset(EpSet.singleton(2), 10), from_epset(EpSet.naturals(), 10), "full")
        assert out.trits() == "10101010101"
        assert out.tail is U

    def test_composites(self):
        not_one = from_epset(_cofinite_without_one(), 20)
        out = times3(not_one, not_one, "modified")
        want = "".join("1" if n > 3 and not nt.is_prime(n) else "0" for n in range(21))
        assert out.trits() == want

    def test_zero_unknown_when_emptiness_unknown(self):
        a = tri("00000", "?")
        b = from_epset(EpSet.singleton(0), 4)
        assert times3(a, b, "full").trit(0) is U


def _cofinite_without_one() -> EpSet:
    return EpSet(2, 0b01, 1, 1)


class TestGate3:
    def test_min(self):
        out = gate3(GateKind.MIN, tri("001??", "?"))
        assert out.trits() == "00100" and out.tail is O

    def test_fin_visible(self):
        assert gate3(GateKind.FIN, tri("?1?0", "0")).trits() == "1000"

    def test_card_needs_finiteness(self):
        out = gate3(GateKind.CARD, from_epset(EVENS, 10))
        assert out.certain == 0

    def test_down(self):
        out = gate3(GateKind.DOWN, tri("0??1?", "?"))
        assert out.trits().startswith("1111")

    @given(st.sampled_from(list(GateKind)), epsets(), st.integers(0, 40))
    def test_sound_on_exact_input(self, g, s, bound):
        want = gate_lift(g, s)
        got = gate3(g, from_epset(s, bound))
        for n in range(bound + 30):
            v = got.trit(n)
            assert v is U or v is Trit.of(want.member(n)), (g, s, n)


class TestEvalCircuit:
    def test_primes(self):
        ev = eval_circuit(parse(PRIMES), {}, 30)
        t = ev.tri()
        assert [n for n in range(31) if t.trit(n) is I] == nt.primes_upto(30)
        assert t.unknown_count == 0
        assert t.tail is U

    def test_goldbach(self):
        t = eval_circuit(build("goldbach").circuit, {}, 200).tri()
        assert t.possible == 0

    def test_evens_stays_exact(self):
        ev = eval_circuit(parse("{2} * N"), {}, 50)
        assert ev.tier == "ep" and ev.value == EVENS

    def test_unbound(self):
        with pytest.raises(UnboundVariableError):
            eval_circuit(parse("x + {1}"), {}, 10)
        with pytest.raises(ValueError):
            eval_circuit(parse("{1}"), {}, -1)

    def test_shared_nodes_evaluated_once(self):
        node = parse("let p = ~{1} * ~{1} in p | p")
        ev = eval_circuit(node, {}, 20)
        assert len(ev.values) == len(list(walk(ev.root)))

    def test_cache_reuse(self):
        cache = EvalCache()
        node = parse(PRIMES)
        first = eval_circuit(node, {}, 64, cache=cache).value
        assert eval_circuit(node, {}, 64, cache=cache).value is first

    def test_query(self):
        assert query(parse(PRIMES), {}, 100, 97) is I
        fermat = build("fermat").circuit
        assert query(fermat, {}, 300, 257) is I
        assert query(fermat, {}, 300, 100) is O
        with pytest.raises(ValueError):
            query(parse(PRIMES), {}, 10, 11)

    def test_exact_tier_limit_falls_back(self):
        node = parse("prod(x)")
        ev = eval_circuit(node, {"x": EpSet.interval(1, 3000)}, 16)
        assert ev.tier == "tri"

    @settings(max_examples=150)
    @given(circuits(), epsets(), epsets())
    def test_sound_against_oracle(self, c, x, y):
        assert contradictions(c, {"x": x, "y": y}, 32) == []

    @settings(max_examples=60)
    @given(identity_circuits(), epsets(), epsets(), st.sampled_from([16, 40]))
    def test_complete_on_continuous_fragment(self, c, x, y, bound):
        ev = eval_circuit(c, {"x": x, "y": y}, bound, force_tri=True)
        assert ev.tri().unknown_count == 0

    @settings(max_examples=60)
    @given(circuits(), epsets(), epsets())
    def test_tiers_agree(self, c, x, y):
        env = {"x": x, "y": y}
        exact = eval_circuit(c, env, 40)
        forced = eval_circuit(c, env, 40, force_tri=True)
        for node in walk(exact.root):
            v = exact.values[id(node)]
            if isinstance(v, EpSet):
                f = forced.values[id(node)]
                t = from_epset(v, 40)
                # the forced run may know less, never something different
                assert f.certain & ~t.certain == 0
                assert t.possible & ~f.possible == 0

    @settings(max_examples=60)
    @given(circuits(), epsets(), epsets())
    def test_monotone_refinement(self, c, x, y):
        env = {"x": x, "y": y}
        tris = [eval_circuit(c, env, b).tri() for b in (32, 64, 128)]
        for small, big in zip(tris, tris[1:]):
            for n in range(small.bound + 1):
                a, b = small.trit(n), big.trit(n)
                assert U in (a, b) or a is b

    @settings(max_examples=100)
    @given(additive_circuits(variables=()))
    def test_additive_constants_are_finite_or_cofinite(self, c):
        ev = eval_circuit(c, {}, 16)
        assert ev.tier == "ep"
        assert ev.value.period == 1
