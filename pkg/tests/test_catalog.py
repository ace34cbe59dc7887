import random

import pytest

from setcircuit import catalog, numtheory as nt
from setcircuit.catalog import CatalogError, build, cases_circuit, fast_growth_value, list_catalog, verify
from setcircuit.epset import EpSet
from setcircuit.lang import free_vars, parse, unparse
from setcircuit.trieval import Trit, eval_circuit


def singleton_inputs(values):
    return [(EpSet.singleton(v),) for v in values]


class TestBuild:
    def test_published_texts(self):
        assert unparse(build("primes").circuit) == "~{1} & ~(~{1} * ~{1})"
        assert unparse(build("res", m=3, k=1).circuit) == "{3} * N + {1}"
        assert build("evens").text == "{2} * N"

    def test_fermat_first_members(self):
        t = eval_circuit(build("fermat").circuit, {}, 300).tri()
        assert [n for n in range(301) if t.trit(n) is Trit.IN] == [3, 5, 17, 257]

    @pytest.mark.parametrize(
        "id, params",
        [("pow", {"p": 4}), ("res", {"m": 2, "k": 2}), ("mod", {"l": 1}), ("card_gt", {"k": -1}),
         ("pow_multiples", {"k": 0}), ("disc.7", {}), ("gate_eq.nope", {}), ("nope", {}), ("res", {"z": 1})],
    )
    def test_invalid_parameters(self, id, params):
        with pytest.raises(CatalogError):
            build(id, **params)

    def test_params_from_strings(self):
        assert build("res", m="5", k="2").id == "res(m=5,k=2)"

    def test_arity_matches_circuit(self):
        for row in list_catalog():
            entry = build(row.id)
            assert tuple(sorted(free_vars(entry.circuit))) == tuple(sorted(entry.variables))
            assert parse(entry.text) is not None


class TestListing:
    def test_contents(self):
        rows = {r.id: r for r in list_catalog()}
        assert rows["primes"].arity == 0
        assert rows["next_prime"].arity == 1
        assert rows["gate_eq.max_from_down_fminus1"].arity == 1
        assert "max" in rows["gate_eq.max_from_down_fminus1"].description
        assert {f"disc.{v}" for v in range(1, 7)} <= set(rows)

    def test_stable(self):
        assert [r.id for r in list_catalog()] == [r.id for r in list_catalog()]


class TestVerify:
    def test_primes(self):
        r = verify(build("primes"), 10_000)
        assert (r.mismatches, r.unknowns) == (0, 0)

    def test_pow_multiples(self):
        t = eval_circuit(build("pow_multiples", p=2, k=2).circuit, {}, 10_000).tri()
        assert [n for n in range(10_001) if t.trit(n) is Trit.IN] == [1, 4, 16, 64, 256, 1024, 4096]

    def test_coprime_edge_rows(self):
        pairs = [(m, n) for m in (0, 1) for n in range(0, 30)] + [(m, n) for m in range(0, 200, 7) for n in range(0, 200, 11)]
        inputs = [(EpSet.singleton(m), EpSet.singleton(n)) for m, n in pairs]
        r = verify(build("coprime"), 16, inputs=inputs)
        assert r.mismatches == 0 and r.samples == len(pairs)

    def test_small_bound_rejected(self):
        with pytest.raises(CatalogError):
            verify(build("evens"), 8)

    @pytest.mark.parametrize("row", [r.id for r in list_catalog()])
    def test_every_entry(self, row):
        entry = build(row)
        r = verify(entry, 4096 if entry.arity == 0 else 64, samples=200)
        assert r.mismatches == 0, r.details
        if entry.name != "fast_growth":
            assert r.unknowns == 0

    def test_card_gt_small_k(self):
        for k in range(6):
            r = verify(build("card_gt", k=k), 64, samples=100, seed=k)
            assert r.mismatches == 0 and r.unknowns == 0

    def test_report_dict(self):
        d = verify(build("evens"), 64).as_dict()
        assert {"id", "bound", "mismatches", "unknowns", "tier"} <= set(d)


class TestNumerical:
    def test_next_prime_window(self):
        r = verify(build("next_prime"), 16, inputs=singleton_inputs(range(4, 400)))
        assert r.mismatches == 0 and r.unknowns == 0
        for n in range(4, 10_001):
            assert n < nt.next_prime(n) < 2 * n - 2

    def test_fast_growth_values(self):
        assert [fast_growth_value(n, 2) for n in (3, 5, 7)] == [8, 32, 16]
        assert fast_growth_value(12, 2) == 12
        assert fast_growth_value(0, 2) is None
        r = verify(build("fast_growth"), 16, inputs=singleton_inputs([2, 3, 4, 5, 7, 9, 12, 15]))
        assert r.mismatches == 0 and r.unknowns == 0 and r.samples == 8

    def test_fast_growth_ceiling_reported(self):
        r = verify(build("fast_growth"), 16, inputs=singleton_inputs([37]), ceiling=1 << 12)
        assert r.over_ceiling == 1 and r.samples == 0

    def test_two_n_minus_1_at_zero(self):
        r = verify(build("two_n_minus_1"), 16, inputs=singleton_inputs([0, 1, 2, 50]))
        assert r.mismatches == 0


class TestCases:
    def test_combinator_shape(self):
        node = cases_circuit(parse("x"), parse("{1}"), parse("{2}"), variant=4)
        for s, want in ((EpSet.empty(), {2}), (EpSet.singleton(9), {1})):
            v = eval_circuit(node, {"x": s}, 16).value
            assert set(v.members(16)) == want

    def test_all_variants(self):
        rng = random.Random(3)
        for variant in range(1, 7):
            entry = build("cases", variant=variant)
            r = verify(entry, 64, samples=40, seed=rng.randrange(1000))
            assert r.mismatches == 0


def test_max_from_down_both_parities():
    inputs = singleton_inputs([6, 7]) + [(EpSet.finite([1, 3]),), (EpSet.finite([0, 2, 4]),), (EpSet.empty(),)]
    r = verify(build("max_from_down"), 64, inputs=inputs)
    assert r.mismatches == 0 and r.unknowns == 0


def test_goldbach_agrees_with_brute_force():
    assert catalog.build("goldbach").member_table(100) == [False] * 101
