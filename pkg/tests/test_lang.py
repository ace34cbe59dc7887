import pytest
from hypothesis import given, settings

from setcircuit.epset import EpSet, GateKind
from setcircuit.lang import (
    Complement,
    Empty,
    EpLit,
    FiniteConst,
    Gate,
    Inter,
    Let,
    ModProd,
    Nat,
    ParseError,
    Prod,
    Single,
    Sum,
    UnboundIdentifierError,
    Union,
    Var,
    free_vars,
    inline_lets,
    parse,
    substitute,
    tokenize,
    unparse,
    validate,
    walk,
)
from strategies import circuits

PRIMES_TEXT = "~{1} & ~(~{1} * ~{1})"
NOT_ONE = Complement(Single(1))
PRIMES_AST = Inter(NOT_ONE, Complement(Prod(NOT_ONE, NOT_ONE)))


class TestParse:
    def test_primes(self):
        assert parse(PRIMES_TEXT) == PRIMES_AST

    def test_goldbach_sharing(self):
        node = parse(r"let p = ~{1} & ~(~{1}*~{1}) in ~(p + p) & ({2}*N) \ {0,2}")
        assert isinstance(node, Let) and node.name == "p"
        flat = inline_lets(node)
        total = flat.left.left.operand
        assert total.left is total.right

    def test_precedence(self):
        assert parse("{1}+{2}*{3}") == Sum(Single(1), Prod(Single(2), Single(3)))
        assert parse("x | y & z") == Union(Var("x"), Inter(Var("y"), Var("z")))
        assert parse("x . y * z") == Prod(ModProd(Var("x"), Var("y")), Var("z"))

    def test_left_associative(self):
        assert parse("x + y + z") == Sum(Sum(Var("x"), Var("y")), Var("z"))

    def test_atoms(self):
        assert parse("{}") == Empty()
        assert parse("E") == Empty()
        assert parse("N") == Nat()
        assert parse("{3, 1, 3}") == FiniteConst((1, 3))
        assert parse("ep[01;10]") == EpLit(EpSet.parse("ep[01;10]"))
        assert parse("card(x)") == Gate(GateKind.CARD, Var("x"))

    @pytest.mark.parametrize(
        "text, pos",
        [("{2} +", 5), ("{2} $ {3}", 4), ("foo(x)", 0), ("{1,}", 3), ("max", 0), ("(x", 2), ("5", 0), ("ep[2;1]", 0)],
    )
    def test_errors_report_position(self, text, pos):
        with pytest.raises(ParseError) as info:
            parse(text)
        assert info.value.position == pos

    def test_unbound_identifier(self):
        with pytest.raises(UnboundIdentifierError):
            parse("x + y", free_vars=["x"])
        assert parse("let y = {1} in x + y", free_vars=["x"]) is not None

    def test_tokenizer_prefers_ep_literal(self):
        assert [t.kind for t in tokenize("ep[1;0] + ep")] == ["ep", "sym", "ident", "end"]


class TestPrint:
    def test_examples(self):
        assert unparse(PRIMES_AST) == PRIMES_TEXT
        assert unparse(Single(5)) == "{5}"
        assert unparse(Sum(Nat(), Empty())) == "N + E"

    def test_minimal_parentheses(self):
        assert unparse(parse("(x + y) + z")) == "x + y + z"
        assert unparse(parse("x + (y + z)")) == "x + (y + z)"
        assert unparse(parse("(x | y) * z")) == "(x | y) * z"

    @settings(max_examples=1000)
    @given(circuits())
    def test_round_trip(self, c):
        assert parse(unparse(c)) == c


class TestStructure:
    def test_free_vars(self):
        assert free_vars(parse("let y = x in y + z")) == {"x", "z"}
        assert free_vars(parse(PRIMES_TEXT)) == frozenset()

    def test_substitute_shares(self):
        rho = parse("x + {1}")
        out = substitute(parse("x & ~x"), {"x": rho})
        assert out.left is rho and out.right.operand is rho

    def test_walk_visits_shared_once(self):
        node = inline_lets(parse("let p = x + x in p | p"))
        sums = [n for n in walk(node) if isinstance(n, Sum)]
        assert len(sums) == 1


class TestValidate:
    def test_primes_note_only(self):
        diags = validate(PRIMES_AST, set())
        assert [d.severity for d in diags] == ["note"]
        assert diags[0].code == "product-fallback"
        assert not [d for d in diags if d.severity != "note"]

    def test_unbound(self):
        diags = validate(Var("x"), set())
        assert [(d.severity, d.code) for d in diags] == [("error", "unbound-variable")]
        assert validate(Var("x"), {"x"}) == []

    def test_shadowing(self):
        diags = validate(parse("let x = {1} in let x = {2} in x"))
        assert [d.code for d in diags] == ["shadowed-let"]

    def test_finite_product_is_silent(self):
        assert validate(parse("{2} * N")) == []
