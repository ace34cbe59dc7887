"""Catalog of concrete circuits, each paired with an independent reference.

Variable-free entries define a set and carry a membership predicate; entries
with variables define a set-function and carry a reference function on EP
inputs together with a sampler of inputs.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from . import epset as ep
from . import numtheory as nt
from ._bitops import from_array, iter_bits, low_mask
from .epset import EpSet, GateKind
from .lang import Complement, Inter, Node, Union, free_vars, parse, substitute, unparse
from .sampling import random_epset, random_finite_epset
from .trieval import EvalCache, Trit, as_tri, eval_circuit, tier_of

DEFAULT_CEILING = 1 << 20

PRIMES_TEXT = "~{1} & ~(~{1} * ~{1})"

DISC_TEXTS = {
    1: "x * {0} + N",
    2: "~(~card((x + N) | {0}) + N)",
    3: "max(x + N)",
    4: "down(x) + N",
    5: "~(eps(x) + N)",
    6: "~(fin(x + N) + N)",
}


class CatalogError(ValueError):
    pass


Inputs = tuple[EpSet, ...]


@dataclass(frozen=True)
class CatalogEntry:
    """A named circuit and what it is supposed to compute.

    ``member`` is the reference for variable-free entries.  For the others,
    ``reference`` maps an input tuple to the expected output, or to None when
    the input falls outside the entry's side condition, and ``sampler`` draws
    inputs.  ``required_bound`` gives the evaluation bound an input needs.
    """

    id: str
    name: str
    params: Mapping[str, int | str]
    variables: tuple[str, ...]
    circuit: Node
    text: str
    description: str
    source: str
    member: Callable[[int], bool] | None = None
    member_table: Callable[[int], Sequence[bool]] | None = None
    reference: Callable[[Inputs], EpSet | None] | None = None
    sampler: Callable[[random.Random], Inputs] | None = None
    required_bound: Callable[[Inputs], int] | None = None

    @property
    def arity(self) -> int:
        return len(self.variables)


def _entry_id(name: str, params: Mapping[str, object]) -> str:
    if not params:
        return name
    return name + "(" + ",".join(f"{k}={v}" for k, v in params.items()) + ")"


def _make(
    name: str,
    params: Mapping[str, int | str],
    text: str,
    description: str,
    source: str,
    variables: tuple[str, ...] = (),
    circuit: Node | None = None,
    **refs,
) -> CatalogEntry:
    node = circuit if circuit is not None else parse(text)
    found = tuple(sorted(free_vars(node)))
    if found != tuple(sorted(variables)):
        raise CatalogError(f"{name}: circuit variables {found} differ from declared {variables}")
    return CatalogEntry(
        id=_entry_id(name, params),
        name=name,
        params=dict(params),
        variables=variables,
        circuit=node,
        text=text,
        description=description,
        source=source,
        **refs,
    )


def _require_prime(p: int) -> None:
    if not nt.is_prime(p):
        raise CatalogError(f"{p} is not prime")


def _singleton_value(s: EpSet) -> int | None:
    if s.is_finite and s.card() == 1:
        return s.min()
    return None


def _is_power(n: int, p: int) -> bool:
    if n < 1:
        return False
    while n % p == 0:
        n //= p
    return n == 1


def _sieve_table(limit: int) -> list[bool]:
    return [bool(f) for f in nt.sieve(limit)]


# variable-free entries


def evens() -> CatalogEntry:
    return _make("evens", {}, "{2} * N", "even numbers", "introductory examples", member=lambda n: n % 2 == 0)


def primes() -> CatalogEntry:
    return _make(
        "primes", {}, PRIMES_TEXT, "prime numbers", "introductory examples",
        member=nt.is_prime, member_table=_sieve_table,
    )


def _goldbach_table(limit: int) -> list[bool]:
    bad = set(nt.goldbach_counterexamples(limit))
    return [n in bad for n in range(limit + 1)]


def goldbach() -> CatalogEntry:
    text = f"let p = {PRIMES_TEXT} in ~(p + p) & {{2}} * N & ~({{0}} | {{2}})"
    return _make(
        "goldbach", {}, text, "even numbers above 2 that are not a sum of two primes",
        "introductory examples", member_table=_goldbach_table,
        member=lambda n: n in set(nt.goldbach_counterexamples(max(n, 4))),
    )


def _pow_text(p: int) -> str:
    return f"let P = {PRIMES_TEXT} in ~((P \\ {{{p}}}) * N)"


def pow_(p: int = 2) -> CatalogEntry:
    _require_prime(p)
    return _make(
        "pow", {"p": p}, _pow_text(p), f"powers of {p}, including 1", "powers and residues",
        member=lambda n: _is_power(n, p),
    )


def res(m: int = 3, k: int = 1) -> CatalogEntry:
    if not m > k >= 0:
        raise CatalogError("residue classes need m > k >= 0")
    return _make(
        "res", {"m": m, "k": k}, f"{{{m}}} * N + {{{k}}}", f"numbers congruent to {k} modulo {m}",
        "powers and residues", member=lambda n: n >= k and (n - k) % m == 0,
    )


def pow_multiples(p: int = 2, k: int = 2) -> CatalogEntry:
    _require_prime(p)
    if k < 1:
        raise CatalogError("k must be at least 1")
    modulus = p**k - 1
    text = f"let Pow = {_pow_text(p)} in Pow & ({{{modulus}}} * N + {{1}})"

    def member(n: int) -> bool:
        if not _is_power(n, p):
            return False
        e = round(math.log(n, p)) if n > 1 else 0
        while p**e < n:
            e += 1
        while p**e > n:
            e -= 1
        return e % k == 0

    return _make(
        "pow_multiples", {"p": p, "k": k}, text, f"powers of {p} whose exponent is a multiple of {k}",
        "powers and residues", member=member,
    )


def fermat() -> CatalogEntry:
    text = f"let Pow = {_pow_text(2)} in let q = (Pow \\ {{1}}) + {{1}} in q \\ (q * ~{{1}})"
    return _make(
        "fermat", {}, text, "Fermat numbers 2^(2^n) + 1", "powers and residues",
        member=lambda n: n in set(nt.fermat_numbers_upto(max(n, 3))),
    )


# set-functions of one variable


def _random_set(rng: random.Random) -> Inputs:
    return (random_epset(rng),)


def _random_finite_nonempty(rng: random.Random) -> Inputs:
    return (random_finite_epset(rng, nonempty=True),)


def _gate_ref(kind: GateKind, condition: Callable[[EpSet], bool] = lambda s: True):
    def ref(inputs: Inputs) -> EpSet | None:
        (s,) = inputs
        return ep.gate_lift(kind, s) if condition(s) else None

    return ref


def _sampler_for(condition: Callable[[EpSet], bool]) -> Callable[[random.Random], Inputs]:
    def sample(rng: random.Random) -> Inputs:
        # mix general and finite sets so finite-only conditions get hits
        while True:
            s = random_epset(rng) if rng.random() < 0.5 else random_finite_epset(rng)
            if condition(s):
                return (s,)

    return sample


def downset() -> CatalogEntry:
    return _make(
        "downset", {}, "~(x + N + {1})", "numbers not exceeding any member (all of N when empty)",
        "simple definable functions", ("x",),
        reference=_gate_ref(GateKind.BELOW), sampler=_random_set,
    )


def min_() -> CatalogEntry:
    return _make(
        "min", {}, "~(x + N + {1}) & x", "least member as a singleton", "simple definable functions",
        ("x",), reference=_gate_ref(GateKind.MIN), sampler=_random_set,
    )


def card_gt(k: int = 2) -> CatalogEntry:
    if k < 0:
        raise CatalogError("k must be a natural number")
    names = ["x"] + [f"x{i}" for i in range(1, k + 1)]
    body = f"{names[-1]} * {{0}}"
    text = body
    for i in range(k, 0, -1):
        text = f"let {names[i]} = {names[i - 1]} \\ min({names[i - 1]}) in " + text

    def ref(inputs: Inputs) -> EpSet:
        (s,) = inputs
        big = not s.is_finite or s.card() > k
        return EpSet.singleton(0) if big else EpSet.empty()

    def sample(rng: random.Random) -> Inputs:
        if rng.random() < 0.2:
            return (random_epset(rng),)
        return (EpSet.finite(rng.sample(range(40), rng.randint(0, k + 2))),)

    return _make(
        "card_gt", {"k": k}, text, f"{{0}} when the input has more than {k} members, else empty",
        "simple definable functions", ("x",), reference=ref, sampler=sample,
    )


def disc(variant: int = 1) -> CatalogEntry:
    if variant not in DISC_TEXTS:
        raise CatalogError("discriminator variants are numbered 1 to 6")
    return _make(
        f"disc.{variant}", {}, DISC_TEXTS[variant], "empty for empty input, N otherwise",
        "discriminator circuits", ("x",),
        reference=_gate_ref(GateKind.DISCRIMINATOR), sampler=_random_set,
    )


def cases_circuit(rho: Node, sigma: Node, tau: Node, variant: int = 1) -> Node:
    """sigma where rho is non-empty, tau where it is empty."""
    if variant not in DISC_TEXTS:
        raise CatalogError("discriminator variants are numbered 1 to 6")
    test = substitute(parse(DISC_TEXTS[variant]), {"x": rho})
    return Union(Inter(test, sigma), Inter(Complement(test), tau))


def cases(rho: str = "x", sigma: str = "max(x)", tau: str = "{0}", variant: int = 1) -> CatalogEntry:
    node = cases_circuit(parse(rho), parse(sigma), parse(tau), variant)
    variables = tuple(sorted(free_vars(node)))
    rho_n, sigma_n, tau_n = parse(rho), parse(sigma), parse(tau)

    def ref(inputs: Inputs) -> EpSet:
        env = dict(zip(variables, inputs))
        r = eval_circuit(rho_n, env, 0).value
        branch = sigma_n if isinstance(r, EpSet) and not r.is_empty else tau_n
        value = eval_circuit(branch, env, 0).value
        if not isinstance(value, EpSet) or not isinstance(r, EpSet):
            raise CatalogError("cases reference needs exact branch values")
        return value

    def sample(rng: random.Random) -> Inputs:
        return tuple(random_epset(rng) for _ in variables)

    return _make(
        "cases", {"rho": rho, "sigma": sigma, "tau": tau, "variant": variant}, unparse(node),
        "definition by cases on the emptiness of rho", "definition by cases", variables,
        circuit=node, reference=ref, sampler=sample,
    )


# numerical functions


def _numeric(name: str, f: Callable[[int], int | None], lo: int, hi: int):
    def ref(inputs: Inputs) -> EpSet | None:
        n = _singleton_value(inputs[0])
        if n is None:
            return None
        value = f(n)
        return None if value is None else EpSet.singleton(value)

    def sample(rng: random.Random) -> Inputs:
        return (EpSet.singleton(rng.randint(lo, hi)),)

    return ref, sample


def two_n_minus_1() -> CatalogEntry:
    ref, sample = _numeric("two_n_minus_1", lambda n: 2 * n - 1 if n > 0 else 0, 0, 2000)
    return _make(
        "two_n_minus_1", {}, "min(~(~(x + N) + ~(x + N)))", "n -> 2n - 1 (0 -> 0)",
        "numerical functions", ("x",), reference=ref, sampler=sample,
        required_bound=lambda inputs: 2 * _singleton_value(inputs[0]) + 2,
    )


def mod(l: int = 3) -> CatalogEntry:
    if l <= 1:
        raise CatalogError("modulus must exceed 1")
    parts = [f"((x & ({{{l}}} * N + {{{k}}})) * {{0}}) + {{{k}}}" for k in range(l)]
    text = " | ".join(f"({p})" for p in parts)
    ref, sample = _numeric("mod", lambda n: n % l, 0, 1000)
    return _make(
        "mod", {"l": l}, text, f"n -> n mod {l}", "numerical functions", ("x",),
        reference=ref, sampler=sample,
    )


def coprime() -> CatalogEntry:
    text = "(((x * N + {1}) & (y * N)) | ((y * N + {1}) & (x * N))) * {0}"

    def ref(inputs: Inputs) -> EpSet | None:
        m, n = (_singleton_value(s) for s in inputs)
        if m is None or n is None:
            return None
        return EpSet.singleton(0) if math.gcd(m, n) == 1 else EpSet.empty()

    def sample(rng: random.Random) -> Inputs:
        return (EpSet.singleton(rng.randint(0, 200)), EpSet.singleton(rng.randint(0, 200)))

    return _make(
        "coprime", {}, text, "{0} when the two inputs are coprime, else empty",
        "numerical functions", ("x", "y"), reference=ref, sampler=sample,
    )


def next_prime() -> CatalogEntry:
    text = f"let P = {PRIMES_TEXT} in min((x + N + {{1}}) & P)"
    ref, sample = _numeric("next_prime", nt.next_prime, 0, 10_000)
    return _make(
        "next_prime", {}, text, "least prime above n", "growth of definable functions", ("x",),
        reference=ref, sampler=sample,
        required_bound=lambda inputs: 2 * _singleton_value(inputs[0]) + 4,
    )


def fast_growth_value(n: int, p: int) -> int | None:
    """n when p divides n, otherwise p ** (e + 1) with e the order of p mod n;
    None for n = 0, where the circuit yields two elements."""
    if n == 0:
        return None
    if n % p == 0:
        return n
    return p ** (nt.multiplicative_order(p, n) + 1)


def fast_growth(p: int = 2) -> CatalogEntry:
    _require_prime(p)
    text = (
        f"let Pow = {_pow_text(p)} in "
        f"((N * {{{p}}}) & x) | (min(Pow & ((N \\ {{0}}) * x + {{1}})) * {{{p}}})"
    )

    def ref(inputs: Inputs) -> EpSet | None:
        n = _singleton_value(inputs[0])
        if n is None:
            return None
        value = fast_growth_value(n, p)
        return None if value is None else EpSet.singleton(value)

    def bound(inputs: Inputs) -> int:
        n = _singleton_value(inputs[0])
        value = fast_growth_value(n, p) if n is not None else None
        return max(n or 0, value or 0) + 1

    def sample(rng: random.Random) -> Inputs:
        return (EpSet.singleton(rng.randint(1, 40)),)

    return _make(
        "fast_growth", {"p": p}, text, f"n if {p} divides n, else {p}^(order of {p} mod n + 1)",
        "growth of definable functions", ("x",), reference=ref, sampler=sample,
        required_bound=bound,
    )


def max_from_down() -> CatalogEntry:
    # for finite non-empty s with maximum M: r = {M + 1}; D = [0, M];
    # D minus the down-closure of its members of the other parity is {M}
    core = cases_circuit(
        parse("r & ({2} * N)"),
        parse("D \\ down(D & ({2} * N))"),
        parse("D \\ down(D \\ ({2} * N))"),
        variant=4,
    )
    infinite = parse("(down(x) + N) \\ (down(r) + N)")
    body = Union(core, infinite)
    text = f"let D = down(x) in let r = (x + {{1}}) \\ D in {unparse(body)}"
    return _make(
        "max_from_down", {}, text, "maximum (N for infinite input) from down-closure and parity",
        "gate interdefinability", ("x",),
        reference=_gate_ref(GateKind.MAX), sampler=_sampler_for(lambda s: True),
    )


@dataclass(frozen=True)
class _Equation:
    text: str
    gate: GateKind
    condition: Callable[[EpSet], bool]
    note: str


_GATE_EQUATIONS: dict[str, _Equation] = {
    "fin_from_max": _Equation("{0} \\ max(x | {1})", GateKind.FIN, lambda s: True, "finiteness test from max"),
    "eps_from_fin": _Equation("fin(x + N)", GateKind.EPSILON, lambda s: True, "emptiness test from finiteness"),
    "down_from_max": _Equation(
        "~(max(x) + N + {1})", GateKind.DOWN, lambda s: s.is_finite and not s.is_empty,
        "down-closure from max (finite non-empty input)",
    ),
    "fminus1_from_max": _Equation(
        "max(~(x + N))", GateKind.FMINUS1, lambda s: not s.is_empty and s.min() > 0,
        "predecessor of the minimum from max (non-empty input without 0)",
    ),
    "eps_from_down": _Equation("{0} \\ down(x)", GateKind.EPSILON, lambda s: True, "emptiness test from down-closure"),
    "fin_from_down": _Equation(
        "{0} & down((x + {1}) \\ down(x))", GateKind.FIN, lambda s: not s.is_empty,
        "finiteness test from down-closure (non-empty input)",
    ),
    "max_from_down_fminus1": _Equation(
        "fminus1((x + {1}) \\ down(x))", GateKind.MAX, lambda s: s.is_finite,
        "max from down-closure and predecessor of the minimum (finite input)",
    ),
    "fminus1_from_card": _Equation(
        "card(down(min(x)) \\ {0,1})", GateKind.FMINUS1, lambda s: not s.is_empty and s.min() > 0,
        "predecessor of the minimum from card and down-closure (non-empty input without 0)",
    ),
    "max_from_card": _Equation(
        "card(down(x) \\ {0})", GateKind.MAX, lambda s: not s.is_empty,
        "max from card and down-closure (non-empty input)",
    ),
}


def gate_equation(part: str) -> CatalogEntry:
    try:
        eq = _GATE_EQUATIONS[part]
    except KeyError:
        raise CatalogError(f"unknown equation {part!r}; choose from {sorted(_GATE_EQUATIONS)}") from None
    return _make(
        f"gate_eq.{part}", {}, eq.text, f"{eq.gate.value} gate: {eq.note}", "gate interdefinability",
        ("x",), reference=_gate_ref(eq.gate, eq.condition), sampler=_sampler_for(eq.condition),
    )


def char_from_set(set: str = "primes") -> CatalogEntry:
    base = build(set)
    if base.arity:
        raise CatalogError("the characteristic function needs a variable-free set circuit")
    text = f"let S = {base.text} in (S & x) * {{0}}"

    def ref(inputs: Inputs) -> EpSet | None:
        n = _singleton_value(inputs[0])
        if n is None:
            return None
        return EpSet.singleton(0) if base.member(n) else EpSet.empty()

    def sample(rng: random.Random) -> Inputs:
        return (EpSet.singleton(rng.randint(0, 200)),)

    return _make(
        "char_from_set", {"set": set}, text, f"characteristic function of {base.description}",
        "numerical functions", ("x",), reference=ref, sampler=sample,
        required_bound=lambda inputs: (_singleton_value(inputs[0]) or 0) + 1,
    )


_BUILDERS: dict[str, Callable[..., CatalogEntry]] = {
    "evens": evens,
    "primes": primes,
    "goldbach": goldbach,
    "pow": pow_,
    "res": res,
    "pow_multiples": pow_multiples,
    "fermat": fermat,
    "downset": downset,
    "min": min_,
    "card_gt": card_gt,
    "disc": disc,
    "cases": cases,
    "two_n_minus_1": two_n_minus_1,
    "mod": mod,
    "coprime": coprime,
    "next_prime": next_prime,
    "fast_growth": fast_growth,
    "max_from_down": max_from_down,
    "gate_eq": gate_equation,
    "char_from_set": char_from_set,
}

_LISTING: list[tuple[str, dict]] = (
    [(name, {}) for name in ("evens", "primes", "goldbach", "pow", "res", "pow_multiples", "fermat")]
    + [("downset", {}), ("min", {}), ("card_gt", {})]
    + [(f"disc.{v}", {}) for v in DISC_TEXTS]
    + [("cases", {}), ("two_n_minus_1", {}), ("mod", {}), ("coprime", {}), ("next_prime", {})]
    + [("fast_growth", {}), ("max_from_down", {})]
    + [(f"gate_eq.{part}", {}) for part in _GATE_EQUATIONS]
    + [("char_from_set", {})]
)


def _coerce(value: str | int) -> int | str:
    if isinstance(value, str) and value.lstrip("-").isdigit():
        return int(value)
    return value


def build(id: str, **params) -> CatalogEntry:
    """Build an entry by name; ``disc.3`` and ``gate_eq.max_from_card`` select variants."""
    params = {k: _coerce(v) for k, v in params.items()}
    name, _, variant = id.partition(".")
    if name not in _BUILDERS:
        raise CatalogError(f"unknown catalog entry {id!r}")
    try:
        if name == "disc" and variant:
            return disc(int(variant), **params)
        if name == "gate_eq":
            return gate_equation(variant or params.pop("part"), **params)
        return _BUILDERS[name](**params)
    except TypeError as exc:
        raise CatalogError(f"bad parameters for {id}: {exc}") from None


@dataclass(frozen=True)
class Listing:
    id: str
    arity: int
    source: str
    description: str


def list_catalog() -> list[Listing]:
    out = []
    for name, params in _LISTING:
        entry = build(name, **params)
        out.append(Listing(name, entry.arity, entry.source, entry.description))
    return out


# verification


@dataclass
class VerifyReport:
    id: str
    bound: int
    mismatches: int = 0
    unknowns: int = 0
    tiers: set[str] = field(default_factory=set)
    samples: int = 0
    skipped: int = 0
    over_ceiling: int = 0
    details: list[str] = field(default_factory=list)

    @property
    def tier(self) -> str:
        return "+".join(sorted(self.tiers)) or "none"

    @property
    def ok(self) -> bool:
        return self.mismatches == 0

    def as_dict(self) -> dict:
        return {
            "id": self.id,
            "bound": self.bound,
            "mismatches": self.mismatches,
            "unknowns": self.unknowns,
            "tier": self.tier,
            "samples": self.samples,
            "skipped": self.skipped,
            "over_ceiling": self.over_ceiling,
            "details": self.details[:10],
        }


def _round_bound(b: int) -> int:
    return max(16, 1 << max(b - 1, 1).bit_length())


def _expected_mask(expected: EpSet | Callable[[int], bool] | Sequence[bool], size: int) -> int:
    if isinstance(expected, EpSet):
        return expected.bits(size)
    if isinstance(expected, Sequence):
        return from_array(np.asarray(expected[:size], dtype=bool))
    return from_array(np.fromiter((bool(expected(n)) for n in range(size)), dtype=bool, count=size))


def _compare(report: VerifyReport, label: str, tri, expected) -> None:
    size = tri.bound + 1
    unknown = tri.certain ^ tri.possible
    report.unknowns += unknown.bit_count()
    wrong = (tri.certain ^ _expected_mask(expected, size)) & ~unknown & low_mask(size)
    report.mismatches += wrong.bit_count()
    for n in iter_bits(wrong):
        if len(report.details) >= 10:
            break
        report.details.append(f"{label}: position {n} is {'in' if tri.certain >> n & 1 else 'out'}")


def _compare_tail(report: VerifyReport, label: str, tri, expected: EpSet) -> None:
    above = ep.difference(expected, ep.EpSet.interval(0, tri.bound))
    beyond = ep.complement(EpSet.interval(0, tri.bound))
    if tri.tail is Trit.IN and above != beyond:
        report.mismatches += 1
        report.details.append(f"{label}: tail claimed all-in")
    elif tri.tail is Trit.OUT and not above.is_empty:
        report.mismatches += 1
        report.details.append(f"{label}: tail claimed all-out")


def verify(
    entry: CatalogEntry,
    bound: int = 4096,
    samples: int = 200,
    seed: int = 0,
    inputs: Sequence[Inputs] | None = None,
    ceiling: int = DEFAULT_CEILING,
    cache: EvalCache | None = None,
) -> VerifyReport:
    """Compare every definite answer of the circuit against the entry's reference."""
    if bound < 16:
        raise CatalogError("verification bound must be at least 16")
    cache = cache if cache is not None else EvalCache()
    report = VerifyReport(entry.id, bound)
    if entry.arity == 0:
        result = eval_circuit(entry.circuit, {}, bound, cache=cache)
        report.tiers.add(result.tier)
        expected = entry.member_table(bound) if entry.member_table else entry.member
        _compare(report, entry.id, result.tri(), expected)
        report.samples = 1
        return report

    if inputs is None:
        rng = random.Random(seed)
        inputs = [entry.sampler(rng) for _ in range(samples)]
    for args in inputs:
        b = bound
        if entry.required_bound is not None:
            need = entry.required_bound(args)
            if need > ceiling:
                report.over_ceiling += 1
                report.details.append(f"{_label(args)}: needs bound {need} above ceiling {ceiling}")
                continue
            b = max(bound, _round_bound(need))
        want = entry.reference(args)
        if want is None:
            report.skipped += 1
            continue
        env = dict(zip(entry.variables, args))
        result = eval_circuit(entry.circuit, env, b, cache=cache)
        report.tiers.add(result.tier)
        report.samples += 1
        label = _label(args)
        tri = as_tri(result.value, b)
        _compare(report, label, tri, want)
        _compare_tail(report, label, tri, want)
    return report


def _label(args: Inputs) -> str:
    return "input " + ", ".join(map(str, args))
