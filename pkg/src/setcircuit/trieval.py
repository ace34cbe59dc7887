"""Sound three-valued bounded evaluation of set circuits.

Values in the bounded tier are :class:`TriPrefixSet`: a pair of bitmasks on
``[0, B]`` (``certain`` members and ``possible`` members) and one Kleene trit
for every position above ``B``.  The evaluator keeps a node exact (an
:class:`~setcircuit.epset.EpSet`) whenever its children are exact and the
operation stays inside eventually-periodic sets, and otherwise drops to the
bounded tier.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Mapping, Union as TypingUnion

from . import epset as ep
from ._bitops import low_mask, lowest, product_masks, sum_masks
from .epset import EpSet, GateKind
from .lang import (
    Binary,
    Complement,
    Diff,
    Empty,
    EpLit,
    FiniteConst,
    Gate,
    Inter,
    ModProd,
    Nat,
    Node,
    Prod,
    Single,
    Sum,
    Union,
    Var,
    free_vars,
    inline_lets,
)


class Trit(enum.Enum):
    OUT = "0"
    IN = "1"
    UNKNOWN = "?"

    def __and__(self, other: Trit) -> Trit:
        if self is Trit.OUT or other is Trit.OUT:
            return Trit.OUT
        if self is Trit.IN and other is Trit.IN:
            return Trit.IN
        return Trit.UNKNOWN

    def __or__(self, other: Trit) -> Trit:
        if self is Trit.IN or other is Trit.IN:
            return Trit.IN
        if self is Trit.OUT and other is Trit.OUT:
            return Trit.OUT
        return Trit.UNKNOWN

    def __invert__(self) -> Trit:
        if self is Trit.UNKNOWN:
            return self
        return Trit.OUT if self is Trit.IN else Trit.IN

    @classmethod
    def of(cls, value: bool) -> Trit:
        return cls.IN if value else cls.OUT


class BoundMismatch(ValueError):
    pass


class UnboundVariableError(KeyError):
    def __init__(self, name: str) -> None:
        super().__init__(name)
        self.name = name

    def __str__(self) -> str:
        return f"variable {self.name!r} is not bound"


@dataclass(frozen=True)
class TriPrefixSet:
    """Three-valued approximation of a set on ``[0, bound]`` plus a tail trit."""

    bound: int
    certain: int
    possible: int
    tail: Trit

    def __post_init__(self) -> None:
        m = low_mask(self.bound + 1)
        object.__setattr__(self, "certain", self.certain & m)
        object.__setattr__(self, "possible", self.possible & m)
        if self.certain & ~self.possible:
            raise ValueError("certain members must be possible")

    @classmethod
    def from_trits(cls, trits: str, tail: str) -> TriPrefixSet:
        certain = sum(1 << i for i, c in enumerate(trits) if c == "1")
        possible = sum(1 << i for i, c in enumerate(trits) if c != "0")
        return cls(len(trits) - 1, certain, possible, Trit(tail))

    @classmethod
    def unknown(cls, bound: int) -> TriPrefixSet:
        return cls(bound, 0, low_mask(bound + 1), Trit.UNKNOWN)

    @property
    def mask(self) -> int:
        return low_mask(self.bound + 1)

    def trit(self, n: int) -> Trit:
        if n > self.bound:
            return self.tail
        if self.certain >> n & 1:
            return Trit.IN
        return Trit.UNKNOWN if self.possible >> n & 1 else Trit.OUT

    def trits(self) -> str:
        return "".join(self.trit(n).value for n in range(self.bound + 1))

    @property
    def unknown_count(self) -> int:
        return (self.possible & ~self.certain).bit_count()

    @property
    def certainly_nonempty(self) -> bool:
        return bool(self.certain) or self.tail is Trit.IN

    @property
    def certainly_empty(self) -> bool:
        return not self.possible and self.tail is Trit.OUT

    def __str__(self) -> str:
        return f"tri[{self.trits()};{self.tail.value}]"


Value = TypingUnion[EpSet, TriPrefixSet]


def from_epset(s: EpSet, bound: int) -> TriPrefixSet:
    """Exact trits of ``s`` on ``[0, bound]`` with the best single tail trit."""
    bits = s.bits(bound + 1)
    end = max(s.threshold, bound + 1) + s.period
    above = s.bits(end) >> (bound + 1)
    width = end - bound - 1
    if above == 0:
        tail = Trit.OUT
    elif above == low_mask(width):
        tail = Trit.IN
    else:
        tail = Trit.UNKNOWN
    return TriPrefixSet(bound, bits, bits, tail)


def as_tri(v: Value, bound: int) -> TriPrefixSet:
    return v if isinstance(v, TriPrefixSet) else from_epset(v, bound)


def _same_bound(a: TriPrefixSet, b: TriPrefixSet) -> int:
    if a.bound != b.bound:
        raise BoundMismatch(f"bounds differ: {a.bound} and {b.bound}")
    return a.bound


def complement3(a: TriPrefixSet) -> TriPrefixSet:
    return TriPrefixSet(a.bound, ~a.possible, ~a.certain, ~a.tail)


def boolean3(op: str, a: TriPrefixSet, b: TriPrefixSet | None = None) -> TriPrefixSet:
    if op == "complement":
        return complement3(a)
    if b is None:
        raise TypeError(f"{op} takes two operands")
    bound = _same_bound(a, b)
    if op == "difference":
        b = complement3(b)
        op = "inter"
    if op == "union":
        return TriPrefixSet(bound, a.certain | b.certain, a.possible | b.possible, a.tail | b.tail)
    if op == "inter":
        return TriPrefixSet(bound, a.certain & b.certain, a.possible & b.possible, a.tail & b.tail)
    raise ValueError(f"unknown Boolean operation {op!r}")


def _top_run(bits: int, bound: int) -> int:
    """Length of the run of set bits ending at position ``bound``."""
    gaps = ~bits & low_mask(bound + 1)
    return bound - gaps.bit_length() + 1


def sumset3(a: TriPrefixSet, b: TriPrefixSet) -> TriPrefixSet:
    bound = _same_bound(a, b)
    n = bound + 1
    certain = sum_masks(a.certain, b.certain, n)
    possible = sum_masks(a.possible, b.possible, n)
    if a.certainly_empty or b.certainly_empty:
        return TriPrefixSet(bound, 0, 0, Trit.OUT)
    if (
        a.tail is Trit.OUT
        and b.tail is Trit.OUT
        and a.possible.bit_length() + b.possible.bit_length() - 2 <= bound
    ):
        tail = Trit.OUT
    elif _covers_tail(a, b) or _covers_tail(b, a):
        tail = Trit.IN
    else:
        tail = Trit.UNKNOWN
    return TriPrefixSet(bound, certain, possible, tail)


def _covers_tail(a: TriPrefixSet, b: TriPrefixSet) -> bool:
    # a holds every n > B and the top run of a's certain prefix reaches down
    # far enough that adding some certain member of b covers all n > B
    if a.tail is not Trit.IN or not b.certain:
        return False
    return lowest(b.certain) <= _top_run(a.certain, a.bound)


def _strip_zero(a: TriPrefixSet) -> TriPrefixSet:
    return TriPrefixSet(a.bound, a.certain & ~1, a.possible & ~1, a.tail)


def times3(a: TriPrefixSet, b: TriPrefixSet, mode: str = "full") -> TriPrefixSet:
    """Productset (``mode="full"``) or productset over nonzero factors (``"modified"``)."""
    if mode not in ("full", "modified"):
        raise ValueError(f"unknown product mode {mode!r}")
    bound = _same_bound(a, b)
    n = bound + 1
    a1, b1 = _strip_zero(a), _strip_zero(b)
    certain = product_masks(a1.certain, b1.certain, n)
    possible = product_masks(a1.possible, b1.possible, n)

    if a1.certainly_empty or b1.certainly_empty:
        tail = Trit.OUT
    elif (
        a1.tail is Trit.OUT
        and b1.tail is Trit.OUT
        and (a1.possible.bit_length() - 1) * (b1.possible.bit_length() - 1) <= bound
    ):
        tail = Trit.OUT
    elif (a1.certain & 2 and b1.tail is Trit.IN) or (b1.certain & 2 and a1.tail is Trit.IN):
        tail = Trit.IN
    else:
        tail = Trit.UNKNOWN

    if mode == "full":
        zero = (Trit.of(bool(a.certain & 1)) & _nonempty(b)) | (Trit.of(bool(b.certain & 1)) & _nonempty(a))
        zero_out = (not a.possible & 1 or b.certainly_empty) and (not b.possible & 1 or a.certainly_empty)
        if zero is Trit.IN:
            certain |= 1
            possible |= 1
        elif not zero_out:
            possible |= 1
    return TriPrefixSet(bound, certain, possible, tail)


def _nonempty(a: TriPrefixSet) -> Trit:
    if a.certainly_nonempty:
        return Trit.IN
    return Trit.OUT if a.certainly_empty else Trit.UNKNOWN


# gates


def _empty3(bound: int) -> TriPrefixSet:
    return TriPrefixSet(bound, 0, 0, Trit.OUT)


def _nat3(bound: int) -> TriPrefixSet:
    m = low_mask(bound + 1)
    return TriPrefixSet(bound, m, m, Trit.IN)


def _singleton3(value: int, bound: int) -> TriPrefixSet:
    if value > bound:
        return TriPrefixSet(bound, 0, 0, Trit.UNKNOWN)
    return TriPrefixSet(bound, 1 << value, 1 << value, Trit.OUT)


def _range_unknown(lo: int, hi: int, bound: int) -> TriPrefixSet:
    """A singleton whose value lies somewhere in [lo, hi] (hi may exceed bound)."""
    if lo > hi:
        return _empty3(bound)
    if lo == hi:
        return _singleton3(lo, bound)
    possible = low_mask(min(hi, bound) + 1) & ~low_mask(lo)
    return TriPrefixSet(bound, 0, possible, Trit.UNKNOWN if hi > bound else Trit.OUT)


def _visible_finite(a: TriPrefixSet) -> bool:
    return a.tail is Trit.OUT and a.certain == a.possible


def _bit_indices(x: int) -> list[int]:
    out = []
    while x:
        low = x & -x
        out.append(low.bit_length() - 1)
        x ^= low
    return out


def _min3(a: TriPrefixSet) -> TriPrefixSet:
    bound = a.bound
    if a.certainly_empty:
        return _empty3(bound)
    if a.certain:
        cmin = lowest(a.certain)
        candidates = a.possible & low_mask(cmin + 1)
        if candidates == 1 << cmin:
            return _singleton3(cmin, bound)
        return TriPrefixSet(bound, 0, candidates, Trit.OUT)
    # no certain member on the prefix
    tail = Trit.OUT if a.tail is Trit.OUT else Trit.UNKNOWN
    return TriPrefixSet(bound, 0, a.possible, tail)


def _max3(a: TriPrefixSet) -> TriPrefixSet:
    bound = a.bound
    if a.certainly_empty:
        return _empty3(bound)
    if a.tail is Trit.IN:
        return _nat3(bound)
    if a.tail is Trit.OUT:
        if a.certain == a.possible:
            return _singleton3(a.possible.bit_length() - 1, bound)
        floor = a.certain.bit_length() - 1 if a.certain else 0
        candidates = a.possible & ~low_mask(floor)
        return TriPrefixSet(bound, 0, candidates, Trit.OUT)
    return TriPrefixSet.unknown(bound)


def _card3(a: TriPrefixSet) -> TriPrefixSet:
    bound = a.bound
    if a.tail is Trit.IN:
        return _nat3(bound)
    if a.tail is Trit.OUT:
        return _range_unknown(a.certain.bit_count(), a.possible.bit_count(), bound)
    return TriPrefixSet.unknown(bound)


def _predicate3(verdict: Trit, bound: int) -> TriPrefixSet:
    if verdict is Trit.IN:
        return _singleton3(0, bound)
    if verdict is Trit.OUT:
        return _empty3(bound)
    return TriPrefixSet(bound, 0, 1, Trit.OUT)


def _down3(a: TriPrefixSet) -> TriPrefixSet:
    bound = a.bound
    if a.certainly_empty:
        return _empty3(bound)
    if a.tail is Trit.IN:
        return _nat3(bound)
    certain = low_mask(a.certain.bit_length())
    if a.tail is Trit.OUT:
        return TriPrefixSet(bound, certain, low_mask(a.possible.bit_length()), Trit.OUT)
    return TriPrefixSet(bound, certain, low_mask(bound + 1), Trit.UNKNOWN)


def _below3(a: TriPrefixSet) -> TriPrefixSet:
    bound = a.bound
    if a.certainly_empty:
        return _nat3(bound)
    full = low_mask(bound + 1)
    certain = low_mask(lowest(a.possible) + 1) if a.possible else full
    if a.certain:
        return TriPrefixSet(bound, certain, low_mask(lowest(a.certain) + 1), Trit.OUT)
    return TriPrefixSet(bound, certain, full, Trit.UNKNOWN)


def _shifted_down(bits: int, shift: int, bound: int, tail: Trit, pick: Trit) -> int:
    # bits of {n : n + shift in s} on [0, bound]; positions that land above the
    # prefix read from the tail and are set when the tail trit is ``pick``-compatible
    out = bits >> shift
    if tail is pick or (pick is Trit.UNKNOWN and tail is not Trit.OUT):
        out |= low_mask(bound + 1) & ~low_mask(bound + 1 - shift)
    return out


def _shove3(a: TriPrefixSet) -> TriPrefixSet:
    bound = a.bound
    if a.certainly_empty:
        return _empty3(bound)
    if not a.certain and a.tail is not Trit.OUT:
        return TriPrefixSet.unknown(bound)
    top = lowest(a.certain) if a.certain else bound
    candidates = _bit_indices(a.possible & low_mask(top + 1))
    if not candidates:
        return _empty3(bound)
    certain = low_mask(bound + 1) if a.certainly_nonempty else 0
    possible = 0
    for mu in candidates:
        certain &= _shifted_down(a.certain, mu, bound, a.tail, Trit.IN)
        possible |= _shifted_down(a.possible, mu, bound, a.tail, Trit.UNKNOWN)
    if a.tail is Trit.IN and not a.certainly_nonempty:
        tail = Trit.UNKNOWN
    else:
        tail = a.tail
    return TriPrefixSet(bound, certain, possible | certain, tail)


def _sum3(a: TriPrefixSet) -> TriPrefixSet:
    bound = a.bound
    if a.tail is Trit.IN:
        return _nat3(bound)
    if a.tail is Trit.OUT:
        return _range_unknown(sum(_bit_indices(a.certain)), sum(_bit_indices(a.possible)), bound)
    return TriPrefixSet.unknown(bound)


def _prod3(a: TriPrefixSet) -> TriPrefixSet:
    bound = a.bound
    if a.tail is Trit.IN:
        return _nat3(bound)
    if a.tail is Trit.OUT:
        if a.certain & 1:
            return _singleton3(0, bound)
        if a.certain == a.possible:
            product = 1
            for n in _bit_indices(a.certain):
                product *= n
                if product > bound:
                    return _singleton3(bound + 1, bound)
            return _singleton3(product, bound)
    return TriPrefixSet.unknown(bound)


def _disc3(a: TriPrefixSet) -> TriPrefixSet:
    if a.certainly_empty:
        return _empty3(a.bound)
    if a.certainly_nonempty:
        return _nat3(a.bound)
    return TriPrefixSet.unknown(a.bound)


def _predecessors(a: TriPrefixSet, keep_zero: bool) -> TriPrefixSet:
    """{n : n + 1 in a}, plus 0 when 0 is in a and ``keep_zero`` is set."""
    bound = a.bound
    top = low_mask(bound + 1) & ~low_mask(bound)
    certain = a.certain >> 1
    possible = a.possible >> 1
    if a.tail is Trit.IN:
        certain |= top
    if a.tail is not Trit.OUT:
        possible |= top
    if keep_zero:
        certain |= a.certain & 1
        possible |= a.possible & 1
    return TriPrefixSet(bound, certain, possible, a.tail)


def gate3(g: GateKind, a: TriPrefixSet) -> TriPrefixSet:
    """Sound bounded transfer function for a gate."""
    if g is GateKind.MIN:
        return _min3(a)
    if g is GateKind.MAX:
        return _max3(a)
    if g is GateKind.CARD:
        return _card3(a)
    if g is GateKind.EPSILON:
        return _predicate3(~_nonempty(a), a.bound)
    if g is GateKind.FIN:
        fin = {Trit.OUT: Trit.IN, Trit.IN: Trit.OUT}.get(a.tail, Trit.UNKNOWN)
        return _predicate3(fin, a.bound)
    if g is GateKind.DOWN:
        return _down3(a)
    if g is GateKind.BELOW:
        return _below3(a)
    if g is GateKind.SHOVE:
        return _shove3(a)
    if g is GateKind.SUM:
        return _sum3(a)
    if g is GateKind.PROD:
        return _prod3(a)
    if g is GateKind.DISCRIMINATOR:
        return _disc3(a)
    if g is GateKind.FMINUS1:
        return _predecessors(_min3(a), keep_zero=True)
    if g is GateKind.MAXMINUS1:
        return _predecessors(_max3(a), keep_zero=False)
    raise ValueError(f"unknown gate {g!r}")


# evaluation


@dataclass(frozen=True)
class Evaluation:
    """Result of evaluating a circuit: the root value plus every node's value."""

    root: Node
    bound: int
    values: Mapping[int, Value]

    @property
    def value(self) -> Value:
        return self.values[id(self.root)]

    @property
    def tier(self) -> str:
        return tier_of(self.value)

    def trit(self, n: int) -> Trit:
        v = self.value
        if isinstance(v, EpSet):
            return Trit.of(v.member(n))
        return v.trit(n)

    def tri(self) -> TriPrefixSet:
        return as_tri(self.value, self.bound)


def tier_of(v: Value) -> str:
    return "ep" if isinstance(v, EpSet) else "tri"


class EvalCache:
    """Cache of variable-free sub-circuit values, shared across evaluations.

    Entries hold a reference to their node so that object ids stay unique.
    """

    def __init__(self) -> None:
        self._store: dict[tuple[int, int, bool], tuple[Node, Value]] = {}

    def get(self, node: Node, bound: int, force_tri: bool) -> Value | None:
        hit = self._store.get((id(node), bound, force_tri))
        return hit[1] if hit is not None and hit[0] is node else None

    def put(self, node: Node, bound: int, force_tri: bool, value: Value) -> None:
        self._store[(id(node), bound, force_tri)] = (node, value)


_EP_BINARY = {Union: ep.union, Inter: ep.intersection, Diff: ep.difference, Sum: ep.sumset}
_TRI_BINARY = {
    Union: lambda a, b: boolean3("union", a, b),
    Inter: lambda a, b: boolean3("inter", a, b),
    Diff: lambda a, b: boolean3("difference", a, b),
    Sum: sumset3,
    Prod: lambda a, b: times3(a, b, "full"),
    ModProd: lambda a, b: times3(a, b, "modified"),
}


def _leaf_value(node: Node, env: Mapping[str, EpSet]) -> EpSet:
    if isinstance(node, Var):
        try:
            return env[node.name]
        except KeyError:
            raise UnboundVariableError(node.name) from None
    if isinstance(node, Single):
        return EpSet.singleton(node.value)
    if isinstance(node, FiniteConst):
        return EpSet.finite(node.values)
    if isinstance(node, Empty):
        return EpSet.empty()
    if isinstance(node, Nat):
        return EpSet.naturals()
    if isinstance(node, EpLit):
        return node.value
    raise TypeError(f"not a leaf: {node!r}")


def _apply_ep(node: Node, args: list[EpSet]) -> EpSet | None:
    """Exact value, or None when the operation leaves the exact tier."""
    try:
        if isinstance(node, Complement):
            return ep.complement(args[0])
        if isinstance(node, Gate):
            return ep.gate_lift(node.kind, args[0])
        if isinstance(node, Prod):
            if args[0].is_finite or args[1].is_finite:
                return ep.productset_finite(*args)
            return None
        if isinstance(node, ModProd):
            if args[0].is_finite or args[1].is_finite:
                return ep.modprod(*args)
            return None
        return _EP_BINARY[type(node)](*args)
    except ep.ExactTierLimit:
        return None


def _apply_tri(node: Node, args: list[TriPrefixSet]) -> TriPrefixSet:
    if isinstance(node, Complement):
        return complement3(args[0])
    if isinstance(node, Gate):
        return gate3(node.kind, args[0])
    return _TRI_BINARY[type(node)](*args)


def eval_circuit(
    circuit: Node,
    env: Mapping[str, EpSet],
    bound: int,
    force_tri: bool = False,
    cache: EvalCache | None = None,
) -> Evaluation:
    """Evaluate bottom-up over the DAG, each shared node once.

    With ``force_tri`` every node is computed in the bounded tier.
    """
    if bound < 0:
        raise ValueError("bound must be non-negative")
    root = inline_lets(circuit)
    missing = sorted(free_vars(root) - set(env))
    if missing:
        raise UnboundVariableError(missing[0])

    values: dict[int, Value] = {}
    closed: dict[int, bool] = {}
    stack: list[tuple[Node, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        key = id(node)
        if key in values:
            continue
        if cache is not None and not expanded:
            hit = cache.get(node, bound, force_tri)
            if hit is not None:
                values[key] = hit
                closed[key] = True
                continue
        children = node.children
        if not children:
            v = _leaf_value(node, env)
            values[key] = from_epset(v, bound) if force_tri else v
            closed[key] = not isinstance(node, Var)
            continue
        if not expanded:
            stack.append((node, True))
            stack.extend((c, False) for c in reversed(children) if id(c) not in values)
            continue
        args = [values[id(c)] for c in children]
        result: Value | None = None
        if not force_tri and all(isinstance(a, EpSet) for a in args):
            result = _apply_ep(node, args)
        if result is None:
            result = _apply_tri(node, [as_tri(a, bound) for a in args])
        values[key] = result
        closed[key] = all(closed[id(c)] for c in children)
        if cache is not None and closed[key]:
            cache.put(node, bound, force_tri, result)
    return Evaluation(root, bound, values)


def query(circuit: Node, env: Mapping[str, EpSet], bound: int, n: int) -> Trit:
    if n > bound:
        raise ValueError(f"position {n} lies above the bound {bound}")
    if n < 0:
        return Trit.OUT
    return eval_circuit(circuit, env, bound).trit(n)
