"""Naive reference semantics for differential testing.

Everything here is written directly from set-builder definitions over a
finite universe ``[0, G]`` with numpy boolean arrays.  It shares no algorithm
with :mod:`setcircuit.epset` or :mod:`setcircuit.trieval`; EpSet values are
read from their raw fields.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .epset import EpSet, GateKind
from .lang import (
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
    inline_lets,
)
from .trieval import Trit, UnboundVariableError

MARGIN = 4


def raw_member(s: EpSet, n: int) -> bool:
    if n < s.threshold:
        return bool((s.prefix >> n) & 1)
    return bool((s.word >> ((n - s.threshold) % s.period)) & 1)


def raw_array(s: EpSet, size: int) -> np.ndarray:
    return np.array([raw_member(s, n) for n in range(size)], dtype=bool)


def raw_is_finite(s: EpSet) -> bool:
    return s.word == 0


def raw_is_empty(s: EpSet) -> bool:
    return s.prefix == 0 and s.word == 0


@dataclass(frozen=True)
class TruncatedSet:
    """Membership on ``[0, G]`` that is trustworthy up to ``exact_to``.

    ``certified`` means the true set is exactly the marked bits.
    ``infinite`` is True, False or None (not known).
    """

    universe: int
    bits: np.ndarray
    exact_to: int
    certified: bool
    infinite: bool | None

    @property
    def known_members(self) -> np.ndarray:
        return np.flatnonzero(self.bits[: self.exact_to + 1])

    @property
    def known_nonempty(self) -> bool:
        return self.known_members.size > 0

    @property
    def known_empty(self) -> bool:
        return self.certified and not self.bits.any()

    def trit(self, n: int) -> Trit:
        if n > self.exact_to:
            return Trit.UNKNOWN
        return Trit.IN if self.bits[n] else Trit.OUT


def _exact(universe: int, members: Iterable[int], infinite: bool = False) -> TruncatedSet:
    bits = np.zeros(universe + 1, dtype=bool)
    members = list(members)
    inside = [m for m in members if m <= universe]
    bits[inside] = True
    certified = not infinite and len(inside) == len(members)
    return TruncatedSet(universe, bits, universe, certified, infinite)


def _naturals(universe: int) -> TruncatedSet:
    return TruncatedSet(universe, np.ones(universe + 1, dtype=bool), universe, False, True)


def _abstain(universe: int) -> TruncatedSet:
    return TruncatedSet(universe, np.zeros(universe + 1, dtype=bool), -1, False, None)


def _from_epset(s: EpSet, universe: int) -> TruncatedSet:
    bits = raw_array(s, universe + 1)
    finite = raw_is_finite(s)
    certified = finite and s.prefix.bit_length() <= universe + 1
    return TruncatedSet(universe, bits, universe, certified, not finite)


def _sum_bits(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    conv = np.convolve(a.astype(np.int64), b.astype(np.int64))[: a.size]
    return conv > 0


def _prod_bits(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    size = a.size
    out = np.zeros(size, dtype=bool)
    for i in np.flatnonzero(a[1:]) + 1:
        for j in np.flatnonzero(b[1:]) + 1:
            if i * j >= size:
                break
            out[i * j] = True
    return out


def _infinite_sum(a: TruncatedSet, b: TruncatedSet) -> bool | None:
    if a.known_empty or b.known_empty:
        return False
    if a.infinite is False and b.infinite is False:
        return False
    if (a.infinite and b.known_nonempty) or (b.infinite and a.known_nonempty):
        return True
    return None


def _binary(node: Node, a: TruncatedSet, b: TruncatedSet) -> TruncatedSet:
    g = a.universe
    h = min(a.exact_to, b.exact_to)
    full = h == g
    if isinstance(node, Union):
        inf = True if (a.infinite or b.infinite) else (False if a.infinite is False and b.infinite is False else None)
        return TruncatedSet(g, a.bits | b.bits, h, a.certified and b.certified, inf)
    if isinstance(node, Inter):
        cert = (a.certified and full) or (b.certified and full)
        inf = False if (a.infinite is False or b.infinite is False) else None
        return TruncatedSet(g, a.bits & b.bits, h, cert, inf)
    if isinstance(node, Diff):
        inf = False if a.infinite is False else None
        return TruncatedSet(g, a.bits & ~b.bits, h, a.certified and full, inf)
    if isinstance(node, Sum):
        bits = _sum_bits(a.bits, b.bits)
        cert = a.certified and b.certified and _max_sum_fits(a, b, g)
        return TruncatedSet(g, bits, h, cert, _infinite_sum(a, b))
    # products
    bits = _prod_bits(a.bits, b.bits)
    nz_a = _strip_zero(a)
    nz_b = _strip_zero(b)
    cert = a.certified and b.certified and _max_prod_fits(a, b, g)
    inf = _infinite_sum(nz_a, nz_b)
    if isinstance(node, ModProd):
        return TruncatedSet(g, bits, h, cert, inf)
    # full product: 0 needs emptiness knowledge about the other side
    if h < 0:
        return _abstain(g)
    zero = _zero_in_product(a, b)
    if zero is None:
        return _abstain(g)
    bits[0] = zero
    return TruncatedSet(g, bits, h, cert, inf)


def _strip_zero(a: TruncatedSet) -> TruncatedSet:
    bits = a.bits.copy()
    bits[0] = False
    return TruncatedSet(a.universe, bits, a.exact_to, a.certified, a.infinite)


def _max_sum_fits(a: TruncatedSet, b: TruncatedSet, g: int) -> bool:
    ia, ib = np.flatnonzero(a.bits), np.flatnonzero(b.bits)
    return ia.size == 0 or ib.size == 0 or ia[-1] + ib[-1] <= g


def _max_prod_fits(a: TruncatedSet, b: TruncatedSet, g: int) -> bool:
    ia, ib = np.flatnonzero(a.bits), np.flatnonzero(b.bits)
    return ia.size == 0 or ib.size == 0 or int(ia[-1]) * int(ib[-1]) <= g


def _emptiness(a: TruncatedSet) -> bool | None:
    """True if non-empty, False if empty, None if unknown."""
    if a.known_nonempty:
        return True
    if a.known_empty:
        return False
    return None


def _zero_in_product(a: TruncatedSet, b: TruncatedSet) -> bool | None:
    parts = []
    for x, y in ((a, b), (b, a)):
        if not x.bits[0]:
            parts.append(False)
            continue
        parts.append(_emptiness(y))
    if True in parts:
        return True
    if all(p is False for p in parts):
        return False
    return None


def _gate(kind: GateKind, a: TruncatedSet) -> TruncatedSet:
    g = a.universe
    members = [int(m) for m in np.flatnonzero(a.bits)]
    known = [int(m) for m in a.known_members]
    nonempty = _emptiness(a)

    if kind in (GateKind.MIN, GateKind.FMINUS1):
        if nonempty is False:
            return _exact(g, [])
        if not known:
            return _abstain(g)
        low = known[0]
        return _exact(g, [low if kind is GateKind.MIN else max(low - 1, 0)])
    if kind is GateKind.BELOW:
        if nonempty is False:
            return _naturals(g)
        if known:
            return _exact(g, range(known[0] + 1))
        if a.exact_to >= 0:
            bits = np.zeros(g + 1, dtype=bool)
            bits[: a.exact_to + 1] = True
            return TruncatedSet(g, bits, a.exact_to, False, None)
        return _abstain(g)
    if kind is GateKind.EPSILON:
        if nonempty is None:
            return _abstain(g)
        return _exact(g, [] if nonempty else [0])
    if kind is GateKind.DISCRIMINATOR:
        if nonempty is None:
            return _abstain(g)
        return _naturals(g) if nonempty else _exact(g, [])
    if kind is GateKind.SHOVE:
        if nonempty is False:
            return _exact(g, [])
        if not known:
            return _abstain(g)
        low = known[0]
        bits = np.zeros(g + 1, dtype=bool)
        bits[: g + 1 - low] = a.bits[low:]
        return TruncatedSet(g, bits, a.exact_to - low, a.certified, a.infinite)

    if a.certified:
        return _exact(g, _finite_gate(kind, members))
    if a.infinite:
        if kind is GateKind.FIN:
            return _exact(g, [])
        return _naturals(g)
    if kind is GateKind.DOWN and known:
        bits = np.zeros(g + 1, dtype=bool)
        bits[: known[-1] + 1] = True
        return TruncatedSet(g, bits, known[-1], False, None)
    return _abstain(g)


def _finite_gate(kind: GateKind, members: list[int]) -> list[int]:
    """Gate applied to an explicitly known finite set."""
    if kind is GateKind.MAX:
        return [max(members)] if members else []
    if kind is GateKind.CARD:
        return [len(members)]
    if kind is GateKind.FIN:
        return [0]
    if kind is GateKind.DOWN:
        return list(range(max(members) + 1)) if members else []
    if kind is GateKind.SUM:
        return [sum(members)]
    if kind is GateKind.PROD:
        product = 1
        for m in members:
            product *= m
        return [product]
    if kind is GateKind.MAXMINUS1:
        return [max(members) - 1] if members and max(members) > 0 else []
    raise ValueError(kind)


def truncated_eval(circuit: Node, env: Mapping[str, EpSet], universe: int) -> dict[int, TruncatedSet]:
    """Truncated value of every node, keyed by node id."""
    root = inline_lets(circuit)
    values: dict[int, TruncatedSet] = {}

    def go(node: Node) -> TruncatedSet:
        key = id(node)
        if key in values:
            return values[key]
        if isinstance(node, Var):
            if node.name not in env:
                raise UnboundVariableError(node.name)
            out = _from_epset(env[node.name], universe)
        elif isinstance(node, Single):
            out = _exact(universe, [node.value])
        elif isinstance(node, FiniteConst):
            out = _exact(universe, node.values)
        elif isinstance(node, Empty):
            out = _exact(universe, [])
        elif isinstance(node, Nat):
            out = _naturals(universe)
        elif isinstance(node, EpLit):
            out = _from_epset(node.value, universe)
        elif isinstance(node, Complement):
            a = go(node.operand)
            inf = True if a.infinite is False else None
            out = TruncatedSet(universe, ~a.bits, a.exact_to, False, inf)
        elif isinstance(node, Gate):
            out = _gate(node.kind, go(node.operand))
        elif isinstance(node, (Union, Inter, Diff, Sum, Prod, ModProd)):
            out = _binary(node, go(node.left), go(node.right))
        else:
            raise TypeError(f"unsupported node {node!r}")
        values[key] = out
        return out

    go(root)
    values[-1] = values[id(root)]
    return values


def oracle_eval(circuit: Node, env: Mapping[str, EpSet], universe: int, n: int) -> Trit:
    """Definite answer for ``n`` when the truncated universe allows one."""
    if n < 0 or n > universe // MARGIN:
        raise ValueError(f"position {n} is outside the safe range [0, {universe // MARGIN}]")
    return truncated_eval(circuit, env, universe)[-1].trit(n)


def oracle_gate(kind: GateKind, s: EpSet | Iterable[int]) -> EpSet:
    """Gate value by direct case analysis on the definition."""
    if not isinstance(s, EpSet):
        members = sorted(set(s))
        if kind is GateKind.MIN:
            return EpSet.finite(members[:1])
        if kind is GateKind.EPSILON:
            return EpSet.finite([] if members else [0])
        if kind is GateKind.BELOW:
            return EpSet.finite(range(members[0] + 1)) if members else EpSet.naturals()
        if kind is GateKind.SHOVE:
            return EpSet.finite(m - members[0] for m in members)
        if kind is GateKind.DISCRIMINATOR:
            return EpSet.naturals() if members else EpSet.empty()
        if kind is GateKind.FMINUS1:
            return EpSet.finite([max(members[0] - 1, 0)] if members else [])
        return EpSet.finite(_finite_gate(kind, members))

    if raw_is_finite(s):
        members = [n for n in range(s.threshold) if raw_member(s, n)]
        return oracle_gate(kind, members)
    # infinite argument: enumerate up to the first member
    low = next(n for n in range(s.threshold + s.period) if raw_member(s, n))
    if kind is GateKind.MIN:
        return EpSet.finite([low])
    if kind is GateKind.FMINUS1:
        return EpSet.finite([max(low - 1, 0)])
    if kind is GateKind.BELOW:
        return EpSet.finite(range(low + 1))
    if kind in (GateKind.EPSILON, GateKind.FIN):
        return EpSet.empty()
    if kind is GateKind.SHOVE:
        return EpSet.from_predicate(
            lambda n: raw_member(s, n + low), max(s.threshold - low, 0), s.period
        )
    return EpSet.naturals()


# references for the exact tier


def reference_union(s: EpSet, t: EpSet, size: int) -> np.ndarray:
    return raw_array(s, size) | raw_array(t, size)


def reference_inter(s: EpSet, t: EpSet, size: int) -> np.ndarray:
    return raw_array(s, size) & raw_array(t, size)


def reference_difference(s: EpSet, t: EpSet, size: int) -> np.ndarray:
    return raw_array(s, size) & ~raw_array(t, size)


def reference_complement(s: EpSet, size: int) -> np.ndarray:
    return ~raw_array(s, size)


def reference_sumset(s: EpSet, t: EpSet, size: int) -> np.ndarray:
    return _sum_bits(raw_array(s, size), raw_array(t, size))


def reference_dilate(s: EpSet, k: int, size: int) -> np.ndarray:
    out = np.zeros(size, dtype=bool)
    for n in range(size):
        if raw_member(s, n) and k * n < size:
            out[k * n] = True
        if k == 0 and raw_member(s, n):
            break
    return out


def reference_product(s: EpSet, t: EpSet, size: int, modified: bool = False) -> np.ndarray:
    out = _prod_bits(raw_array(s, size), raw_array(t, size))
    if not modified:
        out[0] = (raw_member(s, 0) and not raw_is_empty(t)) or (raw_member(t, 0) and not raw_is_empty(s))
    return out
