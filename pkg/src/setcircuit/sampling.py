"""Seeded random generators for EP sets and circuits."""

from __future__ import annotations

import random
from typing import Sequence

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
)

MAX_THRESHOLD = 32
MAX_PERIOD = 12


def random_epset(rng: random.Random, max_threshold: int = MAX_THRESHOLD, max_period: int = MAX_PERIOD) -> EpSet:
    """Threshold and period uniform in range, every bit a fair coin."""
    t = rng.randint(0, max_threshold)
    length = rng.randint(1, max_period)
    return EpSet(t, rng.getrandbits(t) if t else 0, length, rng.getrandbits(length))


def random_finite_epset(rng: random.Random, max_element: int = MAX_THRESHOLD, nonempty: bool = False) -> EpSet:
    while True:
        bits = rng.getrandbits(max_element + 1)
        if bits or not nonempty:
            return EpSet(max_element + 1, bits, 1, 0)


def random_finite_or_cofinite(rng: random.Random, max_element: int = MAX_THRESHOLD) -> EpSet:
    s = random_finite_epset(rng, max_element)
    if rng.random() < 0.5:
        return EpSet(s.threshold, ~s.prefix, 1, 1)
    return s


BOOLEAN_OPS: tuple[type, ...] = (Union, Inter, Diff, Complement)
IDENTITY_OPS: tuple[type, ...] = (Union, Inter, Diff, Complement, Sum, ModProd)
ALL_OPS: tuple[type, ...] = (Union, Inter, Diff, Complement, Sum, Prod, ModProd, Gate)


def random_circuit(
    rng: random.Random,
    ops: Sequence[type] = ALL_OPS,
    variables: Sequence[str] = ("x", "y"),
    depth: int = 4,
    max_const: int = 12,
    gates: Sequence[GateKind] = tuple(GateKind),
    ep_literals: bool = False,
) -> Node:
    """A random circuit built from ``ops`` with leaves drawn from ``variables``,
    small constants, ``N`` and ``E``."""

    def leaf() -> Node:
        kinds = ["single", "single", "nat", "empty", "finite"]
        if variables:
            kinds += ["var"] * 4
        if ep_literals:
            kinds.append("ep")
        kind = rng.choice(kinds)
        if kind == "var":
            return Var(rng.choice(list(variables)))
        if kind == "single":
            return Single(rng.randint(0, max_const))
        if kind == "nat":
            return Nat()
        if kind == "empty":
            return Empty()
        if kind == "ep":
            return EpLit(random_epset(rng, 8, 4))
        values = sorted(rng.sample(range(max_const + 1), rng.randint(2, 4)))
        return FiniteConst(tuple(values))

    def go(d: int) -> Node:
        if d == 0 or rng.random() < 0.2:
            return leaf()
        op = rng.choice(list(ops))
        if op is Complement:
            return Complement(go(d - 1))
        if op is Gate:
            return Gate(rng.choice(list(gates)), go(d - 1))
        return op(go(d - 1), go(d - 1))

    return go(depth)
