"""Static analyses of circuits: fragments, continuity moduli, uniformity
constants, linear bounds, translation to bounded arithmetic, and the
Card*/min* inequalities."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from . import epset as ep
from .epset import PREDICATE_GATES, EpSet, GateKind
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
    tree_size,
    unparse,
    walk,
)
from .trieval import eval_circuit


class OutsideFragment(ValueError):
    """The circuit uses operators the analysis does not cover."""


# classification


def symbol_count(node: Node) -> int:
    if isinstance(node, FiniteConst):
        # {n1,...,nk} abbreviates k singletons joined by k - 1 unions
        return 2 * len(node.values) - 1
    if isinstance(node, Diff):
        return 2
    return 1


def circuit_size(node: Node) -> int:
    """Total number of symbols, with shared sub-circuits counted at every use."""
    return tree_size(node, symbol_count)


def dag_size(node: Node) -> int:
    return sum(1 for _ in walk(inline_lets(node)))


def fragment(node: Node) -> str:
    nodes = list(walk(inline_lets(node)))
    arithmetic = any(isinstance(n, (Prod, ModProd)) for n in nodes)
    gates = any(isinstance(n, Gate) for n in nodes)
    return ("arithmetic" if arithmetic else "additive") + ("+gates" if gates else "")


def classify(node: Node) -> tuple[str, int]:
    return fragment(node), circuit_size(node)


def predicate_subcircuits(node: Node) -> list[Node]:
    """Outermost predicate gates (emptiness and finiteness tests)."""
    found: list[Node] = []
    seen: set[int] = set()
    stack = [inline_lets(node)]
    while stack:
        n = stack.pop()
        if id(n) in seen:
            continue
        seen.add(id(n))
        if isinstance(n, Gate) and n.kind in PREDICATE_GATES:
            found.append(n)
            continue
        stack.extend(reversed(n.children))
    return found


# continuity moduli

_DISCONTINUOUS_GATES = frozenset(
    {
        GateKind.MAX,
        GateKind.CARD,
        GateKind.EPSILON,
        GateKind.FIN,
        GateKind.DOWN,
        GateKind.SHOVE,
        GateKind.SUM,
        GateKind.PROD,
        GateKind.DISCRIMINATOR,
        GateKind.MAXMINUS1,
    }
)
# gates whose modulus is m -> m + 1, counted as one iterate
_SHIFT_GATES = frozenset({GateKind.FMINUS1})


@dataclass(frozen=True)
class Modulus:
    """``iterations`` is the number of ``m -> m + 1`` steps composed; None when
    the circuit is not uniformly continuous, in which case ``culprits`` names the
    offending nodes."""

    iterations: int | None
    culprits: tuple[str, ...] = ()

    @property
    def continuous(self) -> bool:
        return self.iterations is not None

    @property
    def kind(self) -> str:
        if self.iterations is None:
            return "discontinuous"
        return "identity" if self.iterations == 0 else "iterate"

    def bound(self, m: int) -> int | None:
        """Input prefix length needed to fix the output on [0, m]."""
        return None if self.iterations is None else m + self.iterations


def _constant_value(node: Node) -> EpSet | None:
    if free_vars(node):
        return None
    try:
        v = eval_circuit(node, {}, 0).value
    except ep.CertificateError:
        return None
    return v if isinstance(v, EpSet) else None


def _product_is_continuous(node: Prod) -> bool:
    # 0 lands in a productset exactly when one side holds 0 and the other is
    # non-empty; a constant side that is non-empty and free of 0 makes that
    # test depend only on membership of 0 in the other side
    for side in (node.left, node.right):
        if free_vars(side):
            continue
        value = _constant_value(side)
        if value is not None and not value.is_empty and not value.member(0):
            return True
    return not free_vars(node.left) and not free_vars(node.right)


def modulus(node: Node) -> Modulus:
    root = inline_lets(node)
    culprits: list[str] = []
    depth: dict[int, int] = {}

    for n in walk(root):
        if isinstance(n, Gate) and n.kind in _DISCONTINUOUS_GATES:
            culprits.append(f"{n.kind.value} at {unparse(n)}")
        elif isinstance(n, Prod) and not _product_is_continuous(n):
            culprits.append(f"* at {unparse(n)}")

    def iterations(n: Node) -> int:
        if id(n) not in depth:
            own = 1 if isinstance(n, Gate) and n.kind in _SHIFT_GATES else 0
            depth[id(n)] = own + max((iterations(c) for c in n.children), default=0)
        return depth[id(n)]

    if culprits:
        return Modulus(None, tuple(culprits))
    return Modulus(iterations(root))


# uniformity constants


def _single_variable(root: Node) -> None:
    names = free_vars(root)
    if len(names) > 1:
        raise OutsideFragment(f"expected at most one variable, found {sorted(names)}")


def uniformity_constants(node: Node, allow_down: bool = False) -> tuple[int, int]:
    """Return ``(k, l)`` such that for every m >= 1 the set ``node({m})`` is
    all-in or all-out on [k, m - 1] and on [m + l, 2m - 2]."""
    root = inline_lets(node)
    _single_variable(root)
    memo: dict[int, tuple[int, int]] = {}

    def go(n: Node) -> tuple[int, int]:
        if id(n) in memo:
            return memo[id(n)]
        if isinstance(n, Var):
            out = (0, 1)
        elif isinstance(n, (Empty, Nat)):
            out = (0, 0)
        elif isinstance(n, Single):
            out = (n.value + 1, n.value + 1)
        elif isinstance(n, FiniteConst):
            out = (n.values[-1] + 1, n.values[-1] + 1)
        elif isinstance(n, Gate) and n.kind in PREDICATE_GATES:
            out = (1, 1)
        elif isinstance(n, Gate) and n.kind is GateKind.DOWN and allow_down:
            out = go(n.operand)
        elif isinstance(n, Complement):
            out = go(n.operand)
        elif isinstance(n, (Union, Inter, Diff)):
            (k1, l1), (k2, l2) = go(n.left), go(n.right)
            out = (max(k1, k2), max(l1, l2))
        elif isinstance(n, Sum):
            (k1, l1), (k2, l2) = go(n.left), go(n.right)
            out = (k1 + k2, max(k1 + k2, k1 + l2, l1 + k2))
        else:
            raise OutsideFragment(f"{unparse(n)} is outside the additive fragment")
        memo[id(n)] = out
        return out

    return go(root)


# linear bound

_OUT, _IN, _MIXED = "out", "in", "mixed"


def linear_bound(node: Node) -> int:
    """A constant k such that node({m}) is constant on (k * m, oo) for all m >= 1."""
    root = inline_lets(node)
    _single_variable(root)
    memo: dict[int, tuple[int, int, str]] = {}

    # each node gets (a, b, tail): node({m}) is constant on [a*m + b, oo) and
    # its tail is all-out, all-in, or not known statically
    def go(n: Node) -> tuple[int, int, str]:
        if id(n) in memo:
            return memo[id(n)]
        if isinstance(n, Var):
            out = (1, 1, _OUT)
        elif isinstance(n, Empty):
            out = (0, 0, _OUT)
        elif isinstance(n, Nat):
            out = (0, 0, _IN)
        elif isinstance(n, Single):
            out = (0, n.value + 1, _OUT)
        elif isinstance(n, FiniteConst):
            out = (0, n.values[-1] + 1, _OUT)
        elif isinstance(n, Complement):
            a, b, tail = go(n.operand)
            out = (a, b, {_OUT: _IN, _IN: _OUT}.get(tail, _MIXED))
        elif isinstance(n, (Union, Inter, Diff)):
            a1, b1, t1 = go(n.left)
            a2, b2, t2 = go(n.right)
            if isinstance(n, Diff):
                t2 = {_OUT: _IN, _IN: _OUT}.get(t2, _MIXED)
            if isinstance(n, Union):
                tail = _IN if _IN in (t1, t2) else _OUT if t1 == t2 == _OUT else _MIXED
            else:
                tail = _OUT if _OUT in (t1, t2) else _IN if t1 == t2 == _IN else _MIXED
            out = (max(a1, a2), max(b1, b2), tail)
        elif isinstance(n, Sum):
            a1, b1, t1 = go(n.left)
            a2, b2, t2 = go(n.right)
            if t1 == t2 == _OUT:
                # two finite sets: the largest sum is below (a1+a2)m + b1+b2 - 1
                out = (a1 + a2, b1 + b2 - 1, _OUT)
            else:
                out = (a1 + a2, b1 + b2, _IN if t1 == t2 == _IN else _MIXED)
        else:
            raise OutsideFragment(f"{unparse(n)} is outside the pure additive fragment")
        memo[id(n)] = out
        return out

    slope, offset, _ = go(root)
    return slope + max(offset - 1, 0)


# bounded arithmetic


@dataclass(frozen=True)
class Term:
    pass


@dataclass(frozen=True)
class TVar(Term):
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class TConst(Term):
    value: int

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True)
class TAdd(Term):
    left: Term
    right: Term

    def __str__(self) -> str:
        return f"{self.left} + {self.right}"


@dataclass(frozen=True)
class TMul(Term):
    left: Term
    right: Term

    def __str__(self) -> str:
        return f"{self.left} * {self.right}"


@dataclass(frozen=True)
class Formula:
    pass


@dataclass(frozen=True)
class Eq(Formula):
    left: Term
    right: Term

    def __str__(self) -> str:
        return f"{self.left} = {self.right}"


@dataclass(frozen=True)
class Le(Formula):
    left: Term
    right: Term

    def __str__(self) -> str:
        return f"{self.left} <= {self.right}"


@dataclass(frozen=True)
class Not(Formula):
    body: Formula

    def __str__(self) -> str:
        return f"~({self.body})"


@dataclass(frozen=True)
class And(Formula):
    parts: tuple[Formula, ...]

    def __str__(self) -> str:
        return "(" + " & ".join(map(str, self.parts)) + ")"


@dataclass(frozen=True)
class Or(Formula):
    parts: tuple[Formula, ...]

    def __str__(self) -> str:
        return "(" + " | ".join(map(str, self.parts)) + ")"


@dataclass(frozen=True)
class Exists(Formula):
    var: str
    bound: str
    body: Formula

    def __str__(self) -> str:
        return f"E {self.var} <= {self.bound} . {self.body}"


@dataclass(frozen=True)
class ForAll(Formula):
    var: str
    bound: str
    body: Formula

    def __str__(self) -> str:
        return f"A {self.var} <= {self.bound} . {self.body}"


def to_bounded_formula(node: Node, target: str = "n") -> Formula:
    """Membership formula in ``target`` for a variable-free circuit over
    union, intersection, complement, sumset and nonzero productset."""
    root = inline_lets(node)
    if free_vars(root):
        raise OutsideFragment("bounded translation needs a variable-free circuit")
    counter = itertools.count(1)

    def fresh() -> tuple[str, str]:
        i = next(counter)
        return ("u", "v") if i == 1 else (f"u{i}", f"v{i}")

    def go(n: Node, x: str) -> Formula:
        var = TVar(x)
        if isinstance(n, Single):
            return Eq(var, TConst(n.value))
        if isinstance(n, FiniteConst):
            return Or(tuple(Eq(var, TConst(v)) for v in n.values))
        if isinstance(n, Empty):
            return Not(Eq(var, var))
        if isinstance(n, Nat):
            return Eq(var, var)
        if isinstance(n, Complement):
            return Not(go(n.operand, x))
        if isinstance(n, Union):
            return Or((go(n.left, x), go(n.right, x)))
        if isinstance(n, Inter):
            return And((go(n.left, x), go(n.right, x)))
        if isinstance(n, Diff):
            return And((go(n.left, x), Not(go(n.right, x))))
        if isinstance(n, (Sum, ModProd)):
            u, v = fresh()
            tu, tv = TVar(u), TVar(v)
            parts: tuple[Formula, ...]
            if isinstance(n, Sum):
                parts = (Eq(TAdd(tu, tv), var),)
            else:
                one = TConst(1)
                parts = (Le(one, tu), Le(one, tv), Eq(TMul(tu, tv), var))
            body = And(parts + (go(n.left, u), go(n.right, v)))
            return Exists(u, x, Exists(v, x, body))
        raise OutsideFragment(f"{unparse(n)} cannot be translated")

    return go(root, target)


def formula_free_vars(phi: Formula) -> frozenset[str]:
    if isinstance(phi, (Eq, Le)):
        return _term_vars(phi.left) | _term_vars(phi.right)
    if isinstance(phi, Not):
        return formula_free_vars(phi.body)
    if isinstance(phi, (And, Or)):
        return frozenset().union(*(formula_free_vars(p) for p in phi.parts))
    if isinstance(phi, (Exists, ForAll)):
        return (formula_free_vars(phi.body) - {phi.var}) | {phi.bound}
    raise TypeError(phi)


def _term_vars(t: Term) -> frozenset[str]:
    if isinstance(t, TVar):
        return frozenset({t.name})
    if isinstance(t, (TAdd, TMul)):
        return _term_vars(t.left) | _term_vars(t.right)
    return frozenset()


def _term_value(t: Term, env: Mapping[str, int]) -> int:
    if isinstance(t, TVar):
        return env[t.name]
    if isinstance(t, TConst):
        return t.value
    if isinstance(t, TAdd):
        return _term_value(t.left, env) + _term_value(t.right, env)
    return _term_value(t.left, env) * _term_value(t.right, env)


def _solve_for(var: str, eq: Eq, env: Mapping[str, int]) -> list[int] | None:
    """Candidate values of ``var`` making ``left = right`` true, or None when the
    equation is not of the solvable shape ``x op var = y``."""
    for lhs, rhs in ((eq.left, eq.right), (eq.right, eq.left)):
        if not isinstance(lhs, (TAdd, TMul)) or var in _term_vars(rhs):
            continue
        for known, unknown in ((lhs.left, lhs.right), (lhs.right, lhs.left)):
            if unknown != TVar(var) or var in _term_vars(known):
                continue
            a, c = _term_value(known, env), _term_value(rhs, env)
            if isinstance(lhs, TAdd):
                return [c - a] if c >= a else []
            if a == 0:
                return None if c == 0 else []
            return [c // a] if c % a == 0 else []
    return None


class _FormulaEvaluator:
    def __init__(self) -> None:
        self.free: dict[int, tuple[str, ...]] = {}
        self.memo: dict[tuple[int, tuple[int, ...]], bool] = {}
        self._keep: list[Formula] = []

    def free_of(self, phi: Formula) -> tuple[str, ...]:
        key = id(phi)
        if key not in self.free:
            self.free[key] = tuple(sorted(formula_free_vars(phi)))
            self._keep.append(phi)
        return self.free[key]

    def eval(self, phi: Formula, env: dict[str, int]) -> bool:
        names = self.free_of(phi)
        try:
            key = (id(phi), tuple(env[v] for v in names))
        except KeyError as exc:
            raise ValueError(f"free variable {exc.args[0]!r} is not assigned") from None
        hit = self.memo.get(key)
        if hit is None:
            hit = self._eval(phi, env)
            self.memo[key] = hit
        return hit

    def _eval(self, phi: Formula, env: dict[str, int]) -> bool:
        if isinstance(phi, Eq):
            return _term_value(phi.left, env) == _term_value(phi.right, env)
        if isinstance(phi, Le):
            return _term_value(phi.left, env) <= _term_value(phi.right, env)
        if isinstance(phi, Not):
            return not self.eval(phi.body, env)
        if isinstance(phi, And):
            return all(self.eval(p, env) for p in phi.parts)
        if isinstance(phi, Or):
            return any(self.eval(p, env) for p in phi.parts)
        if isinstance(phi, (Exists, ForAll)):
            return self._quantifier(phi, env)
        raise TypeError(phi)

    def _quantifier(self, phi: Exists | ForAll, env: dict[str, int]) -> bool:
        bound = env[phi.bound]
        body = phi.body
        candidates: list[int] | range = range(bound + 1)
        if isinstance(phi, Exists) and isinstance(body, And):
            # conjuncts without the bound variable decide the whole body at once
            for part in body.parts:
                if phi.var not in self.free_of(part) and not self.eval(part, env):
                    return False
            for part in body.parts:
                if isinstance(part, Eq):
                    solved = _solve_for(phi.var, part, env)
                    if solved is not None:
                        candidates = [c for c in solved if 0 <= c <= bound]
                        break
        want = isinstance(phi, Exists)
        saved = env.get(phi.var)
        try:
            for value in candidates:
                env[phi.var] = value
                if self.eval(body, env) == want:
                    return want
        finally:
            if saved is None:
                env.pop(phi.var, None)
            else:
                env[phi.var] = saved
        return not want


def eval_bounded_formula(phi: Formula, n: int, target: str = "n") -> bool:
    """Truth of ``phi`` with ``target`` set to ``n``."""
    extra = formula_free_vars(phi) - {target}
    if extra:
        raise ValueError(f"free variables remain: {sorted(extra)}")
    return _FormulaEvaluator().eval(phi, {target: n})


class BoundedFormulaChecker:
    """Evaluate one formula at many points, sharing memoized sub-results."""

    def __init__(self, phi: Formula, target: str = "n") -> None:
        extra = formula_free_vars(phi) - {target}
        if extra:
            raise ValueError(f"free variables remain: {sorted(extra)}")
        self.phi = phi
        self.target = target
        self._evaluator = _FormulaEvaluator()

    def __call__(self, n: int) -> bool:
        return self._evaluator.eval(self.phi, {self.target: n})


# Card* and min*


def card_star(s: EpSet) -> int:
    if s.is_finite:
        return s.card()
    if s.is_cofinite:
        return ep.complement(s).card()
    raise ValueError(f"{s} is neither finite nor co-finite")


def min_star(s: EpSet) -> int:
    low = s.min()
    return -1 if low is None else low


@dataclass(frozen=True)
class Inequality:
    name: str
    lhs: int
    rhs: int

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs


@dataclass(frozen=True)
class CardStarReport:
    card_s: int
    card_t: int
    min_s: int
    min_t: int
    checks: tuple[Inequality, ...]
    circuit_check: Inequality | None = None

    @property
    def ok(self) -> bool:
        checks = self.checks + ((self.circuit_check,) if self.circuit_check else ())
        return all(c.holds for c in checks)


def card_star_check(s: EpSet, t: EpSet, circuit: Node | None = None) -> CardStarReport:
    """Check the Card* inequalities for complement, union, intersection and
    sumset on ``s`` and ``t``; with ``circuit`` (one variable, sums and
    predicates only) also check the power bound for ``circuit(s)``."""
    cs, ct = card_star(s), card_star(t)
    ms, mt = min_star(s), min_star(t)
    checks = [
        Inequality("complement", card_star(ep.complement(s)), cs),
        Inequality("complement-reverse", cs, card_star(ep.complement(s))),
        Inequality("union", card_star(ep.union(s, t)), cs + ct),
        Inequality("intersection", card_star(ep.intersection(s, t)), cs + ct),
        Inequality("sumset", card_star(ep.sumset(s, t)), max(cs * ct, cs + mt, ct + ms)),
    ]
    if s.is_finite and t.is_finite:
        checks.append(Inequality("finite-sumset", card_star(ep.sumset(s, t)), cs * ct))
    if s.is_empty or t.is_empty:
        checks.append(Inequality("empty-sumset", card_star(ep.sumset(s, t)), 0))
    if s.is_cofinite and not t.is_empty:
        checks.append(Inequality("cofinite-sumset", card_star(ep.complement(ep.sumset(s, t))), mt + cs))
    circuit_check = None if circuit is None else _min_bound_check(circuit, s)
    return CardStarReport(cs, ct, ms, mt, tuple(checks), circuit_check)


def _min_bound_check(circuit: Node, s: EpSet) -> Inequality:
    root = inline_lets(circuit)
    _single_variable(root)
    for n in walk(root):
        allowed = isinstance(n, (Var, Single, FiniteConst, Empty, Nat, Complement, Union, Inter, Diff, Sum))
        if not allowed and not (isinstance(n, Gate) and n.kind in PREDICATE_GATES):
            raise OutsideFragment(f"{unparse(n)} is not a sum or predicate circuit")
    env = {name: s for name in free_vars(root)}
    values = eval_circuit(root, env, 0).values
    k = max([2] + [min_star(v) for v in values.values()])
    return Inequality("power-bound", card_star(values[id(root)]), (k + card_star(s)) ** circuit_size(root))


def metric_distance(s: EpSet, t: EpSet) -> Fraction:
    """1 / (first disagreement + 1), or 0 for equal sets."""
    if s == t:
        return Fraction(0)
    first = ep.union(ep.difference(s, t), ep.difference(t, s)).min()
    return Fraction(1, first + 1)


# combined report


@dataclass(frozen=True)
class AnalysisReport:
    fragment: str
    size: int
    dag_size: int
    modulus: Modulus
    predicate_subcircuits: tuple[str, ...]
    uniformity: tuple[int, int] | None
    linear_bound: int | None
    free_vars: tuple[str, ...] = field(default=())

    def as_dict(self) -> dict:
        return {
            "fragment": self.fragment,
            "size": self.size,
            "dag_size": self.dag_size,
            "free_vars": list(self.free_vars),
            "modulus": {
                "kind": self.modulus.kind,
                "iterations": self.modulus.iterations,
                "culprits": list(self.modulus.culprits),
            },
            "predicate_subcircuits": list(self.predicate_subcircuits),
            "uniformity": None
            if self.uniformity is None
            else {"k": self.uniformity[0], "l": self.uniformity[1]},
            "linear_bound": self.linear_bound,
        }


def analyze(node: Node) -> AnalysisReport:
    try:
        uniform: tuple[int, int] | None = uniformity_constants(node, allow_down=True)
    except OutsideFragment:
        uniform = None
    try:
        lin: int | None = linear_bound(node)
    except OutsideFragment:
        lin = None
    return AnalysisReport(
        fragment=fragment(node),
        size=circuit_size(node),
        dag_size=dag_size(node),
        modulus=modulus(node),
        predicate_subcircuits=tuple(unparse(p) for p in predicate_subcircuits(node)),
        uniformity=uniform,
        linear_bound=lin,
        free_vars=tuple(sorted(free_vars(node))),
    )
