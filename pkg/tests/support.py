"""Cross-checking helpers used by several test modules."""

from __future__ import annotations

from setcircuit.epset import EpSet
from setcircuit.lang import free_vars, inline_lets, walk
from setcircuit.oracle import MARGIN, truncated_eval
from setcircuit.trieval import Trit, as_tri, eval_circuit


def contradictions(circuit, env, bound: int, every_node: bool = True) -> list[str]:
    """Positions where the bounded evaluator and the oracle give opposite
    definite answers.  Positions above ``bound`` are checked through the
    evaluator's tail trit as far as the oracle's safe range reaches."""
    root = inline_lets(circuit)
    reach = 2 * bound
    universe = MARGIN * reach
    mine = eval_circuit(root, env, bound).values
    theirs = truncated_eval(root, env, universe)
    nodes = list(walk(root)) if every_node else [root]
    out = []
    for node in nodes:
        tri = as_tri(mine[id(node)], bound)
        ref = theirs[id(node)]
        for n in range(min(reach, ref.exact_to) + 1):
            a, b = tri.trit(n), ref.trit(n)
            if Trit.UNKNOWN not in (a, b) and a is not b:
                out.append(f"{node}: position {n} evaluator {a.value} oracle {b.value}")
                break
    return out


def _constant_on(s, lo: int, hi: int) -> bool:
    if lo > hi:
        return True
    span = ((1 << (hi - lo + 1)) - 1) << lo
    got = s.bits(hi + 1) & span
    return got == 0 or got == span


def uniformity_violations(circuit, k: int, l: int, m_max: int = 500) -> list[str]:
    """Inputs {m} for which circuit({m}) is not constant on [k, m-1] or on
    [m+l, 2m-2]."""
    (name,) = free_vars_of(circuit) or ("x",)
    bad = []
    for m in range(1, m_max + 1):
        s = eval_circuit(circuit, {name: EpSet.singleton(m)}, 0).value
        if not _constant_on(s, k, m - 1):
            bad.append(f"m={m}: not constant on [{k}, {m - 1}]")
        if not _constant_on(s, m + l, 2 * m - 2):
            bad.append(f"m={m}: not constant on [{m + l}, {2 * m - 2}]")
    return bad


def linear_violations(circuit, k_lin: int, m_max: int = 500) -> list[str]:
    """Inputs {m} for which circuit({m}) is not constant above k_lin * m."""
    (name,) = free_vars_of(circuit) or ("x",)
    bad = []
    for m in range(1, m_max + 1):
        s = eval_circuit(circuit, {name: EpSet.singleton(m)}, 0).value
        if s.period != 1 or s.threshold > k_lin * m + 1:
            bad.append(f"m={m}: {s} varies above {k_lin * m}")
    return bad


def free_vars_of(circuit) -> tuple[str, ...]:
    return tuple(sorted(free_vars(circuit)))
