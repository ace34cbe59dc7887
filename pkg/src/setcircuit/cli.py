"""Command-line front end.

Exit codes: 0/1/2 report in/out/unknown (or yes/no/unknown) where a command
answers a question, 64 a parse or usage error, 65 an unbound variable and 70
an internal certificate or consistency failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Sequence

from . import catalog
from .analysis import analyze
from .epset import CertificateError, EpSet
from .lang import ParseError, free_vars, parse, unparse, validate
from .oracle import oracle_eval
from .trieval import EvalCache, Trit, UnboundVariableError, Value, eval_circuit

DEFAULT_BOUND = 1024

EXIT_YES, EXIT_NO, EXIT_UNKNOWN = 0, 1, 2
EXIT_PARSE = 64
EXIT_UNBOUND = 65
EXIT_INTERNAL = 70


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(message)


def _default_bound() -> int:
    raw = os.environ.get("SETCIRCUIT_BOUND")
    if raw is None:
        return DEFAULT_BOUND
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"SETCIRCUIT_BOUND must be an integer, got {raw!r}") from None


def _nonneg(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return value


def _build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--bound", "-B", type=_nonneg, default=None, help="evaluation bound (default 1024)")
    common.add_argument("--format", choices=("text", "json"), default="text")

    env = _Parser(add_help=False)
    env.add_argument(
        "--set", dest="bindings", action="append", default=[], metavar="NAME=EXPR",
        help="bind a variable to an ep literal or a variable-free expression",
    )

    p = _Parser(prog="setcircuit", description="Evaluate and analyse set circuits over the naturals.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("eval", parents=[common, env], help="evaluate a circuit")
    s.add_argument("expr")

    s = sub.add_parser("member", parents=[common, env], help="decide whether n belongs to the circuit's set")
    s.add_argument("n", type=_nonneg)
    s.add_argument("expr")
    s.add_argument("--oracle", action="store_true", help="cross-check against the brute-force oracle")

    s = sub.add_parser("enumerate", parents=[common, env], help="list the first definite members")
    s.add_argument("expr")
    s.add_argument("--limit", type=_nonneg, default=10)

    s = sub.add_parser("nonempty", parents=[common, env], help="search for a witness member")
    s.add_argument("expr")

    s = sub.add_parser("analyze", parents=[common], help="static analysis of a circuit")
    s.add_argument("expr")

    s = sub.add_parser("parse", parents=[common], help="parse and optionally pretty-print")
    s.add_argument("expr")
    s.add_argument("--print", dest="print_", action="store_true", help="print the normalised text")

    s = sub.add_parser("goldbach", parents=[common], help="search for Goldbach counterexamples")
    s.add_argument("--max", dest="max_", type=_nonneg, required=True)

    cat = sub.add_parser("catalog", help="catalog of verified circuits")
    csub = cat.add_subparsers(dest="action", required=True, parser_class=_Parser)
    c = csub.add_parser("list", parents=[common])
    c = csub.add_parser("print", parents=[common])
    c.add_argument("id")
    c.add_argument("--param", action="append", default=[], metavar="KEY=VALUE")
    c = csub.add_parser("verify", parents=[common])
    c.add_argument("id", nargs="?")
    c.add_argument("--all", action="store_true")
    c.add_argument("--param", action="append", default=[], metavar="KEY=VALUE")
    c.add_argument("--samples", type=_nonneg, default=200)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--ceiling", type=_nonneg, default=catalog.DEFAULT_CEILING)
    c.add_argument("--threads", type=_nonneg, default=4)
    return p


# value encoding


def encode_value(value: Value) -> dict:
    if isinstance(value, EpSet):
        return {"tier": "ep", "ep": str(value)}
    return {"tier": "tri", "bound": value.bound, "trits": value.trits(), "tail": value.tail.value}


def _emit(args, payload: dict, text: str) -> None:
    if args.format == "json":
        print(json.dumps(payload, sort_keys=True))
    else:
        print(text)


def _split_pairs(items: Sequence[str], what: str) -> list[tuple[str, str]]:
    out = []
    for item in items:
        name, sep, value = item.partition("=")
        if not sep or not name.strip():
            raise UsageError(f"{what} must look like NAME=VALUE, got {item!r}")
        out.append((name.strip(), value))
    return out


def _bindings(args, bound: int) -> dict[str, EpSet]:
    env: dict[str, EpSet] = {}
    for name, text in _split_pairs(args.bindings, "--set"):
        node = parse(text)
        value = eval_circuit(node, env, bound).value
        if not isinstance(value, EpSet):
            raise UsageError(f"binding for {name} has no exact value within the exact tier")
        env[name] = value
    return env


def _bound(args) -> int:
    return args.bound if args.bound is not None else _default_bound()


# commands


def cmd_eval(args) -> int:
    bound = _bound(args)
    env = _bindings(args, bound)
    result = eval_circuit(parse(args.expr), env, bound)
    _emit(args, {"value": encode_value(result.value)}, str(result.value))
    return 0


def cmd_member(args) -> int:
    bound = max(_bound(args), args.n)
    env = _bindings(args, bound)
    node = parse(args.expr)
    verdict = eval_circuit(node, env, bound).trit(args.n)
    payload: dict = {"n": args.n, "bound": bound, "verdict": _WORD[verdict]}
    if args.oracle:
        universe = 4 * max(args.n + 1, 16)
        second = oracle_eval(node, env, universe, args.n)
        payload["oracle"] = _WORD[second]
        if Trit.UNKNOWN not in (verdict, second) and verdict is not second:
            print(f"evaluator says {_WORD[verdict]}, oracle says {_WORD[second]}", file=sys.stderr)
            _emit(args, payload, _WORD[verdict])
            return EXIT_INTERNAL
    _emit(args, payload, _WORD[verdict])
    return {Trit.IN: EXIT_YES, Trit.OUT: EXIT_NO, Trit.UNKNOWN: EXIT_UNKNOWN}[verdict]


_WORD = {Trit.IN: "in", Trit.OUT: "out", Trit.UNKNOWN: "unknown"}


def cmd_enumerate(args) -> int:
    bound = _bound(args)
    env = _bindings(args, bound)
    value = eval_circuit(parse(args.expr), env, bound).value
    members: list[int] = []
    stopped: int | None = None
    exhausted = False
    if isinstance(value, EpSet):
        # exact sets enumerate past the bound
        if value.is_finite:
            everything = [] if value.is_empty else value.members(value.max())
            members = everything[: args.limit]
            exhausted = len(everything) <= args.limit
        else:
            n = value.min()
            while len(members) < args.limit:
                if value.member(n):
                    members.append(n)
                n += 1
    else:
        for n in range(bound + 1):
            if len(members) >= args.limit:
                break
            t = value.trit(n)
            if t is Trit.UNKNOWN:
                stopped = n
                break
            if t is Trit.IN:
                members.append(n)
        else:
            if len(members) < args.limit and value.tail is Trit.UNKNOWN:
                stopped = bound + 1
            exhausted = len(members) < args.limit and value.tail is Trit.OUT
    payload = {"members": members, "unknown_at": stopped, "exhausted": exhausted}
    text = " ".join(map(str, members))
    if stopped is not None:
        text += ("\n" if text else "") + f"unknown at {stopped}"
    _emit(args, payload, text)
    return 0 if stopped is None else EXIT_UNKNOWN


def cmd_nonempty(args) -> int:
    bound = _bound(args)
    env = _bindings(args, bound)
    value = eval_circuit(parse(args.expr), env, bound).value
    if isinstance(value, EpSet):
        if value.is_empty:
            _emit(args, {"result": "empty", "tier": "ep"}, "empty")
            return EXIT_NO
        _emit(args, {"result": "nonempty", "witness": value.min(), "tier": "ep"}, f"witness {value.min()}")
        return EXIT_YES
    if value.certain:
        w = (value.certain & -value.certain).bit_length() - 1
        _emit(args, {"result": "nonempty", "witness": w, "tier": "tri"}, f"witness {w}")
        return EXIT_YES
    if value.tail is Trit.IN:
        _emit(args, {"result": "nonempty", "witness": None, "tier": "tri"}, f"nonempty, members above {bound}")
        return EXIT_YES
    # a bounded value never proves emptiness
    _emit(args, {"result": "unknown", "tier": "tri"}, "unknown")
    return EXIT_UNKNOWN


def cmd_analyze(args) -> int:
    node = parse(args.expr)
    report = analyze(node)
    payload = report.as_dict()
    payload["diagnostics"] = [
        {"severity": d.severity, "code": d.code, "message": d.message} for d in validate(node, free_vars(node))
    ]
    lines = [f"{k}: {json.dumps(v)}" for k, v in payload.items() if k != "diagnostics"]
    lines += [f"{d['severity']}: {d['message']}" for d in payload["diagnostics"]]
    _emit(args, payload, "\n".join(lines))
    return 0


def cmd_parse(args) -> int:
    node = parse(args.expr)
    text = unparse(node)
    roundtrip = parse(text) == node
    diagnostics = [
        {"severity": d.severity, "code": d.code, "message": d.message} for d in validate(node, free_vars(node))
    ]
    payload = {"text": text, "roundtrip": roundtrip, "free_vars": sorted(free_vars(node)), "diagnostics": diagnostics}
    _emit(args, payload, text if args.print_ else "ok")
    for d in diagnostics:
        print(f"{d['severity']}: {d['message']}", file=sys.stderr)
    return 0 if roundtrip else EXIT_INTERNAL


def cmd_goldbach(args) -> int:
    entry = catalog.build("goldbach")
    tri = eval_circuit(entry.circuit, {}, args.max_).tri()
    found = [n for n in range(args.max_ + 1) if tri.trit(n) is Trit.IN]
    unknown = tri.unknown_count
    payload = {"max": args.max_, "counterexamples": found, "unknowns": unknown}
    if found:
        text = "counterexamples: " + " ".join(map(str, found))
        code = EXIT_NO
    elif unknown:
        text = f"{unknown} positions undecided ≤ {args.max_}"
        code = EXIT_UNKNOWN
    else:
        text = f"no counterexamples ≤ {args.max_}"
        code = EXIT_YES
    _emit(args, payload, text)
    return code


def _params(args) -> dict[str, str]:
    return dict(_split_pairs(args.param, "--param"))


def cmd_catalog(args) -> int:
    if args.action == "list":
        rows = catalog.list_catalog()
        payload = {"entries": [{"id": r.id, "arity": r.arity, "source": r.source, "description": r.description} for r in rows]}
        _emit(args, payload, "\n".join(f"{r.id}\t{r.arity}\t{r.source}" for r in rows))
        return 0
    if args.action == "print":
        entry = catalog.build(args.id, **_params(args))
        payload = {"id": entry.id, "text": entry.text, "variables": list(entry.variables), "description": entry.description}
        _emit(args, payload, entry.text)
        return 0
    if args.all == bool(args.id):
        raise UsageError("give either an entry id or --all")
    bound = args.bound if args.bound is not None else 4096
    if args.all:
        entries = [catalog.build(r.id) for r in catalog.list_catalog()]
    else:
        entries = [catalog.build(args.id, **_params(args))]

    def run(entry: catalog.CatalogEntry) -> catalog.VerifyReport:
        return catalog.verify(entry, bound, samples=args.samples, seed=args.seed, ceiling=args.ceiling, cache=EvalCache())

    with ThreadPoolExecutor(max_workers=max(1, args.threads)) as pool:
        reports = list(pool.map(run, entries))
    dicts = [r.as_dict() for r in reports]
    lines = [
        f"{r.id}: {r.mismatches} mismatches, {r.unknowns} unknown, tier {r.tier}"
        + (f", {r.over_ceiling} inputs above ceiling" if r.over_ceiling else "")
        for r in reports
    ]
    _emit(args, dicts[0] if not args.all else {"reports": dicts}, "\n".join(lines))
    return 0 if all(r.ok for r in reports) else EXIT_NO


_COMMANDS = {
    "eval": cmd_eval,
    "member": cmd_member,
    "enumerate": cmd_enumerate,
    "nonempty": cmd_nonempty,
    "analyze": cmd_analyze,
    "parse": cmd_parse,
    "goldbach": cmd_goldbach,
    "catalog": cmd_catalog,
}


def run(argv: Sequence[str] | None = None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        return _COMMANDS[args.command](args)
    except ParseError as exc:
        print(f"parse error: {exc.message} at position {exc.position}", file=sys.stderr)
        return EXIT_PARSE
    except UnboundVariableError as exc:
        print(f"unbound variable: {exc.args[0]}", file=sys.stderr)
        return EXIT_UNBOUND
    except CertificateError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except (UsageError, catalog.CatalogError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_PARSE


def main() -> None:
    sys.exit(run())
