"""Command-line front end: ``eqfree solve | geq | subgroup | oracle | trace``."""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from pathlib import Path
from typing import Sequence

from .eqsys import EquationSystem, ParseError, evaluate, format_assignment, parse_system
from .geq import SchemaError, complexity, from_json, to_dot, to_json, validate
from .oracle import SpaceTooLarge, solve_exhaustive
from .process import Budget, Status, build_solution_tree, layouts, solve
from .words import Alphabet, WordSyntaxError, format_word, parse_word

EXIT = {Status.SAT: 0, Status.UNSAT: 1, Status.UNKNOWN: 2}
ERROR = 3


class CliError(Exception):
    pass


def _emit(args, payload: dict, text: str) -> None:
    if args.format == "json":
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(text)


def _read_system(path: str) -> EquationSystem:
    try:
        return parse_system(Path(path).read_text())
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}") from None
    except ParseError as exc:
        raise CliError(f"{path}:{exc.line}:{exc.column}: {exc.message}") from None


def _budget(args) -> Budget:
    for name in ("max_depth", "max_nodes"):
        if getattr(args, name) <= 0:
            raise CliError(f"--{name.replace('_', '-')} must be positive")
    if args.period is not None and args.period <= 0:
        raise CliError("--period must be positive")
    return Budget(args.max_depth, args.max_nodes, args.period)


def _threads() -> int:
    raw = os.environ.get("EQFREE_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise CliError(f"EQFREE_THREADS must be an integer, got {raw!r}") from None


# --- solve -------------------------------------------------------------------


def cmd_solve(args) -> int:
    system = _read_system(args.input)
    verdict = solve(system, _budget(args), threads=_threads())
    names = system.alphabet
    witness = None
    if verdict.witness is not None:
        if not evaluate(system, verdict.witness):
            raise CliError("internal error: witness failed verification")
        witness = format_assignment(verdict.witness, names)
    payload = {"status": verdict.status.value, "witness": witness, "stats": verdict.stats}
    lines = [f"status: {verdict.status.value}"]
    if witness:
        lines += [f"  {k} = {v}" for k, v in witness.items()]
        lines.append("witness verified")
    lines += [f"{k}: {v}" for k, v in verdict.stats.items()]
    _emit(args, payload, "\n".join(lines))
    if args.report:
        _solve_report(system, args, Path(args.report))
    return EXIT[verdict.status]


def _solve_report(system: EquationSystem, args, out: Path) -> None:
    """One full solution tree as DOT and a figure.

    Among the first layouts of the split with no trivial variable, the
    first tree with a solved leaf is drawn, otherwise the largest one.
    """
    from .eqsys import triangulate
    from .figures import tree_figure

    out.mkdir(parents=True, exist_ok=True)
    tri, _ = triangulate(system)
    budget = Budget(args.max_depth, min(args.max_nodes, 2000), args.period)
    tree = None
    for lay in layouts(tri)[:50]:
        cand = build_solution_tree(lay.ge, budget)
        if cand.solution is not None:
            tree = cand
            break
        if tree is None or cand.n_nodes > tree.n_nodes:
            tree = cand
    if tree is None:
        return
    (out / "tree.dot").write_text(tree.to_dot())
    tree_figure(tree, out / "tree.png")


# --- geq ---------------------------------------------------------------------


def cmd_geq(args) -> int:
    from .transforms import kernel

    try:
        ge = from_json(Path(args.input).read_text())
    except OSError as exc:
        raise CliError(f"cannot read {args.input}: {exc.strerror}") from None
    except (SchemaError, json.JSONDecodeError) as exc:
        raise CliError(f"{args.input}: {exc}") from None
    problems = validate(ge)
    if problems:
        _emit(args, {"valid": False, "violations": problems}, "\n".join(["invalid"] + problems))
        return 1
    if args.dot:
        print(to_dot(ge), end="")
        return 0
    k, trace = kernel(ge)
    payload = {"valid": True, "tau": complexity(ge), "kernel_tau": complexity(k),
               "kernel": to_json(k), "steps": len(trace)}
    text = f"valid\ntau: {complexity(ge)}\nkernel tau: {complexity(k)}\nelimination steps: {len(trace)}\n"
    text += "kernel: " + json.dumps(to_json(k), sort_keys=True)
    _emit(args, payload, text)
    return 0


# --- subgroup ----------------------------------------------------------------


def _gens(text: str, alph: Alphabet):
    try:
        return [parse_word(g, alph) for g in text.split(",") if g.strip()]
    except WordSyntaxError as exc:
        raise CliError(f"bad generator list {text!r}: {exc}") from None


def cmd_subgroup(args) -> int:
    from . import subgraph as sg

    alph = Alphabet(tuple(args.consts), ())
    fmt = lambda w: format_word(w, alph)  # noqa: E731
    h = sg.build(_gens(args.gens, alph)) if args.gens is not None else None
    payload: dict = {"query": args.query}
    if args.query == "member":
        w = _gens(args.word, alph)[0] if args.word else None
        if h is None or w is None:
            raise CliError("member needs --gens and --word")
        ans = sg.membership(h, w)
        payload["answer"] = ans
        text = "yes" if ans else "no"
    elif args.query == "intersect":
        if h is None or args.other is None:
            raise CliError("intersect needs --gens and --other")
        g, gens = sg.intersect(h, sg.build(_gens(args.other, alph)))
        payload["generators"] = [fmt(x) for x in gens]
        text = "generators: " + (", ".join(payload["generators"]) or "(trivial)")
    elif args.query == "centralizer":
        if not args.word:
            raise CliError("centralizer needs --word")
        words = _gens(args.word, alph)
        c = sg.centralizer_of_set(words)
        payload["generators"] = None if c is None else [fmt(x) for x in c]
        text = "whole group" if c is None else "generators: " + (", ".join(payload["generators"]) or "(trivial)")
    elif args.query == "malnormal":
        if h is None:
            raise CliError("malnormal needs --gens")
        try:
            ok, wit = sg.is_malnormal(h, len(alph.constants))
        except ValueError as exc:
            raise CliError(str(exc)) from None
        payload["answer"] = ok
        payload["witness"] = None if wit is None else {"g": fmt(wit[0]), "h": fmt(wit[1]), "ghg^-1": fmt(wit[2])}
        text = "yes" if ok else f"no: g = {fmt(wit[0])}, h = {fmt(wit[1])}, g h g^-1 = {fmt(wit[2])}"
    elif args.query == "conjugate":
        if h is None or args.other is None:
            raise CliError("conjugate needs --gens and --other")
        ok, g = sg.subgroups_conjugate(h, sg.build(_gens(args.other, alph)))
        payload["answer"] = ok
        payload["conjugator"] = None if g is None else fmt(g)
        text = f"yes: g = {fmt(g)} with g H g^-1 = K" if ok else "no"
    else:  # dot
        if h is None:
            raise CliError("dot needs --gens")
        print(h.to_dot(list(alph.constants)), end="")
        return 0
    _emit(args, payload, text)
    return 0


# --- oracle ------------------------------------------------------------------


def cmd_oracle(args) -> int:
    system = _read_system(args.input)
    try:
        sols = solve_exhaustive(system, args.max_length)
    except SpaceTooLarge as exc:
        raise CliError(str(exc)) from None
    shown = [format_assignment(s, system.alphabet) for s in sols[: args.limit]]
    payload = {"count": len(sols), "max_length": args.max_length, "solutions": shown}
    lines = [f"{len(sols)} solutions with values of length <= {args.max_length}"]
    lines += ["  " + ", ".join(f"{k} = {v}" for k, v in s.items()) for s in shown]
    _emit(args, payload, "\n".join(lines))
    return 0 if sols else 1


# --- trace -------------------------------------------------------------------


def cmd_trace(args) -> int:
    from .generators import planted_ge
    from .traces import analyze_trace, follow_witness

    rng = random.Random(args.seed)
    rows = []
    ratios = []
    first = None
    for k in range(args.count):
        ge, sol = planted_ge(rng, max_rho=args.max_rho, periodic=True)
        tr = follow_witness(ge, sol)
        rep = analyze_trace(tr)
        if first is None and rep.paths:
            first = (tr, rep)
        ratios += [p.drop / p.carrier_len for p in rep.paths if p.carrier_len]
        rows.append({
            "index": k,
            "entire_steps": sum(1 for s in tr.steps if s.op == "entire"),
            "ended": tr.ended,
            "paths": len(rep.paths),
            "violations": sum(not p.holds for p in rep.paths),
            "run_kinds": [r.kind for r in rep.runs],
            "psi_constant": all(r.psi_constant for r in rep.runs),
        })
    total_paths = sum(r["paths"] for r in rows)
    viol = sum(r["violations"] for r in rows)
    payload = {"seed": args.seed, "traces": rows, "paths": total_paths, "violations": viol}
    text = "\n".join(
        f"trace {r['index']}: entire={r['entire_steps']} paths={r['paths']} violations={r['violations']} "
        f"runs={r['run_kinds']} psi_constant={r['psi_constant']}" for r in rows
    ) + f"\nreducing paths: {total_paths}, violations: {viol}"
    _emit(args, payload, text)
    if args.report:
        from .figures import drop_figure, trace_figure

        out = Path(args.report)
        out.mkdir(parents=True, exist_ok=True)
        if first:
            trace_figure(first[0], first[1], out / "trace.png")
        drop_figure(ratios, out / "drops.png")
        (out / "trace.json").write_text(json.dumps(payload, indent=2, sort_keys=True))
    return 0 if viol == 0 else 1


# --- entry point -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text")
    p = argparse.ArgumentParser(prog="eqfree", description="Equations over free groups.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", parents=[common], help="decide an equation system")
    s.add_argument("input")
    s.add_argument("--max-depth", type=int, default=60)
    s.add_argument("--max-nodes", type=int, default=20000)
    s.add_argument("--period", type=int, default=None, help="override the periodicity bound")
    s.add_argument("--report", metavar="DIR", help="write tree.dot and tree.png here")
    s.set_defaults(func=cmd_solve)

    g = sub.add_parser("geq", parents=[common], help="validate a generalized equation and compute its kernel")
    g.add_argument("input")
    g.add_argument("--dot", action="store_true", help="print the interval picture instead")
    g.set_defaults(func=cmd_geq)

    q = sub.add_parser("subgroup", parents=[common], help="queries on finitely generated subgroups")
    q.add_argument("query", choices=("member", "intersect", "centralizer", "malnormal", "conjugate", "dot"))
    q.add_argument("--gens", help="comma separated generators of H")
    q.add_argument("--other", help="comma separated generators of K")
    q.add_argument("--word", help="word (or comma separated words for centralizer)")
    q.add_argument("--consts", nargs="+", default=["a", "b"])
    q.set_defaults(func=cmd_subgroup)

    o = sub.add_parser("oracle", parents=[common], help="list all short solutions")
    o.add_argument("input")
    o.add_argument("--max-length", type=int, default=3)
    o.add_argument("--limit", type=int, default=20)
    o.set_defaults(func=cmd_oracle)

    t = sub.add_parser("trace", parents=[common], help="replay planted periodic solutions through entire steps")
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--count", type=int, default=20)
    t.add_argument("--max-rho", type=int, default=8)
    t.add_argument("--report", metavar="DIR", help="write trace.png, drops.png and trace.json here")
    t.set_defaults(func=cmd_trace)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return ERROR if exc.code else 0
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ERROR


if __name__ == "__main__":
    sys.exit(main())
