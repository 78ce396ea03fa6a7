"""Command-line front end: ``slt-wfs run PROGRAM QUERY [options]``.

Exit status: 0 ok, 1 parse error, 2 floundering query, 3 guard tripped,
4 oracle disagreement, 5 any other usage or evaluation error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from typing import Optional

from .dot import write_dot
from .engine import EngineError, FlounderError, Guard, GuardTripped, Options
from .oracle import Model, OracleError
from .parser import ParseError, parse_program, parse_query, render
from .solver import TRUE, FALSE, UNDEFINED, slt
from .terms import Atom, Program, ProgramError, is_instance, is_variant

EXIT_OK, EXIT_PARSE, EXIT_FLOUNDER, EXIT_GUARD, EXIT_DISAGREE, EXIT_ERROR = range(6)

ENGINES = ("slt", "slt-optimized", "oracle")


@dataclass
class RunConfig:
    program: str
    query: str
    engine: str = "slt-optimized"
    opt1: bool = True
    opt2: bool = True
    opt3: bool = True
    guard_depth: int = 32
    guard_nodes: int = 1_000_000
    dump_tree: Optional[str] = None
    stats: Optional[str] = None
    oracle_check: bool = False
    oracle_depth_cap: int = 0


class _Failure(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status


def dedupe_answers(answers) -> list:
    """Variant-free answers in lexicographic order of their text."""
    out = []
    for a in sorted(answers, key=render):
        if not any(is_variant(a, b) for b in out):
            out.append(a)
    return out


def _oracle_verdict(model: Model, query: Atom) -> tuple:
    values = {a: model.truth(a) for a in model.instances(query)}
    true = sorted((a for a, v in values.items() if v == TRUE), key=render)
    if true:
        return TRUE, true
    if all(v == FALSE for v in values.values()):
        return FALSE, []
    return UNDEFINED, []


def _report(value: str, answers) -> list:
    return [value] + [f"A = {render(a)}" for a in answers]


def _load(cfg: RunConfig) -> tuple:
    try:
        with open(cfg.program, encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise _Failure(EXIT_ERROR, f"cannot read {cfg.program}: {e.strerror}")
    try:
        return parse_program(text), parse_query(cfg.query)
    except ParseError as e:
        raise _Failure(EXIT_PARSE, f"parse error: {e}")
    except ProgramError as e:
        raise _Failure(EXIT_PARSE, f"program error: {e}")


def _model(program: Program, query: Atom, cfg: RunConfig) -> Model:
    try:
        return Model(program, cfg.oracle_depth_cap, [query])
    except OracleError as e:
        raise _Failure(EXIT_ERROR, f"oracle unavailable: {e}")


def _execute(cfg: RunConfig, out) -> int:
    if cfg.engine not in ENGINES:
        raise _Failure(EXIT_ERROR, f"unknown engine {cfg.engine!r}")
    program, query = _load(cfg)
    model = None
    if cfg.oracle_check or cfg.engine == "oracle":
        if program.has_builtins():
            raise _Failure(EXIT_ERROR, "the oracle needs a builtin-free program")
        model = _model(program, query, cfg)
    if cfg.engine == "oracle":
        value, answers = _oracle_verdict(model, query)
        print("\n".join(_report(value, answers)), file=out)
        return EXIT_OK

    options = Options(cfg.opt1, cfg.opt2, cfg.opt3)
    guard = Guard(cfg.guard_depth, cfg.guard_nodes)
    try:
        verdict = slt(program, query, cfg.engine, options, guard,
                      keep_trees=cfg.dump_tree is not None)
    except FlounderError as e:
        raise _Failure(EXIT_FLOUNDER, str(e))
    except GuardTripped as e:
        raise _Failure(EXIT_GUARD, str(e))
    except EngineError as e:
        raise _Failure(EXIT_ERROR, str(e))
    answers = dedupe_answers(verdict.answers)
    print("\n".join(_report(verdict.value, answers)), file=out)
    if cfg.dump_tree:
        write_dot(verdict.trees, cfg.dump_tree)
    if cfg.stats:
        with open(cfg.stats, "w", encoding="utf-8") as f:
            json.dump(verdict.stats.as_dict(), f, indent=2, sort_keys=False)
            f.write("\n")
    if model is None:
        return EXIT_OK

    expected, true_instances = _oracle_verdict(model, query)
    problems = []
    if verdict.value != expected:
        problems.append(f"verdict {verdict.value}, oracle {expected}")
    covered = [g for g in model.instances(query) if any(is_instance(g, a) for a in answers)]
    if sorted(map(render, covered)) != sorted(map(render, true_instances)):
        problems.append("answers cover " + ", ".join(sorted(map(render, covered)))
                        + "; oracle true: " + ", ".join(map(render, true_instances)))
    advisory = " (advisory)" if model.approximate else ""
    if not problems:
        print(f"ORACLE AGREE{advisory}", file=out)
        return EXIT_OK
    print(f"ORACLE DISAGREE{advisory} " + "; ".join(problems), file=out)
    return EXIT_OK if model.approximate else EXIT_DISAGREE


def run(cfg: RunConfig, out=None, err=None) -> int:
    """Evaluate one query as configured; prints the report and returns the exit status."""
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        return _execute(cfg, out)
    except _Failure as e:
        print(f"error: {e}", file=err)
        return e.status


class _ArgumentParser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors, which would read as floundering
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _parser() -> argparse.ArgumentParser:
    p = _ArgumentParser(prog="slt-wfs",
                                description="Well-founded query evaluation by SLT-resolution.")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="evaluate a query against a program file")
    r.add_argument("program", help="program file")
    r.add_argument("query", help="a single atom, e.g. 'p(X)'")
    r.add_argument("--engine", choices=ENGINES, default="slt-optimized")
    for k in (1, 2, 3):
        r.add_argument(f"--no-opt{k}", dest=f"opt{k}", action="store_false",
                       help=f"disable optimization {k}")
    r.add_argument("--guard-depth", type=int, default=32, help="maximum term depth")
    r.add_argument("--guard-nodes", type=int, default=1_000_000,
                   help="maximum nodes per generalized tree")
    r.add_argument("--dump-tree", metavar="PATH", help="write the generalized trees as DOT")
    r.add_argument("--stats", metavar="PATH", help="write counters as JSON")
    r.add_argument("--oracle-check", action="store_true",
                   help="compare with the bottom-up well-founded model")
    r.add_argument("--oracle-depth-cap", type=int, default=0,
                   help="term depth for programs with function symbols (comparison is advisory)")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    cfg = RunConfig(args.program, args.query, args.engine, args.opt1, args.opt2, args.opt3,
                    args.guard_depth, args.guard_nodes, args.dump_tree, args.stats,
                    args.oracle_check, args.oracle_depth_cap)
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
