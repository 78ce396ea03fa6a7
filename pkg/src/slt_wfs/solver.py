"""The answer-table fixpoints around tree construction, and final verdicts."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .engine import (
    FAILURE, UNDEFINED as UNDEFINED_LEAF, FullBuilder, GeneralizedSltTree, Guard, Options, negative_answers,
    positive_answers, root_answers, top_succeeded,
)
from .optimized import DepthFirstBuilder
from .parser import render
from .tables import Flags, Stats, Tables
from .terms import Atom, Program

TRUE, FALSE, UNDEFINED = "true", "false", "undefined"

ENGINES = ("slt", "slt-optimized")


@dataclass
class Verdict:
    value: str
    answers: list
    tables: Tables
    tree: GeneralizedSltTree
    stats: Stats
    trees: list = field(default_factory=list)

    def __post_init__(self):
        if (self.value == TRUE) != bool(self.answers):
            raise ValueError("answers must be present exactly for a true verdict")

    @property
    def tb_t(self) -> list:
        return list(self.tables.answers)

    @property
    def tb_f(self) -> set:
        return set(self.tables.tb_f)


class Evaluation:
    """One query evaluation: tables, flags and counters shared by all trees."""

    def __init__(self, program: Program, query: Atom, engine: str = "slt-optimized",
                 options: Options = Options(), guard: Guard = Guard(),
                 keep_trees: bool = False):
        if engine not in ENGINES:
            raise ValueError(f"unknown engine {engine!r}")
        self.program = program
        self.query = query
        self.engine = engine
        self.options = options
        self.guard = guard
        self.tables = Tables()
        self.flags = Flags()
        self.stats = Stats()
        self.keep_trees = keep_trees
        self.trees: list = []
        self.nested = False     # auxiliary evaluations do not start their own

    def build_generalized_tree(self) -> GeneralizedSltTree:
        if self.engine == "slt-optimized":
            gt = self._build_optimized()
        else:
            self.flags.reset_tree_scope()
            gt = FullBuilder(self.program, self.query, self.tables, self.flags, self.stats,
                             self.guard, self.options).build()
        self.stats.generalized_trees_built += 1
        if self.engine == "slt":
            for a in positive_answers(gt):
                self.tables.add_answer(a)
            if self.options.opt2:
                for node in gt.nodes:
                    if node.key is not None and not node.loop_dependent and not node.undefined_exit:
                        self.flags.comp.add(node.key)
        if self.keep_trees:
            self.trees.append(gt)
        return gt

    def _build_optimized(self) -> GeneralizedSltTree:
        # a skip found unsafe once the tree is complete is forbidden and the
        # tree rebuilt; false answers and completion flags from the discarded
        # tree are dropped, tabled answers are kept since they are sound
        forbidden: set = set()
        while True:
            tb_f, comp = set(self.tables.tb_f), set(self.flags.comp)
            self.flags.reset_tree_scope()
            builder = DepthFirstBuilder(self.program, self.query, self.tables, self.flags,
                                        self.stats, self.guard, self.options)
            builder.forbidden = forbidden
            gt = builder.build()
            unsafe = builder.relevant_skips(builder.unsafe_skips(), tb_f)
            if not unsafe:
                return gt
            forbidden |= unsafe
            self.tables.tb_f = tb_f
            self.flags.comp = comp

    def _finished(self, gt: GeneralizedSltTree) -> bool:
        # a proved ground query has no further answers to find
        return self.query.ground and top_succeeded(gt)

    def sltp(self) -> GeneralizedSltTree:
        while True:
            self.stats.sltp_calls += 1
            before = len(self.tables.answers)
            gt = self.build_generalized_tree()
            if self._finished(gt) or len(self.tables.answers) == before:
                return gt

    def slt(self) -> Verdict:
        while True:
            self.stats.slt_calls += 1
            before = len(self.tables.tb_f)
            gt = self.sltp()
            if self._finished(gt):
                break
            for a in negative_answers(gt, self.tables.tb_f):
                self.tables.add_false(a)
                if self.options.opt2:
                    self.flags.comp.add(a)
            if len(self.tables.tb_f) == before and (self.nested or not self._auxiliary(gt)):
                break
        return self._verdict(gt)

    def _auxiliary(self, gt: GeneralizedSltTree) -> bool:
        """Evaluate ground subgoals of an unresolved tree as queries of their own.

        An inherited ancestor can cut the only path on which a subgoal's
        unfoundedness shows, leaving it undefined for good.  A standalone
        tree for the subgoal has no such ancestors.  Returns True once a
        new tabled answer of either kind is found.
        """
        if not any(leaf.leaf == UNDEFINED_LEAF for leaf in gt.leaves(gt.top)):
            return False
        # start from the subgoals that ended undefined and the negated atoms
        # left undefined; everything below them is fair game
        seen = {self.query}
        work = _ground_keys(gt, seen, undefined_only=True)
        for tree in gt.trees[1:]:
            if not tree.has_success and tree.atom not in seen:
                seen.add(tree.atom)
                work.append(tree.atom)
        while work:
            key = work.pop(0)
            if key in self.tables.tb_f or self.tables.has_answer(key):
                continue
            sub = Evaluation(self.program, key, self.engine, self.options, self.guard)
            sub.tables = self.tables
            sub.stats = self.stats
            sub.nested = True
            n_true, n_false = len(self.tables.answers), len(self.tables.tb_f)
            v = sub.slt()
            if v.value == FALSE:
                self.tables.add_false(key)
            if len(self.tables.answers) > n_true or len(self.tables.tb_f) > n_false:
                return True
            work += _ground_keys(v.tree, seen)
        return False

    def _verdict(self, gt: GeneralizedSltTree) -> Verdict:
        answers = root_answers(gt)
        if answers:
            value = TRUE
        elif all(leaf.leaf == FAILURE for leaf in gt.leaves(gt.top)):
            value = FALSE
        else:
            value = UNDEFINED
        return Verdict(value, answers, self.tables, gt, self.stats, self.trees)


def slt(program: Program, query: Atom, engine: str = "slt-optimized",
        options: Options = Options(), guard: Guard = Guard(),
        keep_trees: bool = False) -> Verdict:
    """Evaluate a single-atom query to true (with answers), false or undefined."""
    return Evaluation(program, query, engine, options, guard, keep_trees).slt()


def sltp(program: Program, query: Atom, tables: Optional[Tables] = None,
         engine: str = "slt-optimized", options: Options = Options(),
         guard: Guard = Guard()) -> tuple:
    """Run the positive-answer fixpoint once; returns (final tree, tables)."""
    ev = Evaluation(program, query, engine, options, guard)
    if tables is not None:
        ev.tables = tables
    gt = ev.sltp()
    return gt, ev.tables


def build_generalized_tree(program: Program, query: Atom, tables: Optional[Tables] = None,
                           engine: str = "slt", options: Options = Options(),
                           guard: Guard = Guard()) -> GeneralizedSltTree:
    ev = Evaluation(program, query, engine, options, guard)
    if tables is not None:
        ev.tables = tables
    return ev.build_generalized_tree()


UNOPTIMIZED = Options(opt1=False, opt2=False, opt3=False)


def describe(verdict: Verdict) -> str:
    lines = [verdict.value]
    lines += [f"A = {render(a)}" for a in verdict.answers]
    return "\n".join(lines)


def _ground_keys(gt: GeneralizedSltTree, seen: set, undefined_only: bool = False) -> list:
    out = []
    for node in gt.nodes:
        k = node.key
        if undefined_only and not node.undefined_exit:
            continue
        if k is not None and k.ground and k not in seen:
            seen.add(k)
            out.append(k)
    return out
