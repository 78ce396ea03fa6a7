"""Answer tables, optimization flags and run counters."""

from __future__ import annotations

from dataclasses import dataclass, field

from .parser import render
from .terms import Atom, Clause, TABLED_ANSWER, canonical


class Tables:
    """Tabled positive answers (FIFO, variant-unique) and tabled negative answers."""

    def __init__(self):
        self.answers: list[Atom] = []
        self._index: dict[Atom, int] = {}
        self._clauses: list[Clause] = []
        self.tb_f: set[Atom] = set()

    @property
    def tb_t(self) -> list[Atom]:
        return list(self.answers)

    def add_answer(self, atom: Atom) -> tuple[int, bool]:
        """Insert an answer; returns (table position, whether it was new)."""
        key = canonical(atom)
        pos = self._index.get(key)
        if pos is not None:
            return pos, False
        pos = len(self.answers)
        self._index[key] = pos
        self.answers.append(key)
        self._clauses.append(Clause(key, (), id="tb:" + render(key), origin=TABLED_ANSWER))
        return pos, True

    def answer_clause(self, pos: int) -> Clause:
        return self._clauses[pos]

    def has_answer(self, atom: Atom) -> bool:
        return canonical(atom) in self._index

    def add_false(self, atom: Atom) -> bool:
        if not atom.ground:
            raise ValueError("tabled negative answers must be ground")
        if atom in self.tb_f:
            return False
        self.tb_f.add(atom)
        return True

    def snapshot(self) -> tuple[frozenset, frozenset]:
        return frozenset(self.answers), frozenset(self.tb_f)


@dataclass
class Flags:
    """Completion flags keyed by variant-canonical atoms."""

    comp: set = field(default_factory=set)
    # (atom, clause id) -> contexts in which the clause was completely used;
    # a context is the set of loop cuts made against ancestors of the atom
    comp_used: dict = field(default_factory=dict)
    loop_depend: set = field(default_factory=set)
    # (atom, clause id) -> undefined answers that clause gave the atom
    undefined_used: dict = field(default_factory=dict)

    def reset_tree_scope(self) -> None:
        # comp_used, loop_depend and undefined_used describe one generalized tree
        self.comp_used.clear()
        self.loop_depend.clear()
        self.undefined_used.clear()


COUNTERS = ("slt_calls", "sltp_calls", "generalized_trees_built", "clause_applications",
            "tabled_answer_applications", "subgoal_comparisons", "nodes_created")


@dataclass
class Stats:
    slt_calls: int = 0
    sltp_calls: int = 0
    generalized_trees_built: int = 0
    clause_applications: int = 0
    tabled_answer_applications: int = 0
    subgoal_comparisons: int = 0
    nodes_created: int = 0
    # (canonical subgoal text, clause id) -> applications in one generalized tree,
    # maximised over the trees of the run
    subgoal_clause_applications: dict = field(default_factory=dict)

    def merge_tree_counts(self, counts: dict) -> None:
        best = self.subgoal_clause_applications
        for k, v in counts.items():
            if v > best.get(k, 0):
                best[k] = v

    def as_dict(self) -> dict:
        out = {name: getattr(self, name) for name in COUNTERS}
        for (goal, clause), n in sorted(self.subgoal_clause_applications.items()):
            out[f"applications[{goal} | {clause}]"] = n
        return out
