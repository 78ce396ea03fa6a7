"""Depth-first SLT-tree builder with completion flags.

Control is fixed Prolog order: leftmost subgoal, tabled answers before
program clauses, answers in table (FIFO) order, clauses in textual order.
New answers enter the table as soon as they are derived, so later nodes in
the same generalized tree can use them.
"""

from __future__ import annotations

from typing import Optional

from .engine import (
    FAILURE, Options, SltNode, SltTree, _Builder, failure_dependencies,
    negative_answers,
)
from .parser import render
from .tables import Flags
from .terms import (
    TABLED_ANSWER, Atom, Clause, Literal, Subgoal, Var, apply, canonical, is_builtin, unify_atoms,
    variables,
)


class _PositiveState:
    __slots__ = ("answer_pos", "consumed", "clause_pos", "looping", "answers_only",
                 "skipped", "replay", "pending", "current", "context")

    def __init__(self, looping: set, answers_only: bool, context: frozenset = frozenset()):
        self.answer_pos = 0
        self.consumed: set = set()
        self.clause_pos = 0
        self.looping = looping
        self.answers_only = answers_only
        self.skipped: list = []     # clause ids passed over as completely used
        self.replay: list = []      # (clause id, undefined answer) still to apply
        self.pending: Optional[Clause] = None
        self.current: Optional[str] = None  # clause whose branches are being explored
        self.context = context      # (atom, clause id) pairs of the ancestor list


_DONE = object()


def opt2_completion_gate(key: Atom, flags: Flags, tb_f=()) -> bool:
    """True when only tabled answers may be applied to the subgoal."""
    return key in flags.comp or (key.ground and key in tb_f)


def opt3_select_clause(key: Atom, state: _PositiveState, flags: Flags,
                       clauses: tuple, use_flags: bool = True, forbidden=(),
                       assumed: Optional[list] = None) -> Optional[Clause]:
    """Next clause in textual order that is neither looping nor completed for key.

    A clause completed under loop cuts that would not happen here is still
    skipped, but the cuts it relied on are appended to ``assumed``.  Such a
    skip is not made in an ancestor context listed in ``forbidden``.
    """
    while state.clause_pos < len(clauses):
        c = clauses[state.clause_pos]
        state.clause_pos += 1
        if c.id in state.looping:
            continue
        contexts = flags.comp_used.get((key, c.id)) if use_flags else None
        if contexts:
            missing = [frozenset(cut for cut in ctx if cut[:2] not in state.context)
                       for ctx in contexts]
            if all(missing):
                if (key, c.id, state.context) in forbidden:
                    return c
                if assumed is not None:
                    assumed.append((key, c.id, state.context, missing))
            state.skipped.append(c.id)
            continue
        return c
    return None


def _unifiable(a: Atom, b: Atom) -> bool:
    # both atoms are canonical, so index 1 renames b apart from a
    apart = {v: Var(v.name, 1) for v in variables(b)}
    return unify_atoms(a, apply(apart, b)) is not None


def negation_clauses(program) -> frozenset:
    """Ids of clauses whose derivations can reach a negative literal."""
    preds: set = set()
    changed = True
    while changed:
        changed = False
        for c in program.clauses:
            if c.head.pred in preds:
                continue
            if any(not l.positive or l.atom.pred in preds for l in c.body):
                preds.add(c.head.pred)
                changed = True
    return frozenset(c.id for c in program.clauses
                     if any(not l.positive or l.atom.pred in preds for l in c.body))


class DepthFirstBuilder(_Builder):
    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.new_answers = 0
        self._negation = negation_clauses(self.program)
        # (atom, clause id, ancestor context) skips not to make on assumed loop cuts
        self.forbidden: set = set()
        self.assumed: list = []
        self.proved: set = set()    # atoms found false by Optimization 1
        # node id -> loop cuts below it made against ancestors above it, as
        # (ancestor atom, clause id, cut atom)
        self._outer: dict = {}

    def _on_answer(self, owner: SltNode, atom: Atom) -> None:
        pos, new = self.tables.add_answer(atom)
        if new:
            self.new_answers += 1
        if owner.state is not None and owner.state is not _DONE:
            # a node never re-applies an answer its own sub-derivation produced
            owner.state.consumed.add(pos)

    def _on_undefined(self, owner: SltNode, atom: Atom) -> None:
        st = owner.state
        if isinstance(st, _PositiveState) and st.current is not None:
            found = self.flags.undefined_used.setdefault((owner.key, st.current), [])
            c = canonical(atom)
            if c not in found:
                found.append(c)

    def _loop_cut(self, node: SltNode, cuts: list) -> None:
        if not self.options.opt3:
            return
        pending = list(cuts)
        n = self._up(node)
        while n is not None:
            while pending and pending[0].node == n.id:
                pending.pop(0)
            if not pending:
                return
            # a cut clause that never meets negation only hides answers,
            # and those come back through the table
            self._outer.setdefault(n.id, set()).update(
                (e.key, e.clause, node.key) for e in pending if e.clause in self._negation)
            n = self._up(n)

    def _forced_loop(self, key: Atom) -> bool:
        return self.options.opt3 and key in self.flags.loop_depend

    def _loop_dependent(self, node: SltNode) -> None:
        if self.options.opt3 and node.key is not None:
            self.flags.loop_depend.add(node.key)

    def _proved_false(self, atom: Atom) -> None:
        self.proved.add(atom)
        self.tables.add_false(atom)
        if self.options.opt2:
            self.flags.comp.add(atom)

    def _build_tree(self, atom, al, parent_node):
        tree = self._new_tree(atom, parent_node.id if parent_node else None)
        root = self._new_node(tree, (Subgoal(Literal(atom), al),), None)
        tree.root = root.id
        stack = [root]
        while stack:
            node = stack[-1]
            if node.leaf is not None:
                stack.pop()
                self._backtrack(node)
                continue
            child = self._next_child(node, tree)
            if child is None:
                if not node.children and node.leaf is None:
                    self._mark(node, FAILURE)
                stack.pop()
                self._backtrack(node)
            else:
                stack.append(child)
        return tree

    def _next_child(self, node: SltNode, tree: SltTree) -> Optional[SltNode]:
        if node.state is _DONE:
            return None
        lit = node.goal[0].literal
        if not lit.positive:
            node.state = _DONE
            return self._negative(node, tree)
        if is_builtin(lit.atom):
            node.state = _DONE
            return self._builtin_step(node, tree)
        st = node.state
        if st is None:
            looping = self._looping(node)
            context = frozenset((e.key, e.clause) for e in node.goal[0].al or ()) \
                if self.options.opt3 else frozenset()
            st = node.state = _PositiveState(looping, self._answers_only(node.key), context)
        answers = self.tables.answers
        while st.answer_pos < len(answers):
            pos = st.answer_pos
            st.answer_pos += 1
            if pos in st.consumed:
                continue
            st.consumed.add(pos)
            st.current = None
            ans = self.tables.answer_clause(pos)
            child = self._resolve(node, ans, tree, render(ans.head), True)
            if child is not None:
                return child
        if st.answers_only:
            return None
        clauses = self._candidate_clauses(node)
        while True:
            if st.replay:
                # a completely used clause gave a variant undefined answers;
                # they are not tabled, so apply them here as undefined
                cid, ans = st.replay.pop(0)
                st.current = cid
                fact = Clause(ans, (), cid, TABLED_ANSWER)
                child = self._resolve(node, fact, tree, f"{render(ans)} (undefined)", True, True)
                if child is not None:
                    return child
                continue
            if st.pending is not None:
                c, st.pending = st.pending, None
                st.current = c.id
                child = self._resolve(node, c, tree, c.id, False)
                if child is not None:
                    return child
                continue
            c = self._select(node, st, clauses)
            while c is not None and self._shadowed_fact(c):
                c = self._select(node, st, clauses)
            node.skipped += st.skipped
            for cid in st.skipped:
                st.replay += [(cid, a) for a in self.flags.undefined_used.get((node.key, cid), ())]
            st.skipped.clear()
            if c is None and not st.replay:
                return None
            st.pending = c

    def _select(self, node: SltNode, st: _PositiveState, clauses: tuple) -> Optional[Clause]:
        n = len(self.assumed)
        c = opt3_select_clause(node.key, st, self.flags, clauses, self.options.opt3,
                               self.forbidden, self.assumed)
        for i in range(n, len(self.assumed)):
            self.assumed[i] += (node.id,)
        return c

    def unsafe_skips(self) -> set:
        """(atom, clause id, context) skips whose assumed loop cuts hid undefined answers.

        A cut of a clause that gave no undefined answer anywhere in the
        tree only hid answers, which are tabled.
        """
        used = self.flags.undefined_used
        out = set()
        for key, cid, context, missing, site in self.assumed:
            if all(any(_unifiable(u, cut) for k, c, cut in m for u in used.get((k, c), ()))
                   for m in missing):
                out.add((key, cid, context, site))
        return out

    def relevant_skips(self, unsafe: set, tb_f) -> set:
        """The unsafe skips that can change a result of this tree.

        Hidden undefinedness only makes atoms look failed, which matters for
        atoms about to be tabled false (by Optimization 1 during the build or
        from the finished tree) and for a top tree with only failure leaves.
        Those atoms, and every subgoal their failures rest on, are affected
        by a skip made anywhere below an occurrence of them.
        """
        gt = self.gt
        _, _, depends = failure_dependencies(gt)
        watch = set(negative_answers(gt, tb_f)) | self.proved
        if gt.top.all_failed:
            watch.add(gt.root.key)
        work = list(watch)
        while work:
            for d in depends.get(work.pop(), ()):
                if d not in watch:
                    watch.add(d)
                    work.append(d)
        out = set()
        for skip in unsafe:
            node = gt.nodes[skip[3]]
            while node is not None:
                if node.key in watch:
                    out.add(skip[:3])
                    break
                node = self._up(node)
        return out

    def _backtrack(self, node: SltNode) -> None:
        if node.key is not None and self.options.opt2:
            if not node.loop_dependent and not node.undefined_exit:
                self.flags.comp.add(node.key)
        if node.parent is None or not self.options.opt3:
            return
        parent = self.gt.nodes[node.parent]
        if node.clause is not None and parent.key is not None:
            ctx = frozenset(self._outer.get(parent.id, ()))
            seen = self.flags.comp_used.setdefault((parent.key, node.clause), [])
            if ctx not in seen:
                seen.append(ctx)


def build_optimized(program, query, tables, flags, stats, guard, options: Options):
    return DepthFirstBuilder(program, query, tables, flags, stats, guard, options).build()
