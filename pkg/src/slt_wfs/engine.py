"""SLT-tree construction over generalized trees.

A generalized tree is a forest: the top tree for the query plus one child
tree per evaluated ground negative subgoal, linked by dotted edges.  Node
ids are global across the forest.

Sub-derivation bookkeeping uses exit markers.  Resolving a positive
subgoal A at node N inserts ``Exit(N, A)`` right after the clause body;
because bindings flow through the goal, the marker's atom is the answer
instance once the body is gone.  When the marker reaches the front of a
goal the sub-derivation for A has ended.  Markers present in a goal when
a negative subgoal is replaced by u* are tainted: their sub-derivations
end undefined rather than successfully.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from typing import Optional

from .parser import render
from .tables import Flags, Stats, Tables
from .terms import (
    AncestorList, Atom, Clause, Compound, Int, Literal, Program, Subgoal,
    USTAR, Var, _sub_atom, canonical, is_builtin, rename, unify_atoms, variables,
)

SUCCESS = "success"
FAILURE = "failure"
UNDEFINED = "undefined"
FLOUNDER = "flounder"


class EngineError(Exception):
    pass


class FlounderError(EngineError):
    def __init__(self, literal: Literal):
        super().__init__(f"floundering query: selected non-ground negative subgoal {render(literal)}")
        self.literal = literal


class GuardTripped(EngineError):
    def __init__(self, detail: str):
        super().__init__(f"bounded-term-size guard tripped: {detail}")


class BuiltinError(EngineError):
    def __init__(self, atom: Atom, why: str = "arguments not sufficiently instantiated"):
        super().__init__(f"builtin instantiation error in {render(atom)}: {why}")


@dataclass(frozen=True)
class Guard:
    max_term_depth: int = 32
    max_nodes: int = 1_000_000


@dataclass(frozen=True)
class Options:
    opt1: bool = True
    opt2: bool = True
    opt3: bool = True


# --- builtins -----------------------------------------------------------------

def _eval(t, atom: Atom) -> int:
    if type(t) is Int:
        return t.value
    if type(t) is Compound and len(t.args) == 2 and t.functor in ("+", "-", "*"):
        x, y = _eval(t.args[0], atom), _eval(t.args[1], atom)
        return x + y if t.functor == "+" else x - y if t.functor == "-" else x * y
    if type(t) is Var:
        raise BuiltinError(atom)
    raise BuiltinError(atom, f"{render(t)} is not an integer expression")


def eval_builtin(atom: Atom) -> Optional[dict]:
    """Evaluate is/2, </2, odd/1, even/1: bindings on success, None on failure."""
    pred, args = atom.pred, atom.args
    if pred == "is" and len(args) == 2:
        value = _eval(args[1], atom)
        left = args[0]
        if type(left) is Var:
            return {left: Int(value)}
        if type(left) is Int:
            return {} if left.value == value else None
        raise BuiltinError(atom, "left side of is must be a variable or integer")
    if pred == "<" and len(args) == 2:
        return {} if _eval(args[0], atom) < _eval(args[1], atom) else None
    if pred in ("odd", "even") and len(args) == 1:
        v = _eval(args[0], atom)
        return {} if (v % 2 == 1) == (pred == "odd") else None
    raise EngineError(f"unknown builtin {pred}/{len(args)}")


# --- forest structure -----------------------------------------------------------

class Exit:
    """End-of-sub-derivation marker for the positive subgoal selected at ``node``."""

    __slots__ = ("node", "atom", "tainted")

    def __init__(self, node: int, atom: Atom, tainted: bool = False):
        self.node = node
        self.atom = atom
        self.tainted = tainted

    def apply(self, b: dict) -> "Exit":
        if self.atom.ground:
            return self
        return Exit(self.node, _sub_atom(self.atom, b), self.tainted)

    def taint(self) -> "Exit":
        return self if self.tainted else Exit(self.node, self.atom, True)

    def __repr__(self):
        return f"Exit(N{self.node}, {render(self.atom)}{', tainted' if self.tainted else ''})"


class SltNode:
    __slots__ = ("id", "tree", "goal", "parent", "label", "clause", "children",
                 "leaf", "loop_node", "loop_dependent", "child_tree", "answers",
                 "undefined_exit", "key", "state", "settled", "same_as", "skipped")

    def __init__(self, id: int, tree: int, goal: tuple, parent: Optional[int],
                 label: Optional[str], clause: Optional[str]):
        self.id = id
        self.tree = tree
        self.goal = goal
        self.parent = parent
        self.label = label          # edge label from the parent
        self.clause = clause        # program clause id used from the parent, if any
        self.children: list[int] = []
        self.leaf: Optional[str] = None
        self.loop_node = False
        self.loop_dependent = False
        self.child_tree: Optional[int] = None
        self.answers: list[Atom] = []   # answer instances of the selected atom
        self.undefined_exit = False     # some sub-derivation ended in u*
        self.key: Optional[Atom] = None  # canonical selected atom (positive user subgoal)
        self.state = None
        self.settled: list[Exit] = []   # markers popped when this node was created
        self.same_as: Optional[int] = None  # earlier node with a variant goal
        self.skipped: list = []         # clause ids passed over as completely used

    @property
    def selected(self) -> Optional[Subgoal]:
        return self.goal[0] if self.goal else None

    @property
    def literals(self) -> tuple:
        return tuple(i.literal for i in self.goal if type(i) is Subgoal)

    def __repr__(self):
        return f"N{self.id}: {render(self.goal) or '[]'}" + (f" [{self.leaf}]" if self.leaf else "")


class SltTree:
    __slots__ = ("id", "root", "atom", "parent_node", "nodes", "leaf_counts")

    def __init__(self, id: int, atom: Atom, parent_node: Optional[int]):
        self.id = id
        self.root: Optional[int] = None
        self.atom = atom
        self.parent_node = parent_node   # node whose negative subgoal spawned this tree
        self.nodes: list[int] = []
        self.leaf_counts = {SUCCESS: 0, FAILURE: 0, UNDEFINED: 0, FLOUNDER: 0}

    @property
    def has_success(self) -> bool:
        return self.leaf_counts[SUCCESS] > 0

    @property
    def all_failed(self) -> bool:
        c = self.leaf_counts
        return c[FAILURE] > 0 and c[SUCCESS] == c[UNDEFINED] == c[FLOUNDER] == 0


class GeneralizedSltTree:
    def __init__(self, query: Atom):
        self.query = query
        self.nodes: list[SltNode] = []
        self.trees: list[SltTree] = []
        self.tree_counts: dict = {}

    @property
    def top(self) -> SltTree:
        return self.trees[0]

    @property
    def root(self) -> SltNode:
        return self.nodes[self.top.root]

    def node(self, i: int) -> SltNode:
        return self.nodes[i]

    def leaves(self, tree: Optional[SltTree] = None):
        ids = tree.nodes if tree is not None else range(len(self.nodes))
        return [self.nodes[i] for i in ids if self.nodes[i].leaf is not None]

    def child_trees(self, node: SltNode) -> list[SltTree]:
        return [] if node.child_tree is None else [self.trees[node.child_tree]]

    def __len__(self):
        return len(self.nodes)


# --- shared builder machinery ---------------------------------------------------

def _clash(a: Atom, b: Atom) -> bool:
    """Cheap check for a top-level argument mismatch, done before renaming."""
    for x, y in zip(a.args, b.args):
        tx, ty = type(x), type(y)
        if tx is Var or ty is Var:
            continue
        if tx is Compound or ty is Compound:
            if tx is not ty or x.functor != y.functor or len(x.args) != len(y.args):
                return True
        elif x != y:
            return True
    return False


def _undefined_rest(goal: tuple) -> tuple:
    """Taint every exit marker and make u* the last subgoal."""
    rest = tuple(i.taint() if type(i) is Exit else i for i in goal)
    if not (rest and type(rest[-1]) is Subgoal and rest[-1].literal is USTAR):
        rest = rest + (Subgoal(USTAR),)
    return rest


def _goal_key(goal: tuple) -> tuple:
    """Goal up to consistent variable renaming; ancestor lists by identity."""
    names: dict = {}
    out = []
    for item in goal:
        if type(item) is Exit:
            out.append((item.node, _rename_vars(item.atom, names), item.tainted))
        elif item.literal is USTAR:
            out.append(USTAR)
        else:
            lit = item.literal
            out.append((lit.positive, _rename_vars(lit.atom, names), id(item.al)))
    return tuple(out)


def _rename_vars(a: Atom, names: dict) -> Atom:
    if a.ground:
        return a
    for v in variables(a):
        if v not in names:
            names[v] = Var("_S", len(names))
    return _sub_atom(a, names)


class _Builder:
    """State shared by both tree builders for one generalized tree."""

    def __init__(self, program: Program, query: Atom, tables: Tables, flags: Flags,
                 stats: Stats, guard: Guard, options: Options):
        self.program = program
        self.tables = tables
        self.flags = flags
        self.stats = stats
        self.guard = guard
        self.options = options
        self.gt = GeneralizedSltTree(query)
        self.counter = itertools.count(1)
        self.counts: dict = {}
        # program facts already present as tabled answers are the same clause
        self._fact_keys = {}
        for c in program.clauses:
            if not c.body:
                self._fact_keys[c.id] = canonical(c.head)

    # node creation

    def _new_tree(self, atom: Atom, parent_node: Optional[int]) -> SltTree:
        tree = SltTree(len(self.gt.trees), atom, parent_node)
        self.gt.trees.append(tree)
        return tree

    def _new_node(self, tree: SltTree, goal: tuple, parent: Optional[SltNode],
                  label: Optional[str] = None, clause: Optional[str] = None) -> SltNode:
        nid = len(self.gt.nodes)
        if nid >= self.guard.max_nodes:
            raise GuardTripped(f"more than {self.guard.max_nodes} nodes in one generalized tree")
        self.stats.nodes_created += 1
        popped = []
        while goal and type(goal[0]) is Exit:
            popped.append(goal[0])
            goal = goal[1:]
        node = SltNode(nid, tree.id, goal, parent.id if parent else None, label, clause)
        self.gt.nodes.append(node)
        tree.nodes.append(nid)
        if parent is not None:
            parent.children.append(nid)
        node.settled = popped
        for ex in popped:
            owner = self.gt.nodes[ex.node]
            if ex.tainted:
                owner.undefined_exit = True
                self._on_undefined(owner, ex.atom)
            else:
                owner.answers.append(ex.atom)
                self._on_answer(owner, ex.atom)
        if not goal:
            self._mark(node, SUCCESS)
        elif goal[0].literal is USTAR:
            self._mark(node, UNDEFINED)
        else:
            lit = goal[0].literal
            if lit.positive and not is_builtin(lit.atom):
                node.key = canonical(lit.atom)
        return node

    def _on_answer(self, owner: SltNode, atom: Atom) -> None:
        pass

    def _on_undefined(self, owner: SltNode, atom: Atom) -> None:
        pass

    def _mark(self, node: SltNode, leaf: str) -> None:
        node.leaf = leaf
        self.gt.trees[node.tree].leaf_counts[leaf] += 1

    def _check_depth(self, goal: tuple) -> None:
        limit = self.guard.max_term_depth
        for item in goal:
            if type(item) is Subgoal and item.literal is not USTAR and item.literal.atom.depth > limit:
                raise GuardTripped(
                    f"term depth {item.literal.atom.depth} exceeds {limit} in {render(item.literal)}")

    # loop detection

    def _looping(self, node: SltNode) -> set:
        """Clause ids used by ancestor variants of the selected subgoal; marks loops."""
        sel = node.goal[0]
        key = node.key
        looping = set()
        e = sel.al
        n = 0
        cuts = []
        while e is not None:
            n += 1
            if e.key == key:
                looping.add(e.clause)
                cuts.append(e)
            e = e.parent
        self.stats.subgoal_comparisons += n
        if looping or self._forced_loop(key):
            self._mark_loop(node)
        if cuts:
            self._loop_cut(node, cuts)
        return looping

    def _loop_cut(self, node: SltNode, cuts: list) -> None:
        pass

    def _up(self, node: SltNode) -> Optional[SltNode]:
        """Parent node, crossing from a child tree root to its negative literal."""
        if node.parent is not None:
            return self.gt.nodes[node.parent]
        owner = self.gt.trees[node.tree].parent_node
        return None if owner is None else self.gt.nodes[owner]

    def _forced_loop(self, key: Atom) -> bool:
        return False

    def _mark_loop(self, node: SltNode) -> None:
        node.loop_node = True
        node.loop_dependent = True
        self._loop_dependent(node)
        e = node.goal[0].al
        while e is not None:
            anc = self.gt.nodes[e.node]
            if not anc.loop_dependent:
                anc.loop_dependent = True
                self._loop_dependent(anc)
            e = e.parent

    def _loop_dependent(self, node: SltNode) -> None:
        pass

    # resolution steps

    def _resolve(self, node: SltNode, clause: Clause, tree: SltTree, label: str,
                 from_table: bool, undefined: bool = False) -> Optional[SltNode]:
        sel = node.goal[0]
        atom = sel.literal.atom
        if _clash(atom, clause.head):
            return None
        renamed = rename(clause, next(self.counter))
        bind = unify_atoms(atom, renamed.head)
        if bind is None:
            return None
        al = AncestorList(node.id, atom, clause.id, sel.al, node.key) if renamed.body else None
        items = [Subgoal(l, al) for l in renamed.body]
        items.append(Exit(node.id, atom))
        goal = tuple(items) + node.goal[1:]
        if bind:
            goal = tuple(i.apply(bind) for i in goal)
        if undefined:
            goal = _undefined_rest(goal)
        self._check_depth(goal)
        if from_table:
            self.stats.tabled_answer_applications += 1
        else:
            self.stats.clause_applications += 1
            k = (render(node.key), clause.id)
            self.counts[k] = self.counts.get(k, 0) + 1
        return self._new_node(tree, goal, node, label, None if from_table else clause.id)

    def _builtin_step(self, node: SltNode, tree: SltTree) -> Optional[SltNode]:
        lit = node.goal[0].literal
        bind = eval_builtin(lit.atom)
        if bind is None:
            self._mark(node, FAILURE)
            return None
        rest = node.goal[1:]
        if bind:
            rest = tuple(i.apply(bind) for i in rest)
        return self._new_node(tree, rest, node, render(lit.atom))

    def _candidate_clauses(self, node: SltNode) -> tuple:
        return self.program.clauses_for(node.goal[0].literal.atom.pred)

    def _shadowed_fact(self, clause: Clause) -> bool:
        k = self._fact_keys.get(clause.id)
        return k is not None and self.tables.has_answer(k)

    def _answers_only(self, key: Atom) -> bool:
        if not self.options.opt2:
            return False
        return key in self.flags.comp or (key.ground and key in self.tables.tb_f)

    # negation

    def _negative(self, node: SltNode, tree: SltTree) -> Optional[SltNode]:
        sel = node.goal[0]
        lit = sel.literal
        atom = lit.atom
        if not atom.ground:
            self._mark(node, FLOUNDER)
            raise FlounderError(lit)
        label = render(lit)
        if is_builtin(atom):
            if eval_builtin(atom) is not None:
                self._mark(node, FAILURE)
                return None
            return self._new_node(tree, node.goal[1:], node, label)
        if atom in self.tables.tb_f:
            return self._new_node(tree, node.goal[1:], node, label)
        child = self._build_tree(atom, sel.al, node)
        node.child_tree = child.id
        if child.has_success:
            self._mark(node, FAILURE)
            return None
        if self.options.opt1 and opt1_negation_check(child, self.gt):
            self._proved_false(atom)
            return self._new_node(tree, node.goal[1:], node, label)
        return self._new_node(tree, _undefined_rest(node.goal[1:]), node, label)

    def _proved_false(self, atom: Atom) -> None:
        self.tables.add_false(atom)

    def _build_tree(self, atom: Atom, al: Optional[AncestorList],
                    parent_node: Optional[SltNode]) -> SltTree:
        raise NotImplementedError

    def build(self) -> GeneralizedSltTree:
        self._build_tree(self.gt.query, None, None)
        self.stats.merge_tree_counts(self.counts)
        self.gt.tree_counts = dict(self.counts)
        return self.gt


class FullBuilder(_Builder):
    """Every child of a node is generated at once; nodes numbered breadth-first.

    Tabled answers are those present when the tree is started.
    """

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self._seen: dict = {}

    def _build_tree(self, atom, al, parent_node):
        tree = self._new_tree(atom, parent_node.id if parent_node else None)
        root = self._new_node(tree, (Subgoal(Literal(atom), al),), None)
        tree.root = root.id
        if parent_node is not None:
            root.label = None
        queue = deque([root])
        while queue:
            node = queue.popleft()
            if node.leaf is not None or self._shared(node):
                continue
            for child in self._expand(node, tree):
                queue.append(child)
        return tree

    def _shared(self, node: SltNode) -> bool:
        # A goal that is a variant of an earlier one, with the same ancestor
        # lists and exit owners, has an isomorphic subtree.  It is not
        # expanded again; the earlier node stands in for it.
        if node.parent is None:
            return False
        k = (node.tree, len(self.tables.tb_f), _goal_key(node.goal))
        first = self._seen.setdefault(k, node.id)
        if first == node.id:
            return False
        node.same_as = first
        return True

    def build(self) -> GeneralizedSltTree:
        gt = super().build()
        for node in gt.nodes:
            if node.same_as is not None:
                first = gt.nodes[node.same_as]
                node.loop_dependent = first.loop_dependent
                node.undefined_exit = first.undefined_exit
                node.answers = list(first.answers)
        return gt

    def _expand(self, node: SltNode, tree: SltTree) -> list:
        lit = node.goal[0].literal
        if not lit.positive:
            child = self._negative(node, tree)
            return [child] if child is not None else []
        if is_builtin(lit.atom):
            child = self._builtin_step(node, tree)
            return [child] if child is not None else []
        looping = self._looping(node)
        children = []
        n_answers = len(self.tables.answers)
        for pos in range(n_answers):
            ans = self.tables.answer_clause(pos)
            child = self._resolve(node, ans, tree, render(ans.head), True)
            if child is not None:
                children.append(child)
        if not self._answers_only(node.key):
            for c in self._candidate_clauses(node):
                if c.id in looping or self._shadowed_fact(c):
                    continue
                child = self._resolve(node, c, tree, c.id, False)
                if child is not None:
                    children.append(child)
        if not children:
            self._mark(node, FAILURE)
        return children


# --- analyses over a finished generalized tree -----------------------------------

def looping_clauses(atom: Atom, al: Optional[AncestorList]) -> set:
    """Clause ids used at ancestor entries whose atom is a variant of atom."""
    key = canonical(atom)
    return {e.clause for e in (al or ()) if e.key == key}


def loop_independent(node: SltNode, gt: Optional[GeneralizedSltTree] = None) -> bool:
    return not node.loop_dependent


def opt1_negation_check(child_tree: SltTree, gt: GeneralizedSltTree) -> bool:
    """True when the negated atom may be taken as false immediately."""
    root = gt.nodes[child_tree.root]
    return child_tree.all_failed and not root.loop_dependent


def positive_answers(gt: GeneralizedSltTree) -> list:
    """Canonical answer instances of all selected positive subgoals, first-found order."""
    seen = {}
    for node in gt.nodes:
        for a in node.answers:
            seen.setdefault(canonical(a), None)
    return list(seen)


def root_answers(gt: GeneralizedSltTree) -> list:
    seen = {}
    for a in gt.root.answers:
        seen.setdefault(canonical(a), None)
    return sorted(seen, key=render)


def negative_answers(gt: GeneralizedSltTree, tb_f) -> set:
    """Ground tree-root atoms all of whose sub-derivations fail, closed over S.

    A subgoal key qualifies when no occurrence has a sub-derivation that
    succeeds or ends in u*.  Keys whose failure leaves select a subgoal
    that does not qualify are then removed until nothing changes.
    """
    occurrences, bad, depends = failure_dependencies(gt)
    good = {k for k in occurrences if k not in bad}
    good |= {a for a in tb_f}
    changed = True
    while changed:
        changed = False
        for k in list(good):
            if any(d not in good for d in depends.get(k, ())):
                good.discard(k)
                changed = True
    roots = {gt.nodes[t.root].key for t in gt.trees}
    return {k for k in good if k is not None and k in roots and k.ground and k not in tb_f}


def failure_dependencies(gt: GeneralizedSltTree) -> tuple:
    """(occurrences, keys with answers or undefined ends, key -> failure leaf keys)."""
    occurrences: dict = {}
    bad = set()
    for node in gt.nodes:
        if node.key is None:
            continue
        occurrences.setdefault(node.key, []).append(node.id)
        if node.answers or node.undefined_exit:
            bad.add(node.key)
    depends: dict = {}
    # (owner key, clause id) -> (leaf key, loop-cut ancestors) of failure
    # leaves below that branch of the owner
    by_clause: dict = {}
    for node in gt.nodes:
        if node.leaf != FAILURE or node.key is None:
            continue
        cut_at = tuple(e.node for e in (node.goal[0].al or ()) if e.key == node.key)
        for item in node.goal:
            if type(item) is Exit and not _covered(gt, cut_at, item.node):
                owner = gt.nodes[item.node].key
                depends.setdefault(owner, set()).add(node.key)
                c = _branch_clause(gt, node.id, item.node)
                if c is not None:
                    by_clause.setdefault((owner, c), set()).add((node.key, cut_at))
    # a node that skipped a clause inherits the failure leaves a variant
    # found below it
    skipping = [n for n in gt.nodes if n.skipped]
    changed = bool(skipping)
    while changed:
        changed = False
        for node in skipping:
            inherited = set()
            for cid in node.skipped:
                inherited |= by_clause.get((node.key, cid), set())
            for item in node.goal:
                if type(item) is not Exit:
                    continue
                leaves = {x for x in inherited if not _covered(gt, x[1], item.node)}
                owner = gt.nodes[item.node].key
                d = depends.setdefault(owner, set())
                keys = {k for k, _ in leaves}
                if not keys <= d:
                    d |= keys
                    changed = True
                c = _branch_clause(gt, node.id, item.node)
                if c is not None:
                    b = by_clause.setdefault((owner, c), set())
                    if not leaves <= b:
                        b |= leaves
                        changed = True
    return occurrences, bad, depends


def _covered(gt: GeneralizedSltTree, cut_at: tuple, owner_id: int) -> bool:
    # a loop cut only against variants inside the owner's own sub-derivation
    # is covered by those variants' branches
    return bool(cut_at) and all(_descends(gt, v, owner_id) for v in cut_at)


def _branch_clause(gt: GeneralizedSltTree, node_id: int, owner_id: int) -> Optional[str]:
    """Clause applied at the owner on the way down to node_id."""
    while node_id is not None:
        node = gt.nodes[node_id]
        if node.parent == owner_id:
            return node.clause
        node_id = node.parent
    return None


def _descends(gt: GeneralizedSltTree, node_id: int, ancestor_id: int) -> bool:
    while node_id is not None:
        if node_id == ancestor_id:
            return True
        node_id = gt.nodes[node_id].parent
    return False


def top_succeeded(gt: GeneralizedSltTree) -> bool:
    return gt.top.has_success


def ancestor_variant_report(gt: GeneralizedSltTree, program: Program) -> list:
    """(node id, variant ancestors, unifiable program clauses) per positive node."""
    out = []
    for node in gt.nodes:
        if node.key is None:
            continue
        atom = node.goal[0].literal.atom
        variants = sum(1 for e in (node.goal[0].al or ()) if e.key == node.key)
        unifiable = sum(1 for c in program.clauses_for(atom.pred)
                        if unify_atoms(atom, rename(c, 10 ** 9).head) is not None)
        out.append((node.id, variants, unifiable))
    return out
