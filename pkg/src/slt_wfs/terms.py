"""Terms, atoms, literals, clauses, substitutions and unification.

All values are immutable and hashable.  Variables carry a rename index so
that clause variables renamed apart for a resolution step never collide
with the variables of the goal.
"""

from __future__ import annotations

from typing import Iterable, Iterator, Mapping, Optional, Union


class Var:
    __slots__ = ("name", "index", "_hash")

    def __init__(self, name: str, index: int = 0):
        if index < 0:
            raise ValueError("rename index must be non-negative")
        self.name = name
        self.index = index
        self._hash = hash(("V", name, index))

    ground = False
    depth = 0

    def __eq__(self, other):
        return (type(other) is Var and other.name == self.name
                and other.index == self.index)

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Var({self.name!r}, {self.index})"


class Const:
    __slots__ = ("name", "_hash")

    def __init__(self, name: str):
        self.name = name
        self._hash = hash(("C", name))

    ground = True
    depth = 0

    def __eq__(self, other):
        return type(other) is Const and other.name == self.name

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Const({self.name!r})"


class Int:
    __slots__ = ("value", "_hash")

    def __init__(self, value: int):
        self.value = int(value)
        self._hash = hash(("I", self.value))

    ground = True
    depth = 0

    def __eq__(self, other):
        return type(other) is Int and other.value == self.value

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Int({self.value})"


class Compound:
    __slots__ = ("functor", "args", "ground", "depth", "_hash")

    def __init__(self, functor: str, args: Iterable["Term"]):
        args = tuple(args)
        if not args:
            raise ValueError("compound term needs at least one argument")
        self.functor = functor
        self.args = args
        self.ground = all(a.ground for a in args)
        self.depth = 1 + max(a.depth for a in args)
        self._hash = hash((functor, args))

    @property
    def arity(self) -> int:
        return len(self.args)

    def __eq__(self, other):
        return (type(other) is Compound and other._hash == self._hash
                and other.functor == self.functor and other.args == self.args)

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Compound({self.functor!r}, {list(self.args)!r})"


Term = Union[Var, Const, Int, Compound]


class Atom:
    __slots__ = ("pred", "args", "ground", "depth", "_hash")

    def __init__(self, pred: str, args: Iterable[Term] = ()):
        args = tuple(args)
        self.pred = pred
        self.args = args
        self.ground = all(a.ground for a in args)
        self.depth = max((a.depth for a in args), default=0)
        self._hash = hash(("A", pred, args))

    @property
    def arity(self) -> int:
        return len(self.args)

    @property
    def signature(self) -> tuple[str, int]:
        return (self.pred, len(self.args))

    def __eq__(self, other):
        return (type(other) is Atom and other._hash == self._hash
                and other.pred == self.pred and other.args == self.args)

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Atom({self.pred!r}, {list(self.args)!r})"


class Literal:
    __slots__ = ("positive", "atom", "_hash")

    def __init__(self, atom: Atom, positive: bool = True):
        self.atom = atom
        self.positive = bool(positive)
        self._hash = hash((self.positive, atom))

    @property
    def ground(self) -> bool:
        return self.atom.ground

    def negate(self) -> "Literal":
        return Literal(self.atom, not self.positive)

    def __eq__(self, other):
        return (type(other) is Literal and other.positive == self.positive
                and other.atom == self.atom)

    def __hash__(self):
        return self._hash

    def __repr__(self):
        sign = "" if self.positive else "~"
        return f"Literal({sign}{self.atom!r})"


class UStar:
    """The temporarily-undefined subgoal marker; a singleton."""

    __slots__ = ()
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    positive = True
    ground = True

    def __repr__(self):
        return "USTAR"


USTAR = UStar()


PROGRAM = "program"
TABLED_ANSWER = "tabled-answer"


class Clause:
    __slots__ = ("head", "body", "id", "origin", "variables", "_hash")

    def __init__(self, head: Atom, body: Iterable[Literal] = (),
                 id: Optional[str] = None, origin: str = PROGRAM):
        body = tuple(body)
        if origin == TABLED_ANSWER and body:
            raise ValueError("tabled-answer clauses have an empty body")
        self.head = head
        self.body = body
        self.id = id
        self.origin = origin
        seen: dict[Var, None] = {}
        _collect_vars(head, seen)
        for lit in body:
            _collect_vars(lit.atom, seen)
        self.variables = tuple(seen)
        self._hash = hash((head, body))

    @property
    def is_fact(self) -> bool:
        return not self.body

    def with_id(self, id: str) -> "Clause":
        return Clause(self.head, self.body, id, self.origin)

    def __eq__(self, other):
        return (type(other) is Clause and other.head == self.head
                and other.body == self.body)

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Clause({self.id!r}, {self.head!r}, {list(self.body)!r})"


class ProgramError(ValueError):
    pass


BUILTINS = frozenset({("is", 2), ("<", 2), ("odd", 1), ("even", 1)})


def is_builtin(atom: Atom) -> bool:
    return (atom.pred, len(atom.args)) in BUILTINS


class Program:
    """Clauses in textual order plus a predicate index.

    Clause ids default to ``pred/arity#k`` where k counts the clauses of
    that predicate from 1.
    """

    def __init__(self, clauses: Iterable[Clause] = ()):
        arities: dict[str, int] = {}
        counts: dict[tuple[str, int], int] = {}
        numbered = []
        seen_ids = set()
        for c in clauses:
            for atom in (c.head, *(lit.atom for lit in c.body)):
                if is_builtin(atom):
                    continue
                known = arities.setdefault(atom.pred, atom.arity)
                if known != atom.arity:
                    raise ProgramError(
                        f"predicate {atom.pred} used with arities {known} and {atom.arity}")
            if is_builtin(c.head):
                raise ProgramError(f"cannot define builtin {c.head.pred}/{c.head.arity}")
            sig = c.head.signature
            counts[sig] = counts.get(sig, 0) + 1
            if c.id is None:
                c = c.with_id(f"{sig[0]}/{sig[1]}#{counts[sig]}")
            if c.id in seen_ids:
                raise ProgramError(f"duplicate clause id {c.id}")
            seen_ids.add(c.id)
            numbered.append(c)
        self.clauses: tuple[Clause, ...] = tuple(numbered)
        self.arities = arities
        index: dict[str, list[Clause]] = {}
        for c in self.clauses:
            index.setdefault(c.head.pred, []).append(c)
        self.index = {k: tuple(v) for k, v in index.items()}
        self.by_id = {c.id: c for c in self.clauses}

    def clauses_for(self, pred: str) -> tuple[Clause, ...]:
        return self.index.get(pred, ())

    @property
    def predicates(self) -> dict[str, int]:
        return dict(self.arities)

    def has_builtins(self) -> bool:
        return any(is_builtin(lit.atom) for c in self.clauses for lit in c.body)

    def __iter__(self) -> Iterator[Clause]:
        return iter(self.clauses)

    def __len__(self):
        return len(self.clauses)

    def __eq__(self, other):
        return isinstance(other, Program) and self.clauses == other.clauses

    def __repr__(self):
        return f"Program({list(self.clauses)!r})"


# --- variables and substitution -------------------------------------------

def _collect_vars(x, seen: dict) -> None:
    if type(x) is Var:
        seen.setdefault(x, None)
    elif type(x) is Compound or type(x) is Atom:
        if not x.ground:
            for a in x.args:
                _collect_vars(a, seen)


def variables(x) -> tuple[Var, ...]:
    """Variables of a term, atom or literal in first-occurrence order."""
    seen: dict[Var, None] = {}
    if type(x) is Literal:
        x = x.atom
    _collect_vars(x, seen)
    return tuple(seen)


def _sub(t, s: Mapping):
    # single pass; s must be idempotent for the result to be fully applied
    tt = type(t)
    if tt is Var:
        return s.get(t, t)
    if tt is Compound and not t.ground:
        return Compound(t.functor, [_sub(a, s) for a in t.args])
    return t


def _sub_atom(a: Atom, s: Mapping) -> Atom:
    if a.ground or not s:
        return a
    return Atom(a.pred, [_sub(t, s) for t in a.args])


class Substitution(Mapping):
    """Variable bindings kept in idempotent form.

    The constructor resolves triangular chains (``{X/f(Y), Y/b}`` becomes
    ``{X/f(b), Y/b}``) and rejects cyclic bindings.
    """

    __slots__ = ("_b",)

    def __init__(self, bindings: Optional[Mapping] = None):
        raw = dict(bindings or {})
        resolved = {}
        for v in raw:
            t = _resolve(v, raw, ())
            if t != v:
                resolved[v] = t
        self._b = resolved

    @classmethod
    def _trusted(cls, b: dict) -> "Substitution":
        s = cls.__new__(cls)
        s._b = b
        return s

    def __getitem__(self, v):
        return self._b[v]

    def __iter__(self):
        return iter(self._b)

    def __len__(self):
        return len(self._b)

    def __hash__(self):
        return hash(frozenset(self._b.items()))

    def __eq__(self, other):
        if isinstance(other, Substitution):
            return self._b == other._b
        return NotImplemented

    def __repr__(self):
        from .parser import render
        inner = ", ".join(f"{render(v)}/{render(t)}" for v, t in self._b.items())
        return "{" + inner + "}"

    def is_idempotent(self) -> bool:
        dom = set(self._b)
        return not any(set(variables(t)) & dom for t in self._b.values())


EMPTY = Substitution._trusted({})


def _resolve(t, raw: Mapping, path: tuple):
    tt = type(t)
    if tt is Var:
        if t in raw:
            if t in path:
                raise ValueError(f"cyclic binding through {t!r}")
            return _resolve(raw[t], raw, path + (t,))
        return t
    if tt is Compound and not t.ground:
        return Compound(t.functor, [_resolve(a, raw, path) for a in t.args])
    return t


def apply(s: Mapping, x):
    """Apply a substitution to a term, atom, literal, clause or goal."""
    b = s._b if isinstance(s, Substitution) else s
    tx = type(x)
    if tx is Atom:
        return _sub_atom(x, b)
    if tx is Literal:
        return Literal(_sub_atom(x.atom, b), x.positive)
    if tx is UStar:
        return x
    if tx is Clause:
        return Clause(_sub_atom(x.head, b),
                      [Literal(_sub_atom(l.atom, b), l.positive) for l in x.body],
                      x.id, x.origin)
    if isinstance(x, tuple):
        return tuple(apply(s, item) for item in x)
    if hasattr(x, "apply"):
        return x.apply(b)
    return _sub(x, b)


def compose(s1: Mapping, s2: Mapping) -> Substitution:
    """The substitution that behaves like s1 followed by s2."""
    b1 = s1._b if isinstance(s1, Substitution) else dict(s1)
    b2 = s2._b if isinstance(s2, Substitution) else dict(s2)
    out = {}
    for v, t in b1.items():
        t2 = _sub(t, b2)
        if t2 != v:
            out[v] = t2
    for v, t in b2.items():
        if v not in b1:
            out[v] = t
    return Substitution._trusted(out)


# --- unification ----------------------------------------------------------

def _walk(t, b):
    while type(t) is Var:
        nxt = b.get(t)
        if nxt is None:
            return t
        t = nxt
    return t


def _occurs(v: Var, t, b) -> bool:
    t = _walk(t, b)
    if t is v or t == v:
        return True
    if type(t) is Compound and not t.ground:
        return any(_occurs(v, a, b) for a in t.args)
    return False


def _unify_args(xs, ys, b: dict) -> bool:
    stack = list(zip(xs, ys))
    while stack:
        x, y = stack.pop()
        x = _walk(x, b)
        y = _walk(y, b)
        if x is y:
            continue
        tx, ty = type(x), type(y)
        if tx is Var:
            if ty is Var and x == y:
                continue
            if ty is Compound and _occurs(x, y, b):
                return False
            b[x] = y
        elif ty is Var:
            if tx is Compound and _occurs(y, x, b):
                return False
            b[y] = x
        elif tx is Compound:
            if (ty is not Compound or x.functor != y.functor
                    or len(x.args) != len(y.args)):
                return False
            stack.extend(zip(x.args, y.args))
        elif x != y:
            return False
    return True


def _idempotent(b: dict) -> dict:
    out = {}
    for v in b:
        t = _full(v, b)
        if t != v:
            out[v] = t
    return out


def _full(t, b):
    t = _walk(t, b)
    if type(t) is Compound and not t.ground:
        return Compound(t.functor, [_full(a, b) for a in t.args])
    return t


def unify_atoms(a: Atom, b: Atom) -> Optional[dict]:
    """Raw idempotent binding dict, or None; the engine's hot path."""
    if a.pred != b.pred or len(a.args) != len(b.args):
        return None
    bind: dict = {}
    if not _unify_args(a.args, b.args, bind):
        return None
    return _idempotent(bind)


def mgu(a: Atom, b: Atom) -> Optional[Substitution]:
    """Most general unifier with occurs-check, or None."""
    bind = unify_atoms(a, b)
    if bind is None:
        return None
    return Substitution._trusted(bind)


def unify_terms(x: Term, y: Term) -> Optional[Substitution]:
    bind: dict = {}
    if not _unify_args((x,), (y,), bind):
        return None
    return Substitution._trusted(_idempotent(bind))


# --- variants ---------------------------------------------------------------

def _variant_args(xs, ys, fwd: dict, bwd: dict) -> bool:
    for x, y in zip(xs, ys):
        tx = type(x)
        if tx is Var:
            if type(y) is not Var:
                return False
            fx = fwd.get(x)
            if fx is None:
                if y in bwd:
                    return False
                fwd[x] = y
                bwd[y] = x
            elif fx != y:
                return False
        elif tx is Compound:
            if (type(y) is not Compound or x.functor != y.functor
                    or len(x.args) != len(y.args)):
                return False
            if x.ground or y.ground:
                if x != y:
                    return False
            elif not _variant_args(x.args, y.args, fwd, bwd):
                return False
        elif x != y:
            return False
    return True


def is_variant(x: Atom, y: Atom) -> bool:
    """True iff a bijective variable renaming maps x onto y."""
    if x.pred != y.pred or len(x.args) != len(y.args):
        return False
    if x.ground or y.ground:
        return x == y
    return _variant_args(x.args, y.args, {}, {})


_CANON = [Var(f"_G{i}") for i in range(64)]


def _canon_var(i: int) -> Var:
    while i >= len(_CANON):
        _CANON.append(Var(f"_G{len(_CANON)}"))
    return _CANON[i]


def canonical(a: Atom) -> Atom:
    """Variant-canonical form: variables renamed _G0, _G1, ... by first occurrence.

    Two atoms are variants exactly when their canonical forms are equal.
    """
    if a.ground:
        return a
    vs = variables(a)
    return _sub_atom(a, {v: _canon_var(i) for i, v in enumerate(vs)})


def is_instance(x: Atom, general: Atom) -> bool:
    """True iff x = general·σ for some σ (one-way matching)."""
    if x.pred != general.pred or len(x.args) != len(general.args):
        return False
    bind: dict = {}
    stack = list(zip(general.args, x.args))
    while stack:
        g, t = stack.pop()
        if type(g) is Var:
            old = bind.get(g)
            if old is None:
                bind[g] = t
            elif old != t:
                return False
        elif type(g) is Compound:
            if type(t) is not Compound or g.functor != t.functor or len(g.args) != len(t.args):
                return False
            stack.extend(zip(g.args, t.args))
        elif g != t:
            return False
    return True


def rename(c: Clause, index: int) -> Clause:
    """Rename the clause variables apart using the given rename index."""
    if not c.variables:
        return c
    m = {v: Var(v.name, index) for v in c.variables}
    return Clause(_sub_atom(c.head, m),
                  [Literal(_sub_atom(l.atom, m), l.positive) for l in c.body],
                  c.id, c.origin)


# --- ancestor lists and goals -------------------------------------------------

class AncestorList:
    """Persistent root-ward list of (node id, atom, clause id) entries.

    ``None`` is the empty list; entries are shared between goals.
    """

    __slots__ = ("node", "atom", "clause", "parent", "key")

    def __init__(self, node, atom: Atom, clause, parent: Optional["AncestorList"],
                 key: Optional[Atom] = None):
        self.node = node
        self.atom = atom
        self.clause = clause
        self.parent = parent
        # variant-canonical form of atom; variant checks become equality
        self.key = key if key is not None else canonical(atom)

    def __iter__(self):
        al = self
        while al is not None:
            yield al
            al = al.parent

    def entries(self) -> list[tuple]:
        return [(e.node, e.atom, e.clause) for e in self]

    def __repr__(self):
        return f"AncestorList({self.entries()!r})"


def al_entries(al: Optional[AncestorList]) -> list[tuple]:
    return [] if al is None else al.entries()


class Subgoal:
    """A goal literal together with its ancestor list."""

    __slots__ = ("literal", "al")

    def __init__(self, literal, al: Optional[AncestorList] = None):
        self.literal = literal
        self.al = al

    def apply(self, b: dict) -> "Subgoal":
        lit = self.literal
        if lit is USTAR or lit.atom.ground:
            return self
        return Subgoal(Literal(_sub_atom(lit.atom, b), lit.positive), self.al)

    def __eq__(self, other):
        return type(other) is Subgoal and other.literal == self.literal and other.al is self.al

    def __hash__(self):
        return hash(self.literal)

    def __repr__(self):
        return f"Subgoal({self.literal!r})"


Goal = tuple


def goal_literals(goal: Goal) -> tuple:
    return tuple(item.literal for item in goal if type(item) is Subgoal)


def resolve(goal: Goal, j: int, clause: Clause, counter: Iterator[int],
            node=None, marker=None, key: Optional[Atom] = None
            ) -> Optional[tuple[Goal, Substitution]]:
    """Resolve subgoal j of goal against a clause renamed apart via counter.

    Body literals land at the selected position and get the ancestor list
    ((node, selected atom, clause id),) + AL of the selected subgoal.  An
    optional ``marker`` item is placed directly after the body.
    """
    sel = goal[j]
    lit = sel.literal
    if lit is USTAR or not lit.positive:
        raise ValueError("resolve needs a positive selected subgoal")
    renamed = rename(clause, next(counter))
    bind = unify_atoms(lit.atom, renamed.head)
    if bind is None:
        return None
    al = AncestorList(node, lit.atom, clause.id, sel.al, key) if renamed.body else None
    body = [Subgoal(l, al) for l in renamed.body]
    if marker is not None:
        body.append(marker)
    new = goal[:j] + tuple(body) + goal[j + 1:]
    if bind:
        new = tuple(item.apply(bind) for item in new)
    return new, Substitution._trusted(bind)


def augment(p: Program) -> Program:
    """Add the unit clause aug_p(aug_f(aug_c)) over reserved symbols."""
    reserved = {"aug_p", "aug_f", "aug_c"}
    for c in p.clauses:
        for atom in (c.head, *(l.atom for l in c.body)):
            if atom.pred in reserved or _symbols(atom) & reserved:
                raise ProgramError("program already uses reserved augmentation symbols")
    extra = Clause(Atom("aug_p", [Compound("aug_f", [Const("aug_c")])]))
    return Program(list(p.clauses) + [extra])


def _symbols(x) -> set:
    out = set()
    stack = list(x.args)
    while stack:
        t = stack.pop()
        if type(t) is Const:
            out.add(t.name)
        elif type(t) is Compound:
            out.add(t.functor)
            stack.extend(t.args)
    return out
