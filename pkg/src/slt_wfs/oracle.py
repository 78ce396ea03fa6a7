"""Bottom-up well-founded model of finitely instantiable programs.

The greatest unfounded set is computed constructively: atoms not
derivable in the reduct P|M_P(I) starting from M_P(I).  This module is the
independent reference the resolution engine is checked against.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Optional

from .terms import Atom, Compound, Const, Int, Program, Var, is_builtin, _sub_atom


class OracleError(ValueError):
    pass


TRUE, FALSE, UNDEFINED = "true", "false", "undefined"

FRESH_CONSTANT = Const("c0")


@dataclass(frozen=True)
class PartialInterpretation:
    positives: frozenset = frozenset()
    negatives: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "positives", frozenset(self.positives))
        object.__setattr__(self, "negatives", frozenset(self.negatives))

    @property
    def consistent(self) -> bool:
        return not (self.positives & self.negatives)

    def __le__(self, other: "PartialInterpretation") -> bool:
        return self.positives <= other.positives and self.negatives <= other.negatives


@dataclass(frozen=True)
class GroundClause:
    head: Atom
    pos: tuple = ()
    neg: tuple = ()


@dataclass(frozen=True)
class GroundProgram:
    clauses: tuple
    base: frozenset


def _symbols(program: Program, extra: Iterable[Atom] = ()):
    consts, funcs = set(), set()
    atoms = [c.head for c in program.clauses]
    atoms += [l.atom for c in program.clauses for l in c.body]
    atoms += list(extra)
    for a in atoms:
        if is_builtin(a):
            raise OracleError("the oracle has no arithmetic; program uses builtins")
        stack = list(a.args)
        while stack:
            t = stack.pop()
            if type(t) in (Const, Int):
                consts.add(t)
            elif type(t) is Compound:
                funcs.add((t.functor, len(t.args)))
                stack.extend(t.args)
    return consts, funcs


def _term_key(t):
    # deterministic ordering for universes
    if type(t) is Int:
        return (0, t.value, "")
    if type(t) is Const:
        return (1, 0, t.name)
    return (2, t.depth, repr(t))


def herbrand_universe(program: Program, depth_cap: int = 0,
                      extra: Iterable[Atom] = ()) -> list:
    """Ground terms of the program's language up to nesting depth depth_cap.

    ``extra`` atoms (e.g. a query) contribute their symbols too.
    """
    if depth_cap < 0:
        raise OracleError("depth_cap must be non-negative")
    consts, funcs = _symbols(program, extra)
    if funcs and depth_cap == 0:
        raise OracleError(
            "program has function symbols; the oracle is exact only for "
            "function-free programs (give a positive depth cap)")
    universe = set(consts) if consts else {FRESH_CONSTANT}
    for _ in range(depth_cap):
        layer = set(universe)
        for f, n in sorted(funcs):
            for args in itertools.product(sorted(universe, key=_term_key), repeat=n):
                layer.add(Compound(f, args))
        if layer == universe:
            break
        universe = layer
    return sorted(universe, key=_term_key)


def _ground_atoms(pred: str, arity: int, universe) -> list:
    return [Atom(pred, args) for args in itertools.product(universe, repeat=arity)]


def ground(program: Program, universe, depth_cap: Optional[int] = None) -> GroundProgram:
    """All instances of every clause over the universe, plus the Herbrand base.

    With a depth cap, instances mentioning deeper terms are dropped.
    """
    universe = list(universe)
    preds = {}
    for c in program.clauses:
        for a in (c.head, *(l.atom for l in c.body)):
            preds.setdefault(a.pred, a.arity)
    base = set()
    for p, n in preds.items():
        base.update(_ground_atoms(p, n, universe))
    out = []
    for c in program.clauses:
        vs = c.variables
        for values in itertools.product(universe, repeat=len(vs)):
            b = dict(zip(vs, values))
            head = _sub_atom(c.head, b)
            if head not in base:
                continue
            pos, neg = [], []
            ok = True
            for l in c.body:
                a = _sub_atom(l.atom, b)
                if a not in base:
                    ok = False
                    break
                (pos if l.positive else neg).append(a)
            if ok:
                out.append(GroundClause(head, tuple(pos), tuple(neg)))
    return GroundProgram(tuple(dict.fromkeys(out)), frozenset(base))


def tp(g: GroundProgram, i: PartialInterpretation) -> set:
    """Heads of clauses whose whole body holds in i."""
    return {c.head for c in g.clauses
            if all(a in i.positives for a in c.pos)
            and all(a in i.negatives for a in c.neg)}


def _lfp(clauses, start: set) -> set:
    """Least set containing start closed under the positive clauses (head, pos)."""
    derived = set(start)
    watch: dict = {}
    missing = []
    queue = []
    for k, (head, pos) in enumerate(clauses):
        need = {a for a in pos if a not in derived}
        missing.append(len(need))
        for a in need:
            watch.setdefault(a, []).append(k)
        if not need and head not in derived:
            derived.add(head)
            queue.append(head)
    while queue:
        a = queue.pop()
        for k in watch.get(a, ()):
            missing[k] -= 1
            if missing[k] == 0:
                h = clauses[k][0]
                if h not in derived:
                    derived.add(h)
                    queue.append(h)
    return derived


def mp(g: GroundProgram, i: PartialInterpretation) -> PartialInterpretation:
    """Least fixpoint of the immediate consequence operator above i."""
    usable = [(c.head, c.pos) for c in g.clauses
              if all(a in i.negatives for a in c.neg)]
    return PartialInterpretation(_lfp(usable, i.positives), i.negatives)


def reduce(g: GroundProgram, i: PartialInterpretation) -> GroundProgram:
    """P|I: drop clauses blocked by i, then drop negative literals."""
    kept = []
    for c in g.clauses:
        if any(a in i.negatives for a in c.pos) or any(a in i.positives for a in c.neg):
            continue
        kept.append(GroundClause(c.head, c.pos, ()))
    return GroundProgram(tuple(kept), g.base)


def _reduct_closure(g: GroundProgram, i: PartialInterpretation):
    m = mp(g, i)
    r = reduce(g, m)
    closure = _lfp([(c.head, c.pos) for c in r.clauses], m.positives)
    return m, closure


def np_op(g: GroundProgram, i: PartialInterpretation) -> set:
    m, closure = _reduct_closure(g, i)
    return set(g.base - closure)


def op_op(g: GroundProgram, i: PartialInterpretation) -> set:
    m, closure = _reduct_closure(g, i)
    return set(closure - m.positives)


def step(g: GroundProgram, i: PartialInterpretation) -> PartialInterpretation:
    m, closure = _reduct_closure(g, i)
    return PartialInterpretation(m.positives, m.negatives | (g.base - closure))


def wf_iterates(g: GroundProgram) -> list:
    """The increasing sequence I_0 = {} , I_1, ... up to the fixpoint."""
    seq = [PartialInterpretation()]
    while True:
        nxt = step(g, seq[-1])
        if nxt == seq[-1]:
            return seq
        seq.append(nxt)


def wf_model_ground(g: GroundProgram) -> PartialInterpretation:
    return wf_iterates(g)[-1]


def wf_model(program: Program, depth_cap: int = 0,
             extra: Iterable[Atom] = ()) -> PartialInterpretation:
    universe = herbrand_universe(program, depth_cap, extra)
    g = ground(program, universe)
    return wf_model_ground(g)


class Model:
    """A well-founded model together with the base it was computed over."""

    def __init__(self, program: Program, depth_cap: int = 0, extra: Iterable[Atom] = ()):
        self.universe = herbrand_universe(program, depth_cap, extra)
        extra = list(extra)
        preds = dict(program.arities)
        for a in extra:
            preds.setdefault(a.pred, a.arity)
        self.ground_program = ground(program, self.universe)
        base = set(self.ground_program.base)
        for p, n in preds.items():
            base.update(_ground_atoms(p, n, self.universe))
        self.ground_program = GroundProgram(self.ground_program.clauses, frozenset(base))
        self.interpretation = wf_model_ground(self.ground_program)
        self.approximate = depth_cap > 0

    @property
    def base(self) -> frozenset:
        return self.ground_program.base

    def truth(self, atom: Atom) -> str:
        return truth(self.interpretation, atom, self.base)

    def instances(self, atom: Atom) -> list:
        """Ground instances of atom over the universe, sorted."""
        vs = list(dict.fromkeys(_vars(atom)))
        out = []
        for values in itertools.product(self.universe, repeat=len(vs)):
            out.append(_sub_atom(atom, dict(zip(vs, values))))
        return out


def _vars(atom: Atom):
    stack = list(atom.args)[::-1]
    while stack:
        t = stack.pop()
        if type(t) is Var:
            yield t
        elif type(t) is Compound:
            stack.extend(reversed(t.args))


def truth(m: PartialInterpretation, atom: Atom, base: Optional[frozenset] = None) -> str:
    if not atom.ground:
        raise OracleError("truth needs a ground atom")
    if base is not None and atom not in base:
        raise OracleError(f"atom {atom!r} is not in the Herbrand base")
    if atom in m.positives:
        return TRUE
    if atom in m.negatives:
        return FALSE
    return UNDEFINED


def is_unfounded(g: GroundProgram, i: PartialInterpretation, u) -> bool:
    """Direct check of the unfounded-set condition for every atom of u."""
    u = set(u)
    for c in g.clauses:
        if c.head not in u:
            continue
        blocked = (any(a in i.negatives for a in c.pos)
                   or any(a in i.positives for a in c.neg)
                   or any(a in u for a in c.pos))
        if not blocked:
            return False
    return True


def greatest_unfounded_set_brute_force(g: GroundProgram, i: PartialInterpretation,
                                       limit: int = 12) -> set:
    """Largest unfounded set found by enumerating subsets of the base.

    Unfounded sets are closed under union, so the first one found when
    scanning from the largest size down is the greatest.
    """
    atoms = sorted(g.base, key=repr)
    if len(atoms) > limit:
        raise OracleError(f"brute force limited to {limit} atoms, got {len(atoms)}")
    bit = {a: 1 << k for k, a in enumerate(atoms)}
    # per atom: positive-body masks of clauses not already blocked by i
    support = {a: [] for a in atoms}
    impossible = 0
    for c in g.clauses:
        if (any(a in i.negatives for a in c.pos) or any(a in i.positives for a in c.neg)):
            continue
        m = 0
        for a in c.pos:
            m |= bit[a]
        if m == 0:
            impossible |= bit[c.head]
        support[c.head].append(m)
    candidates = [a for a in atoms if not bit[a] & impossible]
    for size in range(len(candidates), -1, -1):
        for combo in itertools.combinations(candidates, size):
            u = 0
            for a in combo:
                u |= bit[a]
            if all(m & u for a in combo for m in support[a]):
                return set(combo)
    return set()
