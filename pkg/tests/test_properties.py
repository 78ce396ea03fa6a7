"""Engine invariants checked on random function-free programs against the oracle."""

import random

from hypothesis import HealthCheck, assume, given, settings, strategies as st

from slt_wfs.cli import _oracle_verdict
from slt_wfs.engine import Guard, GuardTripped, Options, ancestor_variant_report
from slt_wfs.oracle import Model
from slt_wfs.parser import render
from slt_wfs.solver import UNOPTIMIZED, Evaluation, slt
from slt_wfs.terms import USTAR, Atom, Subgoal, Var, is_instance

from _programs import random_program

SETTINGS = dict(deadline=None, suppress_health_check=[HealthCheck.too_slow])
SMALL_GUARD = Guard(max_nodes=5000)


@st.composite
def programs(draw):
    p = random_program(random.Random(draw(st.integers(0, 10 ** 9))))
    return p, Model(p)


@st.composite
def open_queries(draw):
    p, m = draw(programs())
    atom = draw(st.sampled_from(sorted(m.base, key=render)))
    args = [Var(f"Q{i}") if draw(st.booleans()) else a for i, a in enumerate(atom.args)]
    return p, m, Atom(atom.pred, args)


def ground_queries(m):
    return sorted(m.base, key=render)


def covered(m, query, answers):
    return sorted(render(g) for g in m.instances(query) if any(is_instance(g, a) for a in answers))


def guarded(*args, **kwargs):
    try:
        return slt(*args, **kwargs)
    except GuardTripped:
        return None


@settings(max_examples=60, **SETTINGS)
@given(programs())
def test_verdicts_match_the_oracle(pm):
    p, m = pm
    for a in ground_queries(m):
        assert slt(p, a).value == m.truth(a), render(a)


@settings(max_examples=30, **SETTINGS)
@given(programs())
def test_unoptimized_verdicts_match_the_oracle(pm):
    p, m = pm
    for a in ground_queries(m):
        v = guarded(p, a, "slt", UNOPTIMIZED, SMALL_GUARD)
        if v is not None:
            assert v.value == m.truth(a), render(a)


@settings(max_examples=60, **SETTINGS)
@given(open_queries())
def test_answers_are_sound_and_complete(pmq):
    p, m, q = pmq
    v = slt(p, q)
    expected, true = _oracle_verdict(m, q)
    assert v.value == expected
    assert covered(m, q, v.answers) == sorted(map(render, true))


@settings(max_examples=30, **SETTINGS)
@given(open_queries())
def test_engines_agree_on_open_queries(pmq):
    p, m, q = pmq
    a = guarded(p, q, "slt", UNOPTIMIZED, SMALL_GUARD)
    assume(a is not None)
    b = slt(p, q)
    assert a.value == b.value
    assert covered(m, q, a.answers) == covered(m, q, b.answers)


class _Recording(Evaluation):
    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.snapshots = []

    def build_generalized_tree(self):
        gt = super().build_generalized_tree()
        self.snapshots.append(self.tables.snapshot())
        return gt


@settings(max_examples=40, **SETTINGS)
@given(programs(), st.sampled_from(["slt", "slt-optimized"]))
def test_tables_grow_and_false_answers_are_false(pm, engine):
    p, m = pm
    options = UNOPTIMIZED if engine == "slt" else Options()
    for a in ground_queries(m):
        ev = _Recording(p, a, engine, options, SMALL_GUARD)
        try:
            ev.slt()
        except GuardTripped:
            continue
        for (t1, f1), (t2, f2) in zip(ev.snapshots, ev.snapshots[1:]):
            assert t1 <= t2 and f1 <= f2
        for b in ev.tables.tb_f:
            assert m.truth(b) == "false", render(b)
        for b in ev.tables.tb_t:
            if b.ground:
                assert m.truth(b) == "true", render(b)


def _trees(p, m, engine):
    options = UNOPTIMIZED if engine == "slt" else Options()
    for a in ground_queries(m):
        v = guarded(p, a, engine, options, SMALL_GUARD, keep_trees=True)
        if v is not None:
            yield v


@settings(max_examples=40, **SETTINGS)
@given(programs(), st.sampled_from(["slt", "slt-optimized"]))
def test_ustar_is_single_and_last(pm, engine):
    p, m = pm
    for v in _trees(p, m, engine):
        for gt in v.trees:
            for n in gt.nodes:
                marks = [i for i, x in enumerate(n.goal)
                         if type(x) is Subgoal and x.literal is USTAR]
                assert len(marks) <= 1
                assert not marks or marks[0] == len(n.goal) - 1


@settings(max_examples=40, **SETTINGS)
@given(programs(), st.sampled_from(["slt", "slt-optimized"]))
def test_ancestor_variants_bounded_by_unifiable_clauses(pm, engine):
    p, m = pm
    for v in _trees(p, m, engine):
        for gt in v.trees:
            for node_id, variants, unifiable in ancestor_variant_report(gt, p):
                assert variants <= unifiable, node_id


@settings(max_examples=40, **SETTINGS)
@given(programs())
def test_variant_ancestors_use_disjoint_clauses(pm):
    p, m = pm
    for v in _trees(p, m, "slt-optimized"):
        for gt in v.trees:
            used = {n.id: {gt.nodes[c].clause for c in n.children} - {None} for n in gt.nodes}
            for n in gt.nodes:
                if n.key is None:
                    continue
                for e in n.goal[0].al or ():
                    if e.key == n.key:
                        assert not used[e.node] & used[n.id]


@settings(max_examples=40, **SETTINGS)
@given(programs())
def test_clause_reuse_is_bounded_by_answers(pm):
    p, m = pm
    for v in _trees(p, m, "slt-optimized"):
        keys = set()
        for gt in v.trees:
            counts = {}
            for n in gt.nodes:
                if n.key is None:
                    continue
                keys.add(n.key)
                for c in n.children:
                    cid = gt.nodes[c].clause
                    if cid is not None:
                        counts[(n.key, cid)] = counts.get((n.key, cid), 0) + 1
            for (key, cid), k in counts.items():
                answers = sum(1 for x in v.tables.answers if is_instance(x, key))
                assert k <= answers + 1, (render(key), cid)
        n = len(keys)
        assert v.stats.clause_applications <= n * len(p) * (n + 1)
