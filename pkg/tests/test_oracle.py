import random

import pytest
from hypothesis import given, settings, strategies as st

from slt_wfs.oracle import (
    FRESH_CONSTANT, GroundClause, GroundProgram, Model, OracleError, PartialInterpretation,
    greatest_unfounded_set_brute_force, ground, herbrand_universe, is_unfounded, mp, np_op,
    op_op, reduce, step, tp, wf_iterates, wf_model, wf_model_ground,
)
from slt_wfs.parser import parse_program, parse_query, render

from _programs import random_ground_program, random_program
from goldens import P1, P2, P3

A = parse_query


def names(atoms):
    return sorted(render(a) for a in atoms)


def gp(text):
    p = parse_program(text)
    return ground(p, herbrand_universe(p))


def I(pos=(), neg=()):
    return PartialInterpretation(frozenset(map(A, pos)), frozenset(map(A, neg)))


# --- universe and grounding -----------------------------------------------------

def test_universe():
    assert names(herbrand_universe(parse_program("p(a). q(b) :- p(a)."))) == ["a", "b"]
    assert herbrand_universe(parse_program("r :- \\+ r.")) == [FRESH_CONSTANT]
    u = herbrand_universe(parse_program("p(f(a))."), depth_cap=2)
    assert [render(t) for t in u] == ["a", "f(a)", "f(f(a))"]


def test_function_symbols_need_a_cap():
    with pytest.raises(OracleError):
        herbrand_universe(parse_program("p(f(a))."))


def test_ground():
    p = parse_program("p(X) :- q(X). q(a). q(b).")
    g = ground(p, herbrand_universe(p))
    rules = sorted(f"{render(c.head)} <- {names(c.pos)}" for c in g.clauses if c.pos)
    assert rules == ["p(a) <- ['q(a)']", "p(b) <- ['q(b)']"]
    g2 = gp(P2)
    assert len(g2.clauses) == 3 and names(g2.base) == ["a", "b", "c", "d"]


# --- operators --------------------------------------------------------------------

def test_tp():
    assert names(tp(gp("p :- q."), I(["q"]))) == ["p"]
    assert names(tp(gp("p :- \\+ q."), I(neg=["q"]))) == ["p"]
    assert tp(gp("p :- \\+ q."), I()) == set()


def test_mp():
    assert names(mp(gp("p :- q. q."), I()).positives) == ["p", "q"]
    # the fact p(a) and q(X) :- p(X) give both atoms without any negation
    assert names(mp(gp(P1), I()).positives) == ["p(a)", "q(a)"]


def test_reduce():
    r = reduce(gp("p :- q, \\+ r. q :- s. s :- q."), I(neg=["r"]))
    assert [(render(c.head), names(c.pos), c.neg) for c in r.clauses if c.head == A("p")] \
        == [("p", ["q"], ())]
    assert not [c for c in reduce(gp("p :- \\+ r. r :- r."), I(["r"])).clauses if c.head == A("p")]
    assert [c for c in reduce(gp("p :- \\+ r. r :- r."), I()).clauses if c.head == A("p")] \
        == [GroundClause(A("p"), (), ())]


def test_np_op_examples():
    assert names(np_op(gp(P2), I())) == ["d"]
    assert {A("r"), A("s")} <= op_op(gp(P1), I())


def test_wf_model_examples():
    m = wf_model(parse_program(P2))
    assert names(m.positives) == ["a", "c"] and names(m.negatives) == ["b", "d"]
    m = Model(parse_program(P1))
    assert names(m.interpretation.positives) == ["p(a)", "q(a)"]
    assert names(m.interpretation.negatives) == ["v", "w"]
    assert m.truth(A("r")) == m.truth(A("s")) == "undefined"
    assert Model(parse_program(P3)).truth(A("p")) == "false"
    assert Model(parse_program(P2)).truth(A("d")) == "false"


def test_truth_needs_base_atoms():
    m = Model(parse_program(P2))
    with pytest.raises(OracleError):
        m.truth(A("zzz"))
    with pytest.raises(OracleError):
        Model(parse_program("p(X) :- q(X). q(a).")).truth(A("p(X)"))


def test_builtins_rejected():
    with pytest.raises(OracleError):
        Model(parse_program("p(X) :- q(Y), X is Y+1. q(1)."))


# --- properties -------------------------------------------------------------------

@st.composite
def ground_programs(draw):
    p = random_ground_program(random.Random(draw(st.integers(0, 10 ** 9))))
    return ground(p, herbrand_universe(p))


@st.composite
def programs(draw):
    return random_program(random.Random(draw(st.integers(0, 10 ** 9))))


def _random_interpretation(g: GroundProgram, rng: random.Random) -> PartialInterpretation:
    pos, neg = set(), set()
    for a in sorted(g.base, key=render):
        r = rng.random()
        if r < 0.25:
            pos.add(a)
        elif r < 0.5:
            neg.add(a)
    return PartialInterpretation(pos, neg)


@settings(max_examples=80)
@given(ground_programs(), st.integers(0, 1000))
def test_partition(g, seed):
    for i in wf_iterates(g) + [_random_interpretation(g, random.Random(seed))]:
        m = mp(g, i).positives
        n, o = np_op(g, i), op_op(g, i)
        assert not (m & n) and not (m & o) and not (n & o)
        assert m | n | o == g.base | i.positives


@settings(max_examples=80)
@given(ground_programs(), st.integers(0, 1000))
def test_mp_keeps_negatives(g, seed):
    i = _random_interpretation(g, random.Random(seed))
    assert mp(g, i).negatives == i.negatives


@settings(max_examples=80)
@given(ground_programs())
def test_np_is_greatest_unfounded_set_on_closed_interpretations(g):
    # with I = M_P(I) the constructive set equals the greatest unfounded set
    for i in wf_iterates(g):
        i = mp(g, i)
        n = np_op(g, i)
        assert is_unfounded(g, i, n)
        assert n == greatest_unfounded_set_brute_force(g, i)


def test_unfounded_needs_closed_interpretation():
    # p is unfounded w.r.t. M_P({}) = {q} but not w.r.t. {} itself
    g = gp("q. p :- \\+ q.")
    assert np_op(g, I()) == {A("p")}
    assert greatest_unfounded_set_brute_force(g, I()) == set()


@settings(max_examples=80)
@given(ground_programs())
def test_iterates_are_monotone_and_below_the_model(g):
    seq = wf_iterates(g)
    wf = seq[-1]
    for a, b in zip(seq, seq[1:]):
        assert a <= b
    for j in seq:
        assert j.consistent
        assert mp(g, j).positives <= wf.positives
        assert np_op(g, j) <= wf.negatives
    assert step(g, wf) == wf


@settings(max_examples=40, deadline=None)
@given(programs())
def test_model_is_a_fixpoint_on_nonground_programs(p):
    m = Model(p)
    wf = m.interpretation
    assert wf.consistent
    assert step(m.ground_program, wf) == wf
    assert wf_model_ground(m.ground_program) == wf
