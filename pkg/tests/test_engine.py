import pytest

from slt_wfs.engine import (
    FAILURE, SUCCESS, UNDEFINED, BuiltinError, FlounderError, Guard, GuardTripped, Options,
    eval_builtin, looping_clauses, negative_answers, positive_answers,
)
from slt_wfs.parser import parse_program, parse_query, render
from slt_wfs.solver import FALSE, TRUE, UNOPTIMIZED, build_generalized_tree, slt, sltp
from slt_wfs.tables import Tables
from slt_wfs.terms import AncestorList, Int, Var

from goldens import COUNTING, P1, P2

A = parse_query
ENGINES = [("slt", UNOPTIMIZED), ("slt-optimized", Options())]


def names(atoms):
    return sorted(render(a) for a in atoms)


def fig1():
    return build_generalized_tree(parse_program(P1), A("p(X)"), options=UNOPTIMIZED)


# --- builtins -------------------------------------------------------------------

def B(text):
    # builtin goals are not valid queries, so take them from a clause body
    return parse_program(f"h :- {text}.").clauses[0].body[0].atom


def test_builtins():
    assert eval_builtin(B("X is 1+1")) == {Var("X"): Int(2)}
    assert eval_builtin(B("2 < 5")) == {}
    assert eval_builtin(B("odd(2)")) is None
    assert eval_builtin(B("even(2)")) == {}
    assert eval_builtin(B("3 is 1+2")) == {}
    assert eval_builtin(B("4 is 1+2")) is None


def test_builtin_instantiation_errors():
    with pytest.raises(BuiltinError, match="builtin instantiation error"):
        eval_builtin(B("X is Y+1"))
    with pytest.raises(BuiltinError):
        eval_builtin(B("X < 2"))
    with pytest.raises(BuiltinError):
        eval_builtin(B("odd(a)"))


def test_builtin_error_surfaces_from_a_query():
    with pytest.raises(BuiltinError):
        slt(parse_program("p(X) :- X < 3."), A("p(Y)"))


# --- looping clauses ----------------------------------------------------------

def test_looping_clauses():
    al = AncestorList(0, A("p(X)"), "p/1#1", None)
    assert looping_clauses(A("p(Y)"), al) == {"p/1#1"}
    assert looping_clauses(A("p(Y)"), None) == set()
    assert looping_clauses(A("q(X)"), al) == set()
    assert looping_clauses(A("p(a)"), al) == set()


# --- tree construction ---------------------------------------------------------

def test_fig1_forest():
    gt = fig1()
    assert len(gt) == 18
    assert [t.root for t in gt.trees] == [0, 6, 8, 10, 16]
    assert [render(t.atom) for t in gt.trees] == ["p(X)", "r", "s", "r", "w"]
    leaves = {n.id: n.leaf for n in gt.nodes if n.leaf}
    assert leaves == {2: SUCCESS, 15: SUCCESS, 10: FAILURE, 16: FAILURE, 17: FAILURE,
                      11: UNDEFINED, 12: UNDEFINED, 13: UNDEFINED}


def test_looping_clause_excluded_at_n5():
    n5 = fig1().nodes[5]
    assert render(n5.literals) == "p(X_5)"
    assert n5.loop_node
    assert n5.children == [15]
    assert fig1().nodes[15].clause == "p/1#2"


def test_second_r_tree_is_cut_by_its_ancestor():
    # r under s under r: the only clause of r is looping there
    gt = fig1()
    assert gt.nodes[10].leaf == FAILURE and gt.nodes[10].children == []


def test_p2_chain():
    gt = build_generalized_tree(parse_program(P2), A("a"), options=UNOPTIMIZED)
    assert [render(t.atom) for t in gt.trees] == ["a", "b", "c", "d"]
    assert gt.nodes[6].leaf == FAILURE
    assert positive_answers(gt) == []
    assert negative_answers(gt, set()) == {A("d")}


def test_single_fact():
    gt = build_generalized_tree(parse_program("p(a)."), A("p(a)"), options=UNOPTIMIZED)
    assert len(gt.trees) == 1
    assert [n.leaf for n in gt.leaves()] == [SUCCESS]
    assert names(positive_answers(gt)) == ["p(a)"]


def test_tree_with_only_successes_has_no_negative_answers():
    gt = build_generalized_tree(parse_program("p(a). p(b)."), A("p(X)"), options=UNOPTIMIZED)
    assert negative_answers(gt, set()) == set()


def test_self_loop_fails():
    gt, tables = sltp(parse_program("p :- p."), A("p"), engine="slt", options=UNOPTIMIZED)
    assert [n.leaf for n in gt.leaves()] == [FAILURE]
    assert tables.tb_t == []


def test_p1_answer_tables():
    gt = fig1()
    assert names(positive_answers(gt)) == ["p(a)", "q(a)"]
    # w and its leaf subgoal v fail everywhere already in the first tree
    assert negative_answers(gt, set()) == {A("w")}
    assert negative_answers(gt, {A("w")}) == set()


def test_tabled_answer_gives_n2_a_child():
    tables = Tables()
    for a in positive_answers(fig1()):
        tables.add_answer(a)
    gt = build_generalized_tree(parse_program(P1), A("p(X)"), tables, options=UNOPTIMIZED)
    q = next(n for n in gt.nodes if render(n.literals).startswith("q("))
    labels = [gt.nodes[c].label for c in q.children]
    assert labels == ["q(a)", "q/1#1", "q/1#2", "q/1#3"]


def test_counting_first_tree():
    tables = Tables()
    build_generalized_tree(parse_program(COUNTING), A("p(X,5)"), tables,
                           engine="slt-optimized")
    assert names(a for a in tables.tb_t if a.pred == "p") == ["p(1,5)", "p(2,5)"]


# --- verdicts ---------------------------------------------------------------------

@pytest.mark.parametrize("engine,options", ENGINES)
def test_p1_verdicts(engine, options):
    p = parse_program(P1)
    v = slt(p, A("p(X)"), engine, options)
    assert v.value == TRUE and names(v.answers) == ["p(a)"]
    assert names(v.tb_t) == ["p(a)", "q(a)"] and names(v.tb_f) == ["w"]
    assert slt(p, A("r"), engine, options).value == "undefined"
    assert slt(p, A("s"), engine, options).value == "undefined"
    assert slt(p, A("w"), engine, options).value == FALSE
    assert slt(p, A("v"), engine, options).value == FALSE


def test_p2_recursion_counts():
    v = slt(parse_program(P2), A("a"), "slt", UNOPTIMIZED)
    assert v.value == TRUE
    assert (v.stats.slt_calls, v.stats.sltp_calls) == (3, 4)


@pytest.mark.parametrize("engine,options", ENGINES)
def test_counting(engine, options):
    v = slt(parse_program(COUNTING), A("p(X,5)"), engine, options)
    assert names(v.answers) == ["p(1,5)", "p(2,5)", "p(3,5)", "p(4,5)"]
    assert v.stats.sltp_calls == 3


def test_verdict_requires_answers_exactly_when_true():
    from slt_wfs.solver import Verdict
    with pytest.raises(ValueError):
        Verdict(TRUE, [], Tables(), None, None)
    with pytest.raises(ValueError):
        Verdict(FALSE, [A("p")], Tables(), None, None)


# --- errors ------------------------------------------------------------------------

@pytest.mark.parametrize("engine,options", ENGINES)
def test_flounder(engine, options):
    p = parse_program("p :- \\+ q(X). q(a).")
    with pytest.raises(FlounderError, match="floundering query"):
        slt(p, A("p"), engine, options)


@pytest.mark.parametrize("engine,options", ENGINES)
def test_term_depth_guard(engine, options):
    p = parse_program("p(X) :- p(f(X)).")
    with pytest.raises(GuardTripped, match="bounded-term-size guard tripped"):
        slt(p, A("p(a)"), engine, options, Guard(max_term_depth=8))


def test_node_guard():
    p = parse_program("p(X) :- q(X). q(a). q(b). q(c).")
    with pytest.raises(GuardTripped):
        slt(p, A("p(X)"), "slt", UNOPTIMIZED, Guard(max_nodes=3))
