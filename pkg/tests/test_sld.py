import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from occheck.core import Compound, Query, Substitution, Var, apply, const, is_ground, match
from occheck.modes import Moding, input_terms, is_tidy_query
from occheck.parser import parse_atom, parse_program, parse_query
from occheck.sld import (
    InstantiationError,
    Leftmost,
    ModingCompatible,
    RandomRule,
    Rightmost,
    WalkStats,
    answers,
    builtin_result,
    parse_rule,
    probe_invariant,
    resolve,
    select,
    verify_tree,
    walk,
)

from helpers import corpus, rand_clause, rand_query

NQ_MODES = Moding.of(pqs="+???", pq="+???")


def program(text: str):
    return parse_program(text).program


class TestResolve:
    def test_use2_first_clause(self):
        c = corpus("use2").clauses[0]
        q, theta = resolve(parse_query("p([1],A,B)"), 0, c)
        [atom] = q.atoms
        assert atom.pred == "p"
        assert atom.args[0] == const("[]")
        assert type(atom.args[1]) is Var and type(atom.args[2]) is Var
        assert {"A", "B"} <= set(theta)

    def test_fact(self):
        q, theta = resolve(parse_query("p(a)"), 0, parse_program("p(a).").clauses[0])
        assert len(q) == 0
        assert theta == Substitution()
        assert resolve(parse_query("p(a)"), 0, parse_program("p(b).").clauses[0]) is None

    def test_selected_atom_replaced_in_place(self):
        c = parse_program("q(X) :- r(X), s(X).").clauses[0]
        q, _ = resolve(parse_query("a, q(b), z"), 1, c)
        assert [x.pred for x in q.atoms] == ["a", "r", "s", "z"]

    def test_renaming_avoids_query_variables(self):
        c = parse_program("p(X,Y) :- q(Y).").clauses[0]
        q, _ = resolve(parse_query("p(a,X), r(Y)"), 0, c, itertools.count(1))
        assert q.atoms[1] == parse_atom("r(Y)")
        assert q.atoms[0].args[0] != Var("Y")

    def test_signature_mismatch(self):
        with pytest.raises(ValueError):
            resolve(parse_query("p(a)"), 0, parse_program("q(a).").clauses[0])


class TestSelect:
    def test_fixed_rules(self):
        q = parse_query("a, b, c")
        assert select(q, Leftmost()) == 0
        assert select(q, Rightmost()) == 2
        with pytest.raises(ValueError):
            select(Query(()), Leftmost())

    def test_random_rule_is_reproducible(self):
        q = parse_query("a, b, c, d")
        picks = [select(q, RandomRule(7), f".{i}") for i in range(20)]
        assert picks == [select(q, RandomRule(7), f".{i}") for i in range(20)]
        assert len(set(picks)) > 1

    def test_moding_compatible(self):
        rule = ModingCompatible(NQ_MODES)
        assert select(parse_query("pqs(X,A,B,C)"), rule) is None
        rule = ModingCompatible(NQ_MODES.override({("q", 1): "+"}))
        assert select(parse_query("q(Y), pqs(0,A,B,C)"), rule) == 1

    def test_fallback(self):
        rule = ModingCompatible(NQ_MODES, fallback="leftmost-ground")
        assert select(parse_query("pqs(X,A,B,C), pq(Y,A,B,C)"), rule) == 0

    def test_parse_rule(self):
        assert isinstance(parse_rule("leftmost"), Leftmost)
        assert isinstance(parse_rule("rightmost"), Rightmost)
        assert parse_rule("random:3") == RandomRule(3)
        assert isinstance(parse_rule("moding", NQ_MODES), ModingCompatible)
        with pytest.raises(ValueError):
            parse_rule("moding")
        with pytest.raises(ValueError):
            parse_rule("outermost")


class TestBuiltins:
    def test_tests(self):
        P = program("p(a).")
        assert builtin_result(parse_atom("constant(a)"), P) is True
        assert builtin_result(parse_atom("constant(f(a))"), P) is False
        assert builtin_result(parse_atom("a \\== b"), P) is True
        assert builtin_result(parse_atom("1 =< 2"), P) is True
        assert builtin_result(parse_atom("3 < 2"), P) is False
        assert builtin_result(parse_atom("p(a)"), P) is None

    def test_insufficient_instantiation(self):
        with pytest.raises(InstantiationError):
            builtin_result(parse_atom("X < 2"), program("p(a)."))

    def test_user_definition_wins(self):
        P = program("constant(f(_)).")
        assert builtin_result(parse_atom("constant(f(a))"), P) is None

    def test_error_counted_not_raised(self):
        v = verify_tree(program("p(X) :- X < 1."), parse_query("p(Y)"))
        assert v.builtin_errors == 1
        assert v.answers == ()


class TestVerifyTree:
    def test_nqueens_not_occur_check_free(self):
        v = verify_tree(corpus("nqueens").program, parse_query("pq(s(0),L,[L|_],_)"))
        assert v.occur_check_free is False
        assert v.counterexample.clause_index == 3
        assert v.counterexample.trace is not None

    @pytest.mark.parametrize("rule", [Leftmost(), Rightmost(), RandomRule(1)])
    def test_nqueens_weakly_free(self, rule):
        v = verify_tree(corpus("nqueens").program, parse_query("pqs(s(s(0)),[Q1,Q2],_,_)"), rule, depth=12)
        assert v.weakly_occur_check_free is True
        assert v.weak_counterexample is None

    def test_use2(self):
        v = verify_tree(corpus("use2").program, parse_query("p([1],f(Y,Z),[Y|T])"))
        assert (v.occur_check_free, v.weakly_occur_check_free) == (False, True)
        assert not v.truncated

    def test_p_xx(self):
        v = verify_tree(program("p(X,X)."), parse_query("p(f(Y,g(Y)),f(Z,Z))"))
        assert v.weakly_occur_check_free is False
        assert v.weak_counterexample.clause_index == 1

    def test_truncation_is_reported(self):
        P = program("n(s(X)) :- n(X).\nn(0).")
        v = verify_tree(P, parse_query("n(Y)"), depth=5)
        assert v.truncated
        assert v.occur_check_free is True
        v = verify_tree(P, parse_query("n(Y)"), nodes=3)
        assert v.truncated and v.nodes == 3

    def test_exhausted_budget_gives_unknown(self):
        v = verify_tree(corpus("nqueens").program, parse_query("pq(s(0),L,[L|_],_)"), budget=1)
        assert v.unknown_decisions > 0
        assert v.occur_check_free in (False, None)

    def test_floundering_and_violations(self):
        P = corpus("nqueens").program
        q = parse_query("pqs(X,A,B,C)")
        assert verify_tree(P, q, ModingCompatible(NQ_MODES)).floundered_leaves == 1
        v = verify_tree(P, q, ModingCompatible(NQ_MODES, "leftmost-ground"), depth=3)
        assert v.compatibility_violations >= 1

    def test_bounds_must_be_positive(self):
        with pytest.raises(ValueError):
            list(walk(program("p."), parse_query("p"), Leftmost(), depth=0))


class TestProbe:
    def test_nqueens_stays_one_ground(self):
        def one_ground(q):
            return all(is_ground(input_terms(a, NQ_MODES)) for a in q.atoms)

        for rule in (Leftmost(), Rightmost(), RandomRule(4)):
            r = probe_invariant(corpus("nqueens").program, parse_query("pqs(s(s(0)),[Q1,Q2],_,_)"),
                                rule, one_ground, depth=12)
            assert r.holds_on_all_visited

    def test_flatten_stays_tidy(self):
        m = Moding.of({("constant", 1): "+", ("\\==", 2): "++"}, flatten="+-", flatten_dl="+-+")
        r = probe_invariant(corpus("flatten").program, parse_query("flatten([a,[b]],R)"),
                            Leftmost(), lambda q: bool(is_tidy_query(q, m)), depth=30)
        assert r.holds_on_all_visited and r.visited > 5

    def test_short_queries(self):
        r = probe_invariant(program("p(X,X)."), parse_query("p(a,b)"), Leftmost(), lambda q: len(q) <= 1)
        assert r.holds_on_all_visited

    def test_counterexample(self):
        r = probe_invariant(program("p :- q, q.\nq."), parse_query("p"), Leftmost(), lambda q: len(q) <= 1)
        assert not r.holds_on_all_visited
        assert len(r.counterexample) == 2


class TestAnswers:
    def test_fact(self):
        assert answers(program("p(a)."), parse_query("p(X)")) == [parse_query("p(a)")]

    def test_flatten(self):
        got = answers(corpus("flatten").program, parse_query("flatten([a,[b]],R)"), depth=30)
        assert got == [parse_query("flatten([a,[b]],[a,b])")]

    def test_derivative(self):
        got = answers(corpus("derivative").program, parse_query("d(x*x,x,T)"), depth=20)
        assert parse_query("d(x*x,x,x*s(0)+s(0)*x)") in got

    def test_quicksort(self):
        got = answers(corpus("quicksort_dl").program, parse_query("quicksort([3,1,2],S)"), depth=40)
        assert got == [parse_query("quicksort([3,1,2],[1,2,3])")]

    def test_answers_keep_program_order(self):
        got = answers(program("p(a).\np(b)."), parse_query("p(X)"))
        assert got == [parse_query("p(a)"), parse_query("p(b)")]
        got = answers(program("p(a).\np(b)."), parse_query("p(X)"), Rightmost())
        assert got == [parse_query("p(a)"), parse_query("p(b)")]


PREDS = [("p", 2), ("q", 1)]


class TestProperties:
    @settings(max_examples=50)
    @given(st.integers(0, 2**32))
    def test_resolvent_shape(self, seed):
        rng = random.Random(seed)
        q = rand_query(rng, PREDS, ["X", "Y"], max_len=3)
        c = rand_clause(rng, PREDS, ["X", "Y", "Z"])
        idx = rng.randrange(len(q))
        if q[idx].signature != c.head.signature:
            return
        out = resolve(q, idx, c, itertools.count(1))
        if out is None:
            return
        resolvent, theta = out
        assert len(resolvent) == len(q) - 1 + len(c.body)
        untouched = [a for i, a in enumerate(q.atoms) if i != idx]
        for a in untouched:
            assert apply(a, theta) in resolvent.atoms

    @settings(max_examples=30)
    @given(st.integers(0, 2**32))
    def test_walk_node_count_respects_bound(self, seed):
        rng = random.Random(seed)
        P = program("p(X,Y) :- q(X), p(Y,X).\np(a,b).\nq(a).\nq(b).")
        q = rand_query(rng, PREDS, ["X", "Y"], max_len=2)
        stats = WalkStats()
        for _ in walk(P, q, RandomRule(seed), depth=6, nodes=40, stats=stats, decide=False):
            pass
        assert stats.nodes <= 40
        for a in stats.answers:
            assert match(Compound(",", tuple(x.as_term() for x in q)),
                         Compound(",", tuple(x.as_term() for x in a))) is not None
