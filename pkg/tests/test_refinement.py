import random

import hypothesis.strategies as st
from hypothesis import given, settings

from crpqmin.automata import concat, language_equal, language_inclusion, regex_nfa
from crpqmin.evaluation import union_holds
from crpqmin.query import Atom, parse_crpq
from crpqmin.refinement import (
    apply_refinement,
    atom_refinements,
    canonical_database,
    count_expansions,
    expansion_from_words,
    expansions,
    refinements,
)

from oracles import random_crpq, random_regex_text


def _atom(text):
    return parse_crpq(f"query q(x,y){{ x -[{text}]-> y; }}").atoms[0]


def _chain_texts(r):
    return tuple(lab.text for lab in r.chain) if r.chain is not None else None


def test_plus_one_step():
    rs = list(atom_refinements(_atom("a+"), 1))
    assert len(rs) == 2
    assert language_equal(rs[0].chain[0].nfa, regex_nfa("a+", "a"))
    assert rs[0].states == (0, 1)
    assert rs[1].chain[0].single_letter == "a"


def test_even_a_two_steps_includes_letter_then_odd_tail():
    rs = list(atom_refinements(_atom("(aa)+"), 2))
    target = regex_nfa("a.(a.a)*", "a")
    found = [
        r
        for r in rs
        if r.chain is not None
        and len(r.chain) == 2
        and r.chain[0].single_letter == "a"
        and language_equal(r.chain[1].nfa, target)
    ]
    assert found and found[0].states == (0, 1, 2)


def test_star_admits_equality():
    rs = list(atom_refinements(_atom("a*"), 1))
    assert rs[0].is_equality


def test_refinements_are_distinct():
    rs = list(atom_refinements(_atom("(a|b).b+"), 3))
    keys = [(_chain_texts(r), r.states) for r in rs]
    assert len({tuple(lab.nfa for lab in r.chain) for r in rs}) == len(rs)
    assert len(keys) == len(rs)


def test_collapse_matches_worked_example():
    q = parse_crpq("query g(x,y){ x -[a*]-> y; y -[c]-> y; }")
    eq = next(atom_refinements(q.atoms[0], 1, 0))
    c = next(r for r in atom_refinements(q.atoms[1], 1, 1) if r.chain[0].single_letter == "c")
    rho = apply_refinement(q, [eq, c])
    assert rho.outputs == ("x", "x")
    assert [(a.source, a.label.text, a.target) for a in rho.atoms] == [("x", "c", "x")]


def test_query_itself_is_a_one_refinement():
    q = parse_crpq("query g(x,y){ x -[a+]-> z; z -[b.a]-> y; }")
    assert q in list(refinements(q, 1))


def test_empty_boolean_query_has_one_refinement():
    q = parse_crpq("query g(){ }")
    assert list(refinements(q, 2)) == [q]


def test_expansion_examples():
    words = [e.words[0] for e in expansions(parse_crpq("query q(x,y){ x -[(aa)+]-> y; }"), 4)]
    assert words == [("a", "a"), ("a", "a", "a", "a")]
    e1 = parse_crpq("query q(x,y){ x -[a+]-> y; x -[(aa)+]-> y; }")
    assert [e.words for e in expansions(e1, 2)] == [(("a",), ("a", "a")), (("a", "a"), ("a", "a"))]
    star = list(expansions(parse_crpq("query q(x,y){ x -[a*]-> y; }"), 0))
    assert len(star) == 1 and star[0].cq.outputs == ("x", "x")
    assert count_expansions(e1, 4) == 4 * 2


def test_canonical_database_examples():
    e = expansion_from_words(parse_crpq("query q(x,y){ x -[(aa)+]-> y; }"), [("a", "a")])
    db, outs = canonical_database(e)
    assert len(db.vertices) == 3 and len(db.edges) == 2 and outs == ("x", "y")
    db0, outs0 = canonical_database(expansion_from_words(parse_crpq("query q(){ z; }"), []))
    assert db0.vertices == ("z",) and outs0 == ()
    e = expansion_from_words(parse_crpq("query q(x,y){ x -[a*]-> y; y -[b]-> z; }"), [(), ("b",)])
    db, outs = canonical_database(e)
    assert outs == ("x", "x") and len(db.vertices) == 2


@given(st.integers(0, 100_000))
@settings(max_examples=40, deadline=None)
def test_refinements_are_contained(seed):
    rng = random.Random(seed)
    q = random_crpq(rng, rng.randint(1, 2), 3, lambda r: random_regex_text(r, depth=2), arity=rng.randint(0, 2))
    for i, rho in enumerate(refinements(q, 2)):
        if i >= 12:
            break
        for j, e in enumerate(expansions(rho, 3)):
            if j >= 6:
                break
            db, outs = canonical_database(e)
            assert union_holds(q, db, outs)


@given(st.integers(0, 100_000))
@settings(max_examples=60, deadline=None)
def test_chain_concatenation_is_inside(seed):
    rng = random.Random(seed)
    text = random_regex_text(rng, depth=3)
    at = _atom(text)
    for r in atom_refinements(at, 3):
        if r.chain is None:
            assert at.label.has_epsilon()
            continue
        n = r.chain[0].nfa
        for lab in r.chain[1:]:
            n = concat(n, lab.nfa)
        assert language_inclusion(n, at.label.nfa)


@given(st.integers(0, 100_000))
@settings(max_examples=40, deadline=None)
def test_expansions_are_the_letter_refinements(seed):
    rng = random.Random(seed)
    q = random_crpq(rng, rng.randint(1, 2), 3, lambda r: random_regex_text(r, depth=2), arity=1)
    m = 2
    letters_only = {
        rho
        for rho in refinements(q, m)
        if all(a.label.single_letter is not None for a in rho.atoms)
    }
    # letter refinements may spell a letter through a longer sublanguage, so
    # compare after normalising labels to their letters
    exp = {e.cq for e in expansions(q, m)}
    assert {_norm(x) for x in letters_only} == {_norm(x) for x in exp}


def _norm(q):
    return (q.outputs, frozenset((a.source, a.label.single_letter, a.target) for a in q.atoms), frozenset(q.vars))


def test_fresh_variables_avoid_clashes():
    q = parse_crpq("query q(x){ x -[a.a]-> t0_1; }")
    e = expansion_from_words(q, [("a", "a")])
    assert len(set(e.cq.vars)) == 3
    assert Atom("x", q.atoms[0].label, "t0_1") in q.atoms
