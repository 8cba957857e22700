import random

import hypothesis.strategies as st
import pytest
from hypothesis import given, settings

from crpqmin.automata import regex_nfa, sublanguage
from crpqmin.gamma import (
    automata_of,
    class_automaton,
    class_vector,
    gamma_equiv,
    gamma_type,
    is_realizable,
    tilde_language,
    triples,
    type_included,
)
from crpqmin.query import parse_crpq

from oracles import all_words, random_crpq, random_regex_text

E1 = parse_crpq("query q(x,y){ x -[a+]-> y; x -[(aa)+]-> y; }")
PLUS = parse_crpq("alphabet a, b;\nquery q(x,y){ x -[a+]-> y; }")


def test_vector_matches_sublanguage_membership():
    nfas = automata_of(E1)
    for w in all_words("a", 5):
        expected = tuple(sublanguage(nfas[i], p, r).accepts(w) for i, p, r in triples(E1))
        assert class_vector(w, E1) == expected


def test_e1_classes():
    assert gamma_equiv("a", "a", E1)
    assert gamma_equiv("a", "aaa", E1)
    assert not gamma_equiv("a", "aa", E1)


def test_type_of_empty_word():
    t = gamma_type("", E1)
    eps = class_vector("", E1)
    assert t.tuples == {(eps,) * n for n in range(1, E1.n_vars + 2)}


def test_type_of_one_letter_with_two_parts():
    t = gamma_type("a", E1, max_parts=2)
    a, eps = class_vector("a", E1), class_vector("", E1)
    assert t.tuples == {(a,), (eps, a), (a, eps)}
    assert t <= t and type_included("a", "a", E1)


def test_tilde_contains_language_and_larger_types():
    accepts = tilde_language(regex_nfa("a", "ab"), PLUS)
    assert accepts("a")
    # aa is in the same class as a and also splits into two a-parts
    assert gamma_type("a", PLUS).tuples < gamma_type("aa", PLUS).tuples
    assert accepts("aa")
    assert not accepts("b")
    assert not accepts("ac")


def test_class_automaton_of_even_words():
    vec = class_vector("aa", E1)
    n = class_automaton(vec, E1)
    assert [w for w in all_words("a", 6) if n.accepts(w)] == [("a",) * 2, ("a",) * 4, ("a",) * 6]
    assert is_realizable(vec, E1)
    assert not is_realizable((False,) * len(vec), E1)
    with pytest.raises(ValueError):
        class_automaton((True,), E1)


@given(st.integers(0, 100_000))
@settings(max_examples=40, deadline=None)
def test_class_automaton_accepts_exactly_the_class(seed):
    rng = random.Random(seed)
    g = random_crpq(rng, rng.randint(1, 2), 2, lambda r: random_regex_text(r, depth=2), arity=0)
    u = tuple(rng.choice("ab") for _ in range(rng.randint(0, 3)))
    n = class_automaton(class_vector(u, g), g)
    for w in all_words("ab", 4):
        assert n.accepts(w) == gamma_equiv(u, w, g)


@given(st.integers(0, 100_000))
@settings(max_examples=60, deadline=None)
def test_equivalence_and_preorder_laws(seed):
    rng = random.Random(seed)
    g = random_crpq(rng, rng.randint(1, 2), 2, lambda r: random_regex_text(r, depth=2))
    words = [tuple(rng.choice("ab") for _ in range(rng.randint(0, 4))) for _ in range(3)]
    u, v, w = words
    assert gamma_equiv(u, u, g)
    assert gamma_equiv(u, v, g) == gamma_equiv(v, u, g)
    if gamma_equiv(u, v, g) and gamma_equiv(v, w, g):
        assert gamma_equiv(u, w, g)
    assert type_included(u, u, g)
    if type_included(u, v, g) and type_included(v, w, g):
        assert type_included(u, w, g)
    # equivalent words are interchangeable inside a concatenation
    if gamma_equiv(u, v, g):
        assert gamma_equiv(u + w, v + w, g) and gamma_equiv(w + u, w + v, g)


@given(st.integers(0, 100_000))
@settings(max_examples=30, deadline=None)
def test_language_inside_its_widening(seed):
    rng = random.Random(seed)
    g = random_crpq(rng, rng.randint(1, 2), 2, lambda r: random_regex_text(r, depth=2))
    lang = g.atoms[0].label.nfa
    accepts = tilde_language(lang, g, sample_cap=4)
    for u in lang.words(4):
        assert accepts(u)
