import random

import hypothesis.strategies as st
from hypothesis import given, settings

from crpqmin.automata import Label
from crpqmin.evaluation import atom_table, evaluate, evaluate_union, exists, find_evaluation_map
from crpqmin.query import GraphDb, Ucrpq, parse_crpq, parse_query

from oracles import brute_evaluate, random_crpq, random_db, random_regex_text

PATH3 = GraphDb(["u0", "u1", "u2"], [("u0", "a", "u1"), ("u1", "a", "u2")])


def test_atom_table_even_a():
    assert atom_table(PATH3, Label.parse("(aa)+", "a")) == {("u0", "u2")}


def test_atom_table_plus():
    assert atom_table(PATH3, Label.parse("a+", "a")) == {("u0", "u1"), ("u1", "u2"), ("u0", "u2")}


def test_atom_table_epsilon_gives_identity():
    assert atom_table(PATH3, Label.parse("%eps", "a")) == {(v, v) for v in PATH3.vertices}


def test_single_edge():
    db = GraphDb(["u0", "u1"], [("u0", "a", "u1")])
    assert evaluate(parse_crpq("query q(x,y){ x -[a+]-> y; }"), db) == {("u0", "u1")}


def test_boolean_cycle_on_acyclic_db():
    assert evaluate(parse_crpq("query q(){ x -[a+]-> x; }"), PATH3) == set()


def test_e1_matches_even_a_on_path():
    db = GraphDb(["u0", "u1", "u2", "u3"], [("u0", "a", "u1"), ("u1", "a", "u2"), ("u2", "a", "u3")])
    e1 = parse_crpq("query q(x,y){ x -[a+]-> y; x -[(aa)+]-> y; }")
    even = parse_crpq("query q(x,y){ x -[(aa)+]-> y; }")
    assert evaluate(e1, db) == evaluate(even, db) == {("u0", "u2"), ("u1", "u3")}


def test_empty_boolean_query_holds():
    assert evaluate(parse_crpq("query q(){ }"), PATH3) == {()}


def test_union_semantics():
    u = parse_query("query p(x){ x -[a]-> y; } query r(x){ y -[a]-> x; }")
    assert evaluate_union(u, PATH3) == {("u0",), ("u1",), ("u2",)}
    same = Ucrpq((u.disjuncts[0], u.disjuncts[0]))
    assert evaluate_union(same, PATH3) == evaluate(u.disjuncts[0], PATH3)


def test_pinning():
    q = parse_crpq("query q(x,y){ x -[a+]-> y; }")
    assert evaluate(q, PATH3, {"x": "u1"}) == {("u1", "u2")}
    m = find_evaluation_map(q, PATH3, {"y": "u2", "x": "u0"})
    assert m is not None and m["x"] == "u0"
    assert not exists(q, PATH3, {"x": "u2"})


def test_variable_outside_atoms_ranges_over_nodes():
    q = parse_crpq("query q(x, z){ x -[a]-> y; z; }")
    assert len(evaluate(q, PATH3)) == 2 * 3


@given(st.integers(0, 100_000))
@settings(max_examples=150, deadline=None)
def test_agrees_with_all_assignments(seed):
    rng = random.Random(seed)
    q = random_crpq(rng, rng.randint(0, 3), rng.randint(1, 3), random_regex_text)
    db = random_db(rng, rng.randint(1, 4), rng.randint(0, 6))
    assert evaluate(q, db) == brute_evaluate(q, db)


@given(st.integers(0, 100_000))
@settings(max_examples=60, deadline=None)
def test_pinned_answers_are_a_subset(seed):
    rng = random.Random(seed)
    q = random_crpq(rng, rng.randint(1, 3), 3, random_regex_text, arity=2)
    db = random_db(rng, 3, 5)
    v = rng.choice(q.vars)
    node = rng.choice(db.vertices)
    full = evaluate(q, db)
    pinned = evaluate(q, db, {v: node})
    assert pinned <= full
    if v in q.outputs:
        i = q.outputs.index(v)
        assert pinned == {t for t in full if t[i] == node}


@given(st.integers(0, 100_000))
@settings(max_examples=60, deadline=None)
def test_monotone_under_database_homomorphisms(seed):
    rng = random.Random(seed)
    q = random_crpq(rng, rng.randint(1, 3), 3, random_regex_text, arity=1)
    db = random_db(rng, 4, 6)
    # merge nodes through a random map and keep every edge image
    target = [f"w{i}" for i in range(rng.randint(1, 4))]
    h = {v: rng.choice(target) for v in db.vertices}
    image = GraphDb(target, [(h[s], a, h[t]) for s, a, t in db.edges])
    mapped = {tuple(h[x] for x in ans) for ans in evaluate(q, db)}
    assert mapped <= evaluate(q, image)
