import random

import hypothesis.strategies as st
import pytest
from hypothesis import given, settings

from crpqmin.errors import NotAnExpansionError, ResourceLimitError
from crpqmin.evaluation import evaluate
from crpqmin.morphisms import find_hom
from crpqmin.query import Multigraph, parse_crpq
from crpqmin.refinement import expansions
from crpqmin.structure import (
    check_strong_minimality,
    contract,
    internal_vars,
    is_fully_contracted,
    is_minor,
    remove_redundant_atoms,
    segment_count,
    segment_graph,
    segments,
)

from oracles import brute_is_minor, random_crpq, random_db, random_regex_text

E1 = "query q(x,y){ x -[a+]-> y; x -[(aa)+]-> y; }"
E7 = "alphabet a, b, c;\nquery q(x,y){ x -[a]-> t; t -[b]-> y; x -[c]-> y; }"


def graph(vertices, pairs):
    return Multigraph(tuple(vertices), tuple((s, t, i) for i, (s, t) in enumerate(pairs)))


def _pairs(g):
    return [(s, t) for s, t, _ in g.edges]


# contraction


def test_contract_two_step_path():
    q = parse_crpq("alphabet a, b;\nquery q(x,z){ x -[a]-> t; t -[b]-> z; }")
    c = contract(q)
    assert c.n_atoms == 1 and c.vars == ("x", "z")
    assert c.atoms[0].label.accepts(("a", "b")) and not c.atoms[0].label.accepts(("a",))


def test_e1_is_already_contracted():
    q = parse_crpq(E1)
    assert contract(q) == q and is_fully_contracted(q)


def test_three_atom_chain():
    q = parse_crpq("alphabet a, b;\nquery q(x,y){ x -[a+]-> s; s -[b]-> t; t -[a|b]-> y; }")
    c = contract(q)
    assert c.n_atoms == 1
    rng = random.Random(3)
    for _ in range(50):
        db = random_db(rng, rng.randint(1, 4), rng.randint(0, 7))
        assert evaluate(q, db) == evaluate(c, db)


def test_lone_self_loop_is_kept():
    q = parse_crpq("query q(){ x -[a]-> x; }")
    assert internal_vars(q) == ["x"]
    assert contract(q) == q


# segments


def test_e7_segments():
    q = parse_crpq(E7)
    segs = segments(q)
    assert len(segs) == 2
    assert sorted(s.atoms for s in segs) == [(0, 1), (2,)]
    g = segment_graph(q)
    assert set(g.vertices) == {"x", "y"} and _pairs(g) == [("x", "y"), ("x", "y")]


def test_isolated_cycle_segment():
    q = parse_crpq("query q(){ x -[a]-> x; }")
    (seg,) = segments(q)
    assert seg.cyclic
    g = segment_graph(q)
    assert len(g.vertices) == 1 and _pairs(g) == [(g.vertices[0], g.vertices[0])]


def test_cycle_through_internal_vars():
    q = parse_crpq("query q(){ x -[a]-> y; y -[b]-> z; z -[a]-> x; }")
    assert segment_count(q) == 1
    assert contract(q).n_atoms == 1


@given(st.integers(0, 100_000))
@settings(max_examples=150, deadline=None)
def test_segment_invariants(seed):
    rng = random.Random(seed)
    q = random_crpq(rng, rng.randint(0, 5), rng.randint(1, 5), random_regex_text)
    segs = segments(q)
    flat = sorted(i for s in segs for i in s.atoms)
    assert flat == list(range(q.n_atoms))
    c = contract(q)
    assert c.n_atoms == segment_count(q)
    assert is_fully_contracted(c) and segment_count(c) == c.n_atoms
    for _ in range(5):
        db = random_db(rng, rng.randint(1, 3), rng.randint(0, 5))
        assert evaluate(q, db) == evaluate(c, db)


# minors


def test_minor_examples():
    path = graph("xyz", [("x", "y"), ("y", "z")])
    parallel = graph("xy", [("x", "y"), ("x", "y")])
    assert is_minor(path, path)
    assert is_minor(graph("uv", [("u", "v")]), path)
    assert not is_minor(parallel, path)
    assert not brute_is_minor("xy", [("x", "y"), ("x", "y")], "xyz", [("x", "y"), ("y", "z")])


def test_minor_size_cap():
    big = graph(range(10), [(i, i + 1) for i in range(9)])
    with pytest.raises(ResourceLimitError):
        is_minor(big, big)


def _random_graph(rng, n_v, n_e):
    vs = [f"v{i}" for i in range(n_v)]
    return vs, [(rng.choice(vs), rng.choice(vs)) for _ in range(n_e)]


@given(st.integers(0, 100_000))
@settings(max_examples=120, deadline=None)
def test_minor_agrees_with_search(seed):
    rng = random.Random(seed)
    gv, ge = _random_graph(rng, rng.randint(1, 4), rng.randint(0, 4))
    hv, he = _random_graph(rng, rng.randint(1, 3), rng.randint(0, 3))
    assert is_minor(graph(hv, he), graph(gv, ge)) == brute_is_minor(hv, he, gv, ge)


@given(st.integers(0, 100_000))
@settings(max_examples=60, deadline=None)
def test_expansion_segment_graph_is_a_minor(seed):
    rng = random.Random(seed)
    q = random_crpq(rng, rng.randint(1, 3), 3, random_regex_text)
    under = q.underlying_graph()
    for i, e in enumerate(expansions(q, 4, max_total=8)):
        if i >= 6:
            break
        assert is_minor(segment_graph(e.cq), under)


# redundancy


def test_e1_drops_plus_atom():
    rep = remove_redundant_atoms(parse_crpq(E1), mode="bounded", max_len=8)
    assert [a.label.text for a in rep.query.atoms] == ["(a.a)+"]
    assert len(rep.removed) == 1 and not rep.complete


def test_duplicate_atom_removal_is_complete():
    rep = remove_redundant_atoms(parse_crpq("query q(x,y){ x -[a+]-> y; x -[a+]-> y; }"))
    assert rep.query.n_atoms == 1 and rep.complete
    assert rep.status == "non-redundant (complete)"


def test_single_atom_unchanged():
    q = parse_crpq("query q(x,y){ x -[a+]-> y; }")
    rep = remove_redundant_atoms(q)
    assert rep.query == q and rep.removed == ()


# certificates


def test_e1_dichotomy():
    u = parse_crpq(E1)
    bad = check_strong_minimality(u, 0, [("a",), ("a", "a")], hom_bound=4)
    assert bad.status == "refuted"
    assert bad.witness.words == (("a", "a"), ("a", "a"))
    good = check_strong_minimality(u, 0, [("a", "a"), ("a", "a")], hom_bound=4)
    assert good.status == "verified" and good.segment_count == 1
    assert good.lower_bound == 1 <= u.n_atoms
    assert not good.strongly_minimal


def test_plus_loop_has_no_hom_minimal_expansion():
    u = parse_crpq("query q(){ x -[a+]-> x; }")
    for n in (1, 2, 3):
        # the cycle of length 2n maps onto the n-cycle but not back
        cert = check_strong_minimality(u, 0, [("a",) * n], hom_bound=2 * n)
        assert cert.status == "refuted" and cert.witness.words == (("a",) * (2 * n),)
        assert cert.lower_bound is None


def test_single_letter_atom_is_strongly_minimal():
    u = parse_crpq("query q(x,y){ x -[a]-> y; }")
    cert = check_strong_minimality(u, 0, [("a",)], hom_bound=2)
    assert cert.strongly_minimal


def test_refuted_witness_maps_in_but_not_back():
    u = parse_crpq(E1)
    cert = check_strong_minimality(u, 0, [("a", "a", "a"), ("a", "a")], hom_bound=4)
    assert cert.status == "refuted"
    assert find_hom(cert.witness.cq, cert.expansion.cq) is not None
    assert find_hom(cert.expansion.cq, cert.witness.cq) is None


def test_non_expansion_is_rejected():
    with pytest.raises(NotAnExpansionError):
        check_strong_minimality(parse_crpq(E1), 0, [("a",), ("a",)], hom_bound=2)
    with pytest.raises(NotAnExpansionError):
        check_strong_minimality(parse_crpq(E1), 3, [("a",), ("a", "a")], hom_bound=2)
