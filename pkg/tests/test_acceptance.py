"""The nine acceptance criteria, each at its stated size and time limit.

Every test records a single PASS/FAIL line (see conftest.py) before it
asserts, so a summary appears at the end of the pytest run.
"""

import itertools
import random
import time

from crpqmin.approximation import minimize_crpq_bruteforce, under_approximation
from crpqmin.automata import (
    ast_size,
    concat,
    intersect,
    language_equal,
    language_inclusion,
    parse_regex,
    regex_nfa,
    sigma_star,
)
from crpqmin.containment import (
    NOT_CONTAINED,
    claim_size_bound,
    contained,
    contained_bounded,
    contained_single_path,
    contained_sre,
    falsify_equivalence,
    sre_normalize,
)
from crpqmin.errors import FragmentError
from crpqmin.evaluation import evaluate
from crpqmin.gamma import gamma_equiv, tilde_language, type_included
from crpqmin.morphisms import all_homs, are_isomorphic, core, find_hom, hom_equivalent, is_embedding
from crpqmin.query import Atom, GraphDb, Ucrpq, parse_crpq
from crpqmin.automata import Label
from crpqmin.refinement import expansions
from crpqmin.structure import (
    check_strong_minimality,
    contract,
    is_minor,
    remove_redundant_atoms,
    segment_count,
    segment_graph,
    segments,
)
from crpqmin.treepattern import decode, encode

from oracles import (
    all_tree_patterns,
    brute_evaluate,
    random_crpq,
    random_db,
    random_regex_text,
    random_sre_text,
)

E1 = "query g(x,y){ x -[a+]-> y; x -[(aa)+]-> y; }"


def test_ac1_remark_instance(acceptance):
    start = time.perf_counter()
    gamma = parse_crpq(E1)
    even = regex_nfa("(aa)+", "a")
    problems = []

    rep = remove_redundant_atoms(gamma)
    kept = [a.label for a in rep.query.atoms]
    if not (len(kept) == 1 and language_equal(kept[0].nfa, even)):
        problems.append(f"redundancy kept {[k.text for k in kept]}")

    found = minimize_crpq_bruteforce(gamma, 1)
    target = parse_crpq("query t(x,y){ x -[(aa)+]-> y; }")
    if found.query is None:
        problems.append("brute force found nothing")
    else:
        fwd, back = contained(found.query, target), contained(target, found.query)
        if not (fwd.status == back.status == "contained"):
            problems.append(f"brute-force result {found.query.atoms[0].label.text} not equivalent to (aa)+")
        if falsify_equivalence(gamma, found.query, trials=500, db_size=5, seed=0) is not None:
            problems.append("random databases separate the result from the query")

    bad = check_strong_minimality(gamma, 0, [("a",), ("a", "a")], hom_bound=4)
    good = check_strong_minimality(gamma, 0, [("a", "a"), ("a", "a")], hom_bound=4)
    if bad.status != "refuted":
        problems.append("expansion (a, aa) was not refuted")
    if good.status != "verified" or good.segment_count != 1:
        problems.append(f"expansion (aa, aa): {good.status}, segments {good.segment_count}")

    elapsed = time.perf_counter() - start
    if elapsed >= 10:
        problems.append(f"took {elapsed:.1f}s")
    ok = acceptance(1, not problems, "; ".join(problems) or f"all four parts hold in {elapsed:.2f}s")
    assert ok, problems


# SRE completeness

_WIDEN = {"a": "a+", "b": "b+"}


def _sre_side(rng, prefix, arity):
    n = rng.randint(1, 2)
    qs = [random_crpq(rng, rng.randint(1, 3), 3, random_sre_text, arity=arity, name=f"{prefix}{i}") for i in range(n)]
    return Ucrpq(tuple(qs)).with_alphabet("ab")


def _weakened(rng, q):
    """Drop some atoms and widen some letters; the result contains q."""
    atoms = [a for a in q.atoms if rng.random() < 0.7] or [q.atoms[0]]
    out = []
    for a in atoms:
        text = a.label.text
        if rng.random() < 0.5:
            text = ".".join(_WIDEN.get(f, f) if rng.random() < 0.5 else f for f in text.split("."))
        out.append(Atom(a.source, Label.parse(text, q.alphabet), a.target))
    return q.replace(atoms=tuple(out), declared=q.vars, name="r0")


def test_ac2_sre_completeness(acceptance):
    start = time.perf_counter()
    rng = random.Random(0)
    disagreements, oversized, positives = [], [], 0
    for i in range(300):
        arity = rng.randint(0, 2)
        left = _sre_side(rng, "l", arity)
        # every third pair is built to be contained, so both answers get exercised
        if i % 3 == 2:
            right = Ucrpq((_weakened(rng, left.disjuncts[0]),)).with_alphabet("ab")
        else:
            right = _sre_side(rng, "r", arity)
        v = contained_sre(left, right)
        # compare per factor: the bounded search runs on the same one-factor-per-atom form
        norm = Ucrpq(tuple(sre_normalize(d) for d in left.disjuncts), left.alphabet, left.arity)
        w = contained_bounded(norm, right, v.bound + 3)
        if v.contained != w.contained:
            disagreements.append(i)
        positives += v.contained
        if v.status == NOT_CONTAINED and v.counterexample.size > claim_size_bound(left, right):
            oversized.append(i)
    elapsed = time.perf_counter() - start
    ok = not disagreements and not oversized and elapsed < 60
    acceptance(
        2,
        ok,
        f"300 pairs ({positives} contained), {len(disagreements)} disagreements, "
        f"{len(oversized)} counterexamples above the size bound, {elapsed:.1f}s",
    )
    assert ok, (disagreements, oversized, elapsed)


# single path


def _epsilon_free_regex(rng):
    while True:
        text = random_regex_text(rng, depth=rng.randint(1, 3))
        if ast_size(parse_regex(text, "ab")) > 6:
            continue
        nfa = regex_nfa(text, "ab")
        if not nfa.has_epsilon() and not nfa.is_empty():
            return text, nfa


def test_ac3_single_path(acceptance):
    rng = random.Random(0)
    header = "alphabet a, b;\n"
    star = sigma_star("ab")
    bad_truth, bad_refutation, refuted = [], [], 0
    for i in range(200):
        k_text, K = _epsilon_free_regex(rng)
        ls = [_epsilon_free_regex(rng) for _ in range(rng.randint(1, 3))]
        verdict = contained_single_path(K, [n for _, n in ls])
        inner = ls[0][1]
        for _, n in ls[1:]:
            inner = intersect(inner, n)
        truth = language_inclusion(K, concat(concat(star, inner), star))
        if verdict != truth:
            bad_truth.append(i)
        left = parse_crpq(header + f"query l(){{ x -[{k_text}]-> y; }}")
        right = parse_crpq(header + "query r(){ " + " ".join(f"x -[{t}]-> y;" for t, _ in ls) + " }")
        if contained_bounded(left, right, 8).status == NOT_CONTAINED:
            refuted += 1
            if verdict:
                bad_refutation.append(i)
    ok = not bad_truth and not bad_refutation
    acceptance(
        3,
        ok,
        f"200 instances, {len(bad_truth)} disagreements with the language ground truth, "
        f"{len(bad_refutation)} with {refuted} bounded refutations",
    )
    assert ok, (bad_truth, bad_refutation)


# structure


def test_ac4_structural_invariants(acceptance):
    rng = random.Random(0)
    failures = []
    minor_checks = 0
    for i in range(500):
        q = random_crpq(rng, rng.randint(0, 5), rng.randint(1, 5), random_regex_text, name=f"q{i}")
        flat = sorted(j for s in segments(q) for j in s.atoms)
        if flat != list(range(q.n_atoms)):
            failures.append((i, "partition"))
        c = contract(q)
        if c.n_atoms != segment_count(q):
            failures.append((i, "contraction size"))
        for _ in range(20):
            db = random_db(rng, rng.randint(1, 4), rng.randint(0, 7))
            if evaluate(q, db) != evaluate(c, db):
                failures.append((i, "evaluation"))
                break
        under = q.underlying_graph()
        pool = list(itertools.islice(expansions(q, 3), 40))
        for e in rng.sample(pool, min(3, len(pool))):
            minor_checks += 1
            if not is_minor(segment_graph(e.cq), under):
                failures.append((i, "minor"))
    ok = not failures
    acceptance(4, ok, f"500 queries, {minor_checks} expansion minor checks, {len(failures)} failures")
    assert ok, failures[:10]


# evaluation grid


def _database_grid():
    """Every database on at most 3 nodes with at most 5 edges over {a, b},
    one per isomorphism class."""
    seen = set()
    for n in range(1, 4):
        nodes = [f"u{i}" for i in range(n)]
        triples = [(s, a, t) for s in nodes for a in "ab" for t in nodes]
        perms = [dict(zip(nodes, p)) for p in itertools.permutations(nodes)]
        for k in range(6):
            for es in itertools.combinations(triples, k):
                key = min(tuple(sorted((p[s], a, p[t]) for s, a, t in es)) for p in perms)
                if (n, key) not in seen:
                    seen.add((n, key))
                    yield GraphDb(nodes, es)


def _query_grid():
    rng = random.Random(0)
    qs = [parse_crpq("query e(){ }"), parse_crpq("query v(x){ x; }")]
    for n_atoms in (1, 2, 3):
        for arity in (0, 1, 2):
            for j in range(26):
                qs.append(random_crpq(rng, n_atoms, 3, random_regex_text, arity=arity, name=f"q{n_atoms}{arity}{j}"))
    return qs


def test_ac5_evaluation_grid(acceptance):
    start = time.perf_counter()
    dbs = list(_database_grid())
    qs = _query_grid()
    wrong = []
    for q in qs:
        for db in dbs:
            if evaluate(q, db) != brute_evaluate(q, db):
                wrong.append((str(q), db))
    elapsed = time.perf_counter() - start
    ok = not wrong and elapsed < 120
    acceptance(
        5, ok, f"{len(qs)} queries x {len(dbs)} databases, {len(wrong)} disagreements, {elapsed:.1f}s"
    )
    assert ok, wrong[:3]


# under-approximation


def test_ac6_approximation_soundness(acceptance):
    rng = random.Random(0)
    failures, members, bounded = [], 0, 0
    for i in range(100):
        gamma = random_crpq(rng, rng.randint(1, 3), 3, random_sre_text, arity=rng.randint(0, 2), name=f"g{i}")
        for k in (1, 2):
            union = under_approximation(gamma, k, m=3, c=2).union
            for alpha in union.disjuncts:
                members += 1
                if alpha.n_atoms > k:
                    failures.append((i, k, "too many atoms"))
                try:
                    v = contained_sre(alpha, gamma)
                except FragmentError:
                    failures.append((i, k, f"not an SRE member: {alpha}"))
                    continue
                bounded += not v.complete
                if not v.contained:
                    failures.append((i, k, str(alpha)))
    ok = not failures
    acceptance(
        6,
        ok,
        f"100 queries x k in {{1,2}}, {members} members checked "
        f"({bounded} of the verdicts only bounded), {len(failures)} failures",
    )
    assert ok, failures[:5]


# cores


def test_ac7_core_properties(acceptance):
    rng = random.Random(0)
    failures = []
    for i in range(300):
        p = random_crpq(rng, rng.randint(1, 5), rng.randint(1, 4), lambda r: r.choice("ab"), name=f"p{i}")
        c = core(p)
        if not are_isomorphic(core(c), c):
            failures.append((i, "idempotence"))
        emb = find_hom(c, p, pin={v: v for v in c.vars}, injective=True)
        if emb is None or not is_embedding(emb, c, p):
            failures.append((i, "embedding"))
        if any(len(set(h.as_dict().values())) < c.n_vars for h in all_homs(c, c)):
            failures.append((i, "not a core"))
        # an equivalent query: p plus renamed copies of some of its atoms
        extra = p
        for j in range(rng.randint(1, 2)):
            copy = p.rename({v: f"{v}_{j}" for v in p.vars if v not in p.outputs})
            extra = extra.replace(atoms=extra.atoms + copy.atoms)
        other = random_crpq(rng, rng.randint(1, 5), rng.randint(1, 4), lambda r: r.choice("ab"), arity=p.arity)
        for q in (extra, other):
            if hom_equivalent(p, q) and not are_isomorphic(core(p), core(q)):
                failures.append((i, "cores of equivalent queries differ"))
        if not hom_equivalent(p, extra):
            failures.append((i, "copies changed the query"))
    ok = not failures
    acceptance(7, ok, f"300 queries, {len(failures)} failures")
    assert ok, failures[:5]


# tree patterns


def test_ac8_tree_pattern_round_trip(acceptance):
    count, bad = 0, []
    for t in all_tree_patterns(5):
        count += 1
        if decode(encode(t)) != t:
            bad.append(t)
    ok = not bad
    acceptance(8, ok, f"{count} tree patterns up to 5 nodes, {len(bad)} round-trip failures")
    assert ok, bad[:3]


# word types


def test_ac9_gamma_types(acceptance):
    rng = random.Random(0)
    failures = []
    for i in range(50):
        g = random_crpq(rng, rng.randint(1, 2), rng.randint(2, 3), lambda r: random_regex_text(r, depth=2), name=f"g{i}")
        words = [tuple(rng.choice("ab") for _ in range(rng.randint(0, 6))) for _ in range(1000)]
        for u, v, w in zip(words[0::3], words[1::3], words[2::3]):
            if not gamma_equiv(u, u, g) or gamma_equiv(u, v, g) != gamma_equiv(v, u, g):
                failures.append((i, "reflexive/symmetric"))
            if gamma_equiv(u, v, g) and gamma_equiv(v, w, g) and not gamma_equiv(u, w, g):
                failures.append((i, "transitive"))
        for u, v, w in list(zip(words[0::3], words[1::3], words[2::3]))[:20]:
            if not type_included(u, u, g):
                failures.append((i, "type reflexive"))
            if type_included(u, v, g) and type_included(v, w, g) and not type_included(u, w, g):
                failures.append((i, "type transitive"))
        lang = g.atoms[0].label.nfa
        widened = tilde_language(lang, g, sample_cap=6)
        for z in words:
            if lang.accepts(z) and not widened(z):
                failures.append((i, f"{''.join(z)} in L but not in the widening"))
    ok = not failures
    acceptance(9, ok, f"50 queries x 1000 words, {len(failures)} failures")
    assert ok, failures[:5]
