"""Containment and equivalence of unions of CRPQs.

Three procedures are offered:

* :func:`contained_bounded` enumerates expansions of the left query up to a
  per-atom word length and evaluates the right query on each canonical
  database.  A failure is a genuine counterexample; a clean pass only says
  that no counterexample exists up to the bound.
* :func:`contained_sre` is complete when the left query uses simple regular
  expressions: it normalizes both sides into single-factor atoms and runs the
  bounded check with a per-atom length that provably suffices.
* :func:`contained_single_path` decides the case of one left atom against a
  conjunction of right atoms sharing their endpoints by an automaton search.
"""

from __future__ import annotations

import random
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import islice

from .automata import (
    AnyStar,
    Label,
    LetterSet,
    Nfa,
    PlusFactor,
    StarLetter,
    inclusion_witness,
    sre_factor_ast,
)
from .errors import FragmentError, PreconditionError
from .evaluation import evaluate_union, union_holds
from .query import Atom, Crpq, GraphDb, Ucrpq, as_ucrpq
from .refinement import (
    Expansion,
    _bounded_combos,
    canonical_database,
    expansion_from_words,
    fresh_namer,
)

CONTAINED = "contained"
UP_TO_BOUND = "contained_up_to_bound"
NOT_CONTAINED = "not_contained"


@dataclass(frozen=True)
class Counterexample:
    disjunct: int
    expansion: Expansion
    db: GraphDb
    outputs: tuple

    @property
    def size(self) -> int:
        return self.expansion.cq.n_atoms


@dataclass(frozen=True)
class ContainmentVerdict:
    status: str
    mode: str
    bound: int | None = None
    counterexample: Counterexample | None = None
    notes: tuple = field(default=())

    @property
    def contained(self) -> bool:
        """True for both complete and bounded positive answers."""
        return self.status != NOT_CONTAINED

    @property
    def complete(self) -> bool:
        return self.status in (CONTAINED, NOT_CONTAINED)

    def to_json(self) -> dict:
        out = {"status": self.status, "mode": self.mode, "bound": self.bound, "notes": list(self.notes)}
        if self.counterexample is not None:
            ce = self.counterexample
            out["counterexample"] = {
                "disjunct": ce.disjunct,
                "words": [" ".join(w) for w in ce.expansion.words],
                "outputs": list(ce.outputs),
                "nodes": list(ce.db.vertices),
                "edges": [list(e) for e in ce.db.edges],
            }
        return out


def _check_arity(left: Ucrpq, right: Ucrpq):
    if left.disjuncts and right.disjuncts and left.arity != right.arity:
        raise PreconditionError(f"arity mismatch: {left.arity} vs {right.arity}")


def _failing(right: Ucrpq, q: Crpq, combos):
    """Index of the first word combination whose canonical database falsifies ``right``."""
    for i, combo in enumerate(combos):
        e = expansion_from_words(q, combo)
        db, outs = canonical_database(e)
        if not union_holds(right, db, outs):
            return i
    return None


def _worker(args):
    right, q, combos = args
    return _failing(right, q, combos)


def _word_lists(q: Crpq, max_len: int, per_atom: dict | None = None):
    out = []
    for i, at in enumerate(q.atoms):
        n = max_len if per_atom is None else per_atom.get(i, max_len)
        out.append(list(at.label.nfa.words(n)))
    return out


def _search_disjunct(q: Crpq, right: Ucrpq, word_lists, jobs: int, chunk: int = 256):
    combos = _bounded_combos(word_lists)
    if jobs <= 1:
        for combo in combos:
            e = expansion_from_words(q, combo)
            db, outs = canonical_database(e)
            if not union_holds(right, db, outs):
                return e, db, outs
        return None
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        while True:
            batch = [list(islice(combos, chunk)) for _ in range(jobs)]
            batch = [b for b in batch if b]
            if not batch:
                return None
            # results are consumed in submission order, so the first
            # failure in enumeration order wins regardless of timing
            for part, hit in zip(batch, pool.map(_worker, [(right, q, b) for b in batch])):
                if hit is not None:
                    e = expansion_from_words(q, part[hit])
                    db, outs = canonical_database(e)
                    return e, db, outs


def contained_bounded(left, right, max_len: int, jobs: int = 1, _per_atom=None) -> ContainmentVerdict:
    """Search expansions of ``left`` (atom words of length at most ``max_len``)
    for one whose canonical database does not satisfy ``right``."""
    left, right = as_ucrpq(left), as_ucrpq(right)
    _check_arity(left, right)
    for i, q in enumerate(left.disjuncts):
        per_atom = None if _per_atom is None else _per_atom[i]
        hit = _search_disjunct(q, right, _word_lists(q, max_len, per_atom), jobs)
        if hit is not None:
            e, db, outs = hit
            return ContainmentVerdict(NOT_CONTAINED, "bounded", max_len, Counterexample(i, e, db, outs))
    return ContainmentVerdict(UP_TO_BOUND, "bounded", max_len)


# ---------------------------------------------------------------------------
# Simple regular expressions


def sre_normalize(q: Crpq, allow=(PlusFactor, LetterSet, StarLetter, AnyStar)) -> Crpq:
    """Split every atom into one atom per SRE factor.

    Raises FragmentError when some label is not a concatenation of factors of
    the permitted kinds.
    """
    name = fresh_namer(q)
    atoms = []
    for i, at in enumerate(q.atoms):
        factors = at.label.sre_factors(extension=True)
        if factors is None or not factors:
            raise FragmentError(f"label {at.label.text!r} is not a simple regular expression")
        for f in factors:
            if not isinstance(f, allow):
                raise FragmentError(f"factor {f} of {at.label.text!r} is not permitted here")
        vs = [at.source] + [name(i, j) for j in range(1, len(factors))] + [at.target]
        for j, f in enumerate(factors):
            atoms.append(Atom(vs[j], Label.from_ast(sre_factor_ast(f), q.alphabet), vs[j + 1]))
    return q.replace(atoms=tuple(atoms), declared=q.vars)


def is_sre(u, extension=False) -> bool:
    allow = (PlusFactor, LetterSet, StarLetter, AnyStar) if extension else (PlusFactor, LetterSet)
    try:
        for d in as_ucrpq(u).disjuncts:
            sre_normalize(d, allow)
    except FragmentError:
        return False
    return True


def sre_bound(right) -> int:
    """Per-atom word length sufficient for SRE counterexamples."""
    right = as_ucrpq(right)
    return max((sre_normalize(d).n_atoms for d in right.disjuncts), default=0) + 1


def claim_size_bound(left, right) -> int:
    """Atom budget ``maxatoms(left) * (maxatoms(right) + 1)`` on normalized queries."""
    left, right = as_ucrpq(left), as_ucrpq(right)
    lmax = max((sre_normalize(d).n_atoms for d in left.disjuncts), default=0)
    return lmax * sre_bound(right)


def contained_sre(left, right, jobs: int = 1, anystar_len: int = 3) -> ContainmentVerdict:
    """Containment for SRE unions.

    The right side may use ``%any*`` and ``a*`` factors.  On the left, ``a*``
    is fine.  A left disjunct with ``%any*`` factors is first checked without
    those atoms; when that fails, the factors are expanded only up to
    ``anystar_len`` and a positive verdict is marked as bounded.
    """
    left, right = as_ucrpq(left), as_ucrpq(right)
    _check_arity(left, right)
    for d in right.disjuncts:
        sre_normalize(d)
    bound = sre_bound(right)
    norm_left = []
    per_atom = []
    for d in left.disjuncts:
        n = sre_normalize(d)
        norm_left.append(n)
        limits = {}
        for i, at in enumerate(n.atoms):
            if at.label.sre_factors(extension=True)[0] == AnyStar():
                limits[i] = anystar_len
        per_atom.append(limits)
    anystar = False
    for i, q in enumerate(norm_left):
        if per_atom[i]:
            # Dropping the %any* atoms gives a more general query; if that one
            # is contained, so is q, and the answer stays complete.
            stripped = q.replace(
                atoms=tuple(a for j, a in enumerate(q.atoms) if j not in per_atom[i]), declared=q.vars
            )
            if _search_disjunct(stripped, right, _word_lists(stripped, bound), jobs) is None:
                continue
            anystar = True
        hit = _search_disjunct(q, right, _word_lists(q, bound, per_atom[i]), jobs)
        if hit is not None:
            _, db, outs = hit
            # report the counterexample as an expansion of the original disjunct
            orig = left.disjuncts[i]
            e = _lift_expansion(orig, q, hit[0])
            return ContainmentVerdict(NOT_CONTAINED, "sre", bound, Counterexample(i, e, db, outs))
    if anystar:
        return ContainmentVerdict(
            UP_TO_BOUND, "sre", bound, notes=(f"%any* on the left checked up to length {anystar_len}",)
        )
    return ContainmentVerdict(CONTAINED, "sre", bound)


def _lift_expansion(orig: Crpq, norm: Crpq, e: Expansion) -> Expansion:
    """Re-express an expansion of the normalized query against the original atoms."""
    words = []
    k = 0
    for at in orig.atoms:
        n = len(at.label.sre_factors(extension=True))
        w = ()
        for j in range(n):
            w += tuple(e.words[k + j])
        words.append(w)
        k += n
    return expansion_from_words(orig, words)


# ---------------------------------------------------------------------------
# One path against a bundle of parallel atoms


def single_path_shape(left, right, anchored: bool = False):
    """``(K, [L1..Ln])`` when the instance has the single-path shape, else None.

    The plain shape is Boolean.  With ``anchored`` both queries must instead
    output their two endpoint variables in the same order.
    """
    left, right = as_ucrpq(left), as_ucrpq(right)
    if len(left.disjuncts) != 1 or len(right.disjuncts) != 1:
        return None
    l, r = left.disjuncts[0], right.disjuncts[0]
    if len(l.atoms) != 1 or not r.atoms:
        return None
    a = l.atoms[0]
    if a.source == a.target or len(l.vars) != 2:
        return None
    src, tgt = r.atoms[0].source, r.atoms[0].target
    if src == tgt or len(r.vars) != 2:
        return None
    if any((b.source, b.target) != (src, tgt) for b in r.atoms):
        return None
    if anchored:
        if l.outputs != (a.source, a.target) or r.outputs != (src, tgt):
            return None
    elif l.outputs or r.outputs:
        return None
    return a.label.nfa, [b.label.nfa for b in r.atoms]


def single_path_witness(K: Nfa, Ls: list) -> tuple | None:
    """A word of K with no infix in every L_j, or None if none exists.

    Searches pairs (state of K, set of partial infix runs through all L_j)
    breadth-first; runs that complete an infix end the branch.
    """
    if K.has_epsilon() or any(L.has_epsilon() for L in Ls):
        raise PreconditionError("single-path containment needs epsilon-free languages")
    if not Ls:
        return None
    starts = set()

    def product_initials():
        acc = [()]
        for L in Ls:
            acc = [t + (s,) for t in acc for s in sorted(L.initial)]
        return acc

    init_runs = product_initials()
    starts = frozenset(init_runs)

    def advance(runs, a):
        nxt = set()
        for t in runs | starts:
            choices = [()]
            for L, s in zip(Ls, t):
                succ = L.delta.get((s, a))
                if not succ:
                    choices = []
                    break
                choices = [c + (s2,) for c in choices for s2 in succ]
            nxt.update(choices)
        return frozenset(nxt)

    def matched(runs):
        return any(all(s in L.final for L, s in zip(Ls, t)) for t in runs)

    useful = K.useful_states
    seen = {}
    todo = deque()
    for k0 in sorted(K.initial & useful):
        key = (k0, frozenset())
        seen[key] = None
        todo.append(key)
    while todo:
        key = todo.popleft()
        k, runs = key
        if k in K.final:
            word = []
            while seen[key] is not None:
                key, a = seen[key]
                word.append(a)
            return tuple(reversed(word))
        for a, k2 in K.out_edges[k]:
            if k2 not in useful:
                continue
            r2 = advance(runs, a)
            if matched(r2):
                continue
            key2 = (k2, r2)
            if key2 not in seen:
                seen[key2] = (key, a)
                todo.append(key2)
    return None


def contained_single_path(K: Nfa, Ls: list) -> bool:
    """Whether every word of K has an infix lying in all of the L_j."""
    return single_path_witness(K, Ls) is None


def contained_single_path_query(left, right) -> ContainmentVerdict:
    shape = single_path_shape(left, right)
    if shape is not None:
        w = single_path_witness(*shape)
    else:
        shape = single_path_shape(left, right, anchored=True)
        if shape is None:
            raise FragmentError("instance does not have the single-path shape")
        # both endpoints are pinned, so every word of K must lie in every L_j
        K, Ls = shape
        w = None
        for L in Ls:
            w = inclusion_witness(K, L)
            if w is not None:
                break
    if w is None:
        return ContainmentVerdict(CONTAINED, "single_path")
    q = as_ucrpq(left).disjuncts[0]
    e = expansion_from_words(q, [w])
    db, outs = canonical_database(e)
    return ContainmentVerdict(NOT_CONTAINED, "single_path", None, Counterexample(0, e, db, outs))


# ---------------------------------------------------------------------------
# Dispatch


def contained(left, right, mode: str = "auto", max_len: int = 8, jobs: int = 1) -> ContainmentVerdict:
    left, right = as_ucrpq(left), as_ucrpq(right)
    if mode == "bounded":
        return contained_bounded(left, right, max_len, jobs)
    if mode == "sre":
        return contained_sre(left, right, jobs)
    if mode == "single_path":
        return contained_single_path_query(left, right)
    if mode != "auto":
        raise ValueError(f"unknown containment mode {mode!r}")
    if is_sre(left, extension=False) and is_sre(right, extension=True):
        return contained_sre(left, right, jobs)
    shape = single_path_shape(left, right)
    if shape is not None and not shape[0].has_epsilon() and not any(L.has_epsilon() for L in shape[1]):
        return contained_single_path_query(left, right)
    if single_path_shape(left, right, anchored=True) is not None:
        return contained_single_path_query(left, right)
    if is_sre(left, extension=True) and is_sre(right, extension=True):
        return contained_sre(left, right, jobs)
    return contained_bounded(left, right, max_len, jobs)


def equivalent(g1, g2, mode: str = "auto", max_len: int = 8, jobs: int = 1) -> tuple:
    """``(verdict for g1 in g2, verdict for g2 in g1)``."""
    return contained(g1, g2, mode, max_len, jobs), contained(g2, g1, mode, max_len, jobs)


def equivalence_status(pair) -> str:
    a, b = pair
    if not a.contained or not b.contained:
        return "not_equivalent"
    if a.complete and b.complete:
        return "equivalent"
    return "equivalent_up_to_bound"


@dataclass(frozen=True)
class Disagreement:
    db: GraphDb
    answer: tuple
    in_first: bool
    trial: int


def random_graphdb(rng: random.Random, n_nodes: int, alphabet, density: float = 0.35) -> GraphDb:
    nodes = [f"u{i}" for i in range(n_nodes)]
    edges = []
    for u in nodes:
        for a in sorted(alphabet):
            for v in nodes:
                if rng.random() < density / max(1, len(alphabet)) * 2:
                    edges.append((u, a, v))
    return GraphDb(nodes, edges)


def falsify_equivalence(g1, g2, trials: int = 200, db_size: int = 4, seed: int = 0) -> Disagreement | None:
    """Compare both unions on random databases; the first disagreement is returned."""
    g1, g2 = as_ucrpq(g1), as_ucrpq(g2)
    rng = random.Random(seed)
    alphabet = sorted(g1.alphabet | g2.alphabet) or ["a"]
    for t in range(trials):
        n = rng.randint(1, max(1, db_size))
        density = rng.choice([0.15, 0.3, 0.5])
        db = random_graphdb(rng, n, alphabet, density)
        r1 = evaluate_union(g1, db)
        r2 = evaluate_union(g2, db)
        if r1 != r2:
            diff = sorted(r1 - r2)
            if diff:
                return Disagreement(db, diff[0], True, t)
            return Disagreement(db, sorted(r2 - r1)[0], False, t)
    return None
