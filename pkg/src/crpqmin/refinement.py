"""Atom refinements, query refinements, expansions and canonical databases."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Sequence

from .automata import Label, sublanguage
from .query import Atom, Crpq, GraphDb


@dataclass(frozen=True)
class AtomRefinement:
    """One way of refining atom number ``parent``.

    ``chain`` is None for the equality refinement; otherwise it holds the
    labels ``L1 .. Ln`` together with the automaton state sequence used.
    """

    parent: int
    chain: tuple | None
    states: tuple = ()

    @property
    def is_equality(self) -> bool:
        return self.chain is None

    def __len__(self):
        return 0 if self.chain is None else len(self.chain)


def _state_sequences(nfa, n):
    """All q0..qn with q0 initial, qn final and every step's sublanguage nonempty."""
    useful = nfa.useful_states
    succ = {s: sorted(nfa.reachable_from({s}) & useful) for s in nfa.states}

    def rec(seq):
        if len(seq) == n + 1:
            if seq[-1] in nfa.final:
                yield tuple(seq)
            return
        for q in succ[seq[-1]]:
            if q in useful:
                seq.append(q)
                yield from rec(seq)
                seq.pop()

    for q0 in sorted(nfa.initial):
        if q0 in useful:
            yield from rec([q0])


def atom_refinements(atom: Atom, m: int, parent: int = 0) -> Iterator[AtomRefinement]:
    """All atom m-refinements, duplicate-free, equality first then by length."""
    if m < 1:
        raise ValueError("m must be at least 1")
    nfa = atom.label.nfa
    alpha = nfa.alphabet
    if nfa.has_epsilon():
        yield AtomRefinement(parent, None)
    seen = set()
    sub_cache: dict = {}
    for n in range(1, m + 1):
        for seq in _state_sequences(nfa, n):
            options = []
            for p, q in zip(seq, seq[1:]):
                if (p, q) not in sub_cache:
                    letters = sorted({a for a, r in nfa.out_edges[p] if r == q})
                    opts = [Label(sublanguage(nfa, p, q))]
                    opts += [Label.letter(a, alpha) for a in letters]
                    sub_cache[(p, q)] = opts
                options.append(sub_cache[(p, q)])
            for chain in itertools.product(*options):
                if chain in seen:
                    continue
                seen.add(chain)
                yield AtomRefinement(parent, chain, seq)


class _UnionFind:
    def __init__(self, order):
        self.rank = {v: i for i, v in enumerate(order)}
        self.parent = {v: v for v in order}

    def find(self, v):
        while self.parent[v] != v:
            self.parent[v] = self.parent[self.parent[v]]
            v = self.parent[v]
        return v

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.rank[rb] < self.rank[ra]:
            ra, rb = rb, ra
        self.parent[rb] = ra


def fresh_namer(q: Crpq):
    taken = set(q.vars)

    def name(atom_index, i):
        v = f"t{atom_index}_{i}"
        while v in taken:
            v += "_"
        return v

    return name


def apply_refinement(q: Crpq, choice: Sequence[AtomRefinement]) -> Crpq:
    """Replace each atom by its chosen refinement and collapse equalities."""
    name = fresh_namer(q)
    uf = _UnionFind(q.vars)
    atoms = []
    for i, (at, r) in enumerate(zip(q.atoms, choice)):
        if r.chain is None:
            uf.union(at.source, at.target)
            continue
        n = len(r.chain)
        vs = [at.source] + [name(i, j) for j in range(1, n)] + [at.target]
        for j, lab in enumerate(r.chain):
            atoms.append(Atom(vs[j], lab, vs[j + 1]))
    rep = {v: uf.find(v) for v in q.vars}
    f = lambda v: rep.get(v, v)  # noqa: E731
    new_atoms = tuple(dict.fromkeys(Atom(f(a.source), a.label, f(a.target)) for a in atoms))
    return q.replace(
        outputs=tuple(f(v) for v in q.outputs),
        atoms=new_atoms,
        declared=tuple(dict.fromkeys(f(v) for v in q.vars)),
    )


def refinements(q: Crpq, m: int) -> Iterator[Crpq]:
    """All m-refinements of ``q`` in a deterministic order."""
    per_atom = [list(atom_refinements(at, m, i)) for i, at in enumerate(q.atoms)]
    for choice in itertools.product(*per_atom):
        yield apply_refinement(q, choice)


@dataclass(frozen=True)
class Expansion:
    cq: Crpq
    words: tuple  # one word (tuple of letters) per atom of the parent
    collapse: tuple  # sorted (variable, representative) pairs

    @property
    def size(self) -> int:
        return sum(len(w) for w in self.words)


def expansion_from_words(q: Crpq, words: Sequence[Sequence[str]]) -> Expansion:
    """The expansion of ``q`` replacing atom i by a path spelling ``words[i]``."""
    name = fresh_namer(q)
    uf = _UnionFind(q.vars)
    raw = []
    for i, (at, w) in enumerate(zip(q.atoms, words)):
        if len(w) == 0:
            uf.union(at.source, at.target)
            continue
        vs = [at.source] + [name(i, j) for j in range(1, len(w))] + [at.target]
        for j, a in enumerate(w):
            raw.append((vs[j], a, vs[j + 1]))
    rep = {v: uf.find(v) for v in q.vars}
    f = lambda v: rep.get(v, v)  # noqa: E731
    atoms = tuple(
        dict.fromkeys(Atom(f(u), Label.letter(a, q.alphabet), f(v)) for u, a, v in raw)
    )
    cq = q.replace(
        outputs=tuple(f(v) for v in q.outputs),
        atoms=atoms,
        declared=tuple(dict.fromkeys(f(v) for v in q.vars)),
    )
    collapse = tuple(sorted((v, r) for v, r in rep.items() if v != r))
    return Expansion(cq, tuple(tuple(w) for w in words), collapse)


def _bounded_combos(word_lists, budget=None):
    """Cartesian product ordered by total length."""
    lens = [sorted({len(w) for w in ws}) for ws in word_lists]
    if any(not ws for ws in word_lists):
        return
    by_len = [{} for _ in word_lists]
    for i, ws in enumerate(word_lists):
        for w in ws:
            by_len[i].setdefault(len(w), []).append(w)
    lo = sum(l[0] for l in lens)
    hi = sum(l[-1] for l in lens)

    def rec(i, remaining):
        if i == len(word_lists):
            if remaining == 0:
                yield ()
            return
        rest_min = sum(l[0] for l in lens[i + 1 :])
        rest_max = sum(l[-1] for l in lens[i + 1 :])
        for n in lens[i]:
            r = remaining - n
            if r < rest_min or r > rest_max:
                continue
            for w in by_len[i][n]:
                for tail in rec(i + 1, r):
                    yield (w,) + tail

    for total in range(lo, hi + 1):
        if budget is not None and total > budget:
            break
        yield from rec(0, total)


def expansions(q: Crpq, max_len: int, max_total: int | None = None) -> Iterator[Expansion]:
    """Expansions whose atom words all have length at most ``max_len``.

    Ordered by total word length, then lexicographically.
    """
    if max_len < 0:
        raise ValueError("max_len must be non-negative")
    word_lists = [list(at.label.nfa.words(max_len)) for at in q.atoms]
    for combo in _bounded_combos(word_lists, max_total):
        yield expansion_from_words(q, combo)


def count_expansions(q: Crpq, max_len: int) -> int:
    total = 1
    for at in q.atoms:
        total *= sum(1 for _ in at.label.nfa.words(max_len))
    return total


def canonical_database(e: Expansion | Crpq) -> tuple:
    """``(GraphDb, output node tuple)`` of an expansion (or of a CQ)."""
    cq = e.cq if isinstance(e, Expansion) else e
    edges = []
    for at in cq.atoms:
        a = at.label.single_letter
        if a is None:
            raise ValueError(f"atom {at} is not a letter atom")
        edges.append((at.source, a, at.target))
    return GraphDb(cq.vars, edges), tuple(cq.outputs)
