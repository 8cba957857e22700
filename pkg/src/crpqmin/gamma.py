"""Word types relative to a CRPQ.

Two words are γ-equivalent when they behave the same way between every pair
of states of every automaton on the atoms of γ.  The type of a word collects
the class tuples of all its factorizations into at most ``n_vars + 1``
parts (empty parts included).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

from .automata import COMPLEMENT_CAP, Nfa, complement, intersect, sigma_star, sublanguage
from .query import Crpq


def automata_of(q: Crpq) -> list:
    """Distinct atom automata of q, in atom order."""
    return list(dict.fromkeys(at.label.nfa for at in q.atoms))


def triples(q: Crpq) -> list:
    """All ``(automaton index, p, q)`` triples."""
    return [
        (i, p, r)
        for i, nfa in enumerate(automata_of(q))
        for p in range(nfa.n_states)
        for r in range(nfa.n_states)
    ]


def _reach(nfa: Nfa, p: int, word) -> frozenset:
    cur = frozenset({p})
    for a in word:
        cur = nfa.step(cur, a)
        if not cur:
            break
    return cur


def class_vector(word: Sequence[str], q: Crpq) -> tuple:
    """Membership bits of ``word`` in every sublanguage A<p,q>."""
    word = tuple(word)
    bits = []
    for nfa in automata_of(q):
        for p in range(nfa.n_states):
            reached = _reach(nfa, p, word)
            bits.extend(r in reached for r in range(nfa.n_states))
    return tuple(bits)


def gamma_equiv(u: Sequence[str], v: Sequence[str], q: Crpq) -> bool:
    return class_vector(u, q) == class_vector(v, q)


@dataclass(frozen=True)
class GammaType:
    query: Crpq
    tuples: frozenset  # of tuples of class vectors

    def __le__(self, other: "GammaType") -> bool:
        return self.tuples <= other.tuples

    def __len__(self):
        return len(self.tuples)


def _splits(n: int, parts: int):
    """Cut positions 0 <= c1 <= ... <= c_{parts-1} <= n."""
    for cuts in itertools.combinations_with_replacement(range(n + 1), parts - 1):
        yield (0,) + cuts + (n,)


def gamma_type(word: Sequence[str], q: Crpq, max_parts: int | None = None) -> GammaType:
    word = tuple(word)
    if max_parts is None:
        max_parts = q.n_vars + 1

    @lru_cache(maxsize=None)
    def vec(i, j):
        return class_vector(word[i:j], q)

    out = set()
    for parts in range(1, max_parts + 1):
        for cuts in _splits(len(word), parts):
            out.add(tuple(vec(a, b) for a, b in zip(cuts, cuts[1:])))
    return GammaType(q, frozenset(out))


def type_included(u: Sequence[str], v: Sequence[str], q: Crpq) -> bool:
    return gamma_type(u, q) <= gamma_type(v, q)


def tilde_language(lang: Nfa, q: Crpq, sample_cap: int = 4) -> Callable:
    """Predicate for the widened language: z is accepted when some sampled
    ``u`` in ``lang`` (length at most ``sample_cap``) has a type included in
    z's type."""
    samples = [gamma_type(u, q) for u in lang.words(sample_cap)]
    alphabet = q.alphabet | lang.alphabet

    def accepts(z) -> bool:
        z = tuple(z)
        if any(a not in alphabet for a in z):
            return False
        tz = gamma_type(z, q)
        return any(t <= tz for t in samples)

    return accepts


def class_automaton(vector: Sequence[bool], q: Crpq, cap: int = COMPLEMENT_CAP) -> Nfa:
    """Automaton for the words whose class vector is exactly ``vector``."""
    trips = triples(q)
    if len(vector) != len(trips):
        raise ValueError(f"expected {len(trips)} bits, got {len(vector)}")
    nfas = automata_of(q)
    result = sigma_star(q.alphabet)
    for bit, (i, p, r) in zip(vector, trips):
        sub = sublanguage(nfas[i].with_alphabet(q.alphabet), p, r)
        result = intersect(result, sub if bit else complement(sub, cap))
        if result.is_empty():
            break
    return result.trim() if not result.is_empty() else result


def is_realizable(vector: Sequence[bool], q: Crpq, cap: int = COMPLEMENT_CAP) -> bool:
    return not class_automaton(vector, q, cap).is_empty()
