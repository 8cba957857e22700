"""Evaluation of (U)CRPQs on graph databases.

Each atom is first answered by a reachability table computed on the product
of the database with the atom's automaton; the tables are then joined by a
backtracking search with forward checking.
"""

from __future__ import annotations

from collections import deque
from typing import Mapping

from .automata import Label, Nfa
from .query import Crpq, GraphDb, Ucrpq, as_ucrpq


def _nfa(label) -> Nfa:
    return label.nfa if isinstance(label, Label) else label


def reachable_pairs_from(db: GraphDb, nfa: Nfa, u) -> set:
    """Nodes ``v`` such that some path ``u -> v`` is labelled by a word of the language."""
    start = [(u, s) for s in nfa.initial]
    seen = set(start)
    todo = deque(start)
    out = set()
    idx = db.out_index
    while todo:
        v, s = todo.popleft()
        if s in nfa.final:
            out.add(v)
        for a, s2 in nfa.out_edges[s]:
            for w in idx.get((v, a), ()):
                if (w, s2) not in seen:
                    seen.add((w, s2))
                    todo.append((w, s2))
    return out


def atom_table(db: GraphDb, label) -> frozenset:
    """All pairs ``(u, v)`` joined by a path whose label lies in the language."""
    nfa = _nfa(label)
    pairs = set()
    for u in db.vertices:
        for v in reachable_pairs_from(db, nfa, u):
            pairs.add((u, v))
    return frozenset(pairs)


class _Problem:
    def __init__(self, q: Crpq, db: GraphDb, pin: Mapping | None, tables=None):
        self.q = q
        self.db = db
        verts = set(db.vertices)
        self.doms = {v: set(verts) for v in q.vars}
        for x, u in (pin or {}).items():
            if x in self.doms:
                self.doms[x] &= {u}
        self.cons = []  # (x, y, fwd, bwd, pairs)
        cache = {} if tables is None else tables
        for at in q.atoms:
            key = at.label.nfa
            if key not in cache:
                cache[key] = atom_table(db, key)
            pairs = cache[key]
            fwd: dict = {}
            bwd: dict = {}
            for a, b in pairs:
                fwd.setdefault(a, set()).add(b)
                bwd.setdefault(b, set()).add(a)
            self.cons.append((at.source, at.target, fwd, bwd, pairs))
        self.by_var: dict = {v: [] for v in q.vars}
        for c in self.cons:
            self.by_var[c[0]].append(c)
            if c[1] != c[0]:
                self.by_var[c[1]].append(c)

    def prune(self) -> bool:
        """Arc consistency; returns False if some domain becomes empty."""
        doms = self.doms
        changed = True
        while changed:
            changed = False
            for x, y, fwd, bwd, pairs in self.cons:
                if x == y:
                    nd = {u for u in doms[x] if (u, u) in pairs}
                    if len(nd) != len(doms[x]):
                        doms[x] = nd
                        changed = True
                    continue
                nx_ = {u for u in doms[x] if fwd.get(u, set()) & doms[y]}
                if len(nx_) != len(doms[x]):
                    doms[x] = nx_
                    changed = True
                ny = {v for v in doms[y] if bwd.get(v, set()) & doms[x]}
                if len(ny) != len(doms[y]):
                    doms[y] = ny
                    changed = True
            if any(not d for d in doms.values()):
                return False
        return True

    def assign(self, doms, var, val):
        """Domains after fixing ``var``; None on a wipe-out."""
        nd = dict(doms)
        nd[var] = {val}
        for x, y, fwd, bwd, pairs in self.by_var[var]:
            if x == y:
                if (val, val) not in pairs:
                    return None
                continue
            if x == var:
                other, allowed = y, fwd.get(val, set())
            else:
                other, allowed = x, bwd.get(val, set())
            if other == var:
                continue
            d = nd[other] & allowed
            if not d:
                return None
            nd[other] = d
        return nd

    def search(self, doms, todo, fixed=frozenset()):
        """Yield domain maps in which every variable of ``todo`` is fixed."""
        free = [v for v in todo if v not in fixed]
        if not free:
            yield doms, fixed
            return
        var = min(free, key=lambda v: (len(doms[v]), v))
        for val in sorted(doms[var], key=str):
            nd = self.assign(doms, var, val)
            if nd is not None:
                yield from self.search(nd, todo, fixed | {var})


def find_evaluation_map(q: Crpq, db: GraphDb, pin: Mapping | None = None, tables=None):
    """A satisfying assignment extending ``pin`` as a dict, or None."""
    p = _Problem(q, db, pin, tables)
    if not p.prune():
        return None
    for doms, _ in p.search(p.doms, list(q.vars)):
        return {v: next(iter(d)) for v, d in doms.items()}
    return None


def exists(q: Crpq, db: GraphDb, pin: Mapping | None = None, tables=None) -> bool:
    return find_evaluation_map(q, db, pin, tables) is not None


def evaluate(q: Crpq, db: GraphDb, pin: Mapping | None = None, tables=None) -> set:
    """Output tuples of ``q`` on ``db`` realised by assignments extending ``pin``."""
    p = _Problem(q, db, pin, tables)
    if not p.prune():
        return set()
    outs = list(dict.fromkeys(q.outputs))
    rest = [v for v in q.vars if v not in set(outs)]
    result = set()
    for doms, fixed in p.search(p.doms, outs):
        tup = tuple(next(iter(doms[v])) for v in q.outputs)
        if tup not in result and next(p.search(doms, rest, fixed), None) is not None:
            result.add(tup)
    return result


def evaluate_union(u: Ucrpq | Crpq, db: GraphDb, tables=None) -> set:
    out = set()
    cache = {} if tables is None else tables
    for d in as_ucrpq(u).disjuncts:
        out |= evaluate(d, db, None, cache)
    return out


def union_holds(u: Ucrpq | Crpq, db: GraphDb, answer: tuple, tables=None) -> bool:
    """Whether ``answer`` is an output tuple of the union on ``db``."""
    cache = {} if tables is None else tables
    for d in as_ucrpq(u).disjuncts:
        if len(answer) != d.arity:
            continue
        pin = {}
        ok = True
        for v, node in zip(d.outputs, answer):
            if pin.setdefault(v, node) != node:
                ok = False
                break
        if ok and exists(d, db, pin, cache):
            return True
    return False
