"""Contraction, segments, segment graphs, minors, redundancy and certificates."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .automata import Concat, Label, concat
from .containment import NOT_CONTAINED, contained
from .errors import NotAnExpansionError, ResourceLimitError
from .morphisms import core, find_hom
from .query import Atom, Crpq, Multigraph, Ucrpq, as_ucrpq
from .refinement import Expansion, expansion_from_words, expansions


def degrees(q: Crpq) -> tuple[dict, dict]:
    ins = {v: 0 for v in q.vars}
    outs = {v: 0 for v in q.vars}
    for at in q.atoms:
        outs[at.source] += 1
        ins[at.target] += 1
    return ins, outs


def internal_vars(q: Crpq) -> list:
    """Non-output variables with exactly one incoming and one outgoing atom."""
    ins, outs = degrees(q)
    o = set(q.outputs)
    return [v for v in q.vars if v not in o and ins[v] == 1 and outs[v] == 1]


@dataclass(frozen=True)
class Segment:
    atoms: tuple  # atom indices in path order
    source: str
    target: str
    cyclic: bool  # a closed loop through internal variables only


def segments(q: Crpq) -> list:
    internal = set(internal_vars(q))
    out_atom: dict = {}
    for i, at in enumerate(q.atoms):
        if at.source in internal:
            out_atom[at.source] = i
    used = set()
    segs = []
    for i, at in enumerate(q.atoms):
        if i in used or at.source in internal:
            continue
        path = [i]
        used.add(i)
        cur = at.target
        while cur in internal:
            j = out_atom[cur]
            path.append(j)
            used.add(j)
            cur = q.atoms[j].target
        segs.append(Segment(tuple(path), at.source, cur, False))
    for i, at in enumerate(q.atoms):
        if i in used:
            continue
        path = [i]
        used.add(i)
        cur = at.target
        while cur != at.source:
            j = out_atom[cur]
            path.append(j)
            used.add(j)
            cur = q.atoms[j].target
        segs.append(Segment(tuple(path), at.source, at.source, True))
    return segs


def segment_count(q: Crpq) -> int:
    return len(segments(q))


def segment_graph(q: Crpq) -> Multigraph:
    internal = set(internal_vars(q))
    vertices = [v for v in q.vars if v not in internal]
    edges = []
    for i, seg in enumerate(segments(q)):
        if seg.cyclic:
            c = f"_c{i}"
            vertices.append(c)
            edges.append((c, c, i))
        else:
            edges.append((seg.source, seg.target, i))
    return Multigraph(tuple(vertices), tuple(edges))


def concat_labels(l1: Label, l2: Label) -> Label:
    return Label(concat(l1.nfa, l2.nfa), Concat((l1.ast, l2.ast)))


def contract_once(q: Crpq) -> Crpq | None:
    """Contract the lowest-indexed contractible internal variable, if any."""
    for y in internal_vars(q):
        i = next(k for k, at in enumerate(q.atoms) if at.target == y)
        j = next(k for k, at in enumerate(q.atoms) if at.source == y)
        if i == j:
            continue  # a lone self-loop cannot be contracted
        a, b = q.atoms[i], q.atoms[j]
        merged = Atom(a.source, concat_labels(a.label, b.label), b.target)
        atoms = [merged if k == i else at for k, at in enumerate(q.atoms) if k != j]
        return q.replace(atoms=tuple(atoms), declared=tuple(v for v in q.vars if v != y))
    return None


def contract(q: Crpq) -> Crpq:
    """Fully contracted equivalent query."""
    while True:
        nxt = contract_once(q)
        if nxt is None:
            return q
        q = nxt


def is_fully_contracted(q: Crpq) -> bool:
    return contract_once(q) is None


# ---------------------------------------------------------------------------
# Minors


def _components(vertices, contracted_edges):
    parent = {v: v for v in vertices}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for s, t in contracted_edges:
        rs, rt = find(s), find(t)
        if rs != rt:
            parent[rt] = rs
    return {v: find(v) for v in vertices}


def is_minor(h: Multigraph, g: Multigraph, max_edges: int = 8) -> bool:
    """Whether ``h`` arises from ``g`` by deleting and contracting edges and
    deleting vertices (edge directions are kept on surviving edges)."""
    if len(g.edges) > max_edges or len(h.edges) > max_edges:
        raise ResourceLimitError(f"minor test is limited to {max_edges} edges per graph")
    if len(h.edges) > len(g.edges) or len(h.vertices) > len(g.vertices):
        return False
    h_mult: dict = {}
    for s, t, _ in h.edges:
        h_mult[(s, t)] = h_mult.get((s, t), 0) + 1
    hv = list(h.vertices)
    # vertices with edges first so that edge checks prune early
    hv.sort(key=lambda v: -sum(1 for s, t, _ in h.edges if v in (s, t)))
    n_keep = len(h.edges)
    gedges = list(g.edges)
    for kept in itertools.combinations(range(len(gedges)), n_keep):
        rest = [i for i in range(len(gedges)) if i not in set(kept)]
        # the non-kept edges are either deleted or contracted
        for mask in range(1 << len(rest)):
            contracted = [gedges[rest[b]][:2] for b in range(len(rest)) if mask >> b & 1]
            comp = _components(g.vertices, contracted)
            q_mult: dict = {}
            for i in kept:
                s, t, _ = gedges[i]
                key = (comp[s], comp[t])
                q_mult[key] = q_mult.get(key, 0) + 1
            comps = sorted(set(comp.values()), key=str)
            if _match(hv, h_mult, q_mult, comps):
                return True
    return False


def _match(hv, h_mult, q_mult, comps) -> bool:
    covered_total = sum(q_mult.values())

    def rec(i, f, used):
        if i == len(hv):
            total = sum(q_mult.get((f[s], f[t]), 0) for (s, t) in h_mult)
            return total == covered_total
        v = hv[i]
        for c in comps:
            if c in used:
                continue
            f[v] = c
            ok = True
            for (s, t), m in h_mult.items():
                if s in f and t in f and q_mult.get((f[s], f[t]), 0) != m:
                    ok = False
                    break
            if ok and rec(i + 1, f, used | {c}):
                return True
            del f[v]
        return False

    return rec(0, {}, frozenset())


# ---------------------------------------------------------------------------
# Redundant atoms


@dataclass(frozen=True)
class Removal:
    atom: str
    status: str
    complete: bool


@dataclass(frozen=True)
class RedundancyReport:
    query: Crpq
    removed: tuple
    checks: tuple  # every verdict consulted, as (atom text, status)
    complete: bool

    @property
    def status(self) -> str:
        return "non-redundant (complete)" if self.complete else "non-redundant (up to bound)"


def remove_redundant_atoms(q: Crpq, mode: str = "auto", max_len: int = 8) -> RedundancyReport:
    """Greedily drop atoms whose removal keeps the query equivalent.

    Dropping an atom can only make the query more general, so only the
    direction ``q - atom`` contained in ``q`` needs checking.
    """
    removed = []
    checks = []
    complete = True
    changed = True
    while changed:
        changed = False
        for i, at in enumerate(q.atoms):
            smaller = q.replace(atoms=q.atoms[:i] + q.atoms[i + 1 :], declared=q.vars)
            v = contained(smaller, q, mode, max_len)
            checks.append((str(at), v.status))
            complete = complete and v.complete
            if v.status != NOT_CONTAINED:
                removed.append(Removal(str(at), v.status, v.complete))
                q = smaller
                changed = True
                break
    return RedundancyReport(q, tuple(removed), tuple(checks), complete)


# ---------------------------------------------------------------------------
# Strong minimality certificates


@dataclass(frozen=True)
class Certificate:
    disjunct: int
    expansion: Expansion
    core: Crpq
    segment_graph: Multigraph
    segment_count: int
    status: str  # "verified" or "refuted"
    hom_bound: int
    witness: Expansion | None = None
    witness_disjunct: int | None = None
    n_atoms: int = 0

    @property
    def lower_bound(self) -> int | None:
        """Atoms needed by any equivalent union, valid when hom-minimality holds."""
        return self.segment_count if self.status == "verified" else None

    @property
    def strongly_minimal(self) -> bool:
        return self.status == "verified" and self.segment_count == self.n_atoms


def validate_expansion(u: Ucrpq, disjunct: int, words) -> Expansion:
    u = as_ucrpq(u)
    if not 0 <= disjunct < len(u.disjuncts):
        raise NotAnExpansionError(f"no disjunct {disjunct}")
    q = u.disjuncts[disjunct]
    if len(words) != len(q.atoms):
        raise NotAnExpansionError(f"expected {len(q.atoms)} words, got {len(words)}")
    for at, w in zip(q.atoms, words):
        if not at.label.accepts(tuple(w)):
            raise NotAnExpansionError(f"word {''.join(w) or '%eps'} is not in {at.label.text}")
    return expansion_from_words(q, words)


def _expansions_up_to(q: Crpq, max_atoms: int):
    for e in expansions(q, max_atoms, max_total=max_atoms):
        yield e


def check_strong_minimality(u, disjunct: int, words, hom_bound: int) -> Certificate:
    """Certificate for the expansion of disjunct ``disjunct`` given by ``words``.

    Hom-minimality is tested against every expansion with at most
    ``hom_bound`` letter atoms.
    """
    u = as_ucrpq(u)
    xi = validate_expansion(u, disjunct, words)
    c = core(xi.cq)
    base = dict(
        disjunct=disjunct,
        expansion=xi,
        core=c,
        segment_graph=segment_graph(c),
        segment_count=segment_count(c),
        hom_bound=hom_bound,
        n_atoms=u.n_atoms,
    )
    for j, q in enumerate(u.disjuncts):
        for e in _expansions_up_to(q, hom_bound):
            if find_hom(e.cq, xi.cq) is not None and find_hom(xi.cq, e.cq) is None:
                return Certificate(status="refuted", witness=e, witness_disjunct=j, **base)
    return Certificate(status="verified", **base)
