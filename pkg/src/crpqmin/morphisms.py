"""Homomorphisms between queries and databases, cores and isomorphism.

A *structure* is either a :class:`Crpq` (atoms keyed by their label) or a
:class:`GraphDb` (edges keyed by their letter).  Atoms whose label is a
single letter are keyed by that letter, so CQs and databases mix freely.
When both sides are queries, output variables are mapped positionally.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Mapping

from .query import Atom, Crpq, GraphDb


def _key(label):
    a = label.single_letter
    return a if a is not None else label


def structure(s):
    """``(vertices, edges, outputs)`` with edges as ``(u, key, v)`` triples."""
    if isinstance(s, GraphDb):
        return s.vertices, list(dict.fromkeys(s.edges)), None
    edges = list(dict.fromkeys((at.source, _key(at.label), at.target) for at in s.atoms))
    return s.vars, edges, s.outputs


@dataclass(frozen=True)
class Hom:
    mapping: tuple  # sorted (source, image) pairs

    @classmethod
    def of(cls, d: Mapping) -> "Hom":
        return cls(tuple(sorted(d.items(), key=lambda kv: str(kv[0]))))

    def as_dict(self) -> dict:
        return dict(self.mapping)

    def __call__(self, v):
        return self.as_dict()[v]

    @property
    def injective(self) -> bool:
        images = [v for _, v in self.mapping]
        return len(set(images)) == len(images)


def _output_pin(src_out, tgt_out, pin):
    pin = dict(pin or {})
    if src_out is None or tgt_out is None:
        return pin
    if len(src_out) != len(tgt_out):
        return None
    for x, y in zip(src_out, tgt_out):
        if pin.setdefault(x, y) != y:
            return None
    return pin


def solve(variables, domains, constraints, injective=False) -> Iterator[dict]:
    """Backtracking CSP with forward checking over binary relations.

    ``constraints`` is a list of ``(x, y, pairs)``; a solution maps every
    variable so that ``(f(x), f(y)) in pairs`` for each constraint.
    """
    cons = []
    by_var: dict = {v: [] for v in variables}
    for x, y, pairs in constraints:
        fwd: dict = {}
        bwd: dict = {}
        for a, b in pairs:
            fwd.setdefault(a, set()).add(b)
            bwd.setdefault(b, set()).add(a)
        c = (x, y, pairs, fwd, bwd)
        cons.append(c)
        by_var[x].append(c)
        if y != x:
            by_var[y].append(c)
    doms = {v: set(domains[v]) for v in variables}
    # initial arc consistency
    changed = True
    while changed:
        changed = False
        for x, y, pairs, fwd, bwd in cons:
            if x == y:
                nd = {u for u in doms[x] if (u, u) in pairs}
            else:
                nd = {u for u in doms[x] if fwd.get(u, set()) & doms[y]}
            if len(nd) != len(doms[x]):
                doms[x], changed = nd, True
            if x != y:
                nd = {v for v in doms[y] if bwd.get(v, set()) & doms[x]}
                if len(nd) != len(doms[y]):
                    doms[y], changed = nd, True
        if any(not d for d in doms.values()):
            return

    def rec(doms, assigned):
        if len(assigned) == len(variables):
            yield dict(assigned)
            return
        var = min((v for v in variables if v not in assigned), key=lambda v: (len(doms[v]), str(v)))
        used = set(assigned.values()) if injective else ()
        for val in sorted(doms[var], key=str):
            if injective and val in used:
                continue
            nd = dict(doms)
            nd[var] = {val}
            ok = True
            for x, y, pairs, fwd, bwd in by_var[var]:
                if x == y:
                    if (val, val) not in pairs:
                        ok = False
                        break
                    continue
                other = y if x == var else x
                if other in assigned:
                    if (assigned[x] if x != var else val, assigned[y] if y != var else val) not in pairs:
                        ok = False
                        break
                    continue
                allowed = fwd.get(val, set()) if x == var else bwd.get(val, set())
                d = nd[other] & allowed
                if not d:
                    ok = False
                    break
                nd[other] = d
            if not ok:
                continue
            assigned[var] = val
            yield from rec(nd, assigned)
            del assigned[var]

    yield from rec(doms, {})


def all_homs(src, tgt, pin: Mapping | None = None, injective=False) -> Iterator[Hom]:
    sv, se, so = structure(src)
    tv, te, to = structure(tgt)
    pin = _output_pin(so, to, pin)
    if pin is None:
        return
    tset = set(tv)
    domains = {}
    for v in sv:
        if v in pin:
            domains[v] = {pin[v]} & tset
        else:
            domains[v] = tset
    by_key: dict = {}
    for u, k, v in te:
        by_key.setdefault(k, set()).add((u, v))
    constraints = [(u, v, by_key.get(k, set())) for u, k, v in se]
    for sol in solve(list(sv), domains, constraints, injective):
        yield Hom.of(sol)


def find_hom(src, tgt, pin: Mapping | None = None, injective=False) -> Hom | None:
    return next(all_homs(src, tgt, pin, injective), None)


def is_hom(h: Hom, src, tgt) -> bool:
    sv, se, so = structure(src)
    tv, te, to = structure(tgt)
    f = h.as_dict()
    if set(f) != set(sv) or not set(f.values()) <= set(tv):
        return False
    if so is not None and to is not None and tuple(f[x] for x in so) != tuple(to):
        return False
    tset = set(te)
    return all((f[u], k, f[v]) in tset for u, k, v in se)


def is_strong_onto(h: Hom, src, tgt) -> bool:
    """Every target atom (and every target variable) is the image of a source one."""
    sv, se, _ = structure(src)
    tv, te, _ = structure(tgt)
    f = h.as_dict()
    images = {(f[u], k, f[v]) for u, k, v in se}
    return set(te) <= images and set(tv) <= set(f.values())


def is_embedding(h: Hom, src, tgt) -> bool:
    return is_hom(h, src, tgt) and h.injective


def find_strong_onto(src, tgt, pin=None) -> Hom | None:
    for h in all_homs(src, tgt, pin):
        if is_strong_onto(h, src, tgt):
            return h
    return None


def hom_equivalent(p, q) -> bool:
    return find_hom(p, q) is not None and find_hom(q, p) is not None


def image(q: Crpq, h: Hom) -> Crpq:
    """The subquery of the target formed by the images of q's atoms."""
    return q.rename(h.as_dict())


def _without(q: Crpq, v) -> Crpq:
    return q.replace(
        atoms=tuple(at for at in q.atoms if v not in (at.source, at.target)),
        declared=tuple(x for x in q.vars if x != v),
    )


def dedup_atoms(q: Crpq) -> Crpq:
    return q.replace(atoms=tuple(dict.fromkeys(q.atoms)))


def core(q: Crpq) -> Crpq:
    """Smallest hom-equivalent subquery; output variables are kept in place."""
    q = dedup_atoms(q)
    outs = set(q.outputs)
    changed = True
    while changed:
        changed = False
        for v in q.vars:
            if v in outs or q.n_vars == 1:
                continue
            sub = _without(q, v)
            h = find_hom(q, sub)
            if h is not None:
                q = image(q, h).replace(declared=tuple(x for x in q.vars if x in set(h.as_dict().values())))
                changed = True
                break
    return q


def are_isomorphic(p, q) -> bool:
    pv, pe, po = structure(p)
    qv, qe, qo = structure(q)
    if len(set(pv)) != len(set(qv)) or len(pe) != len(qe):
        return False
    if sorted(map(str, (k for _, k, _ in pe))) != sorted(map(str, (k for _, k, _ in qe))):
        return False
    return find_hom(p, q, injective=True) is not None


def canonical_key(q: Crpq) -> tuple:
    """An isomorphism-invariant fingerprint (equal keys do not imply isomorphism)."""
    _, edges, outs = structure(q)
    deg = {}
    for v in q.vars:
        outk = sorted(str(k) for u, k, w in edges if u == v)
        ink = sorted(str(k) for u, k, w in edges if w == v)
        pos = tuple(i for i, o in enumerate(outs or ()) if o == v)
        deg[v] = (pos, tuple(outk), tuple(ink))
    return (len(outs or ()), tuple(sorted(deg.values())))


__all__ = [
    "Atom",
    "Hom",
    "all_homs",
    "are_isomorphic",
    "canonical_key",
    "core",
    "find_hom",
    "find_strong_onto",
    "hom_equivalent",
    "image",
    "is_embedding",
    "is_hom",
    "is_strong_onto",
    "solve",
    "structure",
]
