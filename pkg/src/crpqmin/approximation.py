"""Maximal under-approximations by unions of small CRPQs, and minimization.

An approximation member is built from a multigraph *shape* S with at most k
edges.  Each edge of S is subdivided into a path of atoms, giving a query η;
a refinement of one disjunct of Γ is mapped homomorphically into η, every
atom of η receives the (common) label of the refinement atoms mapped onto
it, or ``%any*`` when nothing maps onto it, and the subdivided paths are
contracted back into single atoms.

The homomorphism is searched directly: each atom of the disjunct becomes
either an equality (when its language has the empty word) or a walk in η
that follows a run of the atom's automaton.  Within one walk, a repeated
(η-atom, automaton state) pair is cut, since the loop between the two
occurrences can always be removed.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .automata import (
    AnyLetter,
    AnyStar,
    Concat,
    Epsilon,
    Label,
    Letter,
    Plus,
    PlusFactor,
    Star,
    StarLetter,
    Union,
    classify_sre,
    compile_nfa,
    concat,
    language_equal,
    language_inclusion,
    sigma_star,
    sublanguage,
)
from .containment import (
    NOT_CONTAINED,
    contained,
    contained_bounded,
    contained_sre,
    equivalence_status,
    equivalent,
    falsify_equivalence,
    is_sre,
)
from .errors import ResourceLimitError
from .morphisms import solve
from .query import Atom, Crpq, Ucrpq, as_ucrpq

DEFAULT_BUDGET = 2_000_000


# ---------------------------------------------------------------------------
# Readable labels for sublanguages of simple expressions


def _factor_positions(ast, alphabet):
    """Per SRE factor: (kind, [letter set per position]) following compile order."""
    factors = classify_sre(ast, extension=True, alphabet=alphabet)
    if factors is None:
        return None
    parts = list(ast.children) if isinstance(ast, Concat) else [ast]
    flat = []
    while parts:
        node = parts.pop(0)
        if isinstance(node, Concat):
            parts[0:0] = list(node.children)
        elif not isinstance(node, Epsilon):
            flat.append(node)
    out = []
    for f, node in zip(factors, flat):
        leaves = []

        def walk(n):
            if isinstance(n, Letter):
                leaves.append(frozenset({n.symbol}))
            elif isinstance(n, AnyLetter):
                leaves.append(frozenset(alphabet))
            elif isinstance(n, (Union, Concat)):
                for c in n.children:
                    walk(c)
            elif isinstance(n, (Star, Plus)):
                walk(n.child)

        walk(node)
        loop = isinstance(f, (PlusFactor, StarLetter, AnyStar))
        if loop and len(leaves) != 1:
            return None
        out.append((f, loop, leaves))
    return out


def _set_ast(letters, alphabet):
    ls = sorted(letters)
    if len(ls) > 1 and frozenset(ls) == frozenset(alphabet):
        return AnyLetter()
    if len(ls) == 1:
        return Letter(ls[0])
    return Union(tuple(Letter(a) for a in ls))


def _whole(f, alphabet):
    if isinstance(f, PlusFactor):
        return Plus(Letter(f.letter))
    if isinstance(f, StarLetter):
        return Star(Letter(f.letter))
    if isinstance(f, AnyStar):
        return Star(AnyLetter())
    return _set_ast(f.letters, alphabet)


def sre_sublanguage_ast(ast, alphabet, p: int, q: int):
    """Expression for the sublanguage between Glushkov states p and q of a
    simple expression, built from factor pieces; None when not applicable."""
    info = _factor_positions(ast, alphabet)
    if info is None:
        return None
    where = {}
    pos = 1
    for i, (_, _, leaves) in enumerate(info):
        for k in range(len(leaves)):
            where[pos] = (i, k)
            pos += 1
    if p == 0 and q == 0:
        return Epsilon()
    if q == 0 or q not in where or (p != 0 and p not in where):
        return None
    j, kq = where[q]
    f_j, loop_j, leaves_j = info[j]
    pieces = []
    if p == 0:
        start = 0
    else:
        i, kp = where[p]
        f_i, loop_i, leaves_i = info[i]
        if i > j:
            return None
        if i == j:
            if loop_i:
                return Star(_set_ast(leaves_i[0], alphabet))
            return Epsilon() if kp == kq else None
        if loop_i:
            pieces.append(Star(_set_ast(leaves_i[0], alphabet)))
        start = i + 1
    for f, _, _ in info[start:j]:
        pieces.append(_whole(f, alphabet))
    letters = leaves_j[kq]
    if loop_j:
        if isinstance(f_j, PlusFactor) or (isinstance(f_j, StarLetter)):
            pieces.append(Plus(_set_ast(letters, alphabet)))
        else:
            pieces.append(_set_ast(letters, alphabet))
            pieces.append(Star(_set_ast(letters, alphabet)))
    else:
        pieces.append(_set_ast(letters, alphabet))
    pieces = [x for x in pieces if not isinstance(x, Epsilon)]
    if not pieces:
        return Epsilon()
    return pieces[0] if len(pieces) == 1 else Concat(tuple(pieces))


def sublabel(label: Label, p: int, q: int) -> Label:
    """The sublanguage label A<p,q>, with a readable expression when possible."""
    nfa = sublanguage(label.nfa, p, q)
    ast = sre_sublanguage_ast(label.ast, label.alphabet, p, q)
    if ast is not None:
        cand = compile_nfa(ast, label.alphabet)
        if language_equal(cand, nfa):
            return Label(nfa, ast)
    return Label(nfa)


# ---------------------------------------------------------------------------
# Label classes


class LabelClasses:
    """Labels of a query grouped by language equality."""

    def __init__(self, alphabet):
        self.alphabet = frozenset(alphabet)
        self.reps: list = []  # representative label per class
        self._memo: dict = {}

    def class_of(self, label: Label) -> int:
        if label in self._memo:
            return self._memo[label]
        for i, rep in enumerate(self.reps):
            if language_equal(rep.nfa, label.nfa):
                self._memo[label] = i
                if _rank(label) < _rank(rep):
                    self.reps[i] = label
                return i
        self.reps.append(label)
        self._memo[label] = len(self.reps) - 1
        return len(self.reps) - 1


def _rank(label: Label):
    sre = classify_sre(label.ast, extension=True, alphabet=label.alphabet) is not None
    return (label.single_letter is None, not sre, len(label.text), label.text)


# ---------------------------------------------------------------------------
# Shapes


def shapes(max_edges: int) -> list:
    """Directed multigraphs with 1..max_edges edges and no isolated vertex,
    one per isomorphism class, as ``(n_vertices, sorted edge tuple)``."""
    out = []
    for e in range(1, max_edges + 1):
        seen = set()
        for n in range(1, 2 * e + 1):
            pairs = [(s, t) for s in range(n) for t in range(n)]
            for edges in itertools.combinations_with_replacement(pairs, e):
                used = {v for st in edges for v in st}
                if len(used) != n:
                    continue
                key = min(
                    tuple(sorted((perm[s], perm[t]) for s, t in edges))
                    for perm in itertools.permutations(range(n))
                )
                if key not in seen:
                    seen.add(key)
                    out.append((n, key))
    return out


# ---------------------------------------------------------------------------
# Explicit approximations


@dataclass(frozen=True)
class ExplicitApproximation:
    disjunct: int
    eta: Crpq
    hom: tuple  # sorted (variable of the disjunct, η variable) pairs
    chains: tuple  # per atom: None (equality) or tuple of (η atom index, state, label)
    alpha: Crpq
    contr: tuple  # η atom index -> α atom index (or -1 when the α atom collapsed)


@dataclass
class AppResult:
    union: Ucrpq
    witnesses: list = field(default_factory=list)
    explored: int = 0
    m: int = 0
    c: int = 0


class _Budget:
    def __init__(self, limit):
        self.limit = limit
        self.used = 0

    def tick(self, found):
        self.used += 1
        if self.limit is not None and self.used > self.limit:
            raise ResourceLimitError(
                f"approximation search exceeded {self.limit} steps", partial=found
            )


def default_m(u: Ucrpq, k: int) -> int:
    r = max((at.label.nfa.n_states for d in u.disjuncts for at in d.atoms), default=1)
    return max(1, u.n_atoms * r * max(k, 1))


class _Disjunct:
    """Pre-computed automaton data of one disjunct."""

    def __init__(self, q: Crpq, classes: LabelClasses):
        self.q = q
        self.steps = []  # per atom: {state: [(next state, [class ids])]}
        for at in q.atoms:
            nfa = at.label.nfa
            useful = nfa.useful_states
            per_state = {}
            for s in sorted(useful):
                opts = []
                for s2 in sorted(nfa.reachable_from({s}) & useful):
                    cls = [classes.class_of(sublabel(at.label, s, s2))]
                    for a in sorted({a for a, r in nfa.out_edges[s] if r == s2}):
                        c = classes.class_of(Label.letter(a, q.alphabet))
                        if c not in cls:
                            cls.append(c)
                    opts.append((s2, cls))
                per_state[s] = opts
            self.steps.append(per_state)
        # atoms sorted so that one endpoint is usually bound already
        order = []
        bound = set(q.outputs)
        remaining = list(range(len(q.atoms)))
        while remaining:
            remaining.sort(
                key=lambda i: (
                    -((q.atoms[i].source in bound) + (q.atoms[i].target in bound)),
                    i,
                )
            )
            i = remaining.pop(0)
            order.append(i)
            bound |= {q.atoms[i].source, q.atoms[i].target}
        self.order = order


class _Eta:
    def __init__(self, n_shape, shape_edges, lengths):
        self.shape_vertices = [f"v{i}" for i in range(n_shape)]
        self.vertices = list(self.shape_vertices)
        self.atoms = []  # (source, target, shape edge, position)
        for e, ((s, t), n) in enumerate(zip(shape_edges, lengths)):
            path = [f"v{s}"] + [f"w{e}_{i}" for i in range(1, n)] + [f"v{t}"]
            self.vertices += path[1:-1]
            for i in range(n):
                self.atoms.append((path[i], path[i + 1], e, i))
        self.out_atoms = {v: [] for v in self.vertices}
        for i, (s, _, _, _) in enumerate(self.atoms):
            self.out_atoms[s].append(i)
        self.shape_edges = shape_edges
        self.lengths = lengths


def _approximations_for(
    di: int, d: _Disjunct, eta: _Eta, classes, m, budget, sink, found, require_external=True, outputs_target=None
):
    q = d.q
    nfas = [at.label.nfa for at in q.atoms]
    labels = [None] * len(eta.atoms)
    h: dict = {}
    iso_used = [0]
    chains: dict = {}
    shape_set = set(eta.shape_vertices)

    def candidates(v):
        if v in h:
            return [h[v]]
        return eta.vertices

    def assign(v, node):
        if v in h:
            return h[v] == node, False
        h[v] = node
        return True, True

    def finish():
        outs = tuple(h[o] for o in q.outputs)
        if any(o not in shape_set and not o.startswith("i") for o in outs):
            return
        if outputs_target is not None and outs != outputs_target:
            return
        # every shape edge keeps at least one labelled atom and no two
        # unlabelled atoms are adjacent (those are covered by shorter paths)
        base = 0
        for n in eta.lengths:
            seg = labels[base : base + n]
            if all(x is None for x in seg):
                return
            if any(seg[i] is None and seg[i + 1] is None for i in range(n - 1)):
                return
            base += n
        if require_external:
            deg_in = {v: 0 for v in eta.shape_vertices}
            deg_out = {v: 0 for v in eta.shape_vertices}
            loops = {v: 0 for v in eta.shape_vertices}
            for s, t in eta.shape_edges:
                deg_out[f"v{s}"] += 1
                deg_in[f"v{t}"] += 1
                if s == t:
                    loops[f"v{s}"] += 1
            out_set = set(outs)
            for v in eta.shape_vertices:
                if v not in out_set and deg_in[v] == 1 and deg_out[v] == 1 and loops[v] == 0:
                    return
        sink(di, dict(h), tuple(labels), dict(chains), outs)

    def place(idx):
        budget.tick(len(found))
        if idx == len(d.order):
            for v in q.vars:
                if v not in h:
                    # variables outside every atom go to a fresh isolated vertex
                    h[v] = f"i{iso_used[0]}"
                    iso_used[0] += 1
                    place(idx)
                    iso_used[0] -= 1
                    del h[v]
                    return
            finish()
            return
        ai = d.order[idx]
        at = q.atoms[ai]
        nfa = nfas[ai]
        # equality refinement
        if nfa.has_epsilon():
            opts = []
            if at.source in h:
                opts = [h[at.source]]
            elif at.target in h:
                opts = [h[at.target]]
            else:
                opts = list(eta.vertices) + [f"i{iso_used[0]}"]
            for node in opts:
                fresh_iso = node == f"i{iso_used[0]}"
                ok1, new1 = assign(at.source, node)
                ok2, new2 = assign(at.target, node) if ok1 else (False, False)
                if ok1 and ok2:
                    chains[ai] = None
                    if fresh_iso:
                        iso_used[0] += 1
                    place(idx + 1)
                    if fresh_iso:
                        iso_used[0] -= 1
                    del chains[ai]
                if new2:
                    del h[at.target]
                if new1:
                    del h[at.source]
        # walks
        steps = d.steps[ai]
        starts = [h[at.source]] if at.source in h else list(eta.vertices)
        for v0 in starts:
            if v0.startswith("i"):
                continue
            new0 = at.source not in h
            if new0:
                h[at.source] = v0
            for s0 in sorted(nfa.initial & nfa.useful_states):
                chain: list = []
                visited: set = set()

                def walk(v, s, n):
                    budget.tick(len(found))
                    if n >= 1 and s in nfa.final:
                        ok, new = assign(at.target, v)
                        if ok:
                            chains[ai] = tuple(chain)
                            place(idx + 1)
                            del chains[ai]
                        if new:
                            del h[at.target]
                    if n == m:
                        return
                    for e in eta.out_atoms.get(v, ()):
                        w = eta.atoms[e][1]
                        for s2, cls in steps.get(s, ()):
                            if (e, s2) in visited:
                                continue
                            cur = labels[e]
                            for c in cls:
                                if cur is not None and cur != c:
                                    continue
                                labels[e] = c
                                visited.add((e, s2))
                                chain.append((e, s2, c))
                                walk(w, s2, n + 1)
                                chain.pop()
                                visited.discard((e, s2))
                                labels[e] = cur

                walk(v0, s0, 0)
            if new0:
                del h[at.source]

    place(0)


def _sigma_label(alphabet):
    return Label(sigma_star(alphabet), Star(AnyLetter()))


def _concat_labels(parts, alphabet):
    nfa = parts[0].nfa
    for p in parts[1:]:
        nfa = concat(nfa, p.nfa)
    if len(parts) == 1:
        return parts[0]
    return Label(nfa, Concat(tuple(p.ast for p in parts)))


def _build_alpha(eta: _Eta, labels, outs, h, classes, alphabet, name):
    """Contract the subdivided paths of η into α."""
    sig = _sigma_label(alphabet)
    atoms = []
    contr = []
    base = 0
    merges = []
    for e, ((s, t), n) in enumerate(zip(eta.shape_edges, eta.lengths)):
        parts = [classes.reps[labels[base + i]] if labels[base + i] is not None else sig for i in range(n)]
        lab = _concat_labels(parts, alphabet)
        if lab.nfa.single_letter is None and _is_epsilon_only(lab):
            merges.append((f"v{s}", f"v{t}"))
            contr += [-1] * n
        else:
            contr += [len(atoms)] * n
            atoms.append(Atom(f"v{s}", lab, f"v{t}"))
        base += n
    used = list(dict.fromkeys(list(outs) + [x for a in atoms for x in (a.source, a.target)]))
    used += [v for v in dict.fromkeys(h.values()) if v.startswith("i") and v not in used]
    parent = {v: v for v in used + [x for pair in merges for x in pair]}

    def find(v):
        while parent[v] != v:
            v = parent[v]
        return v

    for a, b in merges:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[rb] = ra
    f = {v: find(v) for v in parent}
    atoms = [Atom(f[a.source], a.label, f[a.target]) for a in atoms]
    alpha = Crpq(tuple(f[o] for o in outs), tuple(dict.fromkeys(atoms)), alphabet, tuple(f[v] for v in used), name)
    return _canonical_names(alpha), tuple(contr)


def _is_epsilon_only(lab: Label) -> bool:
    return lab.has_epsilon() and not any(True for w in lab.nfa.words(1) if len(w) == 1) and _only_eps(lab)


def _only_eps(lab: Label) -> bool:
    n = lab.nfa
    useful = n.useful_states
    return not any(p in useful and q in useful for p, _, q in n.transitions)


def _canonical_names(q: Crpq) -> Crpq:
    order = list(q.vars)
    mapping = {v: f"x{i}" for i, v in enumerate(order)}
    return q.rename(mapping)


def _label_sig(label: Label) -> tuple:
    n = label.nfa
    return (n.n_states, tuple(sorted(n.transitions)), tuple(sorted(n.initial)), tuple(sorted(n.final)))


def _alpha_key(q: Crpq):
    """Minimum encoding over variable permutations: equal keys mean isomorphic
    queries.  Beyond 7 variables only one ordering is tried, so isomorphic
    queries may then get different keys (harmless for deduplication)."""
    vs = list(q.vars)
    best = None
    for perm in itertools.permutations(range(len(vs))):
        m = dict(zip(vs, perm))
        key = (
            tuple(m[o] for o in q.outputs),
            tuple(sorted((m[a.source], _label_sig(a.label), m[a.target]) for a in q.atoms)),
            len(vs),
        )
        if best is None or key < best:
            best = key
        if len(vs) > 7:
            break
    return best


# ---------------------------------------------------------------------------
# Label-inclusion domination


class _Inclusion:
    def __init__(self):
        self.memo = {}

    def __call__(self, a: Label, b: Label) -> bool:
        key = (a.nfa, b.nfa)
        if key not in self.memo:
            try:
                self.memo[key] = a == b or language_inclusion(a.nfa, b.nfa)
            except ResourceLimitError:
                self.memo[key] = False
        return self.memo[key]


def dominated(small: Crpq, big: Crpq, incl=None) -> bool:
    """A homomorphism big -> small sending each atom onto an atom whose label
    is included in it certifies that ``small`` is contained in ``big``."""
    incl = incl or _Inclusion()
    if small.arity != big.arity:
        return False
    pin = {}
    for x, y in zip(big.outputs, small.outputs):
        if pin.setdefault(x, y) != y:
            return False
    tv = set(small.vars)
    domains = {v: ({pin[v]} if v in pin else tv) for v in big.vars}
    cons = []
    for a in big.atoms:
        pairs = {(b.source, b.target) for b in small.atoms if incl(b.label, a.label)}
        if a.label.has_epsilon():
            pairs |= {(v, v) for v in tv}
        cons.append((a.source, a.target, pairs))
    return next(solve(list(big.vars), domains, cons), None) is not None


def _prune(alphas: list) -> list:
    incl = _Inclusion()
    keep = []
    for i, a in enumerate(alphas):
        drop = False
        for j, b in enumerate(alphas):
            if i == j:
                continue
            if dominated(a, b, incl):
                # a is contained in b; drop a unless they dominate each other
                # and a comes first
                if dominated(b, a, incl) and i < j:
                    continue
                drop = True
                break
        if not drop:
            keep.append(a)
    return keep


# ---------------------------------------------------------------------------
# Public operations


def _run(u: Ucrpq, k: int, m: int, c: int, budget, shape_filter=None, outputs_target=None, require_external=True):
    alphabet = u.alphabet
    classes = LabelClasses(alphabet)
    prepared = [_Disjunct(d, classes) for d in u.disjuncts]
    found: dict = {}
    witnesses: dict = {}
    bud = _Budget(budget)

    def make_sink(eta):
        def sink(di, h, labels, chains, outs):
            alpha, contr = _build_alpha(eta, labels, outs, h, classes, alphabet, f"a{len(found) + 1}")
            key = _alpha_key(alpha)
            if key not in found:
                found[key] = alpha
                eta_q = Crpq(
                    outs,
                    tuple(
                        Atom(s, classes.reps[labels[i]] if labels[i] is not None else _sigma_label(alphabet), t)
                        for i, (s, t, _, _) in enumerate(eta.atoms)
                    ),
                    alphabet,
                    tuple(eta.vertices),
                )
                witnesses[key] = ExplicitApproximation(
                    di, eta_q, tuple(sorted(h.items())), tuple(sorted(chains.items())), alpha, contr
                )

        return sink

    shape_list = [(0, ())] + shapes(k) if shape_filter is None else shape_filter
    for n_vertices, edges in shape_list:
        if len(edges) > k:
            continue
        for lengths in itertools.product(range(1, c + 1), repeat=len(edges)):
            eta = _Eta(n_vertices, list(edges), list(lengths))
            for di, d in enumerate(prepared):
                _approximations_for(
                    di, d, eta, classes, m, bud, make_sink(eta), found, require_external, outputs_target
                )
    return found, witnesses, bud.used


def under_approximation(u, k: int, m: int | None = None, c: int | None = None,
                        budget: int | None = DEFAULT_BUDGET, prune: bool = True) -> AppResult:
    """Union of the approximation members with at most ``k`` atoms.

    ``m`` bounds the refinement length and ``c`` the number of η atoms per
    shape edge (both default to the refinement bound of the construction).
    """
    u = as_ucrpq(u)
    if m is None:
        m = default_m(u, k)
    if c is None:
        c = m
    found, witnesses, used = _run(u, k, m, c, budget)
    alphas = list(found.values())
    keys = list(found.keys())
    kept = _prune(alphas) if prune else alphas
    kept_ids = {id(a) for a in kept}
    wit = [witnesses[key] for key, a in zip(keys, alphas) if id(a) in kept_ids]
    named = [a.replace(name=f"a{i + 1}") for i, a in enumerate(kept)]
    result = Ucrpq(tuple(named), u.alphabet, arity_hint=u.arity)
    return AppResult(result, wit, used, m, c)


def _same_up_to_language(a: Crpq, b: Crpq) -> bool:
    """Isomorphism with labels compared by language."""
    if a.arity != b.arity or a.n_vars != b.n_vars or a.n_atoms != b.n_atoms:
        return False
    av, bv = list(a.vars), list(b.vars)
    for perm in itertools.permutations(bv):
        m = dict(zip(av, perm))
        if tuple(m[o] for o in a.outputs) != tuple(b.outputs):
            continue
        remaining = list(b.atoms)
        ok = True
        for at in a.atoms:
            hit = None
            for j, bt in enumerate(remaining):
                if (bt.source, bt.target) == (m[at.source], m[at.target]) and language_equal(at.label.nfa, bt.label.nfa):
                    hit = j
                    break
            if hit is None:
                ok = False
                break
            remaining.pop(hit)
        if ok:
            return True
    return False


def membership_in_app(delta: Crpq, u, k: int, m: int | None = None, c: int | None = None,
                      budget: int | None = DEFAULT_BUDGET) -> bool:
    """Whether δ (up to renaming and language-equal labels) is an approximation member."""
    u = as_ucrpq(u)
    if delta.n_atoms > k or delta.arity != u.arity:
        return False
    if not delta.alphabet <= u.alphabet | frozenset():
        return False
    if m is None:
        m = default_m(u, k)
    if c is None:
        c = m
    # fix the shape to δ's own multigraph
    order = [v for v in delta.vars if any(v in (a.source, a.target) for a in delta.atoms)]
    idx = {v: i for i, v in enumerate(order)}
    edges = tuple((idx[a.source], idx[a.target]) for a in delta.atoms)
    shape = [(len(order), edges)]
    found, _, _ = _run(u, k, m, c, budget, shape_filter=shape, require_external=False)
    return any(_same_up_to_language(alpha, delta) for alpha in found.values())


# ---------------------------------------------------------------------------
# Minimization


@dataclass(frozen=True)
class MinimizationResult:
    status: str  # "minimizable", "not_minimizable", "not_within_bounds"
    query: Ucrpq | None = None
    counterexample: object = None
    complete: bool = False
    notes: tuple = ()
    m: int | None = None


def _prune_union(gamma: Ucrpq, delta: Ucrpq, max_checks: int = 40) -> Ucrpq:
    """Drop disjuncts of δ while gamma stays contained (complete SRE checks only)."""
    ds = list(delta.disjuncts)
    i = 0
    checks = 0
    while i < len(ds) and checks < max_checks and len(ds) > 1:
        trial = ds[:i] + ds[i + 1 :]
        checks += 1
        v = contained_sre(gamma, Ucrpq(tuple(trial), delta.alphabet, delta.arity))
        if v.status == "contained":
            ds = trial
        else:
            i += 1
    return Ucrpq(tuple(ds), delta.alphabet, delta.arity)


def minimize_ucrpq(u, k: int, m: int | None = None, c: int | None = None, mode: str = "auto",
                   max_len: int = 8, budget: int | None = DEFAULT_BUDGET) -> MinimizationResult:
    """Decide whether ``u`` is equivalent to a union of CRPQs with at most ``k`` atoms each."""
    u = as_ucrpq(u)
    if u.n_atoms <= k:
        return MinimizationResult("minimizable", u, complete=True, notes=("already within k atoms",))
    app = under_approximation(u, k, m, c, budget)
    delta = app.union
    sre_ok = mode in ("auto", "sre") and is_sre(u) and is_sre(delta, extension=True)
    if sre_ok:
        v = contained_sre(u, delta)
        if v.status == "contained":
            return MinimizationResult("minimizable", _prune_union(u, delta), complete=True, m=app.m)
        return MinimizationResult("not_minimizable", delta, v.counterexample, complete=True, m=app.m)
    v = contained_bounded(u, delta, max_len) if mode != "sre" else contained(u, delta, "auto", max_len)
    if v.status == NOT_CONTAINED:
        notes = (
            "a counterexample to containment in the computed approximation exists, "
            "but the approximation is not known to be complete for this input",
        )
        return MinimizationResult("not_within_bounds", delta, v.counterexample, False, notes, app.m)
    return MinimizationResult(
        "not_within_bounds", delta, None, False, (f"no counterexample up to word length {max_len}",), app.m
    )


# ---------------------------------------------------------------------------
# Pool-based search for a single small CRPQ


def label_pool(q: Crpq, pool_len: int = 1, include_sigma: bool = True) -> list:
    """Sublanguages of q's automata, their concatenations up to ``pool_len``,
    single letters and ``%any*``, one label per language."""
    classes = LabelClasses(q.alphabet)
    base = []
    for at in q.atoms:
        nfa = at.label.nfa
        useful = nfa.useful_states
        for p in sorted(useful):
            for s in sorted(nfa.reachable_from({p}) & useful):
                lab = sublabel(at.label, p, s)
                if lab.nfa.initial & lab.nfa.final and _only_eps(lab):
                    continue
                base.append(lab)
    for a in sorted(q.alphabet):
        base.append(Label.letter(a, q.alphabet))
    ids = []
    for lab in base:
        c = classes.class_of(lab)
        if c not in ids:
            ids.append(c)
    singles = [classes.reps[i] for i in ids]
    pool = list(singles)
    for n in range(2, pool_len + 1):
        for combo in itertools.product(singles, repeat=n):
            lab = _concat_labels(list(combo), q.alphabet)
            c = classes.class_of(lab)
            if c not in ids:
                ids.append(c)
                pool.append(classes.reps[c])
    if include_sigma:
        c = classes.class_of(_sigma_label(q.alphabet))
        if c not in ids:
            pool.append(classes.reps[c])
    pool.sort(key=_rank)
    return pool


@dataclass(frozen=True)
class BruteForceResult:
    query: Crpq | None
    status: str  # "equivalent", "equivalent_up_to_bound" or "none"
    candidates: int
    pool_size: int


def _candidate_shapes(q: Crpq, k: int):
    outs = list(dict.fromkeys(q.outputs))
    for e in range(0, k + 1):
        for n_extra in range(0, 2 * e + 1):
            verts = outs + [f"z{i}" for i in range(n_extra)]
            pairs = [(s, t) for s in verts for t in verts]
            for edges in itertools.combinations_with_replacement(pairs, e):
                used = {v for st in edges for v in st}
                if any(f"z{i}" not in used for i in range(n_extra)):
                    continue
                yield verts, edges


def minimize_crpq_bruteforce(q: Crpq, k: int, pool_len: int = 1, mode: str = "auto", max_len: int = 8,
                             max_candidates: int = 200_000, screen_trials: int = 40) -> BruteForceResult:
    """First CRPQ with at most ``k`` atoms over the label pool that tests equivalent to ``q``."""
    pool = label_pool(q, pool_len)
    count = 0
    seen = set()
    for verts, edges in _candidate_shapes(q, k):
        for labels in itertools.product(pool, repeat=len(edges)):
            count += 1
            if count > max_candidates:
                raise ResourceLimitError("candidate budget exhausted", partial=count)
            atoms = tuple(Atom(s, lab, t) for (s, t), lab in zip(edges, labels))
            cand = Crpq(q.outputs, atoms, q.alphabet, tuple(verts), "m")
            key = _alpha_key(cand)
            if key in seen:
                continue
            seen.add(key)
            if falsify_equivalence(q, cand, screen_trials, 4, seed=count) is not None:
                continue
            status = equivalence_status(equivalent(q, cand, mode, max_len))
            if status != "not_equivalent":
                return BruteForceResult(cand, status, count, len(pool))
    return BruteForceResult(None, "none", count, len(pool))
