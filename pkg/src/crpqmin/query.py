"""Queries, graph databases and multigraphs, with their text formats."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .automata import Label, _is_letter_char, ast_letters, parse_regex
from .errors import ArityError, GraphFormatError, QuerySyntaxError


@dataclass(frozen=True)
class Atom:
    source: str
    label: Label
    target: str

    def __str__(self):
        return f"{self.source} -[{self.label.text}]-> {self.target}"


@dataclass(frozen=True)
class Crpq:
    """Output tuple plus a conjunction of atoms ``x -[L]-> y``.

    ``declared`` lists variables that occur in no atom (they range over all
    nodes).  ``name`` is presentation only and ignored by equality.
    """

    outputs: tuple
    atoms: tuple
    alphabet: frozenset
    declared: tuple = ()
    name: str = field(default="q", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "outputs", tuple(self.outputs))
        object.__setattr__(self, "atoms", tuple(self.atoms))
        object.__setattr__(self, "alphabet", frozenset(self.alphabet))
        in_atoms = set()
        for at in self.atoms:
            in_atoms.add(at.source)
            in_atoms.add(at.target)
        extra = []
        for v in self.declared:
            if v not in in_atoms and v not in extra:
                extra.append(v)
        object.__setattr__(self, "declared", tuple(extra))

    @property
    def arity(self) -> int:
        return len(self.outputs)

    @property
    def vars(self) -> tuple:
        seen: dict = {}
        for v in self.outputs:
            seen.setdefault(v)
        for at in self.atoms:
            seen.setdefault(at.source)
            seen.setdefault(at.target)
        for v in self.declared:
            seen.setdefault(v)
        return tuple(seen)

    @property
    def n_atoms(self) -> int:
        return len(self.atoms)

    @property
    def n_vars(self) -> int:
        return len(self.vars)

    def is_boolean(self) -> bool:
        return not self.outputs

    def is_cq(self) -> bool:
        return all(at.label.single_letter is not None for at in self.atoms)

    def size(self) -> tuple:
        return (self.n_atoms, self.n_vars)

    def replace(self, **kw) -> "Crpq":
        args = dict(
            outputs=self.outputs,
            atoms=self.atoms,
            alphabet=self.alphabet,
            declared=self.declared,
            name=self.name,
        )
        args.update(kw)
        return Crpq(**args)

    def rename(self, mapping: Mapping[str, str]) -> "Crpq":
        """Apply a variable substitution (not necessarily injective)."""
        m = lambda v: mapping.get(v, v)  # noqa: E731
        atoms = []
        for at in self.atoms:
            new = Atom(m(at.source), at.label, m(at.target))
            if new not in atoms:
                atoms.append(new)
        return self.replace(
            outputs=tuple(m(v) for v in self.outputs),
            atoms=tuple(atoms),
            declared=tuple(m(v) for v in self.vars),
        )

    def with_alphabet(self, alphabet: Iterable[str]) -> "Crpq":
        """The same query over a larger alphabet."""
        alpha = frozenset(alphabet) | self.alphabet
        atoms = tuple(Atom(at.source, at.label.with_alphabet(alpha), at.target) for at in self.atoms)
        return self.replace(atoms=atoms, alphabet=alpha)

    def underlying_graph(self) -> "Multigraph":
        return Multigraph(
            self.vars,
            tuple((at.source, at.target, i) for i, at in enumerate(self.atoms)),
        )

    def text(self) -> str:
        return serialize_crpq(self)

    def __str__(self):
        return self.text()


@dataclass(frozen=True)
class Ucrpq:
    """A finite union of CRPQs of equal arity.

    The empty union is permitted for computed results and is never satisfied;
    it then needs an explicit ``arity``.
    """

    disjuncts: tuple
    alphabet: frozenset = frozenset()
    arity_hint: int | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "disjuncts", tuple(self.disjuncts))
        alpha = frozenset(self.alphabet)
        for d in self.disjuncts:
            alpha |= d.alphabet
        object.__setattr__(self, "alphabet", alpha)
        arities = {d.arity for d in self.disjuncts}
        if len(arities) > 1:
            raise ArityError(f"disjuncts have different arities {sorted(arities)}")

    @classmethod
    def of(cls, *qs: Crpq) -> "Ucrpq":
        return cls(tuple(qs))

    @property
    def arity(self) -> int:
        if self.disjuncts:
            return self.disjuncts[0].arity
        return self.arity_hint or 0

    @property
    def n_atoms(self) -> int:
        return max((d.n_atoms for d in self.disjuncts), default=0)

    @property
    def n_vars(self) -> int:
        return max((d.n_vars for d in self.disjuncts), default=0)

    def with_alphabet(self, alphabet: Iterable[str]) -> "Ucrpq":
        alpha = frozenset(alphabet) | self.alphabet
        return Ucrpq(tuple(d.with_alphabet(alpha) for d in self.disjuncts), alpha, self.arity_hint)

    def __iter__(self):
        return iter(self.disjuncts)

    def __len__(self):
        return len(self.disjuncts)

    def text(self) -> str:
        return serialize(self)

    def __str__(self):
        return self.text()


def as_ucrpq(q) -> Ucrpq:
    return q if isinstance(q, Ucrpq) else Ucrpq((q,))


# ---------------------------------------------------------------------------
# Graph databases


class GraphDb:
    """Finite edge-labelled directed graph with set semantics.

    Node and edge order are kept for stable serialization but play no role
    in equality.
    """

    __slots__ = ("vertices", "edges", "_index")

    def __init__(self, vertices: Iterable, edges: Iterable[tuple]):
        vs: dict = {}
        for v in vertices:
            vs.setdefault(v)
        es: dict = {}
        for e in edges:
            u, a, v = e
            if u not in vs or v not in vs:
                raise GraphFormatError(f"edge {(u, a, v)} uses an undeclared vertex")
            es.setdefault((u, a, v))
        self.vertices = tuple(vs)
        self.edges = tuple(es)
        self._index = None

    @property
    def alphabet(self) -> frozenset:
        return frozenset(a for _, a, _ in self.edges)

    @property
    def out_index(self) -> dict:
        """``{(u, a): [v, ...]}``."""
        if self._index is None:
            d: dict = {}
            for u, a, v in self.edges:
                d.setdefault((u, a), []).append(v)
            self._index = d
        return self._index

    def __eq__(self, other):
        return (
            isinstance(other, GraphDb)
            and set(self.vertices) == set(other.vertices)
            and set(self.edges) == set(other.edges)
        )

    def __hash__(self):
        return hash((frozenset(self.vertices), frozenset(self.edges)))

    def __repr__(self):
        return f"GraphDb({len(self.vertices)} nodes, {len(self.edges)} edges)"


def load_graphdb(data: bytes | str) -> GraphDb:
    try:
        obj = json.loads(data)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise GraphFormatError(f"malformed JSON: {exc}") from None
    if not isinstance(obj, dict) or set(obj) - {"nodes", "edges"} or "nodes" not in obj:
        raise GraphFormatError('expected an object with keys "nodes" and "edges"')
    nodes = obj["nodes"]
    edges = obj.get("edges", [])
    if not isinstance(nodes, list) or not all(isinstance(n, str) for n in nodes):
        raise GraphFormatError('"nodes" must be a list of strings')
    if not isinstance(edges, list):
        raise GraphFormatError('"edges" must be a list')
    triples = []
    for e in edges:
        if not (isinstance(e, list) and len(e) == 3 and all(isinstance(x, str) for x in e)):
            raise GraphFormatError(f"edge {e!r} is not a [source, letter, target] triple")
        triples.append(tuple(e))
    return GraphDb(nodes, triples)


def save_graphdb(db: GraphDb) -> bytes:
    obj = {"nodes": list(db.vertices), "edges": [list(e) for e in db.edges]}
    return json.dumps(obj, separators=(",", ":"), ensure_ascii=False).encode("utf-8")


# ---------------------------------------------------------------------------
# Multigraphs


@dataclass(frozen=True)
class Multigraph:
    vertices: tuple
    edges: tuple  # (source, target, edge id)

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(dict.fromkeys(self.vertices)))
        object.__setattr__(self, "edges", tuple(self.edges))
        ids = [e[2] for e in self.edges]
        if len(set(ids)) != len(ids):
            raise ValueError("edge ids must be unique")
        vs = set(self.vertices)
        for s, t, _ in self.edges:
            if s not in vs or t not in vs:
                raise ValueError(f"edge endpoint {s!r} or {t!r} is undeclared")

    def in_degree(self, v) -> int:
        return sum(1 for _, t, _ in self.edges if t == v)

    def out_degree(self, v) -> int:
        return sum(1 for s, _, _ in self.edges if s == v)


# ---------------------------------------------------------------------------
# Query text format

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_']*")


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    @property
    def line(self) -> int:
        return self.text.count("\n", 0, self.pos) + 1

    def error(self, msg):
        raise QuerySyntaxError(msg, self.line)

    def skip(self):
        while self.pos < len(self.text):
            if self.text[self.pos].isspace():
                self.pos += 1
            elif self.text.startswith("//", self.pos):
                nl = self.text.find("\n", self.pos)
                self.pos = len(self.text) if nl < 0 else nl
            else:
                break

    def at_end(self) -> bool:
        self.skip()
        return self.pos >= len(self.text)

    def peek(self, s: str) -> bool:
        self.skip()
        return self.text.startswith(s, self.pos)

    def expect(self, s: str):
        if not self.peek(s):
            found = self.text[self.pos : self.pos + 10] or "end of input"
            self.error(f"expected {s!r}, found {found!r}")
        self.pos += len(s)

    def accept(self, s: str) -> bool:
        if self.peek(s):
            self.pos += len(s)
            return True
        return False

    def ident(self, what="identifier") -> str:
        self.skip()
        m = _IDENT.match(self.text, self.pos)
        if not m:
            self.error(f"expected {what}")
        self.pos = m.end()
        return m.group(0)

    def keyword(self, kw: str) -> bool:
        self.skip()
        m = _IDENT.match(self.text, self.pos)
        if m and m.group(0) == kw:
            self.pos = m.end()
            return True
        return False

    def letter_token(self) -> str:
        self.skip()
        start = self.pos
        if self.text.startswith("%marker", self.pos):
            self.pos += len("%marker")
            return "%marker"
        while self.pos < len(self.text) and _is_letter_char(self.text[self.pos]):
            self.pos += 1
        if start == self.pos:
            self.error("expected a letter")
        return self.text[start : self.pos]


def parse_query(text: str, alphabet: Iterable[str] | None = None) -> Ucrpq:
    """Parse a query file into a union.

    Without an ``alphabet`` header (and no ``alphabet`` argument) letters are
    single characters and the alphabet is the set of letters used.
    """
    sc = _Scanner(text)
    header = None
    if sc.keyword("alphabet"):
        header = []
        if not sc.peek(";"):
            header.append(sc.letter_token())
            while sc.accept(","):
                header.append(sc.letter_token())
        sc.expect(";")
    if header is None and alphabet is not None:
        header = list(alphabet)
    raw = []  # (name, outputs, stmts, line)
    union_names = None
    while not sc.at_end():
        if sc.keyword("query"):
            line = sc.line
            name = sc.ident("query name")
            sc.expect("(")
            outs = []
            if not sc.peek(")"):
                outs.append(sc.ident("variable"))
                while sc.accept(","):
                    outs.append(sc.ident("variable"))
            sc.expect(")")
            sc.expect("{")
            stmts = []
            while not sc.accept("}"):
                if sc.at_end():
                    sc.error("unterminated query body")
                if sc.accept(";"):
                    continue
                src = sc.ident("variable")
                if sc.accept("-["):
                    end = sc.text.find("]->", sc.pos)
                    if end < 0:
                        sc.error("unterminated atom label, expected ']->'")
                    rtext = sc.text[sc.pos : end]
                    rline = sc.line
                    sc.pos = end + 3
                    tgt = sc.ident("variable")
                    stmts.append((src, rtext, tgt, rline))
                else:
                    stmts.append((src, None, None, sc.line))
                if not sc.peek("}"):
                    sc.expect(";")
            if any(r[0] == name for r in raw):
                sc.error(f"query {name!r} is defined twice")
            raw.append((name, outs, stmts, line))
        elif sc.keyword("union"):
            if union_names is not None:
                sc.error("only one union statement is allowed")
            uline = sc.line
            sc.expect("{")
            union_names = []
            if not sc.peek("}"):
                union_names.append(sc.ident("query name"))
                while sc.accept("|"):
                    union_names.append(sc.ident("query name"))
            sc.expect("}")
            sc.accept(";")
            union_line = uline
        else:
            sc.error("expected 'query' or 'union'")
    if header is None:
        letters: set = set()
        for _, _, stmts, line in raw:
            for _, rtext, _, rline in stmts:
                if rtext is not None:
                    try:
                        letters |= ast_letters(parse_regex(rtext, None))
                    except Exception as exc:
                        raise QuerySyntaxError(str(exc), rline) from None
        alpha = frozenset(letters)
    else:
        alpha = frozenset(header)
    by_name = {}
    for name, outs, stmts, line in raw:
        atoms = []
        declared = []
        for src, rtext, tgt, rline in stmts:
            if rtext is None:
                declared.append(src)
                continue
            try:
                label = Label.parse(rtext, alpha)
            except QuerySyntaxError:
                raise
            except Exception as exc:
                raise QuerySyntaxError(f"in atom label [{rtext.strip()}]: {exc}", rline) from None
            atoms.append(Atom(src, label, tgt))
        by_name[name] = Crpq(tuple(outs), tuple(atoms), alpha, tuple(declared), name)
    if union_names is None:
        chosen = list(by_name.values())
        if not chosen:
            raise QuerySyntaxError("the file defines no query", 1)
    else:
        chosen = []
        for n in union_names:
            if n not in by_name:
                raise QuerySyntaxError(f"union refers to unknown query {n!r}", union_line)
            chosen.append(by_name[n])
    return Ucrpq(tuple(chosen), alpha)


def parse_crpq(text: str, alphabet: Iterable[str] | None = None) -> Crpq:
    """Parse a file that must contain exactly one disjunct."""
    u = parse_query(text, alphabet)
    if len(u.disjuncts) != 1:
        raise QuerySyntaxError(f"expected a single query, found {len(u.disjuncts)}")
    return u.disjuncts[0]


def _header(alpha) -> str:
    return "alphabet " + ", ".join(sorted(alpha)) + ";"


def _body(q: Crpq, name: str) -> list:
    lines = [f"query {name}({', '.join(q.outputs)}) {{"]
    for at in q.atoms:
        lines.append(f"  {at};")
    for v in q.declared:
        lines.append(f"  {v};")
    lines.append("}")
    return lines


def serialize_crpq(q: Crpq) -> str:
    return "\n".join([_header(q.alphabet)] + _body(q, q.name or "q")) + "\n"


def serialize(u: Ucrpq | Crpq) -> str:
    if isinstance(u, Crpq):
        return serialize_crpq(u)
    lines = [_header(u.alphabet)]
    names = []
    for i, d in enumerate(u.disjuncts):
        name = d.name if d.name and _IDENT.fullmatch(d.name) else f"q{i + 1}"
        if name in names:
            name = f"q{i + 1}"
            while name in names:
                name += "_"
        names.append(name)
        lines += _body(d, name)
    if not u.disjuncts:
        lines.append("union { }")
    return "\n".join(lines) + "\n"
