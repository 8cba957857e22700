"""Tree patterns and their encoding as Boolean CRPQs.

A tree pattern is a rooted directed tree whose nodes carry a letter or the
wildcard ``*`` and whose edges are *simple* (child) or *transitive*
(descendant).  The encoding uses the reserved letter ``%marker``: simple
edges become ``%marker`` atoms, transitive edges ``%marker+`` atoms, and
each letter-labelled node gets a self-loop reading its letter.

Text format, one node per line, children indented below their parent::

    a
      -> *
      => b
"""

from __future__ import annotations

from dataclasses import dataclass

from .automata import MARKER, Label, language_equal, regex_nfa
from .errors import CrpqError
from .query import Atom, Crpq

WILDCARD = "*"
SIMPLE = "simple"
TRANSITIVE = "transitive"


class TreePatternSyntaxError(CrpqError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class TreePattern:
    labels: tuple  # sorted (node, label) pairs; label is a letter or "*"
    edges: tuple  # sorted (parent, child, kind) triples
    root: str

    def __post_init__(self):
        nodes = [n for n, _ in self.labels]
        if len(set(nodes)) != len(nodes):
            raise ValueError("duplicate node")
        if self.root not in nodes:
            raise ValueError(f"root {self.root!r} is not a node")
        parent = {}
        for p, c, kind in self.edges:
            if kind not in (SIMPLE, TRANSITIVE):
                raise ValueError(f"unknown edge kind {kind!r}")
            if p not in nodes or c not in nodes:
                raise ValueError(f"edge {p}->{c} mentions an unknown node")
            if c in parent or c == self.root:
                raise ValueError(f"node {c!r} has more than one parent")
            parent[c] = p
        if len(parent) != len(nodes) - 1:
            raise ValueError("edges do not form a tree")
        for n in nodes:
            seen = set()
            while n != self.root:
                if n in seen:
                    raise ValueError("edges do not form a tree")
                seen.add(n)
                n = parent[n]

    @classmethod
    def build(cls, labels: dict, edges, root) -> "TreePattern":
        return cls(tuple(sorted(labels.items())), tuple(sorted(edges)), root)

    @property
    def nodes(self) -> list:
        return [n for n, _ in self.labels]

    def label(self, node) -> str:
        return dict(self.labels)[node]

    def children(self, node) -> list:
        return [(c, kind) for p, c, kind in self.edges if p == node]

    def preorder(self) -> list:
        out = []

        def rec(n):
            out.append(n)
            for c, _ in self.children(n):
                rec(c)

        rec(self.root)
        return out

    @property
    def letters(self) -> frozenset:
        return frozenset(lab for _, lab in self.labels if lab != WILDCARD)


def encode(t: TreePattern, alphabet=None) -> Crpq:
    """The Boolean CRPQ of a tree pattern; variables are the node names."""
    alpha = frozenset(alphabet or ()) | t.letters | {MARKER}
    atoms = []
    for n in t.preorder():
        lab = t.label(n)
        if lab != WILDCARD:
            atoms.append(Atom(n, Label.letter(lab, alpha), n))
        for c, kind in t.children(n):
            text = MARKER if kind == SIMPLE else f"{MARKER}+"
            atoms.append(Atom(n, Label.parse(text, alpha), c))
    return Crpq((), tuple(atoms), alpha, tuple(t.preorder()), "tp")


def decode(q: Crpq) -> TreePattern | None:
    """The tree pattern encoded by ``q``, or None when q is not an encoding."""
    if q.outputs or MARKER not in q.alphabet:
        return None
    simple = regex_nfa(MARKER, q.alphabet)
    plus = regex_nfa(f"{MARKER}+", q.alphabet)
    labels = {v: WILDCARD for v in q.vars}
    edges = []
    parent = {}
    for at in q.atoms:
        if at.source == at.target:
            a = at.label.single_letter
            if a is None or a == MARKER or labels[at.source] != WILDCARD:
                return None
            labels[at.source] = a
            continue
        if language_equal(at.label.nfa, simple):
            kind = SIMPLE
        elif language_equal(at.label.nfa, plus):
            kind = TRANSITIVE
        else:
            return None
        if at.target in parent:
            return None
        parent[at.target] = at.source
        edges.append((at.source, at.target, kind))
    roots = [v for v in q.vars if v not in parent]
    if len(roots) != 1:
        return None
    try:
        return TreePattern.build(labels, edges, roots[0])
    except ValueError:
        return None


def parse_tree_pattern(text: str) -> TreePattern:
    """Read the indented outline format; nodes are named n0, n1, ... in order."""
    labels: dict = {}
    edges = []
    stack: list = []  # (indent, node)
    root = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        indent = len(line) - len(line.lstrip(" "))
        body = line.strip()
        node = f"n{len(labels)}"
        if root is None:
            if body.startswith(("->", "=>")):
                raise TreePatternSyntaxError("the first node cannot have an edge marker", lineno)
            root = node
            lab = body
        else:
            if body[:2] not in ("->", "=>"):
                raise TreePatternSyntaxError("expected '->' or '=>'", lineno)
            kind = SIMPLE if body[:2] == "->" else TRANSITIVE
            lab = body[2:].strip()
            while stack and stack[-1][0] >= indent:
                stack.pop()
            if not stack:
                raise TreePatternSyntaxError("child is not indented below a parent", lineno)
            edges.append((stack[-1][1], node, kind))
        if not lab or any(ch.isspace() for ch in lab) or (lab != WILDCARD and lab.startswith("%")):
            raise TreePatternSyntaxError(f"bad node label {lab!r}", lineno)
        labels[node] = lab
        stack.append((indent, node))
    if root is None:
        raise TreePatternSyntaxError("empty tree pattern")
    return TreePattern.build(labels, edges, root)


def format_tree_pattern(t: TreePattern) -> str:
    lines = []

    def rec(n, depth, kind):
        prefix = "" if kind is None else ("-> " if kind == SIMPLE else "=> ")
        lines.append("  " * depth + prefix + t.label(n))
        for c, k in t.children(n):
            rec(c, depth + 1, k)

    rec(t.root, 0, None)
    return "\n".join(lines) + "\n"
