"""Regular expressions, position automata and language-level operations.

Every regular language in this package is carried by an :class:`Nfa` built
with the position (Glushkov) construction: state 0 is the start state and
there is one further state per letter occurrence in the expression.  The
construction is epsilon-free, so a state sequence of the automaton is a
meaningful object and sublanguages between two states are well defined.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Sequence

from .errors import RegexSyntaxError, ResourceLimitError, UnknownLetterError, UnknownStateError

ANY = "%any"
EPS = "%eps"
EMPTY = "%empty"
MARKER = "%marker"

COMPLEMENT_CAP = 1 << 12

_SPECIAL = set("|.+*?()%[]{},;-> \t\r\n")


# ---------------------------------------------------------------------------
# Abstract syntax


class RegexAst:
    """Base class of regular expression nodes."""

    __slots__ = ()

    def __str__(self) -> str:
        return to_text(self)


@dataclass(frozen=True)
class Letter(RegexAst):
    symbol: str


@dataclass(frozen=True)
class Epsilon(RegexAst):
    pass


@dataclass(frozen=True)
class Empty(RegexAst):
    pass


@dataclass(frozen=True)
class AnyLetter(RegexAst):
    pass


@dataclass(frozen=True)
class Concat(RegexAst):
    children: tuple


@dataclass(frozen=True)
class Union(RegexAst):
    children: tuple


@dataclass(frozen=True)
class Star(RegexAst):
    child: RegexAst


@dataclass(frozen=True)
class Plus(RegexAst):
    child: RegexAst


@dataclass(frozen=True)
class Opt(RegexAst):
    child: RegexAst


def ast_size(ast: RegexAst) -> int:
    if isinstance(ast, (Concat, Union)):
        return 1 + sum(ast_size(c) for c in ast.children)
    if isinstance(ast, (Star, Plus, Opt)):
        return 1 + ast_size(ast.child)
    return 1


def ast_letters(ast: RegexAst) -> set[str]:
    if isinstance(ast, Letter):
        return {ast.symbol}
    if isinstance(ast, (Concat, Union)):
        out: set[str] = set()
        for c in ast.children:
            out |= ast_letters(c)
        return out
    if isinstance(ast, (Star, Plus, Opt)):
        return ast_letters(ast.child)
    return set()


# ---------------------------------------------------------------------------
# Parsing


def _is_letter_char(ch: str) -> bool:
    return ch not in _SPECIAL


class _Parser:
    def __init__(self, text: str, alphabet):
        self.text = text
        self.alphabet = None if alphabet is None else frozenset(alphabet)
        self.letters_by_len = (
            None if alphabet is None else sorted(self.alphabet, key=lambda s: (-len(s), s))
        )
        self.pos = 0

    def error(self, msg):
        raise RegexSyntaxError(msg, self.pos)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self):
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def parse(self) -> RegexAst:
        if not self.text.strip():
            self.error("empty regular expression")
        node = self.expr()
        if self.peek():
            self.error(f"unexpected character {self.peek()!r}")
        return node

    def expr(self):
        terms = [self.term()]
        while self.peek() == "|":
            self.pos += 1
            terms.append(self.term())
        return terms[0] if len(terms) == 1 else Union(tuple(terms))

    def starts_atom(self, ch):
        return ch == "(" or ch == "%" or (ch and _is_letter_char(ch))

    def term(self):
        factors = [self.factor()]
        while True:
            ch = self.peek()
            if ch == ".":
                self.pos += 1
                factors.append(self.factor())
            elif self.starts_atom(ch):
                factors.append(self.factor())
            else:
                break
        return factors[0] if len(factors) == 1 else Concat(tuple(factors))

    def factor(self):
        node = self.atom()
        while self.peek() in ("+", "*", "?") and self.peek():
            op = self.text[self.pos]
            self.pos += 1
            node = {"+": Plus, "*": Star, "?": Opt}[op](node)
        return node

    def atom(self):
        ch = self.peek()
        if ch == "(":
            self.pos += 1
            node = self.expr()
            if self.peek() != ")":
                self.error("expected ')'")
            self.pos += 1
            return node
        if ch == "%":
            for kw, node in ((EPS, Epsilon()), (ANY, AnyLetter()), (EMPTY, Empty())):
                if self.text.startswith(kw, self.pos):
                    self.pos += len(kw)
                    return node
            if self.text.startswith(MARKER, self.pos):
                if self.alphabet is not None and MARKER not in self.alphabet:
                    raise UnknownLetterError(f"letter {MARKER!r} is not in the alphabet")
                self.pos += len(MARKER)
                return Letter(MARKER)
            self.error("unknown % keyword")
        if not ch or not _is_letter_char(ch):
            self.error("expected a letter, '%eps', '%any' or '('" if ch else "unexpected end of input")
        if self.alphabet is None:
            self.pos += 1
            return Letter(ch)
        for sym in self.letters_by_len:
            if sym and self.text.startswith(sym, self.pos):
                self.pos += len(sym)
                return Letter(sym)
        end = self.pos
        while end < len(self.text) and _is_letter_char(self.text[end]):
            end += 1
        raise UnknownLetterError(
            f"letter {self.text[self.pos:end]!r} at position {self.pos} is not in the alphabet"
        )


def parse_regex(text: str, alphabet: Iterable[str] | None) -> RegexAst:
    """Parse ``text``.  Letters are matched longest-first against ``alphabet``.

    With ``alphabet=None`` every non-special character is a one-letter symbol.
    """
    return _Parser(text, alphabet).parse()


# ---------------------------------------------------------------------------
# Printing


def _needs_parens(node, context):
    if context == "postfix":
        return isinstance(node, (Concat, Union, Star, Plus, Opt))
    if context == "concat":
        return isinstance(node, Union)
    return False


def to_text(ast: RegexAst) -> str:
    if isinstance(ast, Letter):
        return ast.symbol
    if isinstance(ast, Epsilon):
        return EPS
    if isinstance(ast, Empty):
        return EMPTY
    if isinstance(ast, AnyLetter):
        return ANY
    if isinstance(ast, Union):
        return "|".join(to_text(c) for c in ast.children)
    if isinstance(ast, Concat):
        parts = []
        for c in ast.children:
            s = to_text(c)
            parts.append(f"({s})" if _needs_parens(c, "concat") else s)
        return ".".join(parts)
    op = {Star: "*", Plus: "+", Opt: "?"}[type(ast)]
    s = to_text(ast.child)
    return (f"({s})" if _needs_parens(ast.child, "postfix") else s) + op


# ---------------------------------------------------------------------------
# NFA


@dataclass(frozen=True)
class Nfa:
    n_states: int
    alphabet: frozenset
    transitions: frozenset
    initial: frozenset
    final: frozenset

    def __post_init__(self):
        for p, a, q in self.transitions:
            if not (0 <= p < self.n_states and 0 <= q < self.n_states):
                raise ValueError(f"transition {(p, a, q)} uses an undeclared state")
            if a not in self.alphabet:
                raise ValueError(f"transition {(p, a, q)} uses a letter outside the alphabet")
        for s in self.initial | self.final:
            if not 0 <= s < self.n_states:
                raise ValueError(f"state {s} is undeclared")

    @property
    def states(self) -> range:
        return range(self.n_states)

    @cached_property
    def delta(self) -> dict:
        d: dict = {}
        for p, a, q in self.transitions:
            d.setdefault((p, a), set()).add(q)
        return {k: frozenset(v) for k, v in d.items()}

    @cached_property
    def out_edges(self) -> dict:
        d: dict = {s: [] for s in range(self.n_states)}
        for p, a, q in sorted(self.transitions):
            d[p].append((a, q))
        return d

    @cached_property
    def in_edges(self) -> dict:
        d: dict = {s: [] for s in range(self.n_states)}
        for p, a, q in sorted(self.transitions):
            d[q].append((p, a))
        return d

    def step(self, states: Iterable[int], symbol: str) -> frozenset:
        out: set = set()
        for s in states:
            out |= self.delta.get((s, symbol), frozenset())
        return frozenset(out)

    def accepts(self, word: Sequence[str]) -> bool:
        cur = self.initial
        for a in word:
            cur = self.step(cur, a)
            if not cur:
                return False
        return bool(cur & self.final)

    def reachable_from(self, states: Iterable[int]) -> set:
        seen = set(states)
        todo = list(seen)
        while todo:
            s = todo.pop()
            for _, q in self.out_edges[s]:
                if q not in seen:
                    seen.add(q)
                    todo.append(q)
        return seen

    def coreachable(self) -> set:
        seen = set(self.final)
        todo = list(seen)
        while todo:
            s = todo.pop()
            for p, _ in self.in_edges[s]:
                if p not in seen:
                    seen.add(p)
                    todo.append(p)
        return seen

    @cached_property
    def useful_states(self) -> frozenset:
        return frozenset(self.reachable_from(self.initial) & self.coreachable())

    def is_empty(self) -> bool:
        return not self.useful_states

    def has_epsilon(self) -> bool:
        return bool(self.initial & self.final)

    @cached_property
    def single_letter(self) -> str | None:
        """The letter ``a`` if the language is exactly ``{a}``, else None."""
        if self.has_epsilon() or self.is_empty():
            return None
        useful = self.useful_states
        firsts = set()
        seconds = set()
        for p, a, q in self.transitions:
            if p in self.initial and q in useful:
                firsts.add(a)
                seconds.add(q)
        if len(firsts) != 1:
            return None
        for q in seconds:
            if q not in self.final:
                return None
            if any(r in useful for _, r in self.out_edges[q]):
                return None
        return next(iter(firsts))

    def words(self, max_len: int) -> Iterator[tuple]:
        """Accepted words of length at most ``max_len`` in length-lexicographic order."""
        alpha = sorted(self.alphabet)
        useful = self.useful_states
        level = {(): self.initial & useful}
        for n in range(max_len + 1):
            for w in sorted(level):
                if level[w] & self.final:
                    yield w
            if n == max_len:
                break
            nxt = {}
            for w, st in level.items():
                for a in alpha:
                    s2 = self.step(st, a) & useful
                    if s2:
                        nxt[w + (a,)] = s2
            level = nxt
            if not level:
                break

    def with_alphabet(self, alphabet: Iterable[str]) -> "Nfa":
        return Nfa(self.n_states, frozenset(alphabet), self.transitions, self.initial, self.final)

    def trim(self) -> "Nfa":
        """Drop useless states and renumber densely (initial states first)."""
        useful = self.useful_states
        if not useful:
            return empty_nfa(self.alphabet)
        order = sorted(useful, key=lambda s: (s not in self.initial, s))
        idx = {s: i for i, s in enumerate(order)}
        return Nfa(
            len(order),
            self.alphabet,
            frozenset((idx[p], a, idx[q]) for p, a, q in self.transitions if p in idx and q in idx),
            frozenset(idx[s] for s in self.initial if s in idx),
            frozenset(idx[s] for s in self.final if s in idx),
        )


# ---------------------------------------------------------------------------
# Position construction


def compile_nfa(ast: RegexAst, alphabet: Iterable[str] | None = None) -> Nfa:
    """Position automaton: state 0 starts, state i is the i-th letter occurrence."""
    if alphabet is None:
        alphabet = ast_letters(ast)
    alphabet = frozenset(alphabet)
    positions: list = []  # symbol set per position
    follow: dict = {}

    def walk(node):
        # returns (nullable, first, last)
        if isinstance(node, Letter):
            if node.symbol not in alphabet:
                raise UnknownLetterError(f"letter {node.symbol!r} is not in the alphabet")
            positions.append((node.symbol,))
            p = len(positions)
            return False, {p}, {p}
        if isinstance(node, AnyLetter):
            positions.append(tuple(sorted(alphabet)))
            p = len(positions)
            return False, {p}, {p}
        if isinstance(node, Epsilon):
            return True, set(), set()
        if isinstance(node, Empty):
            return False, set(), set()
        if isinstance(node, Union):
            nul, fi, la = False, set(), set()
            for c in node.children:
                n2, f2, l2 = walk(c)
                nul, fi, la = nul or n2, fi | f2, la | l2
            return nul, fi, la
        if isinstance(node, Concat):
            nul, fi, la = True, set(), set()
            for c in node.children:
                n2, f2, l2 = walk(c)
                for p in la:
                    follow.setdefault(p, set()).update(f2)
                fi = fi | f2 if nul else fi
                la = la | l2 if n2 else set(l2)
                nul = nul and n2
            return nul, fi, la
        if isinstance(node, (Star, Plus)):
            n2, f2, l2 = walk(node.child)
            for p in l2:
                follow.setdefault(p, set()).update(f2)
            return (True if isinstance(node, Star) else n2), f2, l2
        if isinstance(node, Opt):
            n2, f2, l2 = walk(node.child)
            return True, f2, l2
        raise TypeError(f"not a regex node: {node!r}")

    nullable, first, last = walk(ast)
    trans = set()
    for q in first:
        for a in positions[q - 1]:
            trans.add((0, a, q))
    for p, qs in follow.items():
        for q in qs:
            for a in positions[q - 1]:
                trans.add((p, a, q))
    final = set(last) | ({0} if nullable else set())
    return Nfa(len(positions) + 1, alphabet, frozenset(trans), frozenset({0}), frozenset(final))


def regex_nfa(text: str, alphabet: Iterable[str]) -> Nfa:
    alphabet = frozenset(alphabet)
    return compile_nfa(parse_regex(text, alphabet), alphabet)


def empty_nfa(alphabet: Iterable[str]) -> Nfa:
    return Nfa(1, frozenset(alphabet), frozenset(), frozenset({0}), frozenset())


def epsilon_nfa(alphabet: Iterable[str]) -> Nfa:
    return Nfa(1, frozenset(alphabet), frozenset(), frozenset({0}), frozenset({0}))


def letter_nfa(letter: str, alphabet: Iterable[str]) -> Nfa:
    alphabet = frozenset(alphabet)
    return Nfa(2, alphabet, frozenset({(0, letter, 1)}), frozenset({0}), frozenset({1}))


def sigma_star(alphabet: Iterable[str]) -> Nfa:
    alphabet = frozenset(alphabet)
    return Nfa(1, alphabet, frozenset((0, a, 0) for a in alphabet), frozenset({0}), frozenset({0}))


def word_nfa(word: Sequence[str], alphabet: Iterable[str]) -> Nfa:
    n = len(word)
    return Nfa(
        n + 1,
        frozenset(alphabet),
        frozenset((i, a, i + 1) for i, a in enumerate(word)),
        frozenset({0}),
        frozenset({n}),
    )


# ---------------------------------------------------------------------------
# Language operations


def _check_state(nfa: Nfa, s: int):
    if not isinstance(s, int) or not 0 <= s < nfa.n_states:
        raise UnknownStateError(f"state {s!r} is not a state of the automaton")


def sublanguage(nfa: Nfa, p: int, q: int) -> Nfa:
    """The language read from state ``p`` to state ``q``."""
    _check_state(nfa, p)
    _check_state(nfa, q)
    return Nfa(nfa.n_states, nfa.alphabet, nfa.transitions, frozenset({p}), frozenset({q}))


def membership(nfa: Nfa, word: Sequence[str]) -> bool:
    return nfa.accepts(word)


def _same_alphabet(*nfas: Nfa) -> frozenset:
    alpha = frozenset()
    for n in nfas:
        alpha |= n.alphabet
    return alpha


def union(a: Nfa, b: Nfa) -> Nfa:
    off = a.n_states
    return Nfa(
        a.n_states + b.n_states,
        _same_alphabet(a, b),
        a.transitions | frozenset((p + off, s, q + off) for p, s, q in b.transitions),
        a.initial | frozenset(s + off for s in b.initial),
        a.final | frozenset(s + off for s in b.final),
    )


def concat(a: Nfa, b: Nfa) -> Nfa:
    """Epsilon-free concatenation: every final state of ``a`` also takes b's initial moves."""
    off = a.n_states
    trans = set(a.transitions)
    trans |= {(p + off, s, q + off) for p, s, q in b.transitions}
    for f in a.final:
        for i in b.initial:
            for s, q in b.out_edges[i]:
                trans.add((f, s, q + off))
    final = {s + off for s in b.final}
    if b.initial & b.final:
        final |= a.final
    return Nfa(
        a.n_states + b.n_states,
        _same_alphabet(a, b),
        frozenset(trans),
        a.initial,
        frozenset(final),
    )


def intersect(a: Nfa, b: Nfa) -> Nfa:
    idx: dict = {}
    todo = deque()
    for p in sorted(a.initial):
        for q in sorted(b.initial):
            idx[(p, q)] = len(idx)
            todo.append((p, q))
    trans = set()
    while todo:
        p, q = todo.popleft()
        for s, p2 in a.out_edges[p]:
            for q2 in b.delta.get((q, s), ()):
                if (p2, q2) not in idx:
                    idx[(p2, q2)] = len(idx)
                    todo.append((p2, q2))
                trans.add((idx[(p, q)], s, idx[(p2, q2)]))
    alpha = _same_alphabet(a, b)
    if not idx:
        return empty_nfa(alpha)
    return Nfa(
        len(idx),
        alpha,
        frozenset(trans),
        frozenset(i for (p, q), i in idx.items() if p in a.initial and q in b.initial),
        frozenset(i for (p, q), i in idx.items() if p in a.final and q in b.final),
    )


def determinize(nfa: Nfa, cap: int = COMPLEMENT_CAP) -> tuple[Nfa, list]:
    """Complete subset-construction DFA; returns the DFA and its subset list."""
    alpha = sorted(nfa.alphabet)
    start = frozenset(nfa.initial)
    idx = {start: 0}
    subsets = [start]
    trans = set()
    todo = deque([start])
    while todo:
        cur = todo.popleft()
        for a in alpha:
            nxt = nfa.step(cur, a)
            if nxt not in idx:
                if len(idx) >= cap:
                    raise ResourceLimitError(
                        f"subset construction exceeded {cap} states", partial=len(idx)
                    )
                idx[nxt] = len(idx)
                subsets.append(nxt)
                todo.append(nxt)
            trans.add((idx[cur], a, idx[nxt]))
    final = frozenset(i for i, s in enumerate(subsets) if s & nfa.final)
    return Nfa(len(subsets), nfa.alphabet, frozenset(trans), frozenset({0}), final), subsets


def complement(nfa: Nfa, cap: int = COMPLEMENT_CAP) -> Nfa:
    dfa, _ = determinize(nfa, cap)
    return Nfa(
        dfa.n_states,
        dfa.alphabet,
        dfa.transitions,
        dfa.initial,
        frozenset(range(dfa.n_states)) - dfa.final,
    )


def is_empty(nfa: Nfa) -> bool:
    return nfa.is_empty()


def has_epsilon(nfa: Nfa) -> bool:
    return nfa.has_epsilon()


_OPS = {
    "union": union,
    "concat": concat,
    "intersect": intersect,
    "complement": complement,
    "is_empty": is_empty,
    "has_epsilon": has_epsilon,
}


def lang_ops(op: str, *args: Nfa):
    """Dispatch a named language operation (``union``, ``concat``, ...)."""
    try:
        fn = _OPS[op]
    except KeyError:
        raise ValueError(f"unknown language operation {op!r}") from None
    return fn(*args)


def inclusion_witness(l: Nfa, r: Nfa, cap: int = COMPLEMENT_CAP) -> tuple | None:
    """A shortest word in L(l) \\ L(r), or None when L(l) is a subset of L(r).

    Explores the product of ``l`` with the subset automaton of ``r`` on the fly,
    so only reachable pairs are built.
    """
    start_r = frozenset(r.initial)
    seen: dict = {}
    todo = deque()
    useful = l.useful_states
    subsets: set = set()
    for p in sorted(l.initial & useful):
        key = (p, start_r)
        seen[key] = None
        todo.append(key)
        subsets.add(start_r)
    while todo:
        key = todo.popleft()
        p, rs = key
        if p in l.final and not (rs & r.final):
            word = []
            while seen[key] is not None:
                key, a = seen[key]
                word.append(a)
            return tuple(reversed(word))
        for a, p2 in l.out_edges[p]:
            if p2 not in useful:
                continue
            rs2 = r.step(rs, a)
            k2 = (p2, rs2)
            if k2 not in seen:
                if rs2 not in subsets:
                    subsets.add(rs2)
                    if len(subsets) > cap:
                        raise ResourceLimitError(
                            f"inclusion check exceeded {cap} subset states", partial=len(subsets)
                        )
                seen[k2] = (key, a)
                todo.append(k2)
    return None


def language_inclusion(l: Nfa, r: Nfa, cap: int = COMPLEMENT_CAP) -> bool:
    return inclusion_witness(l, r, cap) is None


def language_equal(l: Nfa, r: Nfa, cap: int = COMPLEMENT_CAP) -> bool:
    return language_inclusion(l, r, cap) and language_inclusion(r, l, cap)


# ---------------------------------------------------------------------------
# SRE classification


@dataclass(frozen=True)
class PlusFactor:
    letter: str

    def __str__(self):
        return f"{self.letter}+"


@dataclass(frozen=True)
class LetterSet:
    letters: frozenset

    def __str__(self):
        ls = sorted(self.letters)
        return ls[0] if len(ls) == 1 else "(" + "|".join(ls) + ")"


@dataclass(frozen=True)
class AnyStar:
    def __str__(self):
        return f"{ANY}*"


@dataclass(frozen=True)
class StarLetter:
    """``a*``; only produced with the extension enabled."""

    letter: str

    def __str__(self):
        return f"{self.letter}*"


SreFactor = PlusFactor | LetterSet | AnyStar | StarLetter


def _letter_set(node, alphabet):
    if isinstance(node, Letter):
        return frozenset({node.symbol})
    if isinstance(node, AnyLetter) and alphabet is not None:
        return frozenset(alphabet)
    if isinstance(node, Union):
        out = frozenset()
        for c in node.children:
            s = _letter_set(c, alphabet)
            if s is None:
                return None
            out |= s
        return out
    return None


def _factor(node, extension, alphabet):
    if isinstance(node, Plus):
        inner = node.child
        while isinstance(inner, Plus):
            inner = inner.child
        if isinstance(inner, Letter):
            return PlusFactor(inner.symbol)
        return None
    if isinstance(node, Star) and extension:
        inner = node.child
        if isinstance(inner, AnyLetter):
            return AnyStar()
        if alphabet is not None:
            s = _letter_set(inner, alphabet)
            if s is not None and s == frozenset(alphabet):
                return AnyStar()
        if isinstance(inner, Letter):
            return StarLetter(inner.symbol)
        return None
    s = _letter_set(node, alphabet)
    if s:
        return LetterSet(s)
    return None


def classify_sre(ast: RegexAst, extension: bool = False, alphabet=None):
    """Factor list when ``ast`` is a concatenation of ``a+`` / letter-union factors.

    Returns None for expressions outside the fragment.  With ``extension`` the
    factors ``%any*`` and ``a*`` are admitted as well.
    """
    parts = list(ast.children) if isinstance(ast, Concat) else [ast]
    flat = []
    while parts:
        node = parts.pop(0)
        if isinstance(node, Concat):
            parts[0:0] = list(node.children)
        elif not isinstance(node, Epsilon):
            flat.append(node)
    factors = []
    for node in flat:
        f = _factor(node, extension, alphabet)
        if f is None:
            return None
        factors.append(f)
    return factors or None


def sre_factor_nfa(f, alphabet) -> Nfa:
    alphabet = frozenset(alphabet)
    if isinstance(f, PlusFactor):
        return Nfa(2, alphabet, frozenset({(0, f.letter, 1), (1, f.letter, 1)}), frozenset({0}), frozenset({1}))
    if isinstance(f, LetterSet):
        return Nfa(2, alphabet, frozenset((0, a, 1) for a in f.letters), frozenset({0}), frozenset({1}))
    if isinstance(f, AnyStar):
        return sigma_star(alphabet)
    if isinstance(f, StarLetter):
        return Nfa(1, alphabet, frozenset({(0, f.letter, 0)}), frozenset({0}), frozenset({0}))
    raise TypeError(f)


def sre_factor_ast(f) -> RegexAst:
    if isinstance(f, PlusFactor):
        return Plus(Letter(f.letter))
    if isinstance(f, LetterSet):
        ls = sorted(f.letters)
        return Letter(ls[0]) if len(ls) == 1 else Union(tuple(Letter(a) for a in ls))
    if isinstance(f, AnyStar):
        return Star(AnyLetter())
    if isinstance(f, StarLetter):
        return Star(Letter(f.letter))
    raise TypeError(f)


# ---------------------------------------------------------------------------
# Automaton to expression (for printing computed labels)


def _cat(*parts):
    flat = []
    for p in parts:
        if isinstance(p, Empty):
            return Empty()
        if isinstance(p, Epsilon):
            continue
        if isinstance(p, Concat):
            flat.extend(p.children)
        else:
            flat.append(p)
    # x . x* -> x+ and x* . x -> x+
    changed = True
    while changed:
        changed = False
        for i in range(len(flat) - 1):
            a, b = flat[i], flat[i + 1]
            if isinstance(b, Star) and b.child == a:
                flat[i : i + 2] = [Plus(a)]
                changed = True
                break
            if isinstance(a, Star) and a.child == b:
                flat[i : i + 2] = [Plus(b)]
                changed = True
                break
            if isinstance(a, Star) and a == b:
                flat[i : i + 2] = [a]
                changed = True
                break
    if not flat:
        return Epsilon()
    if len(flat) == 1:
        return flat[0]
    return Concat(tuple(flat))


def _alt(*parts):
    flat = []
    for p in parts:
        if isinstance(p, Empty):
            continue
        items = p.children if isinstance(p, Union) else (p,)
        for it in items:
            if it not in flat:
                flat.append(it)
    if Epsilon() in flat:
        others = [x for x in flat if x != Epsilon()]
        if any(isinstance(x, (Star, Opt)) for x in others) or not others:
            flat = others or [Epsilon()]
        else:
            return _opt(_alt(*others))
    if not flat:
        return Empty()
    if len(flat) == 1:
        return flat[0]
    flat.sort(key=to_text)
    return Union(tuple(flat))


def _opt(x):
    if isinstance(x, (Star, Opt, Epsilon)):
        return x
    if isinstance(x, Plus):
        return Star(x.child)
    return Opt(x)


def _star(x):
    if isinstance(x, (Empty, Epsilon)):
        return Epsilon()
    if isinstance(x, (Star, Plus, Opt)):
        return Star(x.child)
    return Star(x)


def nfa_to_regex(nfa: Nfa) -> RegexAst:
    """State elimination on the trimmed automaton; used to print computed labels."""
    n = nfa.trim()
    if n.is_empty():
        return Empty()
    full = frozenset(n.alphabet)
    S, F = n.n_states, n.n_states + 1
    edges: dict = {}

    def add(p, q, r):
        edges[(p, q)] = _alt(edges[(p, q)], r) if (p, q) in edges else r

    by_pair: dict = {}
    for p, a, q in n.transitions:
        by_pair.setdefault((p, q), set()).add(a)
    for (p, q), letters in by_pair.items():
        if letters == full and len(full) > 1:
            add(p, q, AnyLetter())
        else:
            add(p, q, _alt(*(Letter(a) for a in sorted(letters))))
    for s in n.initial:
        add(S, s, Epsilon())
    for s in n.final:
        add(s, F, Epsilon())
    remaining = set(range(n.n_states))
    while remaining:
        def cost(s):
            ins = sum(1 for (p, q) in edges if q == s and p != s)
            outs = sum(1 for (p, q) in edges if p == s and q != s)
            return (ins * outs, s)

        s = min(remaining, key=cost)
        remaining.discard(s)
        loop = edges.pop((s, s), None)
        ins = [(p, r) for (p, q), r in edges.items() if q == s]
        outs = [(q, r) for (p, q), r in edges.items() if p == s]
        for p, _ in ins:
            del edges[(p, s)]
        for q, _ in outs:
            del edges[(s, q)]
        mid = _star(loop) if loop is not None else Epsilon()
        for p, r1 in ins:
            for q, r2 in outs:
                add(p, q, _cat(r1, mid, r2))
    return edges.get((S, F), Empty())


# ---------------------------------------------------------------------------
# Labels


def _mentions_any(ast) -> bool:
    if isinstance(ast, AnyLetter):
        return True
    if isinstance(ast, (Concat, Union)):
        return any(_mentions_any(c) for c in ast.children)
    if isinstance(ast, (Star, Plus, Opt)):
        return _mentions_any(ast.child)
    return False


class Label:
    """A regular language attached to an atom.

    Equality and hashing are structural on the automaton so that two labels
    compare equal exactly when they carry the same automaton.  Language
    equivalence is :meth:`same_language`.
    """

    __slots__ = ("nfa", "_ast", "_text", "__weakref__")

    def __init__(self, nfa: Nfa, ast: RegexAst | None = None):
        object.__setattr__(self, "nfa", nfa)
        object.__setattr__(self, "_ast", ast)
        object.__setattr__(self, "_text", None)

    def __setattr__(self, key, value):
        raise AttributeError("Label is immutable")

    def __reduce__(self):
        return (Label, (self.nfa, self._ast))

    @classmethod
    def parse(cls, text: str, alphabet: Iterable[str]) -> "Label":
        alphabet = frozenset(alphabet)
        ast = parse_regex(text, alphabet)
        return cls(compile_nfa(ast, alphabet), ast)

    @classmethod
    def letter(cls, a: str, alphabet: Iterable[str]) -> "Label":
        return cls(letter_nfa(a, alphabet), Letter(a))

    @classmethod
    def from_ast(cls, ast: RegexAst, alphabet: Iterable[str]) -> "Label":
        return cls(compile_nfa(ast, alphabet), ast)

    @property
    def ast(self) -> RegexAst:
        if self._ast is None:
            object.__setattr__(self, "_ast", nfa_to_regex(self.nfa))
        return self._ast

    @property
    def text(self) -> str:
        if self._text is None:
            object.__setattr__(self, "_text", to_text(self.ast))
        return self._text

    @property
    def alphabet(self) -> frozenset:
        return self.nfa.alphabet

    @property
    def single_letter(self) -> str | None:
        return self.nfa.single_letter

    def has_epsilon(self) -> bool:
        return self.nfa.has_epsilon()

    def is_empty(self) -> bool:
        return self.nfa.is_empty()

    def accepts(self, word) -> bool:
        return self.nfa.accepts(word)

    def same_language(self, other: "Label") -> bool:
        return self == other or language_equal(self.nfa, other.nfa)

    def sre_factors(self, extension: bool = False):
        return classify_sre(self.ast, extension, self.alphabet)

    def with_alphabet(self, alphabet) -> "Label":
        alphabet = frozenset(alphabet)
        ast = self._ast
        if ast is not None and alphabet != self.alphabet and _mentions_any(ast):
            ast = None  # %any would now denote more letters; print from the automaton
        return Label(self.nfa.with_alphabet(alphabet), ast)

    def __eq__(self, other):
        return isinstance(other, Label) and self.nfa == other.nfa

    def __hash__(self):
        return hash(self.nfa)

    def __lt__(self, other):
        return (self.text, sorted(self.nfa.transitions)) < (other.text, sorted(other.nfa.transitions))

    def __repr__(self):
        return f"Label({self.text!r})"

    def __str__(self):
        return self.text
