"""Command-line interface.

Exit codes: 0 positive or complete answer, 1 negative answer, 2 unknown or
only checked up to a bound, 64 usage error, 65 bad input, 70 resource limit.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import approximation as appx
from .containment import (
    NOT_CONTAINED,
    contained,
    equivalence_status,
    equivalent,
    falsify_equivalence,
)
from .errors import CrpqError, ResourceLimitError
from .evaluation import evaluate
from .morphisms import all_homs, is_strong_onto
from .query import Crpq, GraphDb, Ucrpq, load_graphdb, parse_query, serialize
from .refinement import expansions
from .structure import (
    check_strong_minimality,
    contract,
    remove_redundant_atoms,
    segment_graph,
    segments,
)
from .treepattern import decode, encode, format_tree_pattern, parse_tree_pattern

EXIT_YES, EXIT_NO, EXIT_UNKNOWN = 0, 1, 2
EXIT_USAGE, EXIT_INPUT, EXIT_RESOURCE = 64, 65, 70


class UsageError(Exception):
    def __init__(self, message: str, usage: str = ""):
        super().__init__(message)
        self.usage = usage


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message, self.format_usage())


# ---------------------------------------------------------------------------
# input helpers


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None


def _load_union(path: str) -> Ucrpq:
    return parse_query(_read(path))


def _pick(u: Ucrpq, name: str | None, path: str) -> Crpq:
    if name is not None:
        for d in u.disjuncts:
            if d.name == name:
                return d
        raise InputError(f"{path}: no query named {name!r}")
    if len(u.disjuncts) != 1:
        raise InputError(f"{path}: expected a single query, found {len(u.disjuncts)} (use --name)")
    return u.disjuncts[0]


def _load_pair(a: str, b: str) -> tuple:
    ua, ub = _load_union(a), _load_union(b)
    alpha = ua.alphabet | ub.alphabet
    return ua.with_alphabet(alpha), ub.with_alphabet(alpha)


def _load_db(path: str) -> GraphDb:
    return load_graphdb(_read(path))


def _parse_pin(text: str | None) -> dict:
    pin = {}
    if not text:
        return pin
    for part in text.split(","):
        if "=" not in part:
            raise UsageError(f"bad pin {part!r}, expected var=node")
        k, v = part.split("=", 1)
        pin[k.strip()] = v.strip()
    return pin


def _parse_words(text: str, alphabet) -> list:
    """Comma-separated words; letters within a word are separated by '.',
    or written back to back when every letter is a single character."""
    words = []
    for w in text.split(","):
        w = w.strip()
        if w in ("", "%eps"):
            words.append(())
        elif "." in w:
            words.append(tuple(x for x in w.split(".")))
        elif w in alphabet:
            words.append((w,))
        else:
            words.append(tuple(w))
    return words


def _word_text(w) -> str:
    if not w:
        return "%eps"
    return "".join(w) if all(len(a) == 1 for a in w) else ".".join(w)


def _write(path: str | None, text: str):
    if path is None:
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc.strerror or exc}") from None


def _emit(args, payload: dict, text: str):
    if args.json:
        sys.stdout.write(json.dumps(payload, sort_keys=True, ensure_ascii=False) + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") or not text else text + "\n")


def _status_exit(status: str, complete: bool) -> int:
    if status == NOT_CONTAINED:
        return EXIT_NO
    return EXIT_YES if complete else EXIT_UNKNOWN


# ---------------------------------------------------------------------------
# subcommands


def cmd_eval(args) -> int:
    q = _pick(_load_union(args.query), args.name, args.query)
    db = _load_db(args.db)
    answers = sorted(evaluate(q, db, _parse_pin(args.pin)))
    _emit(args, {"answers": [list(a) for a in answers]}, "\n".join(" ".join(a) for a in answers))
    return EXIT_YES if answers else EXIT_NO


def _load_structure(path: str, name):
    if path.endswith(".json"):
        return _load_db(path)
    return _pick(_load_union(path), name, path)


def cmd_hom(args) -> int:
    src = _load_structure(args.src, args.name)
    tgt = _load_structure(args.tgt, args.target_name)
    if isinstance(src, Crpq) and isinstance(tgt, Crpq):
        alpha = src.alphabet | tgt.alphabet
        src, tgt = src.with_alphabet(alpha), tgt.with_alphabet(alpha)
    found = None
    for h in all_homs(src, tgt, injective=args.injective):
        if not args.strong_onto or is_strong_onto(h, src, tgt):
            found = h
            break
    if found is None:
        _emit(args, {"found": False, "mapping": None}, "no homomorphism")
        return EXIT_NO
    mapping = found.as_dict()
    text = "\n".join(f"{k} -> {v}" for k, v in found.mapping)
    _emit(args, {"found": True, "mapping": mapping}, text)
    return EXIT_YES


def _verdict_text(v) -> str:
    lines = [f"{v.status} (mode {v.mode}" + (f", bound {v.bound})" if v.bound is not None else ")")]
    if v.counterexample is not None:
        ce = v.counterexample
        lines.append(f"counterexample from disjunct {ce.disjunct}: words " + ", ".join(_word_text(w) for w in ce.expansion.words))
        lines.append(f"outputs: {' '.join(ce.outputs)}")
        for s, a, t in ce.db.edges:
            lines.append(f"  {s} -{a}-> {t}")
    lines += [f"note: {n}" for n in v.notes]
    return "\n".join(lines)


def cmd_contain(args) -> int:
    left, right = _load_pair(args.left, args.right)
    v = contained(left, right, args.mode, args.max_len, args.jobs)
    _emit(args, v.to_json(), _verdict_text(v))
    return _status_exit(v.status, v.complete)


def cmd_equiv(args) -> int:
    left, right = _load_pair(args.left, args.right)
    pair = equivalent(left, right, args.mode, args.max_len, args.jobs)
    status = equivalence_status(pair)
    payload = {"status": status, "forward": pair[0].to_json(), "backward": pair[1].to_json()}
    text = f"{status}\nleft in right: {_verdict_text(pair[0])}\nright in left: {_verdict_text(pair[1])}"
    _emit(args, payload, text)
    return {"equivalent": EXIT_YES, "not_equivalent": EXIT_NO}.get(status, EXIT_UNKNOWN)


def cmd_falsify(args) -> int:
    left, right = _load_pair(args.left, args.right)
    d = falsify_equivalence(left, right, args.trials, args.db_size, args.seed)
    if d is None:
        _emit(args, {"found": False, "trials": args.trials}, f"no disagreement in {args.trials} trials")
        return EXIT_UNKNOWN
    payload = {
        "found": True,
        "trials": args.trials,
        "trial": d.trial,
        "answer": list(d.answer),
        "only_in": "left" if d.in_first else "right",
        "nodes": list(d.db.vertices),
        "edges": [list(e) for e in d.db.edges],
    }
    lines = [
        f"disagreement at trial {d.trial}: answer ({' '.join(d.answer)}) only in {payload['only_in']}",
        "nodes: " + " ".join(d.db.vertices),
    ] + [f"  {s} -{a}-> {t}" for s, a, t in d.db.edges]
    _emit(args, payload, "\n".join(lines))
    return EXIT_NO


def cmd_expand(args) -> int:
    u = _load_union(args.query)
    items = []
    for i, q in enumerate(u.disjuncts):
        for e in expansions(q, args.max_len):
            if args.limit is not None and len(items) >= args.limit:
                break
            items.append((i, e))
    payload = {"expansions": [{"disjunct": i, "words": [list(w) for w in e.words], "size": e.size} for i, e in items]}
    text = "\n".join(f"{i}: " + " | ".join(_word_text(w) for w in e.words) for i, e in items)
    _emit(args, payload, text)
    return EXIT_YES


def cmd_contract(args) -> int:
    u = _load_union(args.query)
    out = Ucrpq(tuple(contract(q) for q in u.disjuncts), u.alphabet, u.arity)
    text = serialize(out)
    if args.out:
        _write(args.out, text)
    _emit(args, {"query": text, "atoms": [q.n_atoms for q in out.disjuncts]}, "" if args.out else text)
    return EXIT_YES


def _dot(q: Crpq, name: str) -> str:
    g = segment_graph(q)
    segs = segments(q)
    lines = [f'digraph "{name}" {{']
    outs = set(q.outputs)
    for v in g.vertices:
        shape = "doublecircle" if v in outs else "circle"
        lines.append(f'  "{v}" [shape={shape}];')
    for s, t, i in g.edges:
        label = " . ".join(q.atoms[k].label.text for k in segs[i].atoms).replace('"', '\\"')
        lines.append(f'  "{s}" -> "{t}" [label="{label}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def cmd_segments(args) -> int:
    q = _pick(_load_union(args.query), args.name, args.query)
    segs = segments(q)
    if args.dot:
        sys.stdout.write(_dot(q, q.name))
        return EXIT_YES
    payload = {
        "count": len(segs),
        "segments": [
            {"atoms": list(s.atoms), "source": s.source, "target": s.target, "cyclic": s.cyclic} for s in segs
        ],
    }
    lines = [f"{len(segs)} segments"]
    for s in segs:
        path = " ; ".join(str(q.atoms[i]) for i in s.atoms)
        lines.append(f"{s.source} ~> {s.target}{' (cycle)' if s.cyclic else ''}: {path}")
    _emit(args, payload, "\n".join(lines))
    return EXIT_YES


def cmd_redundant(args) -> int:
    q = _pick(_load_union(args.query), args.name, args.query)
    r = remove_redundant_atoms(q, args.mode, args.max_len)
    text = serialize(r.query)
    payload = {
        "status": r.status,
        "complete": r.complete,
        "removed": [{"atom": x.atom, "status": x.status, "complete": x.complete} for x in r.removed],
        "query": text,
    }
    lines = [r.status] + [f"removed {x.atom} ({x.status})" for x in r.removed] + [text]
    _emit(args, payload, "\n".join(lines))
    return EXIT_YES if r.complete else EXIT_UNKNOWN


def cmd_certify(args) -> int:
    u = _load_union(args.query)
    words = _parse_words(args.expansion_words, u.alphabet)
    c = check_strong_minimality(u, args.disjunct, words, args.hom_bound)
    payload = {
        "status": c.status,
        "segment_count": c.segment_count,
        "lower_bound": c.lower_bound,
        "strongly_minimal": c.strongly_minimal,
        "hom_bound": c.hom_bound,
        "witness": None
        if c.witness is None
        else {"disjunct": c.witness_disjunct, "words": [list(w) for w in c.witness.words]},
    }
    lines = [f"{c.status}: segment count {c.segment_count}, hom bound {c.hom_bound}"]
    if c.witness is not None:
        lines.append(
            f"strictly smaller expansion of disjunct {c.witness_disjunct}: "
            + ", ".join(_word_text(w) for w in c.witness.words)
        )
    if c.lower_bound is not None:
        lines.append(f"any equivalent union needs a disjunct with at least {c.lower_bound} atoms")
    if c.strongly_minimal:
        lines.append("strongly minimal")
    _emit(args, payload, "\n".join(lines))
    return EXIT_YES if c.status == "verified" else EXIT_NO


def cmd_approx(args) -> int:
    u = _load_union(args.query)
    r = appx.under_approximation(u, args.k, args.m, args.c, budget=args.budget)
    text = serialize(r.union)
    if args.out:
        _write(args.out, text)
    payload = {"disjuncts": len(r.union.disjuncts), "m": r.m, "c": r.c, "explored": r.explored, "query": text}
    _emit(args, payload, "" if args.out else text)
    return EXIT_YES


def cmd_minimize(args) -> int:
    u = _load_union(args.query)
    if args.crpq:
        q = _pick(u, args.name, args.query)
        r = appx.minimize_crpq_bruteforce(q, args.k, args.pool_len, args.mode, args.max_len)
        text = serialize(r.query) if r.query is not None else ""
        status = r.status if r.query is not None else "pool-relative"
        payload = {"status": status, "query": text or None, "candidates": r.candidates, "pool_size": r.pool_size}
        _emit(args, payload, f"{status}\n{text}" if text else f"none found ({status}, {r.candidates} candidates)")
        return EXIT_YES if r.status == "equivalent" else EXIT_UNKNOWN
    r = appx.minimize_ucrpq(u, args.k, args.m, args.c, mode=args.mode, max_len=args.max_len, budget=args.budget)
    text = serialize(r.query) if r.query is not None else ""
    payload = {"status": r.status, "complete": r.complete, "m": r.m, "notes": list(r.notes), "query": text or None}
    lines = [r.status + ("" if r.complete else " (bounded)")]
    if r.status == "minimizable":
        lines.append(text)
    lines += [f"note: {n}" for n in r.notes]
    _emit(args, payload, "\n".join(lines))
    return {"minimizable": EXIT_YES, "not_minimizable": EXIT_NO}.get(r.status, EXIT_UNKNOWN)


def cmd_encode_tp(args) -> int:
    t = parse_tree_pattern(_read(args.input))
    text = serialize(encode(t))
    if args.out:
        _write(args.out, text)
    _emit(args, {"query": text}, "" if args.out else text)
    return EXIT_YES


def cmd_decode_tp(args) -> int:
    q = _pick(_load_union(args.input), args.name, args.input)
    t = decode(q)
    if t is None:
        _emit(args, {"in_image": False, "pattern": None}, "not an encoded tree pattern")
        return EXIT_NO
    text = format_tree_pattern(t)
    if args.out:
        _write(args.out, text)
    _emit(args, {"in_image": True, "pattern": text}, "" if args.out else text)
    return EXIT_YES


# ---------------------------------------------------------------------------


def _positive(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def _nonneg(text):
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--jobs", type=_positive, default=1, help="worker processes for expansion checks")
    common.add_argument("--seed", type=int, default=0)

    p = _Parser(prog="crpqmin", description="Analyse and minimize (unions of) conjunctive regular path queries.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_text):
        sp = sub.add_parser(name, parents=[common], help=help_text)
        sp.set_defaults(func=func)
        return sp

    modes = ["auto", "sre", "bounded", "single_path"]

    sp = add("eval", cmd_eval, "evaluate a query on a graph database")
    sp.add_argument("--query", required=True)
    sp.add_argument("--db", required=True)
    sp.add_argument("--pin", help="comma-separated var=node pairs")
    sp.add_argument("--name")

    sp = add("hom", cmd_hom, "search a homomorphism between queries (or into a database)")
    sp.add_argument("--from", dest="src", required=True)
    sp.add_argument("--to", dest="tgt", required=True)
    sp.add_argument("--strong-onto", action="store_true")
    sp.add_argument("--injective", action="store_true")
    sp.add_argument("--name")
    sp.add_argument("--target-name")

    for name, func, h in (("contain", cmd_contain, "test containment"), ("equiv", cmd_equiv, "test equivalence")):
        sp = add(name, func, h)
        sp.add_argument("--left", required=True)
        sp.add_argument("--right", required=True)
        sp.add_argument("--mode", choices=modes, default="auto")
        sp.add_argument("--max-len", type=_nonneg, default=8)

    sp = add("falsify", cmd_falsify, "compare two queries on random databases")
    sp.add_argument("--left", required=True)
    sp.add_argument("--right", required=True)
    sp.add_argument("--trials", type=_positive, default=200)
    sp.add_argument("--db-size", type=_positive, default=4)

    sp = add("expand", cmd_expand, "list expansions")
    sp.add_argument("--query", required=True)
    sp.add_argument("--max-len", type=_nonneg, required=True)
    sp.add_argument("--limit", type=_nonneg)

    sp = add("contract", cmd_contract, "contract internal variables")
    sp.add_argument("--query", required=True)
    sp.add_argument("--out")

    sp = add("segments", cmd_segments, "list segments or draw the segment graph")
    sp.add_argument("--query", required=True)
    sp.add_argument("--dot", action="store_true")
    sp.add_argument("--name")

    sp = add("redundant", cmd_redundant, "remove redundant atoms")
    sp.add_argument("--query", required=True)
    sp.add_argument("--mode", choices=modes, default="auto")
    sp.add_argument("--max-len", type=_nonneg, default=8)
    sp.add_argument("--name")

    sp = add("certify", cmd_certify, "strong-minimality certificate for one expansion")
    sp.add_argument("--query", required=True)
    sp.add_argument("--disjunct", type=_nonneg, default=0)
    sp.add_argument("--expansion-words", required=True)
    sp.add_argument("--hom-bound", type=_nonneg, required=True)

    sp = add("approx", cmd_approx, "maximal under-approximation with at most k atoms")
    sp.add_argument("--query", required=True)
    sp.add_argument("--k", type=_nonneg, required=True)
    sp.add_argument("--m", type=_positive, help="refinement length bound")
    sp.add_argument("--c", type=_positive, help="atoms per shape edge before contraction (default: m)")
    sp.add_argument("--budget", type=_positive, default=appx.DEFAULT_BUDGET, help="search step limit")
    sp.add_argument("--out")

    sp = add("minimize", cmd_minimize, "minimize to at most k atoms per disjunct")
    sp.add_argument("--query", required=True)
    sp.add_argument("--k", type=_nonneg, required=True)
    sp.add_argument("--m", type=_positive, help="refinement length bound")
    sp.add_argument("--c", type=_positive, help="atoms per shape edge before contraction (default: m)")
    sp.add_argument("--budget", type=_positive, default=appx.DEFAULT_BUDGET, help="search step limit")
    sp.add_argument("--mode", choices=modes, default="auto")
    sp.add_argument("--max-len", type=_nonneg, default=8)
    sp.add_argument("--crpq", action="store_true", help="search a single CRPQ over a label pool")
    sp.add_argument("--pool-len", type=_positive, default=1)
    sp.add_argument("--name")

    sp = add("encode-tp", cmd_encode_tp, "encode a tree pattern as a CRPQ")
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--out")

    sp = add("decode-tp", cmd_decode_tp, "decode a CRPQ back into a tree pattern")
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--out")
    sp.add_argument("--name")
    return p


def _fail(want_json: bool, code: int, kind: str, message: str, extra=None, usage: str = "") -> int:
    if want_json:
        err = {"error": {"type": kind, "message": message, "exit_code": code}}
        if extra is not None:
            err["error"]["partial"] = extra
        sys.stderr.write(json.dumps(err, sort_keys=True) + "\n")
    else:
        sys.stderr.write(f"{usage}crpqmin: {message}\n")
    return code


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    want_json = "--json" in argv
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        return _fail(want_json, EXIT_USAGE, "usage", str(exc), usage=exc.usage)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        return _fail(want_json, EXIT_USAGE, "usage", str(exc))
    except ResourceLimitError as exc:
        partial = exc.partial if isinstance(exc.partial, (int, float, str)) else None
        return _fail(want_json, EXIT_RESOURCE, "resource", str(exc), partial)
    except (CrpqError, InputError) as exc:
        return _fail(want_json, EXIT_INPUT, type(exc).__name__, str(exc))


if __name__ == "__main__":
    sys.exit(main())
