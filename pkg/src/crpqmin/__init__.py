"""Analysis and minimization of conjunctive regular path queries."""

from .approximation import (
    membership_in_app,
    minimize_crpq_bruteforce,
    minimize_ucrpq,
    under_approximation,
)
from .automata import Label, Nfa, compile_nfa, language_equal, language_inclusion, parse_regex, regex_nfa
from .containment import contained, contained_bounded, contained_sre, equivalent, falsify_equivalence
from .errors import CrpqError, ResourceLimitError
from .evaluation import evaluate, evaluate_union
from .gamma import gamma_equiv, gamma_type, tilde_language
from .morphisms import core, find_hom
from .query import Atom, Crpq, GraphDb, Ucrpq, load_graphdb, parse_crpq, parse_query, serialize
from .refinement import canonical_database, expansions, refinements
from .structure import (
    check_strong_minimality,
    contract,
    is_minor,
    remove_redundant_atoms,
    segment_graph,
    segments,
)
from .treepattern import TreePattern, decode, encode

__all__ = [
    "Atom",
    "CrpqError",
    "Crpq",
    "GraphDb",
    "Label",
    "Nfa",
    "ResourceLimitError",
    "TreePattern",
    "Ucrpq",
    "canonical_database",
    "check_strong_minimality",
    "compile_nfa",
    "contained",
    "contained_bounded",
    "contained_sre",
    "contract",
    "core",
    "decode",
    "encode",
    "equivalent",
    "evaluate",
    "evaluate_union",
    "expansions",
    "falsify_equivalence",
    "find_hom",
    "gamma_equiv",
    "gamma_type",
    "is_minor",
    "language_equal",
    "language_inclusion",
    "load_graphdb",
    "membership_in_app",
    "minimize_crpq_bruteforce",
    "minimize_ucrpq",
    "parse_crpq",
    "parse_query",
    "parse_regex",
    "refinements",
    "regex_nfa",
    "remove_redundant_atoms",
    "segment_graph",
    "segments",
    "serialize",
    "tilde_language",
    "under_approximation",
]
