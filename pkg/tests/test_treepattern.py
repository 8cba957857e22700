import pytest

from crpqmin.automata import MARKER
from crpqmin.query import parse_crpq
from crpqmin.treepattern import (
    SIMPLE,
    TRANSITIVE,
    TreePattern,
    TreePatternSyntaxError,
    decode,
    encode,
    format_tree_pattern,
    parse_tree_pattern,
)

from oracles import all_tree_patterns

SINGLE = TreePattern.build({"x": "a"}, [], "x")
WILD_EDGE = TreePattern.build({"x": "*", "y": "*"}, [("x", "y", SIMPLE)], "x")
DESC = TreePattern.build({"x": "a", "y": "b"}, [("x", "y", TRANSITIVE)], "x")


def atoms(q):
    return [(a.source, a.label.text, a.target) for a in q.atoms]


def test_encoding_examples():
    assert atoms(encode(SINGLE)) == [("x", "a", "x")]
    assert atoms(encode(WILD_EDGE)) == [("x", MARKER, "y")]
    assert atoms(encode(DESC)) == [("x", "a", "x"), ("x", f"{MARKER}+", "y"), ("y", "b", "y")]
    assert encode(DESC).is_boolean()


@pytest.mark.parametrize("t", [SINGLE, WILD_EDGE, DESC])
def test_examples_round_trip(t):
    assert decode(encode(t)) == t


def test_not_in_image():
    header = "alphabet a, b, %marker;\n"
    assert decode(parse_crpq(header + "query q(){ x -[(%marker.%marker)+]-> y; }")) is None
    assert decode(parse_crpq(header + "query q(){ x -[a]-> x; x -[b]-> x; }")) is None
    assert decode(parse_crpq(header + "query q(x){ x -[a]-> x; }")) is None
    # two parents
    assert decode(parse_crpq(header + "query q(){ x -[%marker]-> z; y -[%marker]-> z; }")) is None
    # a forest has two roots
    assert decode(parse_crpq(header + "query q(){ x -[%marker]-> y; u -[%marker]-> w; }")) is None


def test_invalid_trees():
    with pytest.raises(ValueError):
        TreePattern.build({"x": "a", "y": "a"}, [], "x")
    with pytest.raises(ValueError):
        TreePattern.build({"x": "a", "y": "a"}, [("x", "y", SIMPLE), ("y", "x", SIMPLE)], "x")
    with pytest.raises(ValueError):
        TreePattern.build({"x": "a"}, [("x", "x", "sideways")], "x")


def test_exhaustive_round_trip_and_size():
    n = 0
    for t in all_tree_patterns(4):
        q = encode(t)
        labelled = sum(1 for _, lab in t.labels if lab != "*")
        assert q.n_atoms == len(t.edges) + labelled
        assert decode(q) == t
        n += 1
    # parent choices * edge kinds * labels, for 1..4 nodes
    assert n == 2 + 1 * 2 * 4 + 2 * 4 * 8 + 6 * 8 * 16


def test_text_format_round_trip():
    text = "a\n  => b\n  -> *\n    -> c\n"
    t = parse_tree_pattern(text)
    assert t.root == "n0" and t.label("n2") == "*"
    assert t.children("n0") == [("n1", TRANSITIVE), ("n2", SIMPLE)]
    assert format_tree_pattern(t) == text
    assert parse_tree_pattern(format_tree_pattern(t)) == t


def test_comments_and_blank_lines():
    t = parse_tree_pattern("# pattern\n\na   # root\n  -> b\n")
    assert len(t.nodes) == 2


@pytest.mark.parametrize(
    "text",
    ["", "-> a", "a\nb", "a\n-> b", "a\n  -> %eps", "a\n  -> b c"],
)
def test_text_format_errors(text):
    with pytest.raises(TreePatternSyntaxError):
        parse_tree_pattern(text)
