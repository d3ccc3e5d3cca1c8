import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ggqtree import (
    IN_S,
    NOTIN_S,
    Conj,
    PredicateSyntaxError,
    PropEq,
    SubgraphRef,
    T,
    Tautology,
    canonicalize,
    conjoin,
    eval_edge_predicate,
    eval_node_predicate,
    parse_predicate,
    render_predicate,
)
from ggqtree.graph import EdgeRecord, GraphPath, NodeRecord, PropertyGraph
from ggqtree.predicate import atoms, from_atoms

S_U1 = SubgraphRef.of_nodes("u1")

values = st.one_of(
    st.text(min_size=0, max_size=6),
    st.integers(-50, 50),
    st.booleans(),
    st.floats(allow_nan=False, allow_infinity=False, width=32),
)
atom_st = st.one_of(
    st.just(IN_S), st.just(NOTIN_S),
    st.builds(PropEq, st.text(min_size=1, max_size=5), values),
)
predicates = st.lists(atom_st, max_size=4).map(from_atoms)


def test_tautology_always_true(G):
    assert eval_node_predicate(T, "p1", S_U1, G)
    assert eval_edge_predicate(T, GraphPath(("e1",), ("u1", "p1")), S_U1, G)


def test_membership(G):
    assert eval_node_predicate(IN_S, "u1", S_U1, G)
    assert not eval_node_predicate(IN_S, "p1", S_U1, G)


def test_photo_outside_subgraph(G):
    phi = Conj(PropEq("type", "photo"), NOTIN_S)
    assert eval_node_predicate(phi, "p1", S_U1, G)


def test_publish_edge(G):
    rho = G.paths("u1")[0]
    assert rho.edges == ("e1",)
    assert eval_edge_predicate(PropEq("type", "publish"), rho, S_U1, G)


def test_edge_atoms_hold_on_every_edge():
    g = PropertyGraph([NodeRecord(x, {}) for x in "abc"],
                      [EdgeRecord("ab", "a", "b", {"type": "publish"}),
                       EdgeRecord("bc", "b", "c", {"type": "likes"})])
    rho = GraphPath(("ab", "bc"), ("a", "b", "c"))
    assert not eval_edge_predicate(PropEq("type", "publish"), rho, SubgraphRef(), g)
    assert eval_edge_predicate(NOTIN_S, rho, SubgraphRef(frozenset("abc"), frozenset({"ab"})), g) is False


def test_null_never_equal():
    g = PropertyGraph([NodeRecord("a", {"k": None})])
    assert not eval_node_predicate(PropEq("k", "None"), "a", SubgraphRef(), g)
    with pytest.raises(ValueError):
        PropEq("k", None)


def test_values_are_type_strict():
    g = PropertyGraph([NodeRecord("a", {"n": 1, "s": "1", "b": True})])
    S = SubgraphRef()
    assert eval_node_predicate(PropEq("n", 1), "a", S, g)
    assert eval_node_predicate(PropEq("n", 1.0), "a", S, g)
    assert not eval_node_predicate(PropEq("n", "1"), "a", S, g)
    assert not eval_node_predicate(PropEq("s", 1), "a", S, g)
    assert not eval_node_predicate(PropEq("b", 1), "a", S, g)


def test_parse_examples():
    assert parse_predicate("T") == Tautology()
    assert parse_predicate("type=publish & in(S)") == Conj(PropEq("type", "publish"), IN_S)
    assert parse_predicate('  name = "two words" ') == PropEq("name", "two words")
    assert parse_predicate("n=3 & x=2.5 & f=false") == Conj(
        Conj(PropEq("n", 3), PropEq("x", 2.5)), PropEq("f", False))


@pytest.mark.parametrize("text, offset", [
    ("type=", 5),
    ("", 0),
    ("type", 4),
    ("in(S) &", 7),
    ("in(S) in(S)", 6),
    ("in(X)", 3),
    ('k="open', 2),
])
def test_syntax_error_offsets(text, offset):
    with pytest.raises(PredicateSyntaxError) as info:
        parse_predicate(text)
    assert info.value.offset == offset
    assert info.value.expected


def test_offset_counts_bytes():
    with pytest.raises(PredicateSyntaxError) as info:
        parse_predicate('k="é" &')
    assert info.value.offset == len('k="é" &'.encode())


def test_conjoin_examples():
    assert conjoin(T, T) == T
    pub = PropEq("type", "publish")
    assert conjoin(pub, pub) == pub
    assert render_predicate(conjoin(IN_S, PropEq("type", "user"))) == "in(S) & type=user"
    assert render_predicate(conjoin(PropEq("type", "user"), IN_S)) == "in(S) & type=user"


@settings(max_examples=200, deadline=None)
@given(predicates)
def test_parse_render_round_trip(phi):
    canon = canonicalize(phi)
    text = render_predicate(phi)
    assert parse_predicate(text) == canon
    assert render_predicate(parse_predicate(text)) == text


@settings(max_examples=200, deadline=None)
@given(predicates, predicates)
def test_canonical_forms(phi, psi):
    assert canonicalize(canonicalize(phi)) == canonicalize(phi)
    assert conjoin(phi, T) == canonicalize(phi)
    assert conjoin(phi, psi) == conjoin(psi, phi)
    assert set(atoms(conjoin(phi, psi))) == set(atoms(phi)) | set(atoms(psi))


def test_conjunction_is_logical_and(G):
    """Exhaustive over pairs of small expressions, nodes, and two subgraphs."""
    pool = [T, IN_S, NOTIN_S, PropEq("type", "user"), PropEq("gender", "M"),
            Conj(IN_S, PropEq("type", "photo"))]
    for S in (S_U1, SubgraphRef.of_nodes("u2", "p2")):
        for phi, psi in itertools.product(pool, repeat=2):
            for v in G.nodes:
                both = eval_node_predicate(Conj(phi, psi), v, S, G)
                assert both == (eval_node_predicate(phi, v, S, G)
                                and eval_node_predicate(psi, v, S, G))
