"""Hypothesis strategies for small graphs, subgraphs and queries."""

from hypothesis import strategies as st

from ggqtree import (
    IN_S,
    NOTIN_S,
    EdgeRecord,
    NodeRecord,
    PropEq,
    PropertyGraph,
    QEdge,
    QNode,
    Query,
    SubgraphRef,
    initial_query,
)
from ggqtree.predicate import from_atoms
from ggqtree.graph import Atom, AtomPool
from ggqtree.refine import candidate_order

NODE_ATOMS = [IN_S, NOTIN_S, PropEq("type", "a"), PropEq("type", "b"), PropEq("color", "red")]
EDGE_ATOMS = [IN_S, NOTIN_S, PropEq("type", "x"), PropEq("type", "y")]

POOL = AtomPool(
    node_atoms=(Atom("type", "a", 1), Atom("type", "b", 1), Atom("color", "red", 1)),
    edge_atoms=(Atom("type", "x", 1), Atom("type", "y", 1)),
)


@st.composite
def graphs(draw, max_nodes=8, max_edges=12, min_nodes=1):
    n = draw(st.integers(min_nodes, max_nodes))
    nodes = []
    for i in range(n):
        props = {"type": draw(st.sampled_from(["a", "b"]))}
        if draw(st.booleans()):
            props["color"] = draw(st.sampled_from(["red", "blue"]))
        nodes.append(NodeRecord(f"v{i}", props))
    m = draw(st.integers(0, max_edges)) if n else 0
    edges = [
        EdgeRecord(f"x{j}", f"v{draw(st.integers(0, n - 1))}", f"v{draw(st.integers(0, n - 1))}",
                   {"type": draw(st.sampled_from(["x", "y"]))})
        for j in range(m)
    ]
    return PropertyGraph(nodes, edges)


@st.composite
def subgraphs(draw, graph, allow_full=True):
    ids = sorted(graph.nodes)
    chosen = draw(st.sets(st.sampled_from(ids), max_size=len(ids))) if ids else set()
    if not allow_full and len(chosen) == len(ids):
        chosen = set(ids[1:])
    inner = sorted(e.id for e in graph.edges.values()
                   if e.source in chosen and e.target in chosen)
    edges = draw(st.sets(st.sampled_from(inner))) if inner else set()
    return SubgraphRef(frozenset(chosen), frozenset(edges))


def _theta(draw, pool, max_atoms=2):
    return from_atoms(draw(st.lists(st.sampled_from(pool), max_size=max_atoms)))


@st.composite
def queries(draw, max_qnodes=4, max_qedges=4):
    k = draw(st.integers(0, max_qnodes))
    qnodes = [QNode(f"n{i}", draw(st.sampled_from("+-")), _theta(draw, NODE_ATOMS))
              for i in range(k)]
    qedges = []
    if k:
        for j in range(draw(st.integers(0, max_qedges))):
            qedges.append(QEdge(f"e{k + j}", f"n{draw(st.integers(0, k - 1))}",
                                f"n{draw(st.integers(0, k - 1))}", draw(st.sampled_from("+-")),
                                _theta(draw, EDGE_ATOMS, 1)))
    return Query(tuple(qnodes), tuple(qedges))


@st.composite
def refined_queries(draw, steps=3):
    """Queries reached from the initial query by a few random refinement steps."""
    Q = initial_query()
    for _ in range(draw(st.integers(0, steps))):
        cands = candidate_order(Q, POOL)
        cand = draw(st.sampled_from(cands))
        rs = cand.build(Q, ordered=False)
        Q = draw(st.sampled_from(rs.children))
    return Q


def node_samples(graph):
    """All single- and double-node subgraphs, bare and with their induced edges."""
    ids = sorted(graph.nodes)
    out = []
    for i, a in enumerate(ids):
        for b in ids[i:]:
            nodes = frozenset({a, b})
            out.append(SubgraphRef(nodes))
            inner = frozenset(e.id for e in graph.edges.values()
                              if e.source in nodes and e.target in nodes)
            if inner:
                out.append(SubgraphRef(nodes, inner))
    return out
