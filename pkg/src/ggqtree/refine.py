"""Refinement families over queries and an empirical checker for their axioms.

Every family clones the nodes it touches, attaches the new structure or
predicate to the clones only, and enumerates the signs of the affected
clones. Originals keep their constraints, so the children refine the parent
and split its matching subgraphs into disjoint, exhaustive parts.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Iterable, Iterator, NamedTuple, Optional, Sequence

from .graph import Atom, AtomPool, PropertyGraph, SubgraphRef
from .predicate import T, Predicate, PropEq, conjoin, parse_predicate, render_predicate
from .query import (
    NEG,
    POS,
    IdAllocator,
    Matcher,
    QEdge,
    QNode,
    Query,
    canonical_form,
)

ADD_NODE = "add_node"
ADD_EDGE = "add_edge"
ADD_EDGE_PREDICATE = "add_edge_predicate"
ADD_NODE_PREDICATE = "add_node_predicate"
FAMILIES = (ADD_NODE, ADD_EDGE, ADD_EDGE_PREDICATE, ADD_NODE_PREDICATE)


class RefinementError(ValueError):
    """A family was applied outside its sign preconditions."""


class Clone(NamedTuple):
    query: Query
    nodes: dict[str, str]
    edges: dict[str, str]


@dataclass(frozen=True)
class RefinementSet:
    parent: Query
    children: tuple[Query, ...]
    descriptor: dict[str, Any] = field(compare=False)

    def __post_init__(self):
        if not self.children:
            raise ValueError("a refinement set needs at least one child")

    @property
    def family(self) -> str:
        return self.descriptor["family"]

    def __len__(self) -> int:
        return len(self.children)


def _ordered(parent: Query, children: Iterable[Query], descriptor: dict,
             ordered: bool = True) -> RefinementSet:
    kids = sorted(children, key=canonical_form) if ordered else list(children)
    return RefinementSet(parent, tuple(kids), descriptor)


def clone_nodes(Q: Query, W: Iterable[str], ids: Optional[IdAllocator] = None) -> Clone:
    """Duplicate the nodes in W together with their incident edges.

    An edge with both endpoints in W is duplicated once, between the two
    clones; an edge with one endpoint in W is duplicated onto the clone and
    keeps its other endpoint.
    """
    W = list(dict.fromkeys(W))
    for nid in W:
        Q.node(nid)
    if not W:
        return Clone(Q, {}, {})
    ids = ids or IdAllocator(Q)
    wset = set(W)
    node_map = {}
    new_nodes = []
    for nid in sorted(W, key=lambda x: (Q.rank(x), x)):
        orig = Q.node(nid)
        node_map[nid] = ids("n")
        new_nodes.append(QNode(node_map[nid], orig.sign, orig.theta))
    edge_map = {}
    new_edges = []
    for e in Q.qedges:
        if e.source in wset or e.target in wset:
            edge_map[e.id] = ids("e")
            new_edges.append(QEdge(edge_map[e.id], node_map.get(e.source, e.source),
                                   node_map.get(e.target, e.target), e.sign, e.theta))
    return Clone(Q.with_elements(new_nodes, new_edges), node_map, edge_map)


def _signed(Q: Query, signs: dict[str, str]) -> Query:
    for nid, sign in signs.items():
        Q = Q.replace_node(nid, sign=sign)
    return Q


def _sign_vectors(k: int) -> Iterator[tuple[str, ...]]:
    return itertools.product((POS, NEG), repeat=k)


def _require_positive(Q: Query, nids: Iterable[str], what: str):
    for nid in nids:
        if Q.node(nid).sign != POS:
            raise RefinementError(f"{what}: query node {nid!r} is not positive")


def refine_add_node(Q: Query, ordered: bool = True) -> RefinementSet:
    ids = IdAllocator(Q)
    m = ids("n")
    children = [Q.with_elements([QNode(m, s, T)]) for s in (POS, NEG)]
    return _ordered(Q, children, {"family": ADD_NODE, "params": {"node": m}}, ordered)


def refine_add_edge(Q: Query, n: str, m: str, edge_sign: str = POS,
                    allow_self_loop: bool = False,
                    ordered: bool = True) -> RefinementSet:
    _require_positive(Q, (n, m), "add_edge")
    if n == m and not allow_self_loop:
        raise RefinementError("add_edge: self-loops are disabled")
    ids = IdAllocator(Q)
    clone = clone_nodes(Q, (n, m), ids)
    cn, cm = clone.nodes[n], clone.nodes[m]
    new_edge = QEdge(ids("e"), cn, cm, edge_sign, T)
    base = clone.query.with_elements(edges=[new_edge])
    varied = list(dict.fromkeys((cn, cm)))
    children = [_signed(base, dict(zip(varied, sv))) for sv in _sign_vectors(len(varied))]
    return _ordered(Q, children, {
        "family": ADD_EDGE,
        "params": {"source": n, "target": m, "edge_sign": edge_sign},
    }, ordered)


def refine_add_edge_predicate(Q: Query, e: str, phi: Predicate, ordered: bool = True) -> RefinementSet:
    qe = Q.edge(e)
    if qe.sign != POS:
        raise RefinementError(f"add_edge_predicate: query edge {e!r} is not positive")
    _require_positive(Q, (qe.source, qe.target), "add_edge_predicate")
    clone = clone_nodes(Q, (qe.source, qe.target))
    strengthened = conjoin(qe.theta, phi)
    base = clone.query.replace_edge(clone.edges[e], theta=strengthened)
    varied = list(dict.fromkeys((clone.nodes[qe.source], clone.nodes[qe.target])))
    children = [_signed(base, dict(zip(varied, sv))) for sv in _sign_vectors(len(varied))]
    return _ordered(Q, children, {
        "family": ADD_EDGE_PREDICATE,
        "params": {"edge": e, "predicate": render_predicate(phi)},
    }, ordered)


def refine_add_node_predicate(Q: Query, n: str, phi: Predicate, ordered: bool = True) -> RefinementSet:
    """Strengthen a clone of ``n`` by ``phi``.

    Both ``n`` and its neighbourhood are cloned so no original test changes;
    the clone of ``n`` and every neighbour clone take all sign combinations,
    giving 2^(|N(n)|+1) children.
    """
    _require_positive(Q, [n], "add_node_predicate")
    neighbours = Q.neighbors(n)
    _require_positive(Q, neighbours, "add_node_predicate")
    clone = clone_nodes(Q, [n, *neighbours])
    cn = clone.nodes[n]
    base = clone.query.replace_node(cn, theta=conjoin(Q.node(n).theta, phi))
    varied = [cn] + [clone.nodes[m] for m in neighbours]
    children = [_signed(base, dict(zip(varied, sv))) for sv in _sign_vectors(len(varied))]
    return _ordered(Q, children, {
        "family": ADD_NODE_PREDICATE,
        "params": {"node": n, "predicate": render_predicate(phi)},
    }, ordered)


# -- enumeration --------------------------------------------------------------

_FAMILY_RANK = {f: i for i, f in enumerate(FAMILIES)}


@dataclass(frozen=True)
class Candidate:
    """A family instantiation, not yet built; ``order`` is its position key."""

    family: str
    params: tuple
    order: tuple

    def build(self, Q: Query, allow_self_loops: bool = False,
              ordered: bool = True) -> RefinementSet:
        if self.family == ADD_NODE:
            return refine_add_node(Q, ordered=ordered)
        if self.family == ADD_EDGE:
            n, m, sign = self.params
            return refine_add_edge(Q, n, m, sign, allow_self_loop=allow_self_loops,
                                   ordered=ordered)
        if self.family == ADD_EDGE_PREDICATE:
            e, atom = self.params
            return refine_add_edge_predicate(Q, e, PropEq(atom.key, atom.value), ordered=ordered)
        n, atom = self.params
        return refine_add_node_predicate(Q, n, PropEq(atom.key, atom.value), ordered=ordered)


def _atom_order(atom: Atom) -> tuple:
    return (-atom.support, *atom.sort_key)


def candidate_order(Q: Query, pool: AtomPool, edge_signs: Sequence[str] = (POS, NEG),
                    allow_self_loops: bool = False, families: Sequence[str] = FAMILIES
                    ) -> list[Candidate]:
    """All legal family instantiations on Q, in canonical candidate order.

    The order puts refinements of the most recently created query element
    first, then follows family order (add node, add edge, edge predicate,
    node predicate), then prefers atoms with higher support, then element
    creation order and the ``+`` edge sign.
    """
    rank = Q.rank
    positive = [n.id for n in Q.qnodes if n.sign == POS]
    sign_rank = {POS: 0, NEG: 1}
    out: list[Candidate] = []
    if ADD_NODE in families:
        out.append(Candidate(ADD_NODE, (), (1, _FAMILY_RANK[ADD_NODE])))
    if ADD_EDGE in families:
        for n in positive:
            for m in positive:
                if n == m and not allow_self_loops:
                    continue
                for sign in edge_signs:
                    out.append(Candidate(ADD_EDGE, (n, m, sign), (
                        -max(rank(n), rank(m)), _FAMILY_RANK[ADD_EDGE],
                        rank(n), rank(m), n, m, sign_rank[sign])))
    if ADD_EDGE_PREDICATE in families:
        for e in Q.qedges:
            if e.sign != POS or Q.node(e.source).sign != POS or Q.node(e.target).sign != POS:
                continue
            for atom in pool.edge_atoms:
                out.append(Candidate(ADD_EDGE_PREDICATE, (e.id, atom), (
                    -rank(e.id), _FAMILY_RANK[ADD_EDGE_PREDICATE],
                    *_atom_order(atom), rank(e.id), e.id)))
    if ADD_NODE_PREDICATE in families:
        for n in positive:
            if any(Q.node(m).sign != POS for m in Q.neighbors(n)):
                continue
            for atom in pool.node_atoms:
                out.append(Candidate(ADD_NODE_PREDICATE, (n, atom), (
                    -rank(n), _FAMILY_RANK[ADD_NODE_PREDICATE],
                    *_atom_order(atom), rank(n), n)))
    out.sort(key=lambda c: c.order)
    return out


def iter_refinements(Q: Query, pool: AtomPool = AtomPool(), *, edge_signs=(POS, NEG),
                     allow_self_loops: bool = False, families: Sequence[str] = FAMILIES,
                     dedupe: bool = True) -> Iterator[RefinementSet]:
    """Lazily yield refinement sets in canonical candidate order."""
    seen: set[tuple[str, ...]] = set()
    for cand in candidate_order(Q, pool, edge_signs, allow_self_loops, families):
        rs = cand.build(Q, allow_self_loops)
        if dedupe:
            key = tuple(canonical_form(c) for c in rs.children)
            if key in seen:
                continue
            seen.add(key)
        yield rs


def enumerate_refinements(Q: Query, pool: AtomPool = AtomPool(), **kwargs) -> list[RefinementSet]:
    return list(iter_refinements(Q, pool, **kwargs))


# -- axiom checker ------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    kind: str  # "not-refinement" | "no-child" | "multiple-children"
    subgraph: SubgraphRef
    children: tuple[int, ...]


@dataclass
class RefinementReport:
    checked: int = 0
    parent_matches: int = 0
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def check_refinement_set(R: RefinementSet, G: PropertyGraph, samples: Iterable[SubgraphRef],
                         max_len: int = 1, matcher: Optional[Matcher] = None
                         ) -> RefinementReport:
    """Check both refinement-set axioms on every sample subgraph."""
    matcher = matcher or Matcher(G, max_len)
    parent = matcher.compile(R.parent)
    kids = [matcher.compile(c) for c in R.children]
    report = RefinementReport()
    for S in samples:
        report.checked += 1
        in_parent = matcher.check(parent, S)
        hits = tuple(i for i, c in enumerate(kids) if matcher.check(c, S))
        if in_parent:
            report.parent_matches += 1
            if not hits:
                report.violations.append(Violation("no-child", S, hits))
            elif len(hits) > 1:
                report.violations.append(Violation("multiple-children", S, hits))
        elif hits:
            report.violations.append(Violation("not-refinement", S, hits))
    return report
