"""Generalized graph queries and the match relation S |= Q.

A query is a small property graph whose nodes and edges carry a sign
(``+`` must exist, ``-`` must not exist) and a predicate. Matching follows the
Q-predicate decomposition: every query node is an independent existential
test over graph nodes, and a query edge contributes, to each of its
endpoints, the existence (or absence) of a graph path with the right edge
and endpoint predicates.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import re
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Any, Iterable, Mapping, Optional

from .graph import INCOMING, OUTGOING, GraphPath, PropertyGraph, SubgraphRef
from .predicate import (
    IN_S,
    NOTIN_S,
    T,
    InSubgraph,
    NotInSubgraph,
    Predicate,
    PropEq,
    atoms,
    canonicalize,
    eval_edge_predicate,
    eval_node_predicate,
    parse_predicate,
    render_predicate,
)

POS = "+"
NEG = "-"
SIGNS = (POS, NEG)

ROLE_OUT = "o"
ROLE_IN = "i"

_RANKED_ID = re.compile(r"[ne](\d+)")


@dataclass(frozen=True)
class QNode:
    id: str
    sign: str = POS
    theta: Predicate = T

    def __post_init__(self):
        if self.sign not in SIGNS:
            raise ValueError(f"sign must be '+' or '-', got {self.sign!r}")
        object.__setattr__(self, "theta", canonicalize(self.theta))


@dataclass(frozen=True)
class QEdge:
    id: str
    source: str
    target: str
    sign: str = POS
    theta: Predicate = T

    def __post_init__(self):
        if self.sign not in SIGNS:
            raise ValueError(f"sign must be '+' or '-', got {self.sign!r}")
        object.__setattr__(self, "theta", canonicalize(self.theta))


@dataclass(frozen=True)
class Query:
    qnodes: tuple[QNode, ...] = ()
    qedges: tuple[QEdge, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "qnodes", tuple(self.qnodes))
        object.__setattr__(self, "qedges", tuple(self.qedges))
        ids = [n.id for n in self.qnodes]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate query node id")
        eids = [e.id for e in self.qedges]
        if len(set(eids)) != len(eids):
            raise ValueError("duplicate query edge id")
        known = set(ids)
        for e in self.qedges:
            if e.source not in known or e.target not in known:
                raise ValueError(f"query edge {e.id!r} has an unknown endpoint")

    @cached_property
    def _node_index(self) -> dict[str, QNode]:
        return {n.id: n for n in self.qnodes}

    @cached_property
    def _edge_index(self) -> dict[str, QEdge]:
        return {e.id: e for e in self.qedges}

    def node(self, nid: str) -> QNode:
        try:
            return self._node_index[nid]
        except KeyError:
            raise KeyError(f"unknown query node {nid!r}") from None

    def edge(self, eid: str) -> QEdge:
        try:
            return self._edge_index[eid]
        except KeyError:
            raise KeyError(f"unknown query edge {eid!r}") from None

    def incident(self, nid: str) -> list[tuple[QEdge, str]]:
        """(edge, role) pairs; a query self-loop shows up once per role."""
        self.node(nid)
        out = []
        for e in self.qedges:
            if e.source == nid:
                out.append((e, ROLE_OUT))
            if e.target == nid:
                out.append((e, ROLE_IN))
        return out

    def neighbors(self, nid: str) -> list[str]:
        found = set()
        for e, _ in self.incident(nid):
            found.update((e.source, e.target))
        found.discard(nid)
        return sorted(found, key=self.rank)

    def is_isolated(self, nid: str) -> bool:
        return not self.incident(nid)

    def rank(self, element_id: str) -> int:
        """Creation index of an element named by :meth:`fresh_id`; -1 otherwise."""
        m = _RANKED_ID.fullmatch(element_id)
        return int(m.group(1)) if m else -1

    def next_index(self) -> int:
        ranks = [self.rank(x.id) for x in (*self.qnodes, *self.qedges)]
        return max(ranks, default=-1) + 1

    def with_elements(self, nodes: Iterable[QNode] = (), edges: Iterable[QEdge] = ()) -> "Query":
        return Query(self.qnodes + tuple(nodes), self.qedges + tuple(edges))

    def replace_node(self, nid: str, **changes) -> "Query":
        self.node(nid)
        return Query(tuple(replace(n, **changes) if n.id == nid else n for n in self.qnodes),
                     self.qedges)

    def replace_edge(self, eid: str, **changes) -> "Query":
        self.edge(eid)
        return Query(self.qnodes,
                     tuple(replace(e, **changes) if e.id == eid else e for e in self.qedges))


class IdAllocator:
    """Hands out ``n<k>``/``e<k>`` ids from one counter shared by nodes and edges."""

    def __init__(self, query: Query):
        self._next = query.next_index()
        self._taken = {x.id for x in (*query.qnodes, *query.qedges)}

    def __call__(self, prefix: str) -> str:
        while True:
            candidate = f"{prefix}{self._next}"
            self._next += 1
            if candidate not in self._taken:
                self._taken.add(candidate)
                return candidate


# -- literal evaluation (the testing oracle) ----------------------------------

def eval_edge_role(Q: Query, e: str, role: str, v: str, S: SubgraphRef,
                   G: PropertyGraph, max_len: int = 1) -> bool:
    """Q_{e^role}(v, S): some path leaving (o) or entering (i) v witnesses the edge."""
    qe = Q.edge(e)
    if v not in G.nodes:
        raise KeyError(f"unknown node id {v!r}")
    if role not in (ROLE_OUT, ROLE_IN):
        raise ValueError(f"role must be 'o' or 'i', got {role!r}")
    theta_src = Q.node(qe.source).theta
    theta_tgt = Q.node(qe.target).theta
    direction = OUTGOING if role == ROLE_OUT else INCOMING
    for rho in G.paths(v, direction, max_len):
        if (eval_edge_predicate(qe.theta, rho, S, G)
                and eval_node_predicate(theta_src, rho.source, S, G)
                and eval_node_predicate(theta_tgt, rho.target, S, G)):
            return True
    return False


def eval_node(Q: Query, n: str, S: SubgraphRef, G: PropertyGraph, max_len: int = 1) -> bool:
    """Q_n(S): some graph node satisfies theta_n and every signed incident edge test."""
    qn = Q.node(n)
    incident = Q.incident(n)
    for v in sorted(G.nodes):
        if not eval_node_predicate(qn.theta, v, S, G):
            continue
        if all(eval_edge_role(Q, e.id, role, v, S, G, max_len) == (e.sign == POS)
               for e, role in incident):
            return True
    return False


def matches_bruteforce(Q: Query, S: SubgraphRef, G: PropertyGraph, max_len: int = 1) -> bool:
    return all(eval_node(Q, n.id, S, G, max_len) == (n.sign == POS) for n in Q.qnodes)


# -- memoized evaluation ------------------------------------------------------

def _theta_key(theta: Predicate) -> str:
    return render_predicate(theta)


def node_test_signature(Q: Query, nid: str) -> tuple:
    """Everything Q_n depends on, minus the node's own sign.

    Conjuncts are a set: a duplicated edge adds an identical conjunct and
    leaves the test unchanged.
    """
    qn = Q.node(nid)
    conj = set()
    for e, role in Q.incident(nid):
        conj.add((role, e.sign, _theta_key(e.theta),
                  _theta_key(Q.node(e.source).theta), _theta_key(Q.node(e.target).theta)))
    return (_theta_key(qn.theta), tuple(sorted(conj)))


class Matcher:
    """Set-based evaluator for one graph and path bound, with verdict caches.

    Caches key on canonical predicate text and the subgraph, so results are
    the same as a cache-free run; a matcher must not outlive its graph.
    """

    def __init__(self, graph: PropertyGraph, max_len: int = 1):
        if max_len < 1:
            raise ValueError("max_len must be >= 1")
        self.graph = graph
        self.max_len = max_len
        self._paths = graph.all_paths(max_len)
        self._parsed: dict[str, Predicate] = {}
        self._node_props: dict[str, frozenset[str]] = {}
        self._path_props: dict[str, tuple[GraphPath, ...]] = {}
        self._ends: dict[tuple, tuple[frozenset[str], frozenset[str]]] = {}
        self._tests: dict[tuple, bool] = {}
        self.evaluations = 0

    def _pred(self, key: str) -> Predicate:
        if key not in self._parsed:
            self._parsed[key] = parse_predicate(key)
        return self._parsed[key]

    @staticmethod
    def _split(theta: Predicate) -> tuple[list[PropEq], bool, bool]:
        props, inside, outside = [], False, False
        for atom in atoms(theta):
            if isinstance(atom, InSubgraph):
                inside = True
            elif isinstance(atom, NotInSubgraph):
                outside = True
            else:
                props.append(atom)
        return props, inside, outside

    def node_set(self, key: str, S: SubgraphRef) -> frozenset[str]:
        props, inside, outside = self._split(self._pred(key))
        if key not in self._node_props:
            self._node_props[key] = frozenset(
                v for v, rec in self.graph.nodes.items()
                if all(a.holds(rec.properties.get(a.key)) for a in props))
        base = self._node_props[key]
        if inside and outside:
            return frozenset()
        if inside:
            return base & S.node_ids
        if outside:
            return base - S.node_ids
        return base

    def path_set(self, key: str, S: SubgraphRef) -> list[GraphPath]:
        props, inside, outside = self._split(self._pred(key))
        if key not in self._path_props:
            edges = self.graph.edges
            self._path_props[key] = tuple(
                p for p in self._paths
                if all(a.holds(edges[eid].properties.get(a.key)) for a in props for eid in p.edges))
        paths = self._path_props[key]
        if inside and outside:
            return []
        if inside:
            return [p for p in paths if all(eid in S.edge_ids for eid in p.edges)]
        if outside:
            return [p for p in paths if not any(eid in S.edge_ids for eid in p.edges)]
        return list(paths)

    def _endpoints(self, edge_key: str, src_key: str, tgt_key: str,
                   S: SubgraphRef) -> tuple[frozenset[str], frozenset[str]]:
        ck = (edge_key, src_key, tgt_key, S)
        hit = self._ends.get(ck)
        if hit is None:
            src_ok = self.node_set(src_key, S)
            tgt_ok = self.node_set(tgt_key, S)
            starts, ends = set(), set()
            for p in self.path_set(edge_key, S):
                if p.source in src_ok and p.target in tgt_ok:
                    starts.add(p.source)
                    ends.add(p.target)
            hit = self._ends[ck] = (frozenset(starts), frozenset(ends))
        return hit

    def test(self, signature: tuple, S: SubgraphRef) -> bool:
        """Value of the (unsigned) node test with the given signature on S."""
        ck = (signature, S)
        hit = self._tests.get(ck)
        if hit is None:
            self.evaluations += 1
            theta_key, conjuncts = signature
            cands = set(self.node_set(theta_key, S))
            for role, sign, e_key, src_key, tgt_key in conjuncts:
                if not cands:
                    break
                starts, ends = self._endpoints(e_key, src_key, tgt_key, S)
                witnesses = starts if role == ROLE_OUT else ends
                if sign == POS:
                    cands &= witnesses
                else:
                    cands -= witnesses
            hit = self._tests[ck] = bool(cands)
        return hit

    def compile(self, Q: Query) -> frozenset[tuple[tuple, bool]]:
        """The set of (node-test signature, required value) pairs for Q."""
        return frozenset((node_test_signature(Q, n.id), n.sign == POS) for n in Q.qnodes)

    def check(self, compiled: Iterable[tuple[tuple, bool]], S: SubgraphRef) -> bool:
        return all(self.test(sig, S) == want for sig, want in compiled)

    def matches(self, Q: Query, S: SubgraphRef) -> bool:
        return self.check(self.compile(Q), S)

    def eval_node(self, Q: Query, n: str, S: SubgraphRef) -> bool:
        return self.test(node_test_signature(Q, n), S)


def matches(Q: Query, S: SubgraphRef, G: PropertyGraph, max_len: int = 1,
            matcher: Optional[Matcher] = None) -> bool:
    """S |= Q. Pass a shared :class:`Matcher` to reuse caches across calls."""
    if matcher is None:
        matcher = Matcher(G, max_len)
    elif matcher.graph is not G or matcher.max_len != max_len:
        raise ValueError("matcher was built for a different graph or path bound")
    return matcher.matches(Q, S)


# -- canonical form -----------------------------------------------------------

_EXACT_LIMIT = 40320  # 8!


def _digest(text: str) -> str:
    return hashlib.sha1(text.encode("utf-8")).hexdigest()[:16]


def _element_label(x: QNode | QEdge) -> str:
    return f"{x.sign}{render_predicate(x.theta)}"


def _refine(Q: Query, colors: dict[str, str]) -> dict[str, str]:
    while True:
        sig = {}
        for n in Q.qnodes:
            parts = []
            for e in Q.qedges:
                if e.source == n.id:
                    parts.append(f">{_element_label(e)}>{colors[e.target]}")
                if e.target == n.id:
                    parts.append(f"<{_element_label(e)}<{colors[e.source]}")
            sig[n.id] = _digest(colors[n.id] + "|" + "|".join(sorted(parts)))
        if len(set(sig.values())) == len(set(colors.values())):
            return sig
        colors = sig


def _encode(Q: Query, order: list[str]) -> str:
    pos = {nid: i for i, nid in enumerate(order)}
    nodes = ";".join(_element_label(Q.node(nid)) for nid in order)
    edges = sorted((pos[e.source], pos[e.target], _element_label(e)) for e in Q.qedges)
    return "V[" + nodes + "] E[" + ";".join(f"{a}>{b}:{lab}" for a, b, lab in edges) + "]"


def _classes(colors: dict[str, str]) -> list[list[str]]:
    groups: dict[str, list[str]] = {}
    for nid, c in colors.items():
        groups.setdefault(c, []).append(nid)
    return [sorted(groups[c]) for c in sorted(groups)]


def canonical_form(Q: Query) -> str:
    """Text that is equal for isomorphic queries (ids ignored, signs and predicates kept).

    Color refinement orders the nodes; remaining ties are resolved exhaustively
    when at most 8! labelings are left, otherwise greedily.
    """
    if not Q.qnodes:
        return "V[] E[]"
    colors = _refine(Q, {n.id: _digest(_element_label(n)) for n in Q.qnodes})
    classes = _classes(colors)
    total = 1
    for cls in classes:
        for k in range(2, len(cls) + 1):
            total *= k
    if total <= _EXACT_LIMIT:
        best = None
        for combo in itertools.product(*(itertools.permutations(c) for c in classes)):
            text = _encode(Q, [nid for part in combo for nid in part])
            if best is None or text < best:
                best = text
        return best
    # greedy individualization: fix the member giving the smallest refined coloring
    while any(len(c) > 1 for c in classes):
        cls = next(c for c in classes if len(c) > 1)
        trials = []
        for nid in cls:
            trial = dict(colors)
            trial[nid] = _digest("*" + trial[nid])
            refined = _refine(Q, trial)
            trials.append((sorted(refined.values()), nid, refined))
        trials.sort(key=lambda t: t[0])
        colors = trials[0][2]
        classes = _classes(colors)
    return _encode(Q, [c[0] for c in classes])


# -- documents and DOT --------------------------------------------------------

def query_to_document(Q: Query) -> dict[str, Any]:
    return {
        "qnodes": [{"id": n.id, "sign": n.sign, "theta": render_predicate(n.theta)}
                   for n in Q.qnodes],
        "qedges": [{"id": e.id, "source": e.source, "target": e.target, "sign": e.sign,
                    "theta": render_predicate(e.theta)} for e in Q.qedges],
    }


def query_from_document(doc: Mapping[str, Any]) -> Query:
    unknown = set(doc) - {"qnodes", "qedges"}
    if unknown:
        raise ValueError(f"unknown query document keys {sorted(unknown)}")
    nodes = [QNode(n["id"], n.get("sign", POS), parse_predicate(n.get("theta", "T")))
             for n in doc.get("qnodes", [])]
    edges = [QEdge(e["id"], e["source"], e["target"], e.get("sign", POS),
                   parse_predicate(e.get("theta", "T")))
             for e in doc.get("qedges", [])]
    return Query(tuple(nodes), tuple(edges))


def load_query(text: str) -> Query:
    return query_from_document(json.loads(text))


def dump_query(Q: Query) -> str:
    return json.dumps(query_to_document(Q), indent=2, sort_keys=True)


def _dot_quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _color(sign: str) -> str:
    return "black" if sign == POS else "red"


def query_dot_lines(Q: Query, prefix: str = "", indent: str = "  ") -> list[str]:
    lines = []
    for n in Q.qnodes:
        lines.append(f"{indent}{_dot_quote(prefix + n.id)} [label={_dot_quote(render_predicate(n.theta))}, "
                     f"color={_color(n.sign)}, fontcolor={_color(n.sign)}];")
    for e in Q.qedges:
        lines.append(f"{indent}{_dot_quote(prefix + e.source)} -> {_dot_quote(prefix + e.target)} "
                     f"[label={_dot_quote(render_predicate(e.theta))}, color={_color(e.sign)}, "
                     f"fontcolor={_color(e.sign)}];")
    return lines


def query_to_dot(Q: Query, name: str = "Q") -> str:
    """Positive elements drawn black, negative ones red."""
    return "\n".join([f"digraph {_dot_quote(name)} {{", *query_dot_lines(Q), "}"]) + "\n"


def initial_query() -> Query:
    """The two-node starting query: one node inside S, one node outside it."""
    return Query((QNode("n0", POS, IN_S), QNode("n1", POS, NOTIN_S)))
