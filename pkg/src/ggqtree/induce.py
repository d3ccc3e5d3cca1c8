"""Decision-tree induction with generalized graph queries as node tests."""

from __future__ import annotations

import json
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Iterable, Iterator, Mapping, Optional, Sequence, Union

from .graph import AtomPool, PropertyGraph, SubgraphRef, enumerate_predicate_atoms
from .predicate import NOTIN_S
from .query import (
    NEG,
    POS,
    IdAllocator,
    Matcher,
    QNode,
    Query,
    initial_query,
    query_dot_lines,
    query_from_document,
    query_to_document,
)
from .refine import FAMILIES, Candidate, RefinementSet, candidate_order

log = logging.getLogger(__name__)

_GAIN_EPS = 1e-12

__all__ = [
    "Branch", "Classification", "DecisionTree", "InductionParams", "Inner", "Leaf",
    "Refinements", "ScoredCandidate", "Split", "TrainingPair", "TrainingSet", "classify", "entropy",
    "ensure_isolated_outside_node", "induce", "information_gain", "initial_query",
    "optimal_refinement", "score_candidates", "training_accuracy",
]


# -- training data ------------------------------------------------------------

@dataclass(frozen=True)
class TrainingPair:
    subgraph: SubgraphRef
    label: str


class TrainingSet(Sequence[TrainingPair]):
    """Labelled subgraphs, kept sorted by subgraph ids so input order never matters."""

    def __init__(self, pairs: Iterable[Union[TrainingPair, tuple[SubgraphRef, str]]] = ()):
        items = [p if isinstance(p, TrainingPair) else TrainingPair(*p) for p in pairs]
        items.sort(key=lambda p: (p.subgraph.key, p.label))
        self._pairs = tuple(items)

    def __getitem__(self, i):
        return self._pairs[i]

    def __len__(self) -> int:
        return len(self._pairs)

    def __eq__(self, other) -> bool:
        return isinstance(other, TrainingSet) and self._pairs == other._pairs

    def __repr__(self) -> str:
        return f"TrainingSet({len(self._pairs)} pairs, {dict(self.counts())})"

    @property
    def labels(self) -> list[str]:
        return [p.label for p in self._pairs]

    def counts(self) -> Counter:
        return Counter(self.labels)

    def validate(self, graph: PropertyGraph) -> None:
        for p in self._pairs:
            p.subgraph.validate(graph)

    def to_document(self) -> dict[str, Any]:
        return {"pairs": [{"nodes": sorted(p.subgraph.node_ids),
                           "edges": sorted(p.subgraph.edge_ids),
                           "label": p.label} for p in self._pairs]}

    @classmethod
    def from_document(cls, doc: Mapping[str, Any]) -> "TrainingSet":
        if set(doc) - {"pairs"}:
            raise ValueError(f"unknown labels document keys {sorted(set(doc) - {'pairs'})}")
        pairs = []
        for item in doc.get("pairs", []):
            S = SubgraphRef(frozenset(item.get("nodes", [])), frozenset(item.get("edges", [])))
            pairs.append(TrainingPair(S, str(item["label"])))
        return cls(pairs)

    def dumps(self) -> str:
        return json.dumps(self.to_document(), indent=2, sort_keys=True)


# -- impurity -----------------------------------------------------------------

def entropy(labels: Iterable[str]) -> float:
    """Shannon entropy in bits."""
    counts = Counter(labels)
    total = sum(counts.values())
    if total == 0:
        raise ValueError("entropy of an empty multiset is undefined")
    h = 0.0
    for c in counts.values():
        p = c / total
        h -= p * math.log2(p)
    return h + 0.0


def information_gain(parent: Iterable[str], parts: Sequence[Iterable[str]]) -> float:
    parent = list(parent)
    parts = [list(p) for p in parts]
    merged = Counter()
    for p in parts:
        merged.update(p)
    if merged != Counter(parent):
        raise ValueError("parts do not partition the parent labels")
    n = len(parent)
    remainder = sum(len(p) / n * entropy(p) for p in parts if p)
    return max(0.0, entropy(parent) - remainder)


def majority_label(counts: Mapping[str, int]) -> str:
    return min(counts, key=lambda lab: (-counts[lab], lab))


# -- parameters ---------------------------------------------------------------

TIE_BREAK_POLICIES = ("canonical",)


@dataclass(frozen=True)
class InductionParams:
    max_depth: Optional[int] = None
    min_samples: int = 1
    max_len: int = 1
    min_support: int = 1
    tie_break: str = "canonical"

    def __post_init__(self):
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError("max_depth must be >= 1 (or None for unbounded)")
        if self.min_samples < 1:
            raise ValueError("min_samples must be >= 1")
        if self.max_len < 1:
            raise ValueError("max_len must be >= 1")
        if self.min_support < 0:
            raise ValueError("min_support must be >= 0")
        if self.tie_break not in TIE_BREAK_POLICIES:
            raise ValueError(f"unknown tie_break policy {self.tie_break!r}")


@dataclass(frozen=True)
class Refinements:
    """The available refinements: which families, and the atoms they may add."""

    pool: AtomPool = AtomPool()
    families: tuple[str, ...] = FAMILIES
    edge_signs: tuple[str, ...] = (POS, NEG)
    allow_self_loops: bool = False

    def candidates(self, Q: Query) -> list[Candidate]:
        return candidate_order(Q, self.pool, self.edge_signs, self.allow_self_loops,
                               self.families)

    @classmethod
    def from_graph(cls, graph: PropertyGraph, min_support: int = 1,
                   exclude_keys: Iterable[str] = (), **kwargs) -> "Refinements":
        return cls(enumerate_predicate_atoms(graph, min_support, exclude_keys), **kwargs)


# -- tree ---------------------------------------------------------------------

@dataclass(frozen=True)
class Leaf:
    label: str
    counts: dict[str, int] = field(default_factory=dict, compare=False)
    members: tuple[str, ...] = field(default=(), compare=False)  # names of the pairs that reached it


@dataclass(frozen=True)
class Branch:
    index: int
    query: Query
    node: "TreeNode"


@dataclass(frozen=True)
class Inner:
    query: Query
    refinement: dict[str, Any]
    arity: int
    branches: tuple[Branch, ...]
    label: str
    counts: dict[str, int] = field(default_factory=dict, compare=False)
    gain: float = 0.0


TreeNode = Union[Leaf, Inner]


@dataclass(frozen=True)
class DecisionTree:
    root: TreeNode
    max_len: int = 1

    def depth(self) -> int:
        def walk(node):
            if isinstance(node, Leaf):
                return 0
            return 1 + max(walk(b.node) for b in node.branches)
        return walk(self.root)

    def leaves(self) -> list[Leaf]:
        out = []

        def walk(node):
            if isinstance(node, Leaf):
                out.append(node)
            else:
                for b in node.branches:
                    walk(b.node)
        walk(self.root)
        return out

    def inner_nodes(self) -> list[Inner]:
        out = []

        def walk(node):
            if isinstance(node, Inner):
                out.append(node)
                for b in node.branches:
                    walk(b.node)
        walk(self.root)
        return out

    def to_document(self) -> dict[str, Any]:
        return {"format": "ggq-tree", "version": 1, "max_len": self.max_len,
                "root": _node_to_doc(self.root)}

    def dumps(self) -> str:
        return json.dumps(self.to_document(), indent=2, sort_keys=True)

    @classmethod
    def from_document(cls, doc: Mapping[str, Any]) -> "DecisionTree":
        if doc.get("format") != "ggq-tree":
            raise ValueError("not a ggq-tree document")
        return cls(_node_from_doc(doc["root"]), int(doc.get("max_len", 1)))

    @classmethod
    def loads(cls, text: str) -> "DecisionTree":
        return cls.from_document(json.loads(text))

    def to_dot(self, name: str = "tree") -> str:
        return tree_to_dot(self, name)


def _node_to_doc(node: TreeNode) -> dict[str, Any]:
    if isinstance(node, Leaf):
        return {"kind": "leaf", "label": node.label, "counts": dict(sorted(node.counts.items())),
                "members": list(node.members)}
    return {
        "kind": "inner",
        "label": node.label,
        "counts": dict(sorted(node.counts.items())),
        "gain": round(node.gain, 12),
        "query": query_to_document(node.query),
        "refinement": node.refinement,
        "arity": node.arity,
        "children": [{"index": b.index, "query": query_to_document(b.query),
                      "node": _node_to_doc(b.node)} for b in node.branches],
    }


def _node_from_doc(doc: Mapping[str, Any]) -> TreeNode:
    if doc["kind"] == "leaf":
        return Leaf(doc["label"], dict(doc.get("counts", {})), tuple(doc.get("members", ())))
    return Inner(
        query=query_from_document(doc["query"]),
        refinement=dict(doc["refinement"]),
        arity=int(doc["arity"]),
        branches=tuple(Branch(int(c["index"]), query_from_document(c["query"]),
                              _node_from_doc(c["node"])) for c in doc["children"]),
        label=doc["label"],
        counts=dict(doc.get("counts", {})),
        gain=float(doc.get("gain", 0.0)),
    )


def _describe(refinement: Mapping[str, Any]) -> str:
    params = ", ".join(f"{k}={v}" for k, v in sorted(refinement.get("params", {}).items()))
    return f"{refinement['family']}({params})"


def tree_to_dot(tree: DecisionTree, name: str = "tree") -> str:
    """Inner nodes as clusters holding their query, leaves as labelled boxes."""
    lines = [f'digraph "{name}" {{', "  compound=true;"]
    counter = [0]

    def emit(node: TreeNode) -> str:
        k = counter[0]
        counter[0] += 1
        if isinstance(node, Leaf):
            anchor = f"leaf{k}"
            label = node.label.replace('"', '\\"')
            lines.append(f'  "{anchor}" [shape=box, label="{label}"];')
            return anchor
        anchor = f"t{k}"
        lines.append(f"  subgraph cluster_{k} {{")
        title = _describe(node.refinement).replace('"', '\\"')
        lines.append(f'    label="{title}";')
        lines.append(f'    "{anchor}" [shape=point];')
        lines.extend(query_dot_lines(node.query, prefix=f"t{k}_", indent="    "))
        lines.append("  }")
        for b in node.branches:
            child = emit(b.node)
            lines.append(f'  "{anchor}" -> "{child}" [label="{b.index}", ltail=cluster_{k}];')
        return anchor

    emit(tree.root)
    lines.append("}")
    return "\n".join(lines) + "\n"


# -- induction ----------------------------------------------------------------

def ensure_isolated_outside_node(Q: Query) -> Query:
    """Add a positive, edge-free ``notin(S)`` node unless Q already has one."""
    for n in Q.qnodes:
        if n.sign == POS and n.theta == NOTIN_S and Q.is_isolated(n.id):
            return Q
    return Q.with_elements([QNode(IdAllocator(Q)("n"), POS, NOTIN_S)])


@dataclass
class Split:
    refinement: RefinementSet
    gain: float
    parts: list[tuple[int, TrainingSet]]


def _route(matcher: Matcher, extras: list[frozenset], S: SubgraphRef) -> Optional[int]:
    """Index of the child matched by S, assuming S matches the parent.

    Only the checks a child adds over its parent are evaluated, and the last
    sibling is taken without evaluation once all others have failed.
    """
    last = len(extras) - 1
    for i, extra in enumerate(extras):
        if i == last:
            return i
        if matcher.check(extra, S):
            return i
    return None


def _transmit(matcher: Matcher, rs: RefinementSet, pairs: TrainingSet) -> list[list[TrainingPair]]:
    parent = matcher.compile(rs.parent)
    extras = [matcher.compile(c) - parent for c in rs.children]
    buckets: list[list[TrainingPair]] = [[] for _ in rs.children]
    for p in pairs:
        i = _route(matcher, extras, p.subgraph)
        buckets[i].append(p)
    return buckets


def _gain_of(labels: list[str], buckets: list[list[TrainingPair]]) -> float:
    return information_gain(labels, [[p.label for p in b] for b in buckets])


@dataclass(frozen=True)
class ScoredCandidate:
    candidate: Candidate
    refinement: RefinementSet
    counts: tuple[dict[str, int], ...]  # label counts transmitted to each child
    gain: float


def score_candidates(G: PropertyGraph, Q: Query, L: TrainingSet, refs: Refinements,
                     params: InductionParams = InductionParams(),
                     matcher: Optional[Matcher] = None,
                     ordered: bool = False) -> Iterator[ScoredCandidate]:
    """Every candidate refinement of Q with its transmission and gain, in candidate order."""
    if not L:
        raise ValueError("scoring needs a nonempty training set")
    matcher = matcher or Matcher(G, params.max_len)
    labels = L.labels
    for cand in refs.candidates(Q):
        rs = cand.build(Q, refs.allow_self_loops, ordered=ordered)
        buckets = _transmit(matcher, rs, L)
        yield ScoredCandidate(cand, rs, tuple(dict(Counter(p.label for p in b)) for b in buckets),
                              _gain_of(labels, buckets))


def optimal_refinement(G: PropertyGraph, Q: Query, L: TrainingSet, refs: Refinements,
                       params: InductionParams = InductionParams(),
                       matcher: Optional[Matcher] = None) -> Optional[Split]:
    """Best-gain refinement of Q for the pairs in L, or None if nothing gains.

    Every pair in L must match Q. Ties keep the earliest candidate in
    canonical candidate order.
    """
    matcher = matcher or Matcher(G, params.max_len)
    best: Optional[ScoredCandidate] = None
    for sc in score_candidates(G, Q, L, refs, params, matcher):
        if sc.gain <= _GAIN_EPS:
            continue
        if best is None or sc.gain > best.gain + _GAIN_EPS:
            best = sc
    if best is None:
        return None
    rs = best.candidate.build(Q, refs.allow_self_loops, ordered=True)
    buckets = _transmit(matcher, rs, L)
    parts = [(i, TrainingSet(b)) for i, b in enumerate(buckets) if b]
    return Split(rs, best.gain, parts)


def induce(G: PropertyGraph, L: TrainingSet, Q0: Optional[Query] = None,
           refs: Optional[Refinements] = None,
           params: InductionParams = InductionParams(),
           matcher: Optional[Matcher] = None) -> DecisionTree:
    if not isinstance(L, TrainingSet):
        L = TrainingSet(L)
    if not L:
        raise ValueError("cannot induce a tree from an empty training set")
    L.validate(G)
    Q0 = initial_query() if Q0 is None else Q0
    refs = refs if refs is not None else Refinements.from_graph(G, params.min_support)
    matcher = matcher or Matcher(G, params.max_len)

    root_compiled = matcher.compile(Q0)
    kept = TrainingSet(p for p in L if matcher.check(root_compiled, p.subgraph))
    if len(kept) < len(L):
        log.warning("%d training pairs do not match the initial query and are ignored",
                    len(L) - len(kept))
    if not kept:
        counts = L.counts()
        return DecisionTree(Leaf(majority_label(counts), dict(counts)), params.max_len)

    def grow(Q: Query, pairs: TrainingSet, depth: int) -> TreeNode:
        counts = pairs.counts()
        label = majority_label(counts)
        if (len(counts) == 1
                or (params.max_depth is not None and depth >= params.max_depth)
                or len(pairs) < params.min_samples):
            return Leaf(label, dict(counts), tuple(p.subgraph.name for p in pairs))
        augmented = ensure_isolated_outside_node(Q)
        if augmented is not Q:
            # only neutral when no pair covers every graph node
            compiled = matcher.compile(augmented)
            if all(matcher.check(compiled, p.subgraph) for p in pairs):
                Q = augmented
        split = optimal_refinement(G, Q, pairs, refs, params, matcher)
        if split is None:
            return Leaf(label, dict(counts), tuple(p.subgraph.name for p in pairs))
        log.debug("depth %d: %s gain=%.4f", depth, _describe(split.refinement.descriptor),
                  split.gain)
        branches = tuple(
            Branch(i, split.refinement.children[i], grow(split.refinement.children[i], sub, depth + 1))
            for i, sub in split.parts)
        return Inner(Q, dict(split.refinement.descriptor), len(split.refinement.children),
                     branches, label, dict(counts), split.gain)

    return DecisionTree(grow(Q0, kept, 0), params.max_len)


# -- classification -----------------------------------------------------------

@dataclass(frozen=True)
class Classification:
    label: str
    path: tuple[dict[str, Any], ...]
    fell_off: bool = False


def classify(tree: DecisionTree, S: SubgraphRef, G: PropertyGraph,
             matcher: Optional[Matcher] = None) -> Classification:
    """Descend from the root, following the first stored child query S matches.

    If no stored child matches (its sibling was pruned for lack of training
    data) the label of the deepest reached node is returned with ``fell_off``.
    """
    matcher = matcher or Matcher(G, tree.max_len)
    node = tree.root
    path = []
    while isinstance(node, Inner):
        for b in node.branches:
            if matcher.matches(b.query, S):
                path.append({**node.refinement, "child": b.index})
                node = b.node
                break
        else:
            return Classification(node.label, tuple(path), fell_off=True)
    return Classification(node.label, tuple(path))


def training_accuracy(tree: DecisionTree, L: TrainingSet, G: PropertyGraph,
                      matcher: Optional[Matcher] = None) -> float:
    matcher = matcher or Matcher(G, tree.max_len)
    hits = sum(classify(tree, p.subgraph, G, matcher).label == p.label for p in L)
    return hits / len(L) if len(L) else 0.0


def describe_refinement(refinement: Mapping[str, Any]) -> str:
    return _describe(refinement)
