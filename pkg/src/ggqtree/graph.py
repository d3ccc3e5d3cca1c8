"""Immutable property graphs, subgraph references and path enumeration."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Any, Iterable, Mapping, Union

Scalar = Union[str, int, float, bool, None]

OUTGOING = "outgoing"
INCOMING = "incoming"

_DOC_KEYS = {"nodes", "edges"}


class GraphError(ValueError):
    """Base class for graph ingestion errors."""


class GraphStructureError(GraphError):
    """Dangling endpoints, duplicate ids and other structural defects."""


class GraphParseError(GraphError):
    """The document could not be parsed."""

    def __init__(self, message: str, location: str | None = None):
        self.location = location
        super().__init__(f"{message} (at {location})" if location else message)


def _check_scalar(value: Any, where: str) -> Scalar:
    if value is None or isinstance(value, (str, bool, int, float)):
        return value
    raise GraphParseError(f"non-scalar property value {value!r}", where)


def _freeze(properties: Mapping[str, Any] | None, where: str) -> Mapping[str, Scalar]:
    props = {}
    for key, value in (properties or {}).items():
        if not isinstance(key, str):
            raise GraphParseError(f"property key {key!r} is not text", where)
        props[key] = _check_scalar(value, f"{where}.{key}")
    return MappingProxyType(props)


@dataclass(frozen=True)
class NodeRecord:
    id: str
    properties: Mapping[str, Scalar] = field(default_factory=dict)

    def get(self, key: str) -> Scalar:
        return self.properties.get(key)


@dataclass(frozen=True)
class EdgeRecord:
    id: str
    source: str
    target: str
    properties: Mapping[str, Scalar] = field(default_factory=dict)

    @property
    def type(self) -> Scalar:
        return self.properties.get("type")

    def get(self, key: str) -> Scalar:
        return self.properties.get(key)


@dataclass(frozen=True)
class GraphPath:
    """A directed walk through consecutive edges; ``nodes`` has one more entry than ``edges``."""

    edges: tuple[str, ...]
    nodes: tuple[str, ...]

    def __post_init__(self):
        if not self.edges:
            raise ValueError("a path has at least one edge")
        if len(self.nodes) != len(self.edges) + 1:
            raise ValueError("path nodes must be one longer than its edges")

    @property
    def source(self) -> str:
        return self.nodes[0]

    @property
    def target(self) -> str:
        return self.nodes[-1]

    def __len__(self) -> int:
        return len(self.edges)


@dataclass(frozen=True)
class SubgraphRef:
    """A structure S inside a host graph, given by node and edge ids."""

    node_ids: frozenset[str] = frozenset()
    edge_ids: frozenset[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "node_ids", frozenset(self.node_ids))
        object.__setattr__(self, "edge_ids", frozenset(self.edge_ids))

    @classmethod
    def of_nodes(cls, *node_ids: str) -> "SubgraphRef":
        return cls(frozenset(node_ids), frozenset())

    @property
    def key(self) -> tuple[tuple[str, ...], tuple[str, ...]]:
        return tuple(sorted(self.node_ids)), tuple(sorted(self.edge_ids))

    @property
    def name(self) -> str:
        nodes = ",".join(sorted(self.node_ids))
        if self.edge_ids:
            return nodes + "|" + ",".join(sorted(self.edge_ids))
        return nodes

    def validate(self, graph: "PropertyGraph") -> None:
        missing = [n for n in self.node_ids if n not in graph.nodes]
        if missing:
            raise GraphStructureError(f"subgraph references unknown nodes {sorted(missing)}")
        for eid in sorted(self.edge_ids):
            if eid not in graph.edges:
                raise GraphStructureError(f"subgraph references unknown edge {eid!r}")
            edge = graph.edges[eid]
            if edge.source not in self.node_ids or edge.target not in self.node_ids:
                raise GraphStructureError(
                    f"subgraph edge {eid!r} has an endpoint outside the subgraph"
                )


class PropertyGraph:
    """Directed property graph G = (V, E, mu); read-only after construction."""

    def __init__(self, nodes: Iterable[NodeRecord] = (), edges: Iterable[EdgeRecord] = ()):
        node_map: dict[str, NodeRecord] = {}
        for node in nodes:
            if node.id in node_map:
                raise GraphStructureError(f"duplicate node id {node.id!r}")
            node_map[node.id] = node
        edge_map: dict[str, EdgeRecord] = {}
        out_adj: dict[str, list[str]] = {n: [] for n in node_map}
        in_adj: dict[str, list[str]] = {n: [] for n in node_map}
        for edge in edges:
            if edge.id in edge_map:
                raise GraphStructureError(f"duplicate edge id {edge.id!r}")
            for end in (edge.source, edge.target):
                if end not in node_map:
                    raise GraphStructureError(
                        f"edge {edge.id!r} references missing node {end!r}"
                    )
            edge_map[edge.id] = edge
            out_adj[edge.source].append(edge.id)
            in_adj[edge.target].append(edge.id)
        self._nodes = MappingProxyType(node_map)
        self._edges = MappingProxyType(edge_map)
        self._out = {n: tuple(sorted(es)) for n, es in out_adj.items()}
        self._in = {n: tuple(sorted(es)) for n, es in in_adj.items()}
        self._path_cache: dict[int, tuple[GraphPath, ...]] = {}

    @property
    def nodes(self) -> Mapping[str, NodeRecord]:
        return self._nodes

    @property
    def edges(self) -> Mapping[str, EdgeRecord]:
        return self._edges

    def __repr__(self) -> str:
        return f"PropertyGraph(|V|={len(self._nodes)}, |E|={len(self._edges)})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PropertyGraph):
            return NotImplemented
        return self.to_document() == other.to_document()

    __hash__ = object.__hash__

    def out_edges(self, v: str) -> tuple[str, ...]:
        return self._out[self._require(v)]

    def in_edges(self, v: str) -> tuple[str, ...]:
        return self._in[self._require(v)]

    def _require(self, v: str) -> str:
        if v not in self._nodes:
            raise KeyError(f"unknown node id {v!r}")
        return v

    def paths(self, v: str, direction: str = OUTGOING, max_len: int = 1) -> list[GraphPath]:
        """Simple directed paths of length <= max_len starting (or ending) at ``v``.

        A path never revisits a node, except that a single self-loop edge is a
        path of length one. Output is sorted by edge-id sequence.
        """
        self._require(v)
        if max_len < 1:
            raise ValueError("max_len must be >= 1")
        if direction not in (OUTGOING, INCOMING):
            raise ValueError(f"unknown direction {direction!r}")
        found: list[GraphPath] = []
        forward = direction == OUTGOING

        def extend(edge_seq: list[str], node_seq: list[str]):
            tip = node_seq[-1]
            for eid in self._out[tip] if forward else self._in[tip]:
                edge = self._edges[eid]
                nxt = edge.target if forward else edge.source
                if nxt in node_seq:
                    if len(edge_seq) == 0 and nxt == tip:
                        found.append(_make_path([eid], [tip, nxt], forward))
                    continue
                found.append(_make_path(edge_seq + [eid], node_seq + [nxt], forward))
                if len(edge_seq) + 1 < max_len:
                    extend(edge_seq + [eid], node_seq + [nxt])

        extend([], [v])
        found.sort(key=lambda p: p.edges)
        return found

    def all_paths(self, max_len: int = 1) -> tuple[GraphPath, ...]:
        """Every simple path of length <= max_len, cached per bound."""
        if max_len not in self._path_cache:
            out: list[GraphPath] = []
            for v in sorted(self._nodes):
                out.extend(self.paths(v, OUTGOING, max_len))
            self._path_cache[max_len] = tuple(out)
        return self._path_cache[max_len]

    def to_document(self) -> dict[str, Any]:
        return {
            "nodes": [
                {"id": n.id, "properties": dict(n.properties)} for n in self._nodes.values()
            ],
            "edges": [
                {
                    "id": e.id,
                    "source": e.source,
                    "target": e.target,
                    "properties": dict(e.properties),
                }
                for e in self._edges.values()
            ],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_document(), indent=2, sort_keys=True, ensure_ascii=False)


def _make_path(edge_seq: list[str], node_seq: list[str], forward: bool) -> GraphPath:
    if forward:
        return GraphPath(tuple(edge_seq), tuple(node_seq))
    return GraphPath(tuple(reversed(edge_seq)), tuple(reversed(node_seq)))


def graph_from_document(doc: Mapping[str, Any]) -> PropertyGraph:
    if not isinstance(doc, Mapping):
        raise GraphParseError("graph document must be an object", "$")
    unknown = set(doc) - _DOC_KEYS
    if unknown:
        raise GraphParseError(f"unknown top-level keys {sorted(unknown)}", "$")
    nodes = []
    for i, item in enumerate(doc.get("nodes", [])):
        where = f"$.nodes[{i}]"
        if not isinstance(item, Mapping) or not isinstance(item.get("id"), str):
            raise GraphParseError("node needs a text 'id'", where)
        nodes.append(NodeRecord(item["id"], _freeze(item.get("properties"), where)))
    edges = []
    for i, item in enumerate(doc.get("edges", [])):
        where = f"$.edges[{i}]"
        if not isinstance(item, Mapping):
            raise GraphParseError("edge must be an object", where)
        if item.get("directed", True) is False:
            raise GraphStructureError(f"edge {item.get('id')!r} is undirected")
        for key in ("id", "source", "target"):
            if not isinstance(item.get(key), str):
                raise GraphParseError(f"edge needs a text {key!r}", where)
        edges.append(
            EdgeRecord(item["id"], item["source"], item["target"],
                       _freeze(item.get("properties"), where))
        )
    return PropertyGraph(nodes, edges)


def load_graph(document: Union[str, bytes, Mapping[str, Any]]) -> PropertyGraph:
    """Build a graph from a graph document (JSON text or an already-decoded object)."""
    if isinstance(document, (str, bytes)):
        try:
            doc = json.loads(document)
        except json.JSONDecodeError as exc:
            raise GraphParseError(exc.msg, f"line {exc.lineno} column {exc.colno}") from exc
    else:
        doc = document
    return graph_from_document(doc)


def load_graph_file(path: Union[str, Path]) -> PropertyGraph:
    return load_graph(Path(path).read_text(encoding="utf-8"))


@dataclass(frozen=True)
class Atom:
    """An equality atom key=value together with how many elements carry it."""

    key: str
    value: Scalar
    support: int = field(default=0, compare=False)

    @property
    def sort_key(self) -> tuple[str, str, str]:
        return (self.key, type(self.value).__name__, str(self.value))


@dataclass(frozen=True)
class AtomPool:
    node_atoms: tuple[Atom, ...] = ()
    edge_atoms: tuple[Atom, ...] = ()

    def __len__(self) -> int:
        return len(self.node_atoms) + len(self.edge_atoms)

    def select(self, node: Iterable[tuple[str, Scalar]] = (),
               edge: Iterable[tuple[str, Scalar]] = ()) -> "AtomPool":
        """Restrict the pool to the listed (key, value) pairs."""
        node, edge = set(node), set(edge)
        return AtomPool(
            tuple(a for a in self.node_atoms if (a.key, a.value) in node),
            tuple(a for a in self.edge_atoms if (a.key, a.value) in edge),
        )


def _count_atoms(records: Iterable[Any], exclude: set[str]) -> Counter:
    counts: Counter = Counter()
    for rec in records:
        for key, value in rec.properties.items():
            if key in exclude or value is None:
                continue
            counts[(key, type(value).__name__, value)] += 1
    return counts


def _to_atoms(counts: Counter, min_support: int) -> tuple[Atom, ...]:
    atoms = [Atom(k, v, c) for (k, _, v), c in counts.items() if c >= min_support]
    return tuple(sorted(atoms, key=lambda a: a.sort_key))


def enumerate_predicate_atoms(graph: PropertyGraph, min_support: int = 1,
                              exclude_keys: Iterable[str] = ()) -> AtomPool:
    """All key=value atoms found on at least ``min_support`` nodes (resp. edges)."""
    if min_support < 0:
        raise ValueError("min_support must be >= 0")
    exclude = set(exclude_keys)
    return AtomPool(
        _to_atoms(_count_atoms(graph.nodes.values(), exclude), min_support),
        _to_atoms(_count_atoms(graph.edges.values(), exclude), min_support),
    )
