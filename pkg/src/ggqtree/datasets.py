"""Built-in fixture graphs with their training sets.

``social`` is the five-node marital/photo graph, fully hand-written. The
``starwars_like`` and ``hobbit_like`` graphs follow the schemas of the two
larger examples; they are reconstructions, not the original data.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

from .graph import (
    AtomPool,
    EdgeRecord,
    NodeRecord,
    PropertyGraph,
    SubgraphRef,
    enumerate_predicate_atoms,
)
from .induce import Refinements, TrainingPair, TrainingSet

FIXTURES = ("social", "starwars_like", "hobbit_like")


@dataclass(frozen=True)
class FixtureSpec:
    name: str
    seed: int = 0


@dataclass(frozen=True)
class FixtureBundle:
    name: str
    graph: PropertyGraph
    training: TrainingSet
    label_key: str
    pool: Optional[AtomPool] = None  # fixed predicate pool, when the example prescribes one

    def refinements(self, min_support: int = 1) -> Refinements:
        if self.pool is not None:
            return Refinements(self.pool)
        return Refinements.from_graph(self.graph, min_support, exclude_keys=[self.label_key])

    def write(self, directory: Union[str, Path]) -> tuple[Path, Path]:
        """Emit ``<name>.graph.json`` and ``<name>.labels.json``."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        graph_path = directory / f"{self.name}.graph.json"
        labels_path = directory / f"{self.name}.labels.json"
        graph_path.write_text(self.graph.dumps() + "\n", encoding="utf-8")
        labels_path.write_text(self.training.dumps() + "\n", encoding="utf-8")
        return graph_path, labels_path


def _node_pairs(graph: PropertyGraph, node_ids, label_key: str) -> TrainingSet:
    return TrainingSet(
        TrainingPair(SubgraphRef.of_nodes(v), str(graph.nodes[v].properties[label_key]))
        for v in node_ids)


def social() -> FixtureBundle:
    users = [("u1", "F"), ("u2", "M"), ("u3", "M")]
    nodes = [NodeRecord(u, {"type": "user", "gender": g}) for u, g in users]
    nodes += [NodeRecord(p, {"type": "photo", "gender": "None"}) for p in ("p1", "p2")]
    edges = [
        EdgeRecord("e1", "u1", "p1", {"type": "publish"}),
        EdgeRecord("e2", "u2", "p2", {"type": "publish"}),
        EdgeRecord("e3", "u3", "p1", {"type": "likes"}),
        EdgeRecord("e4", "u2", "u1", {"type": "husband"}),
        EdgeRecord("e5", "u1", "u2", {"type": "wife"}),
    ]
    graph = PropertyGraph(nodes, edges)
    # the worked example restricts the available atoms to exactly these
    pool = enumerate_predicate_atoms(graph).select(
        node=[("type", "photo"), ("type", "user")],
        edge=[("type", "publish"), ("type", "likes"), ("type", "husband")],
    )
    return FixtureBundle("social", graph, _node_pairs(graph, sorted(graph.nodes), "gender"),
                         "gender", pool)


def starwars_like() -> FixtureBundle:
    """Characters classified as devoted to the empire, the rebellion, or neither.

    Institutions are left out of the schema; allegiance shows only through
    who a character serves, trains, flies with or fights.
    """
    characters = {
        "luke": "rebellion", "leia": "rebellion", "han": "rebellion",
        "chewbacca": "rebellion", "obiwan": "rebellion", "yoda": "rebellion",
        "wedge": "rebellion", "vader": "empire", "palpatine": "empire",
        "tarkin": "empire", "piett": "empire", "tk421": "empire",
        "jabba": "None", "boba": "None", "greedo": "None", "lando": "None",
    }
    places = {"tatooine": "planet", "alderaan": "planet", "hoth": "planet",
              "dagobah": "planet", "deathstar": "station", "falcon": "ship",
              "xwing": "ship", "destroyer": "ship"}
    nodes = [NodeRecord(c, {"type": "character", "allegiance": a})
             for c, a in characters.items()]
    nodes += [NodeRecord(p, {"type": t}) for p, t in places.items()]
    rel = [
        ("vader", "palpatine", "serves"), ("tarkin", "palpatine", "serves"),
        ("piett", "vader", "serves"), ("tk421", "tarkin", "serves"),
        ("boba", "jabba", "serves"), ("greedo", "jabba", "serves"),
        ("obiwan", "luke", "trains"), ("yoda", "luke", "trains"),
        ("palpatine", "vader", "trains"), ("luke", "leia", "sibling"),
        ("vader", "luke", "father"), ("han", "leia", "loves"),
        ("han", "chewbacca", "friend"), ("luke", "han", "friend"),
        ("lando", "han", "friend"), ("wedge", "luke", "friend"),
        ("han", "falcon", "pilots"), ("chewbacca", "falcon", "pilots"),
        ("luke", "xwing", "pilots"), ("wedge", "xwing", "pilots"),
        ("piett", "destroyer", "commands"), ("tarkin", "deathstar", "commands"),
        ("tk421", "deathstar", "stationed"), ("deathstar", "alderaan", "destroyed"),
        ("leia", "alderaan", "born"), ("luke", "tatooine", "born"),
        ("jabba", "tatooine", "lives"), ("yoda", "dagobah", "lives"),
        ("greedo", "tatooine", "lives"), ("boba", "han", "hunts"),
        ("jabba", "han", "hunts"), ("vader", "obiwan", "fights"),
        ("luke", "vader", "fights"), ("leia", "hoth", "stationed"),
        ("han", "hoth", "stationed"), ("lando", "falcon", "owns"),
    ]
    edges = [EdgeRecord(f"s{i:02d}", a, b, {"type": t}) for i, (a, b, t) in enumerate(rel)]
    graph = PropertyGraph(nodes, edges)
    return FixtureBundle("starwars_like", graph,
                         _node_pairs(graph, sorted(characters), "allegiance"), "allegiance")


_HOBBIT_TYPES = {"Character": 35, "Location": 18, "Event": 16, "Item": 12, "Text": 12,
                 "Clan": 8, "Alignment": 4}
_LOCATION_KINDS = ("Hills", "Forest", "Valley", "Mountain", "Caves", "Lake")
_SIGNAL = {"Hills": "lives_in", "Forest": "lost_in", "Valley": "rests_in",
           "Mountain": "climbs", "Caves": "hides_in", "Lake": "sails_on"}
_RACES = ("Hobbit", "Dwarf", "Elf", "Wizard", "Man", "Orc")
_OTHER_EDGE_TYPES = (
    "ally_of", "enemy_of", "friend_of", "kin_of", "father_of", "son_of", "serves",
    "leads", "member_of", "aligned_with", "carries", "forged", "found", "lost", "steals",
    "gives", "receives", "wields", "wears", "guards", "attacks", "defends", "rescues",
    "captures", "escapes_from", "travels_to", "departs_from", "arrives_at", "visits",
    "rules", "founded", "destroyed", "burned", "participates_in", "witnesses", "causes",
    "follows", "precedes", "mentions", "describes", "written_by", "sings_of", "tells_of",
    "riddles_with", "bargains_with", "hosts", "feasts_at", "trades_with", "heals",
    "teaches", "counsels", "betrays", "hunts", "fears", "owns", "borrows", "hides",
    "near", "borders",
)


def hobbit_like(seed: int = 0) -> FixtureBundle:
    """Seeded graph of 105 nodes over 7 types and 209 edges over 65 types.

    Each location's kind is hinted by two incoming edges of a kind-specific
    type, one of which may be swapped for a misleading type; the remaining
    edges are noise.
    """
    rng = random.Random(seed)
    edge_types = tuple(_SIGNAL.values()) + _OTHER_EDGE_TYPES
    assert len(set(edge_types)) == 65

    nodes: list[NodeRecord] = []
    by_type: dict[str, list[str]] = {}
    for t, count in _HOBBIT_TYPES.items():
        for k in range(count):
            nid = f"{t.lower()}{k:02d}"
            props = {"type": t}
            if t == "Character":
                props["race"] = rng.choice(_RACES)
            if t == "Location":
                props["kind"] = _LOCATION_KINDS[k % len(_LOCATION_KINDS)]
            nodes.append(NodeRecord(nid, props))
            by_type.setdefault(t, []).append(nid)
    assert len(nodes) == 105

    triples: list[tuple[str, str, str]] = []
    seen: set[tuple[str, str, str]] = set()

    def add(src: str, tgt: str, etype: str) -> bool:
        key = (src, tgt, etype)
        if src == tgt or key in seen:
            return False
        seen.add(key)
        triples.append(key)
        return True

    actors = by_type["Character"] + by_type["Event"]
    kinds = list(_SIGNAL)
    for loc in by_type["Location"]:
        kind = next(n.properties["kind"] for n in nodes if n.id == loc)
        for j in range(2):
            etype = _SIGNAL[kind]
            if j == 1 and rng.random() < 0.2:
                etype = _SIGNAL[rng.choice(kinds)]
            while not add(rng.choice(actors), loc, etype):
                pass

    all_ids = [n.id for n in nodes]
    for etype in _OTHER_EDGE_TYPES:
        while not add(rng.choice(all_ids), rng.choice(all_ids), etype):
            pass
    weights = [1.0 / (1 + i) for i in range(len(_OTHER_EDGE_TYPES))]
    while len(triples) < 209:
        etype = rng.choices(_OTHER_EDGE_TYPES, weights)[0]
        add(rng.choice(all_ids), rng.choice(all_ids), etype)

    edges = [EdgeRecord(f"h{i:03d}", s, t, {"type": et}) for i, (s, t, et) in enumerate(triples)]
    graph = PropertyGraph(nodes, edges)
    return FixtureBundle("hobbit_like", graph,
                         _node_pairs(graph, by_type["Location"], "kind"), "kind")


def build_fixture(spec: Union[FixtureSpec, str], seed: int = 0) -> FixtureBundle:
    if isinstance(spec, str):
        spec = FixtureSpec(spec, seed)
    if spec.name == "social":
        return social()
    if spec.name == "starwars_like":
        return starwars_like()
    if spec.name == "hobbit_like":
        return hobbit_like(spec.seed)
    raise KeyError(f"unknown fixture {spec.name!r}; choose from {', '.join(FIXTURES)}")


def fixture_documents(spec: Union[FixtureSpec, str], seed: int = 0) -> tuple[str, str]:
    """Graph document and labels sidecar as JSON text."""
    bundle = build_fixture(spec, seed)
    return bundle.graph.dumps(), json.dumps(bundle.training.to_document(), indent=2,
                                             sort_keys=True)
