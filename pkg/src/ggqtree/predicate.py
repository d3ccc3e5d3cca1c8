"""Conjunctive predicates over (element-or-path, subgraph) pairs.

Grammar::

    expr := term ("&" term)*
    term := "T" | "in(S)" | "notin(S)" | key "=" value
    key, value := bare token | "double-quoted string"

Bare values that look like integers, decimals or ``true``/``false`` are read
as such; everything else is text. Whitespace is ignored between tokens.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterator, Union

from .graph import Scalar

if TYPE_CHECKING:
    from .graph import GraphPath, PropertyGraph, SubgraphRef


class PredicateSyntaxError(ValueError):
    def __init__(self, text: str, offset: int, expected: set[str]):
        self.text = text
        self.offset = offset
        self.expected = frozenset(expected)
        super().__init__(
            f"syntax error at offset {offset} in {text!r}: expected one of "
            + ", ".join(sorted(self.expected))
        )


@dataclass(frozen=True)
class Tautology:
    pass


@dataclass(frozen=True)
class InSubgraph:
    pass


@dataclass(frozen=True)
class NotInSubgraph:
    pass


@dataclass(frozen=True, eq=False)
class PropEq:
    key: str
    value: Scalar

    def __post_init__(self):
        if self.value is None:
            raise ValueError("equality atoms cannot compare against null")

    # type-aware: k=1, k=1.0 and k=true are three different atoms
    def __eq__(self, other):
        if not isinstance(other, PropEq):
            return NotImplemented
        return (self.key, type(self.value), self.value) == (other.key, type(other.value), other.value)

    def __hash__(self):
        return hash((self.key, type(self.value).__name__, self.value))

    def holds(self, actual: Scalar) -> bool:
        if actual is None:
            return False
        if isinstance(actual, bool) or isinstance(self.value, bool):
            return type(actual) is type(self.value) and actual == self.value
        if isinstance(actual, str) or isinstance(self.value, str):
            return type(actual) is type(self.value) and actual == self.value
        return actual == self.value


@dataclass(frozen=True)
class Conj:
    left: "Predicate"
    right: "Predicate"


Atomic = Union[InSubgraph, NotInSubgraph, PropEq]
Predicate = Union[Tautology, InSubgraph, NotInSubgraph, PropEq, Conj]

T = Tautology()
IN_S = InSubgraph()
NOTIN_S = NotInSubgraph()


def atoms(phi: Predicate) -> Iterator[Atomic]:
    """Atomic conjuncts in tree order (Tautology contributes nothing)."""
    if isinstance(phi, Conj):
        yield from atoms(phi.left)
        yield from atoms(phi.right)
    elif not isinstance(phi, Tautology):
        yield phi


def _atom_key(atom: Atomic) -> tuple:
    if isinstance(atom, InSubgraph):
        return (0, "", "", "")
    if isinstance(atom, NotInSubgraph):
        return (1, "", "", "")
    return (2, atom.key, type(atom.value).__name__, _render_value(atom.value))


def canonical_atoms(phi: Predicate) -> tuple[Atomic, ...]:
    return tuple(sorted(set(atoms(phi)), key=_atom_key))


def from_atoms(items) -> Predicate:
    """Left-nested conjunction of ``items`` in the given order."""
    items = list(items)
    if not items:
        return T
    expr = items[0]
    for item in items[1:]:
        expr = Conj(expr, item)
    return expr


def canonicalize(phi: Predicate) -> Predicate:
    return from_atoms(canonical_atoms(phi))


def conjoin(phi: Predicate, psi: Predicate) -> Predicate:
    return from_atoms(canonical_atoms(Conj(phi, psi)))


# -- evaluation ---------------------------------------------------------------

def eval_node_predicate(phi: Predicate, v: str, S: "SubgraphRef",
                        G: "PropertyGraph") -> bool:
    node = G.nodes[v]
    for atom in atoms(phi):
        if isinstance(atom, InSubgraph):
            ok = v in S.node_ids
        elif isinstance(atom, NotInSubgraph):
            ok = v not in S.node_ids
        else:
            ok = atom.holds(node.properties.get(atom.key))
        if not ok:
            return False
    return True


def eval_edge_predicate(phi: Predicate, rho: "GraphPath", S: "SubgraphRef",
                        G: "PropertyGraph") -> bool:
    """Every atom must hold on every edge of the path."""
    for atom in atoms(phi):
        for eid in rho.edges:
            if isinstance(atom, InSubgraph):
                ok = eid in S.edge_ids
            elif isinstance(atom, NotInSubgraph):
                ok = eid not in S.edge_ids
            else:
                ok = atom.holds(G.edges[eid].properties.get(atom.key))
            if not ok:
                return False
    return True


# -- text form ----------------------------------------------------------------

_BARE = re.compile(r"[A-Za-z0-9_.:+\-]+")
_BARE_BYTES = re.compile(rb"[A-Za-z0-9_.:+\-]+")
_INT = re.compile(r"-?\d+")
_FLOAT = re.compile(r"-?(\d+\.\d*|\.\d+|\d+)([eE][-+]?\d+)?")
_RESERVED = {"T", "in", "notin", "true", "false"}


def _bare_value(token: str) -> Scalar:
    if _INT.fullmatch(token):
        return int(token)
    if _FLOAT.fullmatch(token):
        return float(token)
    if token == "true":
        return True
    if token == "false":
        return False
    return token


def _render_text(text: str, reserved: set[str]) -> str:
    if _BARE.fullmatch(text) and text not in reserved and not _FLOAT.fullmatch(text):
        return text
    return json.dumps(text, ensure_ascii=False)


def _render_value(value: Scalar) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return repr(value)
    return _render_text(value, {"true", "false"})


def render_atom(atom: Atomic) -> str:
    if isinstance(atom, InSubgraph):
        return "in(S)"
    if isinstance(atom, NotInSubgraph):
        return "notin(S)"
    return f"{_render_text(atom.key, _RESERVED)}={_render_value(atom.value)}"


def render_predicate(phi: Predicate) -> str:
    parts = [render_atom(a) for a in canonical_atoms(phi)]
    return " & ".join(parts) if parts else "T"


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.data = text.encode("utf-8")
        self.pos = 0

    def error(self, expected: set[str]):
        raise PredicateSyntaxError(self.text, self.pos, expected)

    def skip_ws(self):
        while self.pos < len(self.data) and self.data[self.pos:self.pos + 1].isspace():
            self.pos += 1

    def peek(self, literal: str) -> bool:
        self.skip_ws()
        return self.data.startswith(literal.encode(), self.pos)

    def expect(self, literal: str):
        if not self.peek(literal):
            self.error({repr(literal)})
        self.pos += len(literal)

    def token(self, what: str) -> tuple[str, bool]:
        """Bare or quoted token; returns (text, was_quoted)."""
        self.skip_ws()
        if self.data[self.pos:self.pos + 1] == b'"':
            end = self.pos + 1
            while end < len(self.data):
                ch = self.data[end:end + 1]
                if ch == b"\\":
                    end += 2
                    continue
                if ch == b'"':
                    break
                end += 1
            else:
                self.error({'closing \'"\''})
            raw = self.data[self.pos:end + 1].decode("utf-8")
            try:
                value = json.loads(raw)
            except json.JSONDecodeError:
                self.error({"valid string escape"})
            self.pos = end + 1
            return value, True
        match = _BARE_BYTES.match(self.data, self.pos)
        if not match:
            self.error({what, "quoted string"})
        self.pos = match.end()
        return match.group(0).decode("ascii"), False

    def term(self) -> Predicate:
        self.skip_ws()
        start = self.pos
        if self.pos >= len(self.data):
            self.error({"'T'", "'in(S)'", "'notin(S)'", "key"})
        key, quoted = self.token("key")
        if not quoted:
            after = self.pos
            if key == "T" and not self.peek("="):
                return T
            self.pos = after
            if key in ("in", "notin") and self.peek("("):
                self.expect("(")
                self.expect("S")
                self.expect(")")
                return IN_S if key == "in" else NOTIN_S
            self.pos = after
        if not self.peek("="):
            if start == self.pos:
                self.error({"key"})
            self.error({"'='"})
        self.pos += 1
        self.skip_ws()
        if self.pos >= len(self.data):
            self.error({"value", "quoted string"})
        value, vquoted = self.token("value")
        return PropEq(key, value if vquoted else _bare_value(value))

    def parse(self) -> Predicate:
        expr = self.term()
        while self.peek("&"):
            self.pos += 1
            expr = Conj(expr, self.term())
        self.skip_ws()
        if self.pos != len(self.data):
            self.error({"'&'", "end of input"})
        return expr


def parse_predicate(text: str) -> Predicate:
    """Parse predicate text; the result keeps the written order of conjuncts."""
    return _Parser(text).parse()
