"""Command-line entry point: ``ggqtree <command> ...``.

Graph and label inputs come either from ``--graph``/``--labels`` files or
from a built-in ``--fixture``. Machine-readable results go to stdout,
diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from .datasets import FIXTURES, build_fixture
from .graph import GraphError, PropertyGraph, SubgraphRef, load_graph_file
from .induce import (
    DecisionTree,
    InductionParams,
    Refinements,
    TrainingSet,
    classify,
    describe_refinement,
    ensure_isolated_outside_node,
    induce,
    score_candidates,
    training_accuracy,
)
from .predicate import PredicateSyntaxError
from .query import Matcher, Query, initial_query, load_query, matches, query_to_dot

class UsageError(Exception):
    """Bad invocation; reported with exit status 2."""


@dataclass
class RunConfig:
    graph: PropertyGraph
    training: Optional[TrainingSet]
    params: InductionParams
    refinements: Refinements
    out: Optional[Path] = None
    dot: Optional[Path] = None


def _readable(path: Optional[str], what: str) -> Optional[Path]:
    if path is None:
        return None
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"{what} file not found: {p}")
    return p


def parse_subgraph(text: str) -> SubgraphRef:
    """``u1,u2`` or ``u1,u2|e7`` (nodes, then optionally edges after ``|``)."""
    nodes, _, edges = text.partition("|")
    split = lambda s: frozenset(x.strip() for x in s.split(",") if x.strip())
    return SubgraphRef(split(nodes), split(edges))


def build_config(args: argparse.Namespace, need_labels: bool) -> RunConfig:
    params = InductionParams(
        max_depth=getattr(args, "max_depth", None),
        min_samples=getattr(args, "min_samples", 1),
        max_len=args.max_path_len,
        min_support=getattr(args, "min_support", 1),
    )
    exclude = list(getattr(args, "exclude_key", None) or [])
    if args.fixture:
        if args.graph or getattr(args, "labels", None):
            raise UsageError("--fixture cannot be combined with --graph/--labels")
        bundle = build_fixture(args.fixture, args.seed)
        graph, training = bundle.graph, bundle.training
        if bundle.pool is not None and not exclude:
            refs = Refinements(bundle.pool)
        else:
            refs = Refinements.from_graph(graph, params.min_support,
                                          exclude_keys=exclude or [bundle.label_key])
    else:
        graph_path = _readable(args.graph, "graph")
        if graph_path is None:
            raise UsageError("one of --graph or --fixture is required")
        labels_path = _readable(getattr(args, "labels", None), "labels")
        if need_labels and labels_path is None:
            raise UsageError("--labels is required")
        graph = load_graph_file(graph_path)
        training = None
        if labels_path is not None:
            training = TrainingSet.from_document(json.loads(labels_path.read_text("utf-8")))
            training.validate(graph)
        refs = Refinements.from_graph(graph, params.min_support, exclude_keys=exclude)
    return RunConfig(graph, training, params, refs,
                     out=Path(args.out) if getattr(args, "out", None) else None,
                     dot=Path(args.dot) if getattr(args, "dot", None) else None)


def _emit(text: str, out: Optional[Path]) -> None:
    if out is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        out.write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")


def _load_query_arg(path: Optional[str]) -> Query:
    if path is None:
        return initial_query()
    return load_query(_readable(path, "query").read_text("utf-8"))


def _load_tree_arg(path: str) -> DecisionTree:
    return DecisionTree.loads(_readable(path, "tree").read_text("utf-8"))


# -- commands -----------------------------------------------------------------

def cmd_induce(args: argparse.Namespace) -> int:
    cfg = build_config(args, need_labels=True)
    matcher = Matcher(cfg.graph, cfg.params.max_len)
    tree = induce(cfg.graph, cfg.training, refs=cfg.refinements, params=cfg.params,
                  matcher=matcher)
    if cfg.out is not None:
        _emit(tree.dumps(), cfg.out)
    if cfg.dot is not None:
        _emit(tree.to_dot(), cfg.dot)
    summary = {
        "depth": tree.depth(),
        "leaves": len(tree.leaves()),
        "training_accuracy": training_accuracy(tree, cfg.training, cfg.graph, matcher),
    }
    print(json.dumps(summary, sort_keys=True))
    return 0


def cmd_classify(args: argparse.Namespace) -> int:
    tree = _load_tree_arg(args.tree)
    cfg = build_config(args, need_labels=False)
    if args.subgraph:
        targets = [parse_subgraph(s) for s in args.subgraph]
    elif cfg.training is not None:
        targets = [p.subgraph for p in cfg.training]
    else:
        raise UsageError("give --subgraph or a labels file to classify")
    matcher = Matcher(cfg.graph, tree.max_len)
    for S in targets:
        S.validate(cfg.graph)
        result = classify(tree, S, cfg.graph, matcher)
        line = f"{S.name}\t{result.label}"
        if args.paths:
            steps = [f"{describe_refinement(step)}->{step['child']}" for step in result.path]
            line += "\t" + " / ".join(steps) + (" (fell off)" if result.fell_off else "")
        print(line)
    return 0


def cmd_match(args: argparse.Namespace) -> int:
    cfg = build_config(args, need_labels=False)
    Q = _load_query_arg(args.query)
    matcher = Matcher(cfg.graph, cfg.params.max_len)
    for text in args.subgraph:
        S = parse_subgraph(text)
        S.validate(cfg.graph)
        verdict = matches(Q, S, cfg.graph, cfg.params.max_len, matcher)
        print(f"{S.name}\t{'true' if verdict else 'false'}")
    return 0


def cmd_refine(args: argparse.Namespace) -> int:
    cfg = build_config(args, need_labels=True)
    Q = _load_query_arg(args.query)
    matcher = Matcher(cfg.graph, cfg.params.max_len)
    compiled = matcher.compile(Q)
    pairs = TrainingSet(p for p in cfg.training if matcher.check(compiled, p.subgraph))
    if not pairs:
        print("no training pair matches the query", file=sys.stderr)
        return 1
    counts = pairs.counts()
    if len(counts) == 1:
        label = next(iter(counts))
        print(f"pure: all {len(pairs)} pairs are labelled {label!r}; nothing to refine")
        return 0
    if not args.no_isolated:
        augmented = ensure_isolated_outside_node(Q)
        compiled = matcher.compile(augmented)
        if all(matcher.check(compiled, p.subgraph) for p in pairs):
            Q = augmented
    scored = list(score_candidates(cfg.graph, Q, pairs, cfg.refinements, cfg.params, matcher))
    # stable sort keeps candidate order among equal gains
    scored.sort(key=lambda sc: -round(sc.gain, 12))
    if args.limit is not None:
        scored = scored[:args.limit]
    for sc in scored:
        desc = describe_refinement(sc.refinement.descriptor)
        parts = " ".join(
            "{" + ",".join(f"{k}:{v}" for k, v in sorted(c.items())) + "}" for c in sc.counts)
        print(f"{sc.gain:.4f}\t{desc}\t{parts}")
    return 0


def cmd_dot(args: argparse.Namespace) -> int:
    if bool(args.tree) == bool(args.query):
        raise UsageError("give exactly one of --tree or --query")
    if args.tree:
        text = _load_tree_arg(args.tree).to_dot()
    else:
        text = query_to_dot(_load_query_arg(args.query))
    _emit(text, Path(args.out) if args.out else None)
    return 0


def cmd_fixture(args: argparse.Namespace) -> int:
    bundle = build_fixture(args.name, args.seed)
    if args.out_dir:
        graph_path, labels_path = bundle.write(args.out_dir)
        print(json.dumps({"graph": str(graph_path), "labels": str(labels_path)}))
    else:
        print(json.dumps({"graph": bundle.graph.to_document(),
                          "labels": bundle.training.to_document()}, indent=2, sort_keys=True))
    return 0


# -- parser -------------------------------------------------------------------

def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _nonnegative(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return value


def _add_inputs(p: argparse.ArgumentParser, labels: bool = True) -> None:
    p.add_argument("--graph", help="graph document (JSON)")
    if labels:
        p.add_argument("--labels", help="training pairs document (JSON)")
    p.add_argument("--fixture", choices=FIXTURES, help="use a built-in fixture instead of files")
    p.add_argument("--seed", type=int, default=0, help="seed for randomized fixtures")
    p.add_argument("--max-path-len", type=_positive, default=1,
                   help="longest path a query edge may match (default 1)")


def _add_search(p: argparse.ArgumentParser) -> None:
    p.add_argument("--min-support", type=_nonnegative, default=1,
                   help="drop predicate atoms seen on fewer elements")
    p.add_argument("--exclude-key", action="append", metavar="KEY",
                   help="property key never used in predicates (repeatable)")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ggqtree",
                                     description="Decision trees over property graphs.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("induce", help="learn a tree from labelled subgraphs")
    _add_inputs(p)
    _add_search(p)
    p.add_argument("--max-depth", type=_nonnegative, default=None)
    p.add_argument("--min-samples", type=_positive, default=1)
    p.add_argument("--out", help="write the tree document here")
    p.add_argument("--dot", help="write a DOT rendering of the tree here")
    p.set_defaults(func=cmd_induce)

    p = sub.add_parser("classify", help="label subgraphs with a learned tree")
    p.add_argument("--tree", required=True)
    _add_inputs(p)
    p.add_argument("--subgraph", action="append", metavar="NODES[|EDGES]")
    p.add_argument("--paths", action="store_true", help="append the decision path")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("match", help="test subgraphs against a query")
    p.add_argument("--query", help="query document (default: the initial query)")
    _add_inputs(p, labels=False)
    p.add_argument("--subgraph", action="append", required=True, metavar="NODES[|EDGES]")
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("refine", help="score candidate refinements of a query")
    p.add_argument("--query", help="query document (default: the initial query)")
    _add_inputs(p)
    _add_search(p)
    p.add_argument("--limit", type=_positive)
    p.add_argument("--no-isolated", action="store_true",
                   help="do not add the isolated outside node before refining")
    p.set_defaults(func=cmd_refine)

    p = sub.add_parser("dot", aliases=["export-dot"], help="render a tree or query as DOT")
    p.add_argument("--tree")
    p.add_argument("--query")
    p.add_argument("--out")
    p.set_defaults(func=cmd_dot)

    p = sub.add_parser("fixture", help="emit a built-in fixture")
    p.add_argument("name", choices=FIXTURES)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", help="write <name>.graph.json and <name>.labels.json here")
    p.set_defaults(func=cmd_fixture)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"ggqtree: {exc}", file=sys.stderr)
        return 2
    except (GraphError, PredicateSyntaxError, ValueError, KeyError, OSError) as exc:
        print(f"ggqtree: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
