"""Decision trees over property graphs, split by generalized graph queries."""

from .graph import (
    INCOMING,
    OUTGOING,
    Atom,
    AtomPool,
    EdgeRecord,
    GraphError,
    GraphParseError,
    GraphPath,
    GraphStructureError,
    NodeRecord,
    PropertyGraph,
    SubgraphRef,
    enumerate_predicate_atoms,
    graph_from_document,
    load_graph,
    load_graph_file,
)
from .predicate import (
    IN_S,
    NOTIN_S,
    Conj,
    InSubgraph,
    NotInSubgraph,
    PredicateSyntaxError,
    PropEq,
    T,
    Tautology,
    canonicalize,
    conjoin,
    eval_edge_predicate,
    eval_node_predicate,
    parse_predicate,
    render_predicate,
)
from .query import (
    NEG,
    POS,
    Matcher,
    QEdge,
    QNode,
    Query,
    canonical_form,
    dump_query,
    initial_query,
    load_query,
    matches,
    matches_bruteforce,
    query_from_document,
    query_to_document,
    query_to_dot,
)
from .refine import (
    FAMILIES,
    RefinementError,
    RefinementSet,
    check_refinement_set,
    clone_nodes,
    enumerate_refinements,
    iter_refinements,
    refine_add_edge,
    refine_add_edge_predicate,
    refine_add_node,
    refine_add_node_predicate,
)
from .induce import (
    Classification,
    DecisionTree,
    InductionParams,
    Refinements,
    TrainingPair,
    TrainingSet,
    classify,
    entropy,
    induce,
    information_gain,
    majority_label,
    optimal_refinement,
    training_accuracy,
)
from .datasets import FIXTURES, FixtureBundle, FixtureSpec, build_fixture

__version__ = "0.1.0"
