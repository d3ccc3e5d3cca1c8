"""
Refinements partition the matching subgraphs
============================================

A query is refined by cloning part of it and attaching new structure to
the clones. Every subgraph that matches the parent matches exactly one of
the children, so the children can serve as the branches of a tree node.
"""

from ggqtree import (
    SubgraphRef,
    build_fixture,
    check_refinement_set,
    dump_query,
    initial_query,
    matches,
    refine_add_edge,
)

G = build_fixture("social").graph
Q0 = initial_query()
print(dump_query(Q0))

# one node inside S, one outside; join them with a new edge
rs = refine_add_edge(Q0, "n0", "n1", "+")
for i, child in enumerate(rs.children):
    hits = [v for v in sorted(G.nodes) if matches(child, SubgraphRef.of_nodes(v), G)]
    signs = "".join(n.sign for n in child.qnodes)
    print(i, signs, hits)

###############################################################################
# The checker tests both properties over any sample of subgraphs

samples = [SubgraphRef.of_nodes(v) for v in G.nodes]
samples += [SubgraphRef.of_nodes(a, b) for a in G.nodes for b in G.nodes if a < b]
report = check_refinement_set(rs, G, samples)
print(report.checked, "samples,", report.parent_matches, "match the parent,",
      len(report.violations), "violations")
