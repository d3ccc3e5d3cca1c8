"""
Learning gender from a tiny social graph
========================================

Three users and two photos. Users publish photos, like photos and are
married to each other. Each node is a training example labelled with its
gender; photos carry the label "None".
"""

from ggqtree import build_fixture, classify, induce, training_accuracy
from ggqtree.induce import describe_refinement

social = build_fixture("social")
G = social.graph
for e in G.edges.values():
    print(e.source, e.type, e.target)

# the worked example allows only type=user/photo on nodes and
# type=publish/likes/husband on edges
tree = induce(G, social.training, refs=social.refinements())
print("depth", tree.depth(), "leaves", len(tree.leaves()))

for node in tree.inner_nodes():
    print(f"{node.gain:.4f}", describe_refinement(node.refinement), dict(node.counts))

###############################################################################
# Classify each node and show why

for pair in social.training:
    result = classify(tree, pair.subgraph, G)
    steps = " -> ".join(describe_refinement(s) for s in result.path)
    print(pair.subgraph.name, result.label, "|", steps)

print("training accuracy", training_accuracy(tree, social.training, G))

###############################################################################
# Graphviz source for the whole tree; pipe it to ``dot -Tsvg``

print(tree.to_dot()[:400], "...")
