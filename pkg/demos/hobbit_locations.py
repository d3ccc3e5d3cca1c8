"""
Location kinds in a synthetic Middle-earth graph
================================================

105 nodes of seven types and 209 edges of 65 types. Each Location is
labelled Hills, Forest, Valley, Mountain, Caves or Lake; the kind leaks
through the types of edges that point at it, among plenty of noise.
"""

import time
from collections import Counter

from ggqtree import InductionParams, build_fixture, induce, training_accuracy

bundle = build_fixture("hobbit_like", seed=0)
G = bundle.graph
print(Counter(n.properties["type"] for n in G.nodes.values()))
print(len({e.type for e in G.edges.values()}), "edge types")

start = time.perf_counter()
tree = induce(G, bundle.training, refs=bundle.refinements(),
              params=InductionParams(max_depth=5))
print(f"induced in {time.perf_counter() - start:.2f} s")

acc = training_accuracy(tree, bundle.training, G)
baseline = max(bundle.training.counts().values()) / len(bundle.training)
print(f"accuracy {acc:.3f}, majority baseline {baseline:.3f}")

for leaf in tree.leaves():
    print(leaf.label, leaf.members)
