"""
Exact inference and sampling on a hand-built probabilistic circuit
==================================================================

Builds the small two-component mixture circuit by hand, then walks through
the tractable queries it supports: full-evidence log densities, marginals
with variables integrated out, interval probabilities, ancestral sampling,
and round-trip serialization.

Run:  python3 demos/inference_and_sampling.py
"""

import numpy as np

from softpc import Circuit, Gaussian, LeafNode, ProductNode, Schema, SumNode

# a sum over two products of Gaussian leaves; children precede parents
nodes = [
    LeafNode(0, Gaussian(-0.5, 1.0)),   # X | component 1
    LeafNode(1, Gaussian(-2.0, 0.2)),   # Y | component 1
    LeafNode(0, Gaussian(0.5, 1.0)),    # X | component 2
    LeafNode(1, Gaussian(2.0, 0.2)),    # Y | component 2
    ProductNode((0, 1)),
    ProductNode((2, 3)),
    SumNode((4, 5), (0.5, 0.5)),
]
circuit = Circuit(nodes, root=6, schema=Schema.continuous(2))
print("structural violations:", circuit.validate() or "none")

# full-evidence density
print("log p(x=-0.5, y=-2)  =", circuit.log_density([-0.5, -2.0]))

# marginals: None integrates a variable out, a pair is a closed interval
print("log p(y <= 0)        =", circuit.log_marginal([None, (-np.inf, 0.0)]))
print("log p(-1 <= x <= 1)  =", circuit.log_marginal([(-1.0, 1.0), None]))
print("log p()              =", circuit.log_marginal([None, None]))  # = log 1

# conditionals are ratios of marginals
log_joint = circuit.log_marginal([(0.0, np.inf), (0.0, np.inf)])
log_cond = log_joint - circuit.log_marginal([None, (0.0, np.inf)])
print("p(x > 0 | y > 0)     =", np.exp(log_cond))

# ancestral sampling: sums pick a child by weight, products follow all
rng = np.random.default_rng(0)
rows = circuit.sample(rng, 5000)
print("sampled y > 0 rate   =", (rows[:, 1] > 0).mean())

# serialization round-trips at full precision
text = circuit.to_json()
assert Circuit.from_json(text) == circuit
print("serialized size      =", len(text), "bytes")
