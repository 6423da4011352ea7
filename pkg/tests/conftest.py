import numpy as np
import pytest

from softpc.circuit import Circuit, LeafNode, ProductNode, SumNode
from softpc.estimators import Gaussian, Multinomial
from softpc.schema import Schema


def fig1_circuit() -> Circuit:
    """Balanced two-component mixture of independent bivariate Gaussians."""
    nodes = [
        LeafNode(0, Gaussian(-0.5, 1.0)),
        LeafNode(1, Gaussian(-2.0, 0.2)),
        LeafNode(0, Gaussian(0.5, 1.0)),
        LeafNode(1, Gaussian(2.0, 0.2)),
        ProductNode((0, 1)),
        ProductNode((2, 3)),
        SumNode((4, 5), (0.5, 0.5)),
    ]
    return Circuit(nodes, 6, Schema.continuous(2))


def random_binary_circuit(n_vars: int, rng, max_depth: int = 4) -> Circuit:
    """A random valid circuit over n_vars binary variables."""
    nodes = []

    def rand_mult():
        p = rng.uniform(0.05, 0.95)
        return Multinomial((p, 1.0 - p))

    def build(scope, depth):
        if len(scope) == 1:
            nodes.append(LeafNode(int(scope[0]), rand_mult()))
            return len(nodes) - 1
        choice = rng.random()
        if depth >= max_depth or (choice < 0.4 and len(scope) >= 2):
            # product over a random 2-way scope split
            k = rng.integers(1, len(scope))
            perm = rng.permutation(scope)
            left, right = sorted(perm[:k]), sorted(perm[k:])
            cl = build(list(left), depth + 1) if depth < max_depth else _factorize(left)
            cr = build(list(right), depth + 1) if depth < max_depth else _factorize(right)
            nodes.append(ProductNode((cl, cr)))
        else:
            k = int(rng.integers(2, 4))
            children = tuple(build(scope, depth + 1) for _ in range(k))
            w = rng.dirichlet(np.ones(k))
            w = w / w.sum()
            nodes.append(SumNode(children, tuple(w.tolist())))
        return len(nodes) - 1

    def _factorize(scope):
        ids = []
        for v in scope:
            nodes.append(LeafNode(int(v), rand_mult()))
            ids.append(len(nodes) - 1)
        if len(ids) == 1:
            return ids[0]
        nodes.append(ProductNode(tuple(ids)))
        return len(nodes) - 1

    root = build(list(range(n_vars)), 0)
    return Circuit(nodes, root, Schema.binary(n_vars))


def all_binary_rows(n_vars: int) -> np.ndarray:
    rows = np.indices((2,) * n_vars).reshape(n_vars, -1).T
    return rows.astype(float)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
