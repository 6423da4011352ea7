"""Recursive structure learners: hard (LearnSPN-style) and soft partitioning.

Both learners recurse on a weighted view of the data.  When the active
scope splits into approximately independent variable groups, a product
node is created; otherwise instances are clustered and a sum node is
created.  The hard learner assigns each row to exactly one child; the
soft learner passes every row to every child, reweighted by its cluster
responsibility (rows whose weight falls below ``epsilon_w`` are dropped).

Also provided are the "alternative circuit" constructions used to reason
about the greedy likelihood behaviour of the recursion: the circuit
obtained by capping every open subproblem with a fully factorized
distribution.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import clustering, estimators, independence
from .circuit import Circuit, LeafNode, ProductNode, SumNode
from .schema import Schema


@dataclass(frozen=True)
class Hyperparams:
    p_threshold: float = 0.01
    alpha: float = 0.01
    beta: float = 4.0
    n_clusters: int = 2
    min_instances: float = 50.0
    max_cluster_iters: int = 100
    bins: int = 4
    sigma_floor: float = estimators.SIGMA_FLOOR
    epsilon_w: float = estimators.EPSILON_W
    clusterer: str = "em"  # "em" | "kmeans"
    seed: int = 0
    em_tol: float = 1e-4
    track_alternative_ll: bool = False

    def __post_init__(self):
        if not 0.0 < self.p_threshold < 1.0:
            raise ValueError("p_threshold must be in (0, 1)")
        if self.alpha < 0:
            raise ValueError("alpha must be nonnegative")
        if self.min_instances < 2:
            raise ValueError("min_instances must be >= 2")
        if self.clusterer not in ("em", "kmeans"):
            raise ValueError(f"unknown clusterer {self.clusterer!r}")


@dataclass
class WeightedDataset:
    """Dense data matrix with per-row positive weights and an active scope."""

    matrix: np.ndarray
    row_weights: np.ndarray
    schema: Schema
    scope: tuple = None

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=float)
        if self.matrix.ndim != 2 or self.matrix.shape[0] == 0:
            raise ValueError("matrix must be a nonempty 2-d array")
        if self.matrix.shape[1] != len(self.schema):
            raise ValueError("matrix width does not match schema")
        if self.row_weights is None:
            self.row_weights = np.ones(self.matrix.shape[0])
        self.row_weights = np.asarray(self.row_weights, dtype=float)
        if self.row_weights.shape != (self.matrix.shape[0],):
            raise ValueError("row_weights length mismatch")
        if np.any(self.row_weights <= 0):
            raise ValueError("row weights must be positive")
        if self.scope is None:
            self.scope = tuple(range(len(self.schema)))
        else:
            self.scope = tuple(sorted(self.scope))
            if not self.scope or any(not 0 <= v < len(self.schema) for v in self.scope):
                raise ValueError("scope must be a nonempty subset of schema indices")


@dataclass
class StepRecord:
    step_kind: str  # "leaf" | "product" | "sum" | "factorize"
    scope: tuple
    effective_mass: float
    alternative_pc_train_ll: float | None = None


@dataclass
class LearnTrace:
    steps: list = field(default_factory=list)


class _Slot:
    """A position in the circuit under construction.

    A slot is either pending (holds the subproblem it will be learned
    from) or resolved into a leaf / product / sum over child slots.
    """

    __slots__ = ("kind", "children", "weights", "var", "dist", "rows", "row_weights", "scope")

    def __init__(self, rows, row_weights, scope):
        self.kind = "pending"
        self.rows = rows
        self.row_weights = row_weights
        self.scope = scope
        self.children = None
        self.weights = None
        self.var = None
        self.dist = None

    def resolve_leaf(self, var, dist):
        self.kind = "leaf"
        self.var, self.dist = var, dist
        self.rows = self.row_weights = None

    def resolve_internal(self, kind, children, weights=None):
        self.kind = kind
        self.children = children
        self.weights = weights
        self.rows = self.row_weights = None


def _fit_leaf_dist(values, weights, var, schema, hp):
    if schema.is_cat(var):
        return estimators.fit_multinomial(values, weights, schema[var].arity, hp.alpha)
    return estimators.fit_gaussian(values, weights, hp.sigma_floor)


def _emit_slot(slot, schema, hp, nodes, cap_pending, full_matrix):
    """Post-order emission of a slot tree into a node table; returns node id."""
    if slot.kind == "leaf":
        nodes.append(LeafNode(slot.var, slot.dist))
        return len(nodes) - 1
    if slot.kind == "pending":
        if not cap_pending:
            raise RuntimeError("unresolved slot in finished structure")
        # cap with a fully factorized fit on the slot's subproblem
        sub = full_matrix[slot.rows]
        child_ids = []
        for v in slot.scope:
            dist = _fit_leaf_dist(sub[:, v], slot.row_weights, v, schema, hp)
            nodes.append(LeafNode(v, dist))
            child_ids.append(len(nodes) - 1)
        if len(child_ids) == 1:
            return child_ids[0]
        nodes.append(ProductNode(tuple(child_ids)))
        return len(nodes) - 1
    child_ids = tuple(
        _emit_slot(c, schema, hp, nodes, cap_pending, full_matrix) for c in slot.children
    )
    if slot.kind == "prod":
        nodes.append(ProductNode(child_ids))
    else:
        nodes.append(SumNode(child_ids, tuple(slot.weights)))
    return len(nodes) - 1


def _assemble(root_slot, schema, hp, cap_pending=False, full_matrix=None):
    nodes = []
    root = _emit_slot(root_slot, schema, hp, nodes, cap_pending, full_matrix)
    return Circuit(nodes, root, schema)


def _cluster(matrix, weights, scope, schema, hp, rng):
    if hp.clusterer == "kmeans":
        return clustering.soft_kmeans(
            matrix, weights, scope, schema, hp.n_clusters, hp.beta,
            max_iter=hp.max_cluster_iters, rng=rng,
        )
    resp, _ = clustering.em_factorized(
        matrix, weights, scope, schema, hp.n_clusters,
        max_iter=hp.max_cluster_iters, tol=hp.em_tol,
        alpha=hp.alpha, sigma_floor=hp.sigma_floor, rng=rng,
    )
    return resp


def _learn(data: WeightedDataset, hp: Hyperparams, soft: bool, first_split=None):
    full = data.matrix
    schema = data.schema
    rng = np.random.default_rng(np.random.SeedSequence(hp.seed))
    trace = LearnTrace()

    root_slot = _Slot(np.arange(full.shape[0]), data.row_weights.copy(), data.scope)
    stack = [root_slot]
    first_split_pending = first_split is not None

    def record(kind, slot):
        rec = StepRecord(kind, tuple(slot.scope), float(slot.row_weights.sum())
                         if slot.row_weights is not None else 0.0)
        if hp.track_alternative_ll:
            alt = _assemble(root_slot, schema, hp, cap_pending=True, full_matrix=full)
            rec.alternative_pc_train_ll = float(np.mean(alt.log_density(full)))
        trace.steps.append(rec)

    while stack:
        slot = stack.pop()
        rows, weights, scope = slot.rows, slot.row_weights, slot.scope
        sub = full[rows]
        mass = weights.sum()

        if len(scope) == 1:
            v = scope[0]
            dist = _fit_leaf_dist(sub[:, v], weights, v, schema, hp)
            slot.resolve_leaf(v, dist)
            record("leaf", _SlotView(scope, weights))
            continue

        def factorize():
            children = []
            for v in scope:
                dist = _fit_leaf_dist(sub[:, v], weights, v, schema, hp)
                child = _Slot(None, None, (v,))
                child.resolve_leaf(v, dist)
                children.append(child)
            slot.resolve_internal("prod", children)
            record("factorize", _SlotView(scope, weights))

        if mass < hp.min_instances:
            factorize()
            continue

        groups = independence.partition_scope(
            sub, weights, scope, schema, hp.p_threshold, hp.bins
        )
        if len(groups) > 1:
            children = []
            for group in groups:  # groups arrive ordered by smallest variable
                children.append(_Slot(rows, weights, tuple(group)))
            slot.resolve_internal("prod", children)
            record("product", _SlotView(scope, weights))
            # depth-first, first group processed first
            stack.extend(reversed(children))
            continue

        if first_split_pending:
            resp = np.asarray(first_split, dtype=float)
            first_split_pending = False
        else:
            resp = _cluster(sub, weights, scope, schema, hp, rng)

        if not soft:
            resp = clustering.harden(resp)

        if resp.shape[1] < 2:
            factorize()
            continue

        # mass per child before any epsilon-dropping (Σ_i V_i(d) = parent weight)
        child_weights_full = resp * weights[:, None]
        s = child_weights_full.sum(axis=0)

        children, kept_s = [], []
        for i in range(resp.shape[1]):
            wi = child_weights_full[:, i]
            keep = wi >= hp.epsilon_w if hp.epsilon_w > 0 else wi > 0
            if not np.any(keep) or s[i] <= 0:
                continue
            children.append(_Slot(rows[keep], wi[keep], scope))
            kept_s.append(s[i])
        if len(children) < 2:
            factorize()
            continue
        if max(kept_s) >= mass * (1.0 - 1e-9):
            # one child absorbed the whole parent mass; recursing would not
            # shrink the subproblem, so stop here
            factorize()
            continue

        sum_w = np.asarray(kept_s) / s.sum()
        sum_w = sum_w / sum_w.sum()
        slot.resolve_internal("sum", children, tuple(sum_w.tolist()))
        record("sum", _SlotView(scope, weights))
        stack.extend(reversed(children))

    circuit = _assemble(root_slot, schema, hp)
    return circuit, trace


class _SlotView:
    """Minimal view used for trace records after a slot was resolved."""

    def __init__(self, scope, weights):
        self.scope = scope
        self.row_weights = weights


def learn_spn(data: WeightedDataset, hp: Hyperparams, first_split=None):
    """Hard recursive structure learning: cluster memberships are hardened
    and each row lands in exactly one child of every sum node."""
    return _learn(data, hp, soft=False, first_split=first_split)


def soft_learn(data: WeightedDataset, hp: Hyperparams, first_split=None):
    """Soft recursive structure learning: every row reaches every child of a
    sum node with weight responsibility * parent weight; sum-node weights
    are the child mass fractions."""
    return _learn(data, hp, soft=True, first_split=first_split)


# ----------------------------------------------------------------------
# alternative-circuit constructions (early-stop caps)


def factorized_circuit(data: WeightedDataset, hp: Hyperparams) -> Circuit:
    """Fully factorized circuit over the data's scope (the iteration-0 cap)."""
    slot = _Slot(np.arange(data.matrix.shape[0]), data.row_weights, data.scope)
    return _assemble(slot, data.schema, hp, cap_pending=True, full_matrix=data.matrix)


def split_circuit(data: WeightedDataset, membership, hp: Hyperparams) -> Circuit:
    """Alternative circuit after a single root split: a sum node whose
    children are factorized fits under the membership-reweighted data.

    ``membership`` is an (n, K) matrix of nonnegative rows summing to 1;
    one-hot rows reproduce a hard split.
    """
    membership = np.asarray(membership, dtype=float)
    weights = data.row_weights
    child_w = membership * weights[:, None]
    s = child_w.sum(axis=0)
    nodes = []
    child_ids, kept = [], []
    for i in range(membership.shape[1]):
        wi = child_w[:, i]
        keep = wi >= hp.epsilon_w if hp.epsilon_w > 0 else wi > 0
        if not np.any(keep) or s[i] <= 0:
            continue
        slot = _Slot(np.flatnonzero(keep), wi[keep], data.scope)
        child_ids.append(_emit_slot(slot, data.schema, hp, nodes, True, data.matrix))
        kept.append(s[i])
    if len(child_ids) == 1:
        return Circuit(nodes, child_ids[0], data.schema)
    w = np.asarray(kept) / sum(kept)
    nodes.append(SumNode(tuple(child_ids), tuple(w.tolist())))
    return Circuit(nodes, len(nodes) - 1, data.schema)


def alternative_ll(circuit: Circuit, matrix) -> float:
    """Mean per-row train log-likelihood of an alternative circuit."""
    return float(np.mean(circuit.log_density(np.asarray(matrix, dtype=float))))


def singleton_split_membership(matrix, row) -> np.ndarray:
    """Hard membership putting all exact copies of ``matrix[row]`` in one
    cluster and every other row in the other."""
    matrix = np.asarray(matrix)
    same = np.all(matrix == matrix[row], axis=1)
    m = np.zeros((matrix.shape[0], 2))
    m[same, 0] = 1.0
    m[~same, 1] = 1.0
    if m[:, 1].sum() == 0:
        return m[:, :1]
    return m
