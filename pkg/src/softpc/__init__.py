"""softpc: probabilistic circuits learned by hard and soft recursive partitioning."""

from .circuit import (
    Circuit,
    InvalidCircuitError,
    LeafNode,
    ModelParseError,
    ProductNode,
    SumNode,
)
from .estimators import Gaussian, Multinomial, fit_gaussian, fit_multinomial
from .learner import Hyperparams, WeightedDataset, learn_spn, soft_learn
from .schema import Schema, Variable

__all__ = [
    "Circuit",
    "Gaussian",
    "Hyperparams",
    "InvalidCircuitError",
    "LeafNode",
    "ModelParseError",
    "Multinomial",
    "ProductNode",
    "Schema",
    "SumNode",
    "Variable",
    "WeightedDataset",
    "fit_gaussian",
    "fit_multinomial",
    "learn_spn",
    "soft_learn",
]

__version__ = "0.1.0"
