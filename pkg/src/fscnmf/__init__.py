"""Attributed network embedding by mutually regularized non-negative matrix factorization."""

from .estimator import FSCNMF
from .factor import CostTrace, Embedding, FactorState, Hyperparams, combine, run_fscnmf
from .graph import AttributedGraph, load_edge_list, load_labels, proximity_matrix
from .synth import SynthConfig

__version__ = "0.1.0"

__all__ = [
    "FSCNMF",
    "AttributedGraph",
    "CostTrace",
    "Embedding",
    "FactorState",
    "Hyperparams",
    "SynthConfig",
    "combine",
    "load_edge_list",
    "load_labels",
    "proximity_matrix",
    "run_fscnmf",
]
