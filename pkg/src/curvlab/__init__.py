"""Discrete Ricci curvatures (entropic, Bakry-Emery, Ollivier) of finite reversible Markov chains."""
from .chain import (ChainInputError, ChainValidationError, MarkovChain, WeightedGraph,
                    from_weighted_graph, graph_distance, laplacian, spectral_gap,
                    to_weighted_graph, validate_chain)
from .means import ARITH, GEO, LOG, get_mean

__version__ = "0.1.0"

__all__ = [
    "ARITH", "GEO", "LOG", "ChainInputError", "ChainValidationError", "MarkovChain",
    "WeightedGraph", "from_weighted_graph", "get_mean", "graph_distance", "laplacian",
    "spectral_gap", "to_weighted_graph", "validate_chain",
]
