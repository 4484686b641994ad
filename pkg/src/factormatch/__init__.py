"""Perfect matchings of regular bipartite graphs by randomized chain
flipping, with spectral independence and expansion bounds checked against
brute-force oracles."""

__version__ = "0.1.0"

from .graph import (  # noqa: E402
    Bipartition,
    Graph,
    GroupTable,
    bipartition_of,
    cayley_graph,
    edge_boundary,
    girth,
    load_graph,
    named_graph,
    neighbor_set,
    random_regular_bipartite,
)
from .matching import Chain, Matching, RandomTape, RunStats, run  # noqa: E402
from .spectral import Spectrum, best_independence_bound, transition_spectrum  # noqa: E402

__all__ = [
    "Bipartition", "Chain", "Graph", "GroupTable", "Matching", "RandomTape", "RunStats",
    "Spectrum", "best_independence_bound", "bipartition_of", "cayley_graph", "edge_boundary",
    "girth", "load_graph", "named_graph", "neighbor_set", "random_regular_bipartite", "run",
    "transition_spectrum",
]
