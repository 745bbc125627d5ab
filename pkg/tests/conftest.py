import numpy as np
import pytest

from canon_gnn.canonize import canonical_form
from canon_gnn.graphs import ColoredGraph
from canon_gnn.wltest import csl_benchmark


def random_colored_graph(rng, n=None, p=0.4, num_colors=3, labels=False):
    if n is None:
        n = int(rng.integers(4, 13))
    upper = rng.random((n, n)) < p
    adj = np.triu(upper, k=1)
    adj = adj | adj.T
    colors = rng.integers(0, num_colors, size=n)
    labs = tuple(f"node{i:03d}" for i in range(n)) if labels else None
    return ColoredGraph(n=n, adjacency=adj, colors=colors, labels=labs)


@pytest.fixture(scope="session")
def csl():
    return csl_benchmark(seed=7)


@pytest.fixture(scope="session")
def csl_colourings(csl):
    # One canonization per graph, shared by the expressivity and training
    # suites; recomputing inside every pairwise test would dominate runtime.
    return [canonical_form(g).colouring for g in csl.graphs]
