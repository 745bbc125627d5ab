"""Expressivity harness: 1-WL tests with optional positional encodings,
plus generators for circulant skip-link benchmarks and 1-WL-hard pairs.

The test refines both graphs jointly (as a disjoint union, so colors stay
comparable across the two) and compares per-graph color histograms. Plain
1-WL starts from node colors alone and fails on regular graphs; seeding
the refinement with canonical ranks makes the verdict coincide with
certificate inequality, and universe ranks do the same for labeled
datasets.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from canon_gnn.canonize import _refine_pass, canonical_form
from canon_gnn.datasets import GraphDataset
from canon_gnn.errors import DimensionError, ParameterError
from canon_gnn.graphs import (
    ColoredGraph,
    DiscreteColouring,
    Permutation,
    apply_permutation,
    graph_from_edges,
)
from canon_gnn.ugc import LabelUniverse, ugc_colouring

DEFAULT_CSL_N = 41
DEFAULT_CSL_SKIPS = (2, 3, 4, 5, 6, 9, 11, 12, 13, 16)


@dataclass(frozen=True, eq=False)
class WlVerdict:
    distinguishable: bool
    rounds: int
    final_histograms: tuple[tuple, tuple]


def _initial_union_colors(g1, g2, pe, universe, colourings):
    """Joint initial colors: (node color, PE rank) ranked lexicographically."""
    if pe == "none":
        keys1 = [(int(c),) for c in g1.colors]
        keys2 = [(int(c),) for c in g2.colors]
    elif pe in ("gc", "ugc"):
        if colourings is not None:
            d1, d2 = colourings
        elif pe == "gc":
            d1 = canonical_form(g1).colouring
            d2 = canonical_form(g2).colouring
        else:
            if universe is None:
                raise ParameterError("pe='ugc' needs a label universe")
            d1 = ugc_colouring(g1, universe)
            d2 = ugc_colouring(g2, universe)
        keys1 = [(int(c), int(r)) for c, r in zip(g1.colors, d1.order)]
        keys2 = [(int(c), int(r)) for c, r in zip(g2.colors, d2.order)]
    else:
        raise ParameterError(f"unknown pe mode {pe!r}")
    index = {k: i for i, k in enumerate(sorted(set(keys1 + keys2)))}
    return np.array([index[k] for k in keys1 + keys2], dtype=np.int64)


def wl_test(
    g1: ColoredGraph,
    g2: ColoredGraph,
    pe: str = "none",
    universe: LabelUniverse | None = None,
    colourings: tuple[DiscreteColouring, DiscreteColouring] | None = None,
) -> WlVerdict:
    """Joint collision-free refinement; distinguishable iff histograms differ.

    ``colourings`` lets callers reuse precomputed canonical or universe
    ranks when testing many pairs; when omitted they are computed here.
    """
    if g1.n != g2.n:
        raise DimensionError(f"wl_test needs equal sizes, got {g1.n} and {g2.n}")
    n = g1.n
    union_neighbors = tuple(g1.neighbor_lists) + tuple(
        nb + n for nb in g2.neighbor_lists
    )
    colors = _initial_union_colors(g1, g2, pe, universe, colourings)

    def histograms(nc):
        h1 = tuple(sorted(Counter(nc[:n].tolist()).items()))
        h2 = tuple(sorted(Counter(nc[n:].tolist()).items()))
        return h1, h2

    rounds = 0
    h1, h2 = histograms(colors)
    while h1 == h2:
        colors, changed = _refine_pass(union_neighbors, colors)
        if not changed:
            break
        rounds += 1
        h1, h2 = histograms(colors)
    return WlVerdict(
        distinguishable=h1 != h2, rounds=rounds, final_histograms=(h1, h2)
    )


def gen_csl(n: int, skip: int) -> ColoredGraph:
    """Circulant skip-link graph: edges i~i+1 and i~i+skip (mod n).

    4-regular for 2 <= skip < n/2 (the strict upper bound keeps the two
    link families disjoint); connected since the step-1 ring is present,
    regardless of gcd(n, skip). Colors are uniform zero.
    """
    if n < 5:
        raise ParameterError(f"n must be >= 5, got {n}")
    if not (2 <= skip and 2 * skip < n):
        raise ParameterError(f"skip must satisfy 2 <= skip < n/2, got skip={skip} n={n}")
    edges = []
    for i in range(n):
        edges.append((i, (i + 1) % n))
        edges.append((i, (i + skip) % n))
    return graph_from_edges(n, edges, graph_id=f"csl_n{n}_s{skip}")


def gen_wl_hard_pair(m: int) -> tuple[ColoredGraph, ColoredGraph]:
    """(C_2m, C_m + C_m): same size, both 2-regular, 1-WL-equivalent, non-isomorphic."""
    if m < 3:
        raise ParameterError(f"m must be >= 3, got {m}")
    big = graph_from_edges(
        2 * m,
        [(i, (i + 1) % (2 * m)) for i in range(2 * m)],
        graph_id=f"cycle_{2 * m}",
    )
    edges = [(i, (i + 1) % m) for i in range(m)]
    edges += [(m + i, m + (i + 1) % m) for i in range(m)]
    twin = graph_from_edges(2 * m, edges, graph_id=f"twin_cycles_{m}")
    return big, twin


def csl_benchmark(
    n: int = DEFAULT_CSL_N,
    skips=DEFAULT_CSL_SKIPS,
    copies: int = 15,
    seed: int = 0,
) -> GraphDataset:
    """Classification dataset of permuted circulant copies, one class per skip.

    Class representatives are checked pairwise non-isomorphic by
    certificate before any copies are made; equivalent skips are rejected
    naming the colliding pair.
    """
    skips = list(skips)
    if len(set(skips)) != len(skips):
        raise ParameterError("skips must be distinct")
    bases = [gen_csl(n, s) for s in skips]
    certs = [canonical_form(g).certificate for g in bases]
    for i in range(len(skips)):
        for j in range(i + 1, len(skips)):
            if certs[i] == certs[j]:
                raise ParameterError(
                    f"skips {skips[i]} and {skips[j]} generate isomorphic graphs"
                )
    graphs = []
    for cls, (skip, base) in enumerate(zip(skips, bases)):
        rng = np.random.default_rng([seed, cls])
        for copy in range(copies):
            p = Permutation.random(n, rng)
            g = apply_permutation(base, p)
            graphs.append(
                ColoredGraph(
                    n=g.n,
                    adjacency=g.adjacency,
                    colors=g.colors,
                    graph_id=f"csl_n{n}_s{skip}_k{copy}",
                    target=cls,
                )
            )
    return GraphDataset(graphs=graphs)
