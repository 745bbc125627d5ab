"""Core graph types: colored graphs, permutations, discrete colourings, features.

Nodes are 0-indexed everywhere. Discrete-colouring ranks are 1-indexed
(1..n for per-graph canonical orders, 1..N for universe-wide orders) so the
two kinds of rank never get mixed up with node indices.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from canon_gnn.errors import (
    DimensionError,
    LabelingError,
    ValidationError,
    WidthError,
)

# Colors are serialized as unsigned 4-byte values inside certificates.
MAX_COLOR = 2**32 - 1


@dataclass(frozen=True, eq=False)
class ColoredGraph:
    """Simple undirected graph with an integer color per node.

    Attributes
    ----------
    n : int
        Node count, positive.
    adjacency : numpy.ndarray
        Boolean (n, n) matrix, symmetric with a zero diagonal. Stored
        read-only; build a new graph instead of mutating.
    colors : numpy.ndarray
        Integer (n,) array, entries in [0, MAX_COLOR].
    labels : tuple of str, optional
        Global node identifiers, distinct within the graph. Raw material
        for dataset-level canonization.
    graph_id : str
        Identifier used by datasets and CLI reports.
    target : int or float, optional
        Classification or regression target.
    """

    n: int
    adjacency: np.ndarray
    colors: np.ndarray
    labels: tuple[str, ...] | None = None
    graph_id: str = ""
    target: int | float | None = None

    def __post_init__(self):
        if self.n <= 0:
            raise ValidationError("node count must be positive")
        adj = np.array(self.adjacency, dtype=bool)
        if adj.shape != (self.n, self.n):
            raise DimensionError(
                f"adjacency shape {adj.shape} does not match n={self.n}"
            )
        if not np.array_equal(adj, adj.T):
            raise ValidationError("adjacency must be symmetric")
        if adj.diagonal().any():
            raise ValidationError("self-loops are not allowed")
        colors = np.array(self.colors, dtype=np.int64)
        if colors.shape != (self.n,):
            raise DimensionError(
                f"colors shape {colors.shape} does not match n={self.n}"
            )
        if colors.size and (colors.min() < 0 or colors.max() > MAX_COLOR):
            raise ValidationError(f"colors must lie in [0, {MAX_COLOR}]")
        if self.labels is not None:
            labels = tuple(str(x) for x in self.labels)
            if len(labels) != self.n:
                raise DimensionError(
                    f"labels length {len(labels)} does not match n={self.n}"
                )
            if len(set(labels)) != self.n:
                raise LabelingError(
                    f"labels must be distinct within graph {self.graph_id!r}"
                )
            object.__setattr__(self, "labels", labels)
        adj.setflags(write=False)
        colors.setflags(write=False)
        object.__setattr__(self, "adjacency", adj)
        object.__setattr__(self, "colors", colors)

    @cached_property
    def neighbor_lists(self) -> tuple[np.ndarray, ...]:
        """Per-node arrays of neighbor indices, ascending."""
        return tuple(np.flatnonzero(self.adjacency[v]) for v in range(self.n))

    @cached_property
    def edges(self) -> list[tuple[int, int]]:
        """Sorted list of (u, v) with u < v."""
        iu, iv = np.nonzero(np.triu(self.adjacency, k=1))
        return list(zip(iu.tolist(), iv.tolist()))

    @property
    def num_edges(self) -> int:
        return int(self.adjacency.sum()) // 2

    def degree(self, v: int) -> int:
        return int(self.adjacency[v].sum())

    def equals(self, other: "ColoredGraph") -> bool:
        """Structural equality on every field, including id and target."""
        return (
            self.n == other.n
            and np.array_equal(self.adjacency, other.adjacency)
            and np.array_equal(self.colors, other.colors)
            and self.labels == other.labels
            and self.graph_id == other.graph_id
            and self.target == other.target
        )


def graph_from_edges(
    n: int,
    edges,
    colors=None,
    labels=None,
    graph_id: str = "",
    target=None,
) -> ColoredGraph:
    """Build a ColoredGraph from an edge list.

    ``colors`` defaults to all-zero. Raises ValidationError on self-loops
    and DimensionError on out-of-range endpoints.
    """
    adj = np.zeros((n, n), dtype=bool)
    for e in edges:
        u, v = int(e[0]), int(e[1])
        if not (0 <= u < n and 0 <= v < n):
            raise DimensionError(f"edge ({u}, {v}) out of range for n={n}")
        if u == v:
            raise ValidationError(f"self-loop at node {u} is not allowed")
        adj[u, v] = True
        adj[v, u] = True
    if colors is None:
        colors = np.zeros(n, dtype=np.int64)
    return ColoredGraph(
        n=n,
        adjacency=adj,
        colors=colors,
        labels=tuple(labels) if labels is not None else None,
        graph_id=graph_id,
        target=target,
    )


@dataclass(frozen=True, eq=False)
class Permutation:
    """Bijection of {0..n-1}; ``mapping[v]`` is the image of node v."""

    mapping: np.ndarray

    def __post_init__(self):
        m = np.array(self.mapping, dtype=np.int64)
        if m.ndim != 1 or not np.array_equal(np.sort(m), np.arange(len(m))):
            raise ValidationError("mapping must be a bijection of 0..n-1")
        m.setflags(write=False)
        object.__setattr__(self, "mapping", m)

    @property
    def n(self) -> int:
        return len(self.mapping)

    def __call__(self, v: int) -> int:
        return int(self.mapping[v])

    def inverse(self) -> "Permutation":
        return Permutation(np.argsort(self.mapping))

    def compose(self, other: "Permutation") -> "Permutation":
        """self after other: (self.compose(other))(v) = self(other(v))."""
        if self.n != other.n:
            raise DimensionError("cannot compose permutations of different sizes")
        return Permutation(self.mapping[other.mapping])

    def equals(self, other: "Permutation") -> bool:
        return np.array_equal(self.mapping, other.mapping)

    @staticmethod
    def identity(n: int) -> "Permutation":
        return Permutation(np.arange(n))

    @staticmethod
    def random(n: int, rng: np.random.Generator) -> "Permutation":
        return Permutation(rng.permutation(n))


def apply_permutation(g: ColoredGraph, p: Permutation) -> ColoredGraph:
    """Relabel g by p: edge (u,v) becomes (p(u),p(v)); colors and labels ride along."""
    if p.n != g.n:
        raise DimensionError(f"permutation length {p.n} does not match n={g.n}")
    m = p.mapping
    adj = np.zeros_like(g.adjacency)
    adj[np.ix_(m, m)] = g.adjacency
    colors = np.empty_like(g.colors)
    colors[m] = g.colors
    labels = None
    if g.labels is not None:
        out = [""] * g.n
        for v in range(g.n):
            out[m[v]] = g.labels[v]
        labels = tuple(out)
    return ColoredGraph(
        n=g.n,
        adjacency=adj,
        colors=colors,
        labels=labels,
        graph_id=g.graph_id,
        target=g.target,
    )


@dataclass(frozen=True, eq=False)
class DiscreteColouring:
    """Distinct rank per node: 1..n in "gc" mode, 1..N universe ranks in "ugc" mode."""

    order: np.ndarray
    mode: str = "gc"

    def __post_init__(self):
        if self.mode not in ("gc", "ugc"):
            raise ValidationError(f"unknown colouring mode {self.mode!r}")
        order = np.array(self.order, dtype=np.int64)
        n = len(order)
        if len(set(order.tolist())) != n:
            raise ValidationError("ranks must be pairwise distinct")
        if self.mode == "gc" and not np.array_equal(np.sort(order), np.arange(1, n + 1)):
            raise ValidationError("gc-mode ranks must be exactly 1..n")
        if self.mode == "ugc" and order.size and order.min() < 1:
            raise ValidationError("ugc-mode ranks must be >= 1")
        order.setflags(write=False)
        object.__setattr__(self, "order", order)

    @property
    def n(self) -> int:
        return len(self.order)

    def rank(self, v: int) -> int:
        return int(self.order[v])

    def node_order(self) -> np.ndarray:
        """Nodes sorted by ascending rank (the canonical order in gc mode)."""
        return np.argsort(self.order, kind="stable")


def permute_colouring(c: DiscreteColouring, p: Permutation) -> DiscreteColouring:
    """Colouring of the permuted graph: rank'(p(v)) = rank(v)."""
    order = np.empty_like(c.order)
    order[p.mapping] = c.order
    return DiscreteColouring(order=order, mode=c.mode)


@dataclass(frozen=True, eq=False)
class FeatureTensor:
    """Dense real (rows, cols) feature matrix; rows align with node indices."""

    data: np.ndarray

    def __post_init__(self):
        data = np.array(self.data, dtype=np.float64)
        if data.ndim != 2:
            raise DimensionError(f"feature tensor must be 2-d, got shape {data.shape}")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]


def one_hot_colors(g: ColoredGraph, width: int) -> FeatureTensor:
    """Row v is one-hot at column c(v); requires width > max color."""
    top = int(g.colors.max())
    if width <= top:
        raise WidthError(f"width {width} too small for max color {top}")
    data = np.zeros((g.n, width))
    data[np.arange(g.n), g.colors] = 1.0
    return FeatureTensor(data)


def one_hot_ranks(c: DiscreteColouring, width: int) -> FeatureTensor:
    """Row v is one-hot at column rank(v)-1; requires width >= max rank."""
    top = int(c.order.max())
    if width < top:
        raise WidthError(f"width {width} too small for max rank {top}")
    data = np.zeros((c.n, width))
    data[np.arange(c.n), c.order - 1] = 1.0
    return FeatureTensor(data)


def concat_features(x: FeatureTensor, p: FeatureTensor) -> FeatureTensor:
    """Column-wise concatenation; rows must agree."""
    if x.rows != p.rows:
        raise DimensionError(f"row mismatch: {x.rows} vs {p.rows}")
    return FeatureTensor(np.hstack([x.data, p.data]))


def permute_features(x: FeatureTensor, p: Permutation) -> FeatureTensor:
    """Feature rows of the permuted graph: row'(p(v)) = row(v)."""
    if x.rows != p.n:
        raise DimensionError(f"row mismatch: {x.rows} vs permutation {p.n}")
    data = np.empty_like(x.data)
    data[p.mapping] = x.data
    return FeatureTensor(data)
