"""Exact canonical labeling via collision-free refinement and IR search.

The canonical form of a colored graph is computed with the classic
individualization-refinement scheme: refine the colouring to its coarsest
equitable refinement, and while it is not discrete, pick a target cell and
branch on every node in it, individualizing the chosen node with a fresh
color. Each discrete leaf induces a node order and hence a byte
certificate; the canonical form is the lexicographically minimal
certificate over all leaves. No automorphism pruning is used, only a sound
lower-bound comparison against the incumbent certificate.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from functools import cached_property
from itertools import permutations

import numpy as np

from canon_gnn.errors import SizeError, ValidationError
from canon_gnn.graphs import ColoredGraph, DiscreteColouring

DEFAULT_SIZE_LIMIT = 64


@dataclass(frozen=True, eq=False)
class Colouring:
    """Ordered partition of nodes; ``node_color[v]`` is the cell index of v.

    Cell indices are contiguous 0..k-1 and cell order is the color order.
    """

    node_color: np.ndarray

    def __post_init__(self):
        nc = np.array(self.node_color, dtype=np.int64)
        k = int(nc.max()) + 1 if nc.size else 0
        if nc.size and (nc.min() < 0 or len(np.unique(nc)) != k):
            raise ValidationError("cell indices must be contiguous 0..k-1")
        nc.setflags(write=False)
        object.__setattr__(self, "node_color", nc)

    @property
    def n(self) -> int:
        return len(self.node_color)

    @property
    def num_cells(self) -> int:
        return int(self.node_color.max()) + 1

    @cached_property
    def cells(self) -> tuple[np.ndarray, ...]:
        """Cells in color order; each cell lists its nodes ascending."""
        return tuple(
            np.flatnonzero(self.node_color == c) for c in range(self.num_cells)
        )

    @property
    def is_discrete(self) -> bool:
        return self.num_cells == self.n


def colouring_from_colors(colors) -> Colouring:
    """Cells are the color classes, ordered by ascending color value."""
    _, inverse = np.unique(np.asarray(colors, dtype=np.int64), return_inverse=True)
    return Colouring(inverse)


@dataclass(frozen=True)
class Certificate:
    """Canonical byte string: n, packed adjacency rows, color sequence.

    Layout (docs/formats.md): 4-byte big-endian n, then the reordered
    adjacency rows as packed bits (each row padded to a byte boundary),
    then the reordered node colors as 4-byte big-endian values.
    """

    data: bytes

    @property
    def hex(self) -> str:
        return self.data.hex()


@dataclass(frozen=True, eq=False)
class CanonResult:
    colouring: DiscreteColouring
    certificate: Certificate
    nodes_expanded: int
    leaves_visited: int


def _refine_pass(neighbor_lists, node_color):
    """One refinement round; returns (new_node_color, changed).

    Signature of a node is (own color, sorted neighbor colors); new colors
    are the lexicographic ranks of the distinct signatures, so the new
    color order extends the old one and no hashing is involved.
    """
    nc = node_color
    sigs = [
        (int(nc[v]), tuple(sorted(int(nc[u]) for u in neighbor_lists[v])))
        for v in range(len(nc))
    ]
    distinct = sorted(set(sigs))
    if len(distinct) == int(nc.max()) + 1:
        return node_color, False
    index = {s: i for i, s in enumerate(distinct)}
    return np.array([index[s] for s in sigs], dtype=np.int64), True


def refine(g: ColoredGraph, start: Colouring) -> Colouring:
    """Coarsest equitable refinement of ``start``, collision-free.

    The output refines the input partition and preserves its cell order:
    nodes from an earlier input cell always land in earlier output cells.
    """
    if start.n != g.n:
        raise ValidationError(f"colouring length {start.n} does not match n={g.n}")
    nc = start.node_color
    while True:
        nc, changed = _refine_pass(g.neighbor_lists, nc)
        if not changed:
            return Colouring(nc)


def certificate_for_order(g: ColoredGraph, order_nodes: np.ndarray) -> Certificate:
    """Certificate of g with nodes taken in the given order."""
    reordered = g.adjacency[np.ix_(order_nodes, order_nodes)]
    packed = np.packbits(reordered, axis=1)
    colors = g.colors[order_nodes].astype(">u4").tobytes()
    return Certificate(struct.pack(">I", g.n) + packed.tobytes() + colors)


def _leading_singleton_bound(g: ColoredGraph, colouring: Colouring) -> bytes | None:
    """Lower bound on certificates of all leaves below this IR node.

    Covers header plus the first k adjacency rows, where k is the length of
    the leading run of singleton cells: those row positions are already
    fixed, and within each later cell a row's bits can at best be the
    zeros-then-ones arrangement of its neighbor count there.
    """
    cells = colouring.cells
    k = 0
    for cell in cells:
        if len(cell) != 1:
            break
        k += 1
    if k == 0:
        return None
    prefix = [int(c[0]) for c in cells[:k]]
    rows = np.zeros((k, g.n), dtype=bool)
    for i, u in enumerate(prefix):
        adj_u = g.adjacency[u]
        rows[i, :k] = adj_u[prefix]
        col = k
        for cell in cells[k:]:
            s = len(cell)
            c = int(adj_u[cell].sum())
            if c:
                rows[i, col + s - c : col + s] = True
            col += s
    return struct.pack(">I", g.n) + np.packbits(rows, axis=1).tobytes()


def canonical_form(g: ColoredGraph, size_limit: int = DEFAULT_SIZE_LIMIT) -> CanonResult:
    """Canonical form of g; invariant under any relabeling of g.

    Returns the discrete colouring rho (rank 1..n per node, the node order
    of the canonical form) together with the winning certificate and
    search statistics.
    """
    if g.n > size_limit:
        raise SizeError(
            f"n={g.n} exceeds the exact-canonization limit {size_limit}; "
            "use the label-based UGC path for large graphs"
        )
    best_cert: list = [None, None]  # bytes, node order
    stats = {"expanded": 0, "leaves": 0}

    def visit(colouring: Colouring) -> None:
        stats["expanded"] += 1
        refined = refine(g, colouring)
        if refined.is_discrete:
            order_nodes = np.argsort(refined.node_color)
            cert = certificate_for_order(g, order_nodes).data
            stats["leaves"] += 1
            if best_cert[0] is None or cert < best_cert[0]:
                best_cert[0] = cert
                best_cert[1] = order_nodes
            return
        if best_cert[0] is not None:
            bound = _leading_singleton_bound(g, refined)
            if bound is not None and bound > best_cert[0][: len(bound)]:
                return
        target = min(
            (cell for cell in refined.cells if len(cell) > 1), key=len
        )
        fresh = refined.num_cells
        for v in target:
            child = refined.node_color.copy()
            child[v] = fresh
            visit(Colouring(child))

    visit(colouring_from_colors(g.colors))
    order_nodes = best_cert[1]
    ranks = np.empty(g.n, dtype=np.int64)
    ranks[order_nodes] = np.arange(1, g.n + 1)
    return CanonResult(
        colouring=DiscreteColouring(order=ranks, mode="gc"),
        certificate=Certificate(best_cert[0]),
        nodes_expanded=stats["expanded"],
        leaves_visited=stats["leaves"],
    )


def is_rigid(g: ColoredGraph) -> bool:
    """True if refining the graph's own colouring is already discrete.

    Sufficient for a trivial automorphism group; False proves nothing.
    """
    return refine(g, colouring_from_colors(g.colors)).is_discrete


def isomorphic(g1: ColoredGraph, g2: ColoredGraph, size_limit: int = DEFAULT_SIZE_LIMIT) -> bool:
    """Certificate equality; exact for simple colored graphs within the limit."""
    if g1.n != g2.n:
        return False
    c1 = canonical_form(g1, size_limit=size_limit)
    c2 = canonical_form(g2, size_limit=size_limit)
    return c1.certificate == c2.certificate


def isomorphic_brute_force(g1: ColoredGraph, g2: ColoredGraph) -> bool:
    """Exhaustive permutation search; oracle for small n only."""
    if g1.n != g2.n:
        return False
    a1 = g1.adjacency
    a2 = g2.adjacency
    c1 = g1.colors.tolist()
    c2 = g2.colors.tolist()
    for perm in permutations(range(g1.n)):
        p = np.array(perm)
        if c1 != [c2[p[v]] for v in range(g1.n)]:
            continue
        if np.array_equal(a1, a2[np.ix_(p, p)]):
            return True
    return False
