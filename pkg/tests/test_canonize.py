import numpy as np
import pytest

from canon_gnn.canonize import (
    Colouring,
    canonical_form,
    certificate_for_order,
    colouring_from_colors,
    is_rigid,
    isomorphic,
    isomorphic_brute_force,
    refine,
)
from canon_gnn.errors import SizeError
from canon_gnn.graphs import ColoredGraph, Permutation, apply_permutation, graph_from_edges
from conftest import random_colored_graph


def test_refine_path_graph():
    g = graph_from_edges(3, [(0, 1), (1, 2)])
    c = refine(g, colouring_from_colors(g.colors))
    # endpoints form one cell, the middle its own
    assert c.node_color[0] == c.node_color[2]
    assert c.node_color[1] != c.node_color[0]
    assert not c.is_discrete


def test_refine_splits_by_degree_then_stabilizes():
    g = graph_from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 2)])
    c = refine(g, colouring_from_colors(g.colors))
    again = refine(g, c)
    assert np.array_equal(c.node_color, again.node_color)


def test_refine_preserves_input_color_order():
    """If c(u) < c(v) going in, the refined colors keep that ordering."""
    rng = np.random.default_rng(23)
    for _ in range(50):
        g = random_colored_graph(rng, num_colors=4)
        start = colouring_from_colors(g.colors)
        c = refine(g, start)
        cu = start.node_color
        for u in range(g.n):
            for v in range(g.n):
                if cu[u] < cu[v]:
                    assert c.node_color[u] < c.node_color[v]


def test_refine_never_merges_cells():
    rng = np.random.default_rng(29)
    for _ in range(30):
        g = random_colored_graph(rng, num_colors=3)
        start = colouring_from_colors(g.colors)
        c = refine(g, start)
        for u in range(g.n):
            for v in range(g.n):
                if start.node_color[u] != start.node_color[v]:
                    assert c.node_color[u] != c.node_color[v]


def test_canonical_form_path_golden_bytes():
    """P3, uniform colors: certificate derivable by hand.

    Both leaves reorder to (endpoint, middle, endpoint); rows pack to
    0x40, 0xa0, 0x40 and the three original colors are zero.
    """
    g = graph_from_edges(3, [(0, 1), (1, 2)])
    result = canonical_form(g)
    expected = "00000003" + "40a040" + "00000000" * 3
    assert result.certificate.hex == expected
    assert sorted(result.colouring.order.tolist()) == [1, 2, 3]
    assert result.colouring.order[1] == 2


def test_canonical_form_is_permutation_invariant():
    rng = np.random.default_rng(31)
    for _ in range(60):
        g = random_colored_graph(rng)
        cert = canonical_form(g).certificate
        p = Permutation.random(g.n, rng)
        cert_p = canonical_form(apply_permutation(g, p)).certificate
        assert cert.data == cert_p.data


def test_canonical_order_is_itself_canonical():
    """Reordering by rho and canonizing again yields the same certificate."""
    rng = np.random.default_rng(37)
    for _ in range(20):
        g = random_colored_graph(rng)
        result = canonical_form(g)
        assert (
            certificate_for_order(g, result.colouring.node_order()).data
            == result.certificate.data
        )


def test_certificate_length_formula():
    g = random_colored_graph(np.random.default_rng(41), n=9)
    cert = canonical_form(g).certificate
    assert len(cert.data) == 4 + 9 * ((9 + 7) // 8) + 4 * 9


def test_isomorphic_matches_brute_force():
    rng = np.random.default_rng(43)
    agree = 0
    for trial in range(120):
        n = int(rng.integers(3, 8))
        g1 = random_colored_graph(rng, n=n, num_colors=2)
        if trial % 3 == 0:
            g2 = apply_permutation(g1, Permutation.random(n, rng))
        elif trial % 3 == 1:
            g2 = random_colored_graph(rng, n=n, num_colors=2)
        else:
            p = Permutation.random(n, rng)
            gp = apply_permutation(g1, p)
            adj = gp.adjacency.copy()
            u, v = 0, 1
            adj[u, v] = not adj[u, v]
            adj[v, u] = adj[u, v]
            g2 = ColoredGraph(n=n, adjacency=adj, colors=gp.colors)
        assert isomorphic(g1, g2) == isomorphic_brute_force(g1, g2)
        agree += 1
    assert agree == 120


def test_isomorphic_different_sizes_false():
    g1 = graph_from_edges(3, [(0, 1)])
    g2 = graph_from_edges(4, [(0, 1)])
    assert not isomorphic(g1, g2)


def test_is_rigid_cases():
    path = graph_from_edges(3, [(0, 1), (1, 2)])
    assert not is_rigid(path)  # endpoint swap
    colored_path = graph_from_edges(3, [(0, 1), (1, 2)], colors=[0, 1, 2])
    assert is_rigid(colored_path)
    # path on 4 nodes with one endpoint marked: the mark breaks the flip
    marked = graph_from_edges(4, [(0, 1), (1, 2), (2, 3)], colors=[1, 0, 0, 0])
    assert is_rigid(marked)


def test_size_limit_enforced():
    g = graph_from_edges(70, [(i, i + 1) for i in range(69)])
    with pytest.raises(SizeError):
        canonical_form(g)
    canonical_form(g, size_limit=70)


def test_branching_counts_are_reported():
    g = graph_from_edges(6, [(i, (i + 1) % 6) for i in range(6)])
    result = canonical_form(g)
    assert result.leaves_visited >= 1
    assert result.nodes_expanded >= result.leaves_visited


def test_colouring_rejects_non_contiguous():
    with pytest.raises(Exception):
        Colouring(node_color=np.array([0, 2, 2]))


def test_cycle_certificates_by_length():
    c5 = canonical_form(graph_from_edges(5, [(i, (i + 1) % 5) for i in range(5)]))
    c6 = canonical_form(graph_from_edges(6, [(i, (i + 1) % 6) for i in range(6)]))
    assert c5.certificate.data != c6.certificate.data
