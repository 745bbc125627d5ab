import math

import numpy as np
import pytest

from canon_gnn.distance import (
    EXACT_LIMIT,
    alignment_value,
    distance_brute_force,
    graph_distance,
    stability_ratio,
)
from canon_gnn.errors import DimensionError, ParameterError, SizeError, ValidationError
from canon_gnn.graphs import (
    FeatureTensor,
    Permutation,
    apply_permutation,
    graph_from_edges,
)
from canon_gnn.mpnn import MpnnConfig, init_model

from conftest import random_colored_graph


def cycle(n, colors=None):
    return graph_from_edges(n, [(i, (i + 1) % n) for i in range(n)], colors=colors)


def test_alignment_value_hand_check():
    # identity map of P3 onto a single edge: one edge slot differs, colors agree
    g1 = graph_from_edges(3, [(0, 1), (1, 2)])
    g2 = graph_from_edges(3, [(0, 1)])
    v = alignment_value(g1, g2, np.arange(3))
    assert v == pytest.approx(math.sqrt(2.0))


def test_alignment_value_counts_colors():
    g1 = graph_from_edges(2, [], colors=[0, 1])
    g2 = graph_from_edges(2, [], colors=[1, 1])
    assert alignment_value(g1, g2, np.arange(2)) == 1.0
    assert alignment_value(g1, g2, np.array([1, 0])) == 1.0


def test_c6_vs_two_triangles():
    g1 = cycle(6)
    g2 = graph_from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])
    res = graph_distance(g1, g2)
    assert res.exact
    assert res.distance == pytest.approx(math.sqrt(8.0))
    assert res.distance == pytest.approx(distance_brute_force(g1, g2))


def test_exact_matches_brute_force():
    rng = np.random.default_rng(11)
    for _ in range(40):
        n = int(rng.integers(2, 7))
        g1 = random_colored_graph(rng, n=n)
        g2 = random_colored_graph(rng, n=n)
        res = graph_distance(g1, g2)
        assert res.distance == pytest.approx(distance_brute_force(g1, g2))
        assert res.distance == pytest.approx(
            alignment_value(g1, g2, res.permutation.mapping)
        )


def test_distance_to_own_permutation_is_zero():
    rng = np.random.default_rng(23)
    for _ in range(25):
        g = random_colored_graph(rng, n=int(rng.integers(3, 9)))
        perm = Permutation(rng.permutation(g.n))
        assert graph_distance(g, apply_permutation(g, perm)).distance == 0.0


def test_heuristic_upper_bounds_exact():
    rng = np.random.default_rng(5)
    for _ in range(30):
        n = int(rng.integers(3, 8))
        g1 = random_colored_graph(rng, n=n)
        g2 = random_colored_graph(rng, n=n)
        exact = graph_distance(g1, g2)
        rough = graph_distance(g1, g2, mode="heuristic")
        assert not rough.exact
        assert rough.distance >= exact.distance - 1e-12


def test_heuristic_allowed_above_limit():
    rng = np.random.default_rng(2)
    n = EXACT_LIMIT + 3
    g1 = random_colored_graph(rng, n=n)
    g2 = random_colored_graph(rng, n=n)
    with pytest.raises(SizeError):
        graph_distance(g1, g2)
    res = graph_distance(g1, g2, mode="heuristic")
    assert res.distance >= 0.0


def test_size_and_mode_errors():
    g1 = graph_from_edges(3, [(0, 1)])
    g2 = graph_from_edges(4, [(0, 1)])
    with pytest.raises(DimensionError):
        graph_distance(g1, g2)
    with pytest.raises(ParameterError):
        graph_distance(g1, g1, mode="fast")


def test_stability_ratio_basic():
    g1 = cycle(6)
    g2 = graph_from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])
    model = init_model(MpnnConfig(input_width=1, num_classes=2, num_layers=2,
                                  hidden_dim=8, readout="sum", seed=1))
    ratio = stability_ratio(model, g1, g2)
    assert ratio >= 0.0
    pinned = stability_ratio(model, g1, g2, known_distance=1.0)
    assert pinned == pytest.approx(ratio * math.sqrt(8.0))


def test_stability_ratio_zero_distance_paths():
    g = cycle(5)
    model = init_model(MpnnConfig(input_width=1, num_classes=2, num_layers=2,
                                  hidden_dim=8, readout="sum", seed=3))
    perm = Permutation(np.array([2, 0, 4, 1, 3]))
    with pytest.raises(ParameterError):
        stability_ratio(model, g, apply_permutation(g, perm))
    with pytest.raises(ValidationError):
        stability_ratio(model, g, g, known_distance=0.0,
                        features1=FeatureTensor(np.ones((5, 1))),
                        features2=FeatureTensor(np.zeros((5, 1))))


def test_explored_counter_positive():
    g1 = cycle(6)
    g2 = cycle(6, colors=[0, 0, 0, 0, 0, 1])
    res = graph_distance(g1, g2)
    assert res.nodes_explored >= 1
