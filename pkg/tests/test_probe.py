import numpy as np
import pytest

from canon_gnn.canonize import canonical_form, is_rigid
from canon_gnn.datasets import GraphDataset
from canon_gnn.errors import ValidationError
from canon_gnn.graphs import graph_from_edges
from canon_gnn.probe import (
    PerturbationSpec,
    apply_perturbation,
    gen_counterexample,
    run_probe,
    subgraph_consistency_probe,
    triangle_gadget_pair,
)
from canon_gnn.ugc import build_universe, ugc_colouring


def test_recolor_perturbation():
    g = graph_from_edges(3, [(0, 1)], colors=[0, 1, 2])
    h = apply_perturbation(g, PerturbationSpec("recolor_node", 1, 5))
    assert h.colors.tolist() == [0, 5, 2]
    assert np.array_equal(h.adjacency, g.adjacency)
    with pytest.raises(ValidationError):
        apply_perturbation(g, PerturbationSpec("recolor_node", 1, 1))
    with pytest.raises(ValidationError):
        apply_perturbation(g, PerturbationSpec("recolor_node", 9, 0))


def test_rewire_perturbation():
    g = graph_from_edges(3, [(0, 1)])
    h = apply_perturbation(g, PerturbationSpec("rewire_edge", (1, 2), True))
    assert h.adjacency[1, 2] and h.adjacency[2, 1]
    back = apply_perturbation(h, PerturbationSpec("rewire_edge", (2, 1), False))
    assert np.array_equal(back.adjacency, g.adjacency)
    with pytest.raises(ValidationError):
        apply_perturbation(g, PerturbationSpec("rewire_edge", (0, 1), True))
    with pytest.raises(ValidationError):
        apply_perturbation(g, PerturbationSpec("rewire_edge", (0, 0), True))
    with pytest.raises(ValidationError):
        apply_perturbation(g, PerturbationSpec("shuffle", 0, 0))


def test_counterexample_invariants():
    for n in (5, 8):
        g1, g2 = gen_counterexample(n, seed=3)
        assert is_rigid(g1) and is_rigid(g2)
        assert np.array_equal(g1.adjacency, g2.adjacency)
        assert g1.colors[n - 1] == n and g2.colors[n - 1] == 0
        assert np.array_equal(g1.colors[: n - 1], g2.colors[: n - 1])
        rho1 = canonical_form(g1).colouring.order
        rho2 = canonical_form(g2).colouring.order
        assert np.all(rho2[: n - 1] == rho1[: n - 1] + 1)
        assert rho1[n - 1] == n and rho2[n - 1] == 1


def test_counterexample_rejects_tiny_n():
    with pytest.raises(ValidationError):
        gen_counterexample(3, seed=0)


def test_run_probe_divergence_pattern():
    reports, aggregates = run_probe([6], trials=4, seed=0)
    assert len(reports) == 4
    for r in reports:
        assert r.pe_divergence_gc == 6
        assert r.pe_divergence_ugc == 0
        assert r.d_exact and r.d_value == 1.0
        # the recolored node still flows through the color channel, so the
        # ugc gap is nonzero; only the rank part is untouched
        assert r.embedding_gap_ugc > 0.0
        assert r.embedding_gap_gc > 0.0
        assert r.ratio_gc == r.embedding_gap_gc
        assert r.ratio_ugc == r.embedding_gap_ugc
    assert aggregates["max_ratio_gc"][6] == max(r.ratio_gc for r in reports)
    assert aggregates["max_ratio_ugc"][6] == max(r.ratio_ugc for r in reports)


def test_run_probe_threads_deterministic():
    seq, agg_seq = run_probe([5, 6], trials=3, seed=2, threads=1)
    par, agg_par = run_probe([5, 6], trials=3, seed=2, threads=3)
    assert [r.__dict__ for r in seq] == [r.__dict__ for r in par]
    assert agg_seq == agg_par


def test_gadget_pair_fixture():
    left, right = triangle_gadget_pair()
    assert left.n == right.n == 7
    assert set(left.labels[:6]) == set(right.labels[:6])
    assert left.labels[6] != right.labels[6]
    assert left.degree(6) == 2 and right.degree(6) == 3


def test_subgraph_probe_on_gadgets():
    left, right = triangle_gadget_pair()
    d = GraphDataset(graphs=[left, right])
    report = subgraph_consistency_probe(d, pairs=10, seed=0)
    assert report.pairs_sampled == 10
    assert report.pairs_with_shared_labels == 10
    assert report.tau_mismatch_pairs == 0
    assert report.gc_mismatch_pairs == 10
    assert report.gc_mismatch_fraction == 1.0
    # spot check the mechanism: shared triangle labels keep their universe
    # ranks but not their canonical ranks
    u = build_universe(d)
    tau_left = ugc_colouring(left, u).order
    tau_right = ugc_colouring(right, u).order
    assert np.array_equal(tau_left[:6], tau_right[:6])
    rho_left = canonical_form(left).colouring.order
    rho_right = canonical_form(right).colouring.order
    assert not np.array_equal(rho_left[:6], rho_right[:6])


def test_subgraph_probe_requires_valid_ugc():
    g1 = graph_from_edges(2, [(0, 1)], labels=("a", "b"), graph_id="g1")
    g2 = graph_from_edges(2, [], labels=("a", "b"), graph_id="g2")
    with pytest.raises(ValidationError):
        subgraph_consistency_probe(GraphDataset(graphs=[g1, g2]), pairs=5)
