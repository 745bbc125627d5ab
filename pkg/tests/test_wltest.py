import numpy as np
import pytest

from canon_gnn.canonize import canonical_form, isomorphic
from canon_gnn.errors import DimensionError, ParameterError
from canon_gnn.graphs import Permutation, apply_permutation, graph_from_edges
from canon_gnn.ugc import LabelUniverse
from canon_gnn.wltest import (
    DEFAULT_CSL_N,
    DEFAULT_CSL_SKIPS,
    csl_benchmark,
    gen_csl,
    gen_wl_hard_pair,
    wl_test,
)


def test_plain_wl_separates_path_and_star():
    path = graph_from_edges(4, [(0, 1), (1, 2), (2, 3)])
    star = graph_from_edges(4, [(0, 1), (0, 2), (0, 3)])
    verdict = wl_test(path, star)
    assert verdict.distinguishable
    assert verdict.final_histograms[0] != verdict.final_histograms[1]


def test_plain_wl_blind_on_hard_pairs():
    for m in range(3, 8):
        g1, g2 = gen_wl_hard_pair(m)
        assert not wl_test(g1, g2).distinguishable
        assert not isomorphic(g1, g2)


def test_gc_pe_resolves_hard_pairs():
    for m in range(3, 8):
        g1, g2 = gen_wl_hard_pair(m)
        assert wl_test(g1, g2, pe="gc").distinguishable


def test_gc_verdict_matches_certificates():
    rng = np.random.default_rng(17)
    for _ in range(40):
        n = int(rng.integers(4, 9))
        edges1 = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < 0.4]
        edges2 = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < 0.4]
        g1 = graph_from_edges(n, edges1)
        g2 = graph_from_edges(n, edges2)
        same_cert = (
            canonical_form(g1).certificate == canonical_form(g2).certificate
        )
        assert wl_test(g1, g2, pe="gc").distinguishable == (not same_cert)


def test_gc_never_flags_isomorphic_copies():
    rng = np.random.default_rng(29)
    for _ in range(25):
        n = int(rng.integers(4, 10))
        edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < 0.4]
        g = graph_from_edges(n, edges)
        h = apply_permutation(g, Permutation.random(n, rng))
        assert not wl_test(g, h, pe="gc").distinguishable


def test_precomputed_colourings_match():
    g1, g2 = gen_wl_hard_pair(5)
    cols = (canonical_form(g1).colouring, canonical_form(g2).colouring)
    a = wl_test(g1, g2, pe="gc")
    b = wl_test(g1, g2, pe="gc", colourings=cols)
    assert a.distinguishable == b.distinguishable
    assert a.final_histograms == b.final_histograms


def test_ugc_pe_uses_universe_ranks():
    u = LabelUniverse(("p", "q", "r", "s"))
    g1 = graph_from_edges(2, [(0, 1)], labels=("p", "q"), graph_id="a")
    g2 = graph_from_edges(2, [(0, 1)], labels=("r", "s"), graph_id="b")
    assert wl_test(g1, g2, pe="ugc", universe=u).distinguishable
    g3 = graph_from_edges(2, [(0, 1)], labels=("q", "p"), graph_id="c")
    assert not wl_test(g1, g3, pe="ugc", universe=u).distinguishable


def test_wl_test_argument_errors():
    g1 = graph_from_edges(3, [(0, 1)])
    g2 = graph_from_edges(4, [(0, 1)])
    with pytest.raises(DimensionError):
        wl_test(g1, g2)
    with pytest.raises(ParameterError):
        wl_test(g1, g1, pe="magic")


def test_gen_csl_structure():
    g = gen_csl(11, 3)
    assert g.n == 11
    degs = [g.degree(v) for v in range(11)]
    assert degs == [4] * 11
    assert g.adjacency[0, 1] and g.adjacency[0, 3]
    with pytest.raises(ParameterError):
        gen_csl(11, 6)  # 2*skip >= n
    with pytest.raises(ParameterError):
        gen_csl(11, 1)
    with pytest.raises(ParameterError):
        gen_csl(4, 2)


def test_default_skips_pairwise_distinct():
    bases = [gen_csl(DEFAULT_CSL_N, s) for s in DEFAULT_CSL_SKIPS]
    certs = [canonical_form(g).certificate for g in bases]
    assert len(set(certs)) == len(DEFAULT_CSL_SKIPS)


def test_csl_benchmark_shape(csl):
    assert len(csl.graphs) == 150
    targets = [g.target for g in csl.graphs]
    assert sorted(set(targets)) == list(range(10))
    assert all(targets.count(c) == 15 for c in range(10))
    # copies of one class are isomorphic to the base
    base = gen_csl(DEFAULT_CSL_N, DEFAULT_CSL_SKIPS[0])
    cert = canonical_form(base).certificate
    first_class = [g for g in csl.graphs if g.target == 0]
    assert all(canonical_form(g).certificate == cert for g in first_class[:3])


def test_csl_benchmark_rejects_equivalent_skips():
    with pytest.raises(ParameterError):
        csl_benchmark(n=13, skips=(2, 6))  # 2*6 = -1 mod 13, multiplier map
    with pytest.raises(ParameterError):
        csl_benchmark(skips=(2, 2))


def test_csl_benchmark_seeded():
    a = csl_benchmark(n=11, skips=(2, 3), copies=2, seed=4)
    b = csl_benchmark(n=11, skips=(2, 3), copies=2, seed=4)
    c = csl_benchmark(n=11, skips=(2, 3), copies=2, seed=5)
    assert a.equals(b)
    assert not a.equals(c)


def test_plain_wl_blind_on_csl_classes():
    g1 = gen_csl(DEFAULT_CSL_N, 2)
    g2 = gen_csl(DEFAULT_CSL_N, 7)
    assert not wl_test(g1, g2).distinguishable
    assert wl_test(g1, g2, pe="gc").distinguishable
