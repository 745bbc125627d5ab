"""Universal graph canonization from global node labels.

Per-graph canonization orders nodes within one graph; a *universal*
canonization orders nodes consistently across a whole dataset, so that any
common labeled subgraph of two member graphs receives identical ranks in
both. Labels make this tractable: sort every label that occurs in the
dataset, and rank each node by its label's position. The validator checks
the sufficient condition for that construction: labels injective within
every graph, and any label pair that co-occurs in several graphs agrees on
edge presence everywhere.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from canon_gnn.canonize import canonical_form
from canon_gnn.datasets import GraphDataset
from canon_gnn.errors import LabelingError, UniverseError, WidthError
from canon_gnn.graphs import (
    ColoredGraph,
    DiscreteColouring,
    FeatureTensor,
    one_hot_ranks,
)


@dataclass(frozen=True, eq=False)
class LabelUniverse:
    """Sorted distinct labels; rank(label) is its 1-based sorted position."""

    labels: tuple[str, ...]

    def __post_init__(self):
        labels = tuple(self.labels)
        if sorted(set(labels)) != list(labels):
            raise LabelingError("universe labels must be sorted and duplicate-free")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(
            self, "_rank", {lab: i + 1 for i, lab in enumerate(labels)}
        )

    @property
    def size(self) -> int:
        return len(self.labels)

    def rank(self, label: str) -> int:
        try:
            return self._rank[label]
        except KeyError:
            raise UniverseError(f"label {label!r} is not in the universe") from None

    def __contains__(self, label: str) -> bool:
        return label in self._rank


def build_universe(d: GraphDataset) -> LabelUniverse:
    """Universe for a dataset: its declared one, else the sorted label union."""
    seen: set[str] = set()
    for g in d.graphs:
        if g.labels is None:
            raise LabelingError(f"graph {g.graph_id!r} has no labels; UGC needs them")
        seen.update(g.labels)
    if d.label_universe is not None:
        return LabelUniverse(tuple(d.label_universe))
    return LabelUniverse(tuple(sorted(seen)))


@dataclass(frozen=True)
class InjectivityWitness:
    graph_id: str
    node_a: int
    node_b: int
    shared_label: str


@dataclass(frozen=True)
class EdgeWitness:
    graph1_id: str
    graph2_id: str
    label_u: str
    label_v: str
    present_in: str
    absent_in: str


@dataclass(eq=False)
class UgcValidationReport:
    injective_ok: bool
    edge_consistent_ok: bool
    witnesses: list = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return self.injective_ok and self.edge_consistent_ok


def _edge_witnesses_for_pairs(d: GraphDataset, pair_filter=None) -> list[EdgeWitness]:
    """First-seen registry scan over co-occurring label pairs, dataset order."""
    registry: dict[tuple[str, str], tuple[str, bool]] = {}
    witnesses: list[EdgeWitness] = []
    for g in d.graphs:
        labels = g.labels
        adj = g.adjacency
        for i in range(g.n):
            for j in range(i + 1, g.n):
                a, b = labels[i], labels[j]
                pair = (a, b) if a < b else (b, a)
                if pair_filter is not None and not pair_filter(pair):
                    continue
                present = bool(adj[i, j])
                seen = registry.get(pair)
                if seen is None:
                    registry[pair] = (g.graph_id, present)
                elif seen[1] != present:
                    first_id, first_present = seen
                    witnesses.append(
                        EdgeWitness(
                            graph1_id=first_id,
                            graph2_id=g.graph_id,
                            label_u=pair[0],
                            label_v=pair[1],
                            present_in=first_id if first_present else g.graph_id,
                            absent_in=g.graph_id if first_present else first_id,
                        )
                    )
    return witnesses


def validate_ugc(d: GraphDataset, u: LabelUniverse, threads: int = 1) -> UgcValidationReport:
    """Check the label-based sufficient condition over a dataset.

    Condition (i): labels are injective within every graph. Condition (ii):
    for every unordered label pair occurring together in two or more
    graphs, edge presence agrees across all of them; disagreements are
    reported against the first graph that carried the pair. All violations
    are collected, not just the first.
    """
    witnesses: list = []
    injective_ok = True
    for g in d.graphs:
        if g.labels is None:
            raise LabelingError(f"graph {g.graph_id!r} has no labels")
        for lab in g.labels:
            if lab not in u:
                raise UniverseError(
                    f"graph {g.graph_id!r} label {lab!r} is not in the universe"
                )
        seen: dict[str, int] = {}
        for v, lab in enumerate(g.labels):
            if lab in seen:
                injective_ok = False
                witnesses.append(
                    InjectivityWitness(
                        graph_id=g.graph_id, node_a=seen[lab], node_b=v, shared_label=lab
                    )
                )
            else:
                seen[lab] = v

    if threads > 1:
        # Partition pairs by hash; each worker replays dataset order for its
        # share, so first-seen graphs match the single-threaded scan.
        def work(w):
            return _edge_witnesses_for_pairs(
                d, pair_filter=lambda pair: hash(pair) % threads == w
            )

        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(work, range(threads)))
        edge_witnesses = [w for chunk in chunks for w in chunk]
    else:
        edge_witnesses = _edge_witnesses_for_pairs(d)
    order = {g.graph_id: i for i, g in enumerate(d.graphs)}
    edge_witnesses.sort(key=lambda w: (order[w.graph2_id], w.label_u, w.label_v))
    witnesses.extend(edge_witnesses)
    return UgcValidationReport(
        injective_ok=injective_ok,
        edge_consistent_ok=not edge_witnesses,
        witnesses=witnesses,
    )


def ugc_colouring(g: ColoredGraph, u: LabelUniverse) -> DiscreteColouring:
    """tau(v) = universe rank of v's label; depends on labels only."""
    if g.labels is None:
        raise LabelingError(f"graph {g.graph_id!r} has no labels")
    order = np.array([u.rank(lab) for lab in g.labels], dtype=np.int64)
    return DiscreteColouring(order=order, mode="ugc")


def ugc_encoding(
    g: ColoredGraph, u: LabelUniverse, width: int | None = None, compact: bool = False
) -> FeatureTensor:
    """One-hot rows at tau(v)-1; default width is the full universe size.

    ``compact`` re-ranks against the labels present in this graph only,
    which shrinks the width but breaks cross-graph comparability.
    """
    if compact:
        local = LabelUniverse(tuple(sorted(g.labels if g.labels else ())))
        tau = ugc_colouring(g, local)
        return one_hot_ranks(tau, width if width is not None else local.size)
    tau = ugc_colouring(g, u)
    if width is None:
        width = u.size
    if width < u.size:
        raise WidthError(f"width {width} below universe size {u.size}")
    return one_hot_ranks(tau, width)


def gc_encoding(g: ColoredGraph, width: int | None = None) -> FeatureTensor:
    """One-hot rows of the canonical order rho(v); width defaults to g.n.

    A dataset-wide width (its max n) keeps encodings concatenable across
    graphs of different sizes; higher rank columns stay unused.
    """
    rho = canonical_form(g).colouring
    return one_hot_ranks(rho, width if width is not None else g.n)
