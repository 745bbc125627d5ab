"""Dataset container and file formats.

Two on-disk formats, both specified field-by-field in docs/formats.md:

* JSON dataset: ``{"graphs": [...], "label_universe": [...]?}`` where each
  graph is ``{"id", "num_nodes", "edges", "colors"?, "labels"?, "target"?}``.
* Edge list: one ``u v`` pair per line, ``#`` starts a comment, blank lines
  ignored; node count is max endpoint + 1 and colors default to zero.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from canon_gnn.errors import LabelingError, ParseError, ValidationError
from canon_gnn.graphs import ColoredGraph, graph_from_edges


@dataclass(eq=False)
class GraphDataset:
    """Ordered collection of graphs plus an optional shared label universe.

    The universe, when present, must be sorted, duplicate-free, and cover
    every label used by any member graph (it may contain extra labels: a
    dataset can be a slice of a larger corpus).
    """

    graphs: list[ColoredGraph] = field(default_factory=list)
    label_universe: list[str] | None = None

    def __post_init__(self):
        if self.label_universe is not None:
            universe = [str(x) for x in self.label_universe]
            if sorted(set(universe)) != universe:
                raise ValidationError("label_universe must be sorted and duplicate-free")
            known = set(universe)
            for g in self.graphs:
                if g.labels is None:
                    continue
                missing = [x for x in g.labels if x not in known]
                if missing:
                    raise ValidationError(
                        f"graph {g.graph_id!r} uses labels outside the universe: "
                        f"{missing[:3]}"
                    )
            self.label_universe = universe

    def __len__(self) -> int:
        return len(self.graphs)

    def __iter__(self):
        return iter(self.graphs)

    def by_id(self, graph_id: str) -> ColoredGraph:
        for g in self.graphs:
            if g.graph_id == graph_id:
                return g
        raise LabelingError(f"no graph with id {graph_id!r} in dataset")

    def equals(self, other: "GraphDataset") -> bool:
        return (
            len(self.graphs) == len(other.graphs)
            and all(a.equals(b) for a, b in zip(self.graphs, other.graphs))
            and self.label_universe == other.label_universe
        )


def _graph_from_record(rec, index: int) -> ColoredGraph:
    if not isinstance(rec, dict):
        raise ParseError(f"graphs[{index}]: expected an object, got {type(rec).__name__}")

    def need(key, types):
        if key not in rec:
            raise ParseError(f"graphs[{index}]: missing field {key!r}")
        val = rec[key]
        if not isinstance(val, types):
            raise ParseError(f"graphs[{index}].{key}: wrong type {type(val).__name__}")
        return val

    gid = need("id", str)
    n = need("num_nodes", int)
    edges = need("edges", list)
    for k, e in enumerate(edges):
        if not (isinstance(e, list) and len(e) == 2 and all(isinstance(x, int) for x in e)):
            raise ParseError(f"graphs[{index}].edges[{k}]: expected [u, v] integer pair")
    colors = rec.get("colors")
    if colors is not None:
        if not (isinstance(colors, list) and all(isinstance(x, int) for x in colors)):
            raise ParseError(f"graphs[{index}].colors: expected a list of integers")
    labels = rec.get("labels")
    if labels is not None:
        if not (isinstance(labels, list) and all(isinstance(x, str) for x in labels)):
            raise ParseError(f"graphs[{index}].labels: expected a list of strings")
    target = rec.get("target")
    if target is not None and not isinstance(target, (int, float)):
        raise ParseError(f"graphs[{index}].target: expected a number or null")
    try:
        return graph_from_edges(
            n, edges, colors=colors, labels=labels, graph_id=gid, target=target
        )
    except (ValidationError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise ValidationError(f"graphs[{index}] ({gid!r}): {exc}") from exc
        raise ParseError(f"graphs[{index}] ({gid!r}): {exc}") from exc


def load_dataset(path) -> GraphDataset:
    """Read a JSON dataset file; see docs/formats.md for the exact schema."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: line {exc.lineno} col {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict) or "graphs" not in doc:
        raise ParseError(f"{path}: top level must be an object with a 'graphs' field")
    if not isinstance(doc["graphs"], list):
        raise ParseError(f"{path}: 'graphs' must be a list")
    universe = doc.get("label_universe")
    if universe is not None and not (
        isinstance(universe, list) and all(isinstance(x, str) for x in universe)
    ):
        raise ParseError(f"{path}: 'label_universe' must be a list of strings")
    graphs = [_graph_from_record(rec, i) for i, rec in enumerate(doc["graphs"])]
    seen_ids: set[str] = set()
    for g in graphs:
        if g.graph_id in seen_ids:
            raise ParseError(f"{path}: duplicate graph id {g.graph_id!r}")
        seen_ids.add(g.graph_id)
    return GraphDataset(graphs=graphs, label_universe=universe)


def _graph_to_record(g: ColoredGraph) -> dict:
    rec = {
        "id": g.graph_id,
        "num_nodes": g.n,
        "edges": [[u, v] for u, v in g.edges],
        "colors": g.colors.tolist(),
    }
    if g.labels is not None:
        rec["labels"] = list(g.labels)
    if g.target is not None:
        rec["target"] = g.target
    return rec


def save_dataset(d: GraphDataset, path) -> None:
    """Write a dataset as JSON; load(save(d)) is structurally equal to d."""
    doc: dict = {"graphs": [_graph_to_record(g) for g in d.graphs]}
    if d.label_universe is not None:
        doc["label_universe"] = list(d.label_universe)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def load_edge_list(path, graph_id: str | None = None) -> ColoredGraph:
    """Read a single graph in the ``u v`` per-line format; colors all zero."""
    edges = []
    top = -1
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ParseError(f"{path}: line {lineno}: expected 'u v', got {raw.strip()!r}")
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError as exc:
                raise ParseError(f"{path}: line {lineno}: non-integer endpoint") from exc
            if u < 0 or v < 0:
                raise ParseError(f"{path}: line {lineno}: negative node index")
            if u == v:
                raise ValidationError(f"{path}: line {lineno}: self-loop at node {u}")
            edges.append((u, v))
            top = max(top, u, v)
    if top < 0:
        raise ParseError(f"{path}: no edges found")
    gid = graph_id if graph_id is not None else str(path)
    return graph_from_edges(top + 1, edges, graph_id=gid)
