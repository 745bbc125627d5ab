"""Canonization-based positional encodings for message-passing networks."""

__version__ = "0.1.0"

from canon_gnn.canonize import (
    CanonResult,
    Certificate,
    canonical_form,
    is_rigid,
    isomorphic,
    refine,
)
from canon_gnn.datasets import GraphDataset, load_dataset, load_edge_list, save_dataset
from canon_gnn.distance import AlignmentResult, graph_distance, stability_ratio
from canon_gnn.errors import CanonGnnError
from canon_gnn.graphs import (
    ColoredGraph,
    DiscreteColouring,
    FeatureTensor,
    Permutation,
    apply_permutation,
    concat_features,
    graph_from_edges,
    one_hot_colors,
    one_hot_ranks,
    permute_features,
)
from canon_gnn.mpnn import (
    MpnnConfig,
    MpnnModel,
    TrainReport,
    backward,
    forward,
    init_model,
    load_model,
    save_model,
    train,
)
from canon_gnn.probe import (
    DivergenceReport,
    PerturbationSpec,
    SubgraphConsistencyReport,
    apply_perturbation,
    gen_counterexample,
    run_probe,
    subgraph_consistency_probe,
    triangle_gadget_pair,
)
from canon_gnn.ugc import (
    LabelUniverse,
    UgcValidationReport,
    build_universe,
    gc_encoding,
    ugc_colouring,
    ugc_encoding,
    validate_ugc,
)
from canon_gnn.wltest import WlVerdict, csl_benchmark, gen_csl, gen_wl_hard_pair, wl_test

__all__ = [
    "__version__",
    "AlignmentResult",
    "CanonGnnError",
    "CanonResult",
    "Certificate",
    "ColoredGraph",
    "DiscreteColouring",
    "DivergenceReport",
    "FeatureTensor",
    "GraphDataset",
    "LabelUniverse",
    "MpnnConfig",
    "MpnnModel",
    "Permutation",
    "PerturbationSpec",
    "SubgraphConsistencyReport",
    "TrainReport",
    "UgcValidationReport",
    "WlVerdict",
    "apply_permutation",
    "apply_perturbation",
    "backward",
    "build_universe",
    "canonical_form",
    "concat_features",
    "csl_benchmark",
    "forward",
    "gc_encoding",
    "gen_counterexample",
    "gen_csl",
    "gen_wl_hard_pair",
    "graph_distance",
    "graph_from_edges",
    "init_model",
    "is_rigid",
    "isomorphic",
    "load_dataset",
    "load_edge_list",
    "load_model",
    "one_hot_colors",
    "one_hot_ranks",
    "permute_features",
    "refine",
    "run_probe",
    "save_dataset",
    "save_model",
    "stability_ratio",
    "subgraph_consistency_probe",
    "train",
    "triangle_gadget_pair",
    "ugc_colouring",
    "ugc_encoding",
    "validate_ugc",
    "wl_test",
]
