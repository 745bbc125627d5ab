"""canon-gnn command line: dataset tooling around the library modules.

Every report is JSON with a fixed envelope (tool, version, command, seed,
effective config) so runs can be diffed byte for byte. Config values come
from flags first, then an optional TOML file, then built-in defaults.
Exit codes: 0 success, 1 domain error, 2 only for `validate-ugc --strict`
with witnesses, 64 usage errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import difflib
import json
import os
import re
import sys
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

import numpy as np

from canon_gnn import __version__
from canon_gnn.canonize import canonical_form
from canon_gnn.datasets import GraphDataset, load_dataset, save_dataset
from canon_gnn.distance import EXACT_LIMIT, graph_distance
from canon_gnn.errors import CanonGnnError, UsageError, ValidationError
from canon_gnn.graphs import concat_features, one_hot_colors
from canon_gnn.mpnn import MpnnConfig, save_model, train
from canon_gnn.probe import run_probe
from canon_gnn.ugc import build_universe, gc_encoding, ugc_colouring, ugc_encoding, validate_ugc
from canon_gnn.wltest import (
    DEFAULT_CSL_N,
    DEFAULT_CSL_SKIPS,
    csl_benchmark,
    gen_wl_hard_pair,
    wl_test,
)

COMMANDS = (
    "canonize",
    "encode",
    "validate-ugc",
    "distance",
    "isotest",
    "gen-csl",
    "gen-pairs",
    "train",
    "probe-stability",
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _default_threads() -> int:
    raw = os.environ.get("CANON_GNN_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="rng seed (default 0)")
    common.add_argument("--config", default=None, help="TOML file with flag defaults")
    common.add_argument(
        "--verbose", action="store_true", help="progress notes on stderr"
    )

    parser = _Parser(prog="canon-gnn", description=__doc__)
    parser.add_argument("--version", action="version", version=f"canon-gnn {__version__}")
    subs = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub = {}

    p = sub["canonize"] = subs.add_parser(
        "canonize", parents=[common], help="canonical order and certificate per graph"
    )
    p.add_argument("--input", help="dataset JSON file")
    p.add_argument("--graph-id", default=None, help="restrict to one graph id")
    p.add_argument("--out", help="report JSON path")

    p = sub["encode"] = subs.add_parser(
        "encode", parents=[common], help="positional encoding matrices"
    )
    p.add_argument("--input", help="dataset JSON file")
    p.add_argument("--mode", choices=("gc", "ugc"), help="encoding family")
    p.add_argument("--width", type=int, default=None, help="override matrix width")
    p.add_argument(
        "--compact",
        action="store_true",
        help="ugc only: width = labels present in each graph (breaks cross-graph comparability)",
    )
    p.add_argument("--out", help="report JSON path")

    p = sub["validate-ugc"] = subs.add_parser(
        "validate-ugc", parents=[common], help="check dataset-level labeling consistency"
    )
    p.add_argument("--input", help="dataset JSON file")
    p.add_argument("--report", default=None, help="write full witness report here")
    p.add_argument(
        "--strict", action="store_true", help="exit 2 when witnesses are found"
    )
    p.add_argument("--threads", type=int, default=_default_threads())

    p = sub["distance"] = subs.add_parser(
        "distance", parents=[common], help="alignment distance between two graphs"
    )
    p.add_argument("--input", help="dataset JSON file")
    p.add_argument("--pair", nargs=2, metavar=("ID1", "ID2"))
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true", help="branch-and-bound (n <= 10)")
    mode.add_argument("--heuristic", action="store_true", help="greedy upper bound")

    p = sub["isotest"] = subs.add_parser(
        "isotest", parents=[common], help="refinement-based isomorphism verdict"
    )
    p.add_argument("--input", help="dataset JSON file")
    p.add_argument("--pair", nargs=2, metavar=("ID1", "ID2"))
    p.add_argument(
        "--pe",
        choices=("none", "gc", "ugc"),
        default="gc",
        help="positional signal fed to the refinement (gc is exact; none reports 1-WL equivalence)",
    )

    p = sub["gen-csl"] = subs.add_parser(
        "gen-csl", parents=[common], help="circulant skip-link classification dataset"
    )
    p.add_argument("--n", type=int, default=DEFAULT_CSL_N)
    p.add_argument(
        "--skips",
        default=",".join(str(s) for s in DEFAULT_CSL_SKIPS),
        help="comma-separated skip lengths, one class each",
    )
    p.add_argument("--copies", type=int, default=15, help="permuted copies per class")
    p.add_argument("--out", help="dataset JSON path")

    p = sub["gen-pairs"] = subs.add_parser(
        "gen-pairs", parents=[common], help="1-WL-hard cycle pairs (C_2m vs C_m + C_m)"
    )
    p.add_argument("--m-min", type=int, default=3)
    p.add_argument("--m-max", type=int, default=10)
    p.add_argument("--out", help="dataset JSON path")

    p = sub["train"] = subs.add_parser(
        "train", parents=[common], help="fit the reference network on a labeled dataset"
    )
    p.add_argument("--input", help="dataset JSON file with integer targets")
    p.add_argument("--pe", choices=("none", "gc", "ugc"), default="none")
    p.add_argument(
        "--readout", choices=("sum", "mean", "ugc", "ugc_weighted"), default="sum"
    )
    p.add_argument("--layers", type=int, default=3)
    p.add_argument("--dim", type=int, default=32)
    p.add_argument("--lr", type=float, default=1e-2)
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("--momentum", type=float, default=0.9)
    p.add_argument("--epochs", type=int, default=600)
    p.add_argument("--patience", type=int, default=25)
    p.add_argument("--test-frac", type=float, default=0.2)
    p.add_argument("--clip-norm", type=float, default=5.0, help="global gradient norm cap")
    p.add_argument("--w-diag", action="store_true", help="diagonal per-label readout weights")
    p.add_argument("--save-model", default=None, help="checkpoint path")
    p.add_argument("--report", default=None, help="report JSON path (default stdout)")

    p = sub["probe-stability"] = subs.add_parser(
        "probe-stability", parents=[common], help="embedding gap per unit distance, gc vs ugc"
    )
    p.add_argument("--sizes", default="6,8,10,12", help="comma-separated node counts")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--threads", type=int, default=_default_threads())
    p.add_argument("--report", default=None, help="report JSON path (default stdout)")
    p.add_argument("--csv", default=None, help="also write per-trial rows as CSV")

    return parser, sub


def _apply_config(subparser, command: str, path: str) -> None:
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except tomllib.TOMLDecodeError as e:
        raise UsageError(f"bad config file {path}: {e}") from e
    section = doc.get(command, {})
    flat = {k: v for k, v in doc.items() if not isinstance(v, dict)}
    flat.update(section if isinstance(section, dict) else {})
    dests = {a.dest for a in subparser._actions}
    defaults = {}
    for key, value in flat.items():
        dest = key.replace("-", "_")
        if dest not in dests:
            raise UsageError(f"unknown config key {key!r} for {command}")
        if isinstance(value, list):
            value = ",".join(str(v) for v in value)
        defaults[dest] = value
    subparser.set_defaults(**defaults)


def _suggest(message: str, parser, sub) -> str:
    bad_cmd = re.search(r"invalid choice: '([^']+)'", message)
    if bad_cmd:
        close = difflib.get_close_matches(bad_cmd.group(1), COMMANDS, n=1)
        if close:
            return f"{message} (did you mean {close[0]!r}?)"
    bad_args = re.search(r"unrecognized arguments: (.+)", message)
    if bad_args:
        token = bad_args.group(1).split()[0].split("=")[0]
        options = set()
        for p in sub.values():
            options.update(p._option_string_actions)
        close = difflib.get_close_matches(token, sorted(options), n=1)
        if close:
            return f"{message} (did you mean {close[0]!r}?)"
    return message


def _require(args, name: str):
    value = getattr(args, name.replace("-", "_"))
    if value is None:
        raise UsageError(f"--{name} is required")
    return value


def _envelope(args, payload: dict) -> dict:
    skip = {"func", "verbose"}
    config = {
        k: v for k, v in sorted(vars(args).items()) if k not in skip and k != "command"
    }
    report = {
        "tool": "canon-gnn",
        "version": __version__,
        "command": args.command,
        "seed": getattr(args, "seed", None),
        "config": config,
    }
    report.update(payload)
    return report


def _emit(args, payload: dict, path) -> None:
    text = json.dumps(_envelope(args, payload), indent=2, sort_keys=True) + "\n"
    if path:
        Path(path).write_text(text)
        if args.verbose:
            print(f"wrote {path}", file=sys.stderr)
    else:
        sys.stdout.write(text)


def _load_input(args) -> GraphDataset:
    return load_dataset(_require(args, "input"))


def _pair(args, d: GraphDataset):
    ids = _require(args, "pair")
    return d.by_id(ids[0]), d.by_id(ids[1])


def _parse_int_list(raw: str, flag: str) -> list[int]:
    try:
        values = [int(tok) for tok in str(raw).split(",") if tok.strip() != ""]
    except ValueError as e:
        raise UsageError(f"--{flag} expects comma-separated integers, got {raw!r}") from e
    if not values:
        raise UsageError(f"--{flag} must name at least one value")
    return values


def _cmd_canonize(args) -> int:
    d = _load_input(args)
    graphs = d.graphs
    if args.graph_id is not None:
        graphs = [d.by_id(args.graph_id)]
    entries = []
    for g in graphs:
        result = canonical_form(g)
        entries.append(
            {
                "id": g.graph_id,
                "order": [int(r) for r in result.colouring.order],
                "certificate_hex": result.certificate.hex,
            }
        )
    _emit(args, {"graphs": entries}, _require(args, "out"))
    return 0


def _cmd_encode(args) -> int:
    d = _load_input(args)
    mode = _require(args, "mode")
    if args.compact and mode != "ugc":
        raise UsageError("--compact applies to --mode ugc only")
    entries = []
    if mode == "gc":
        width = args.width if args.width is not None else max(g.n for g in d.graphs)
        for g in d.graphs:
            x = gc_encoding(g, width)
            entries.append({"id": g.graph_id, "shape": [x.rows, x.cols], "rows": x.data.tolist()})
    else:
        universe = build_universe(d)
        for g in d.graphs:
            x = ugc_encoding(g, universe, width=args.width, compact=args.compact)
            entries.append({"id": g.graph_id, "shape": [x.rows, x.cols], "rows": x.data.tolist()})
    _emit(args, {"mode": mode, "graphs": entries}, _require(args, "out"))
    return 0


def _cmd_validate_ugc(args) -> int:
    d = _load_input(args)
    universe = build_universe(d)
    report = validate_ugc(d, universe, threads=max(1, args.threads))
    payload = {
        "valid": report.valid,
        "injective_ok": report.injective_ok,
        "edge_consistent_ok": report.edge_consistent_ok,
        "universe_size": universe.size,
        "witnesses": [dataclasses.asdict(w) for w in report.witnesses],
    }
    if args.report:
        _emit(args, payload, args.report)
    total = len(report.witnesses)
    print(f"ugc-valid: {'true' if report.valid else 'false'} ({total} witnesses)")
    if not args.report and not report.valid:
        sys.stdout.write(json.dumps(payload["witnesses"], indent=2, sort_keys=True) + "\n")
    if args.strict and not report.valid:
        return 2
    return 0


def _cmd_distance(args) -> int:
    d = _load_input(args)
    g1, g2 = _pair(args, d)
    if args.exact:
        mode = "exact"
    elif args.heuristic:
        mode = "heuristic"
    else:
        mode = "exact" if max(g1.n, g2.n) <= EXACT_LIMIT else "heuristic"
    result = graph_distance(g1, g2, mode=mode)
    payload = {
        "pair": [g1.graph_id, g2.graph_id],
        "distance": result.distance,
        "exact": result.exact,
        "nodes_explored": result.nodes_explored,
        "permutation": [int(v) for v in result.permutation.mapping],
    }
    _emit(args, payload, None)
    return 0


def _cmd_isotest(args) -> int:
    d = _load_input(args)
    g1, g2 = _pair(args, d)
    universe = None
    if args.pe == "ugc":
        universe = build_universe(d)
    verdict = wl_test(g1, g2, pe=args.pe, universe=universe)
    print(f"isomorphic: {'false' if verdict.distinguishable else 'true'}")
    return 0


def _cmd_gen_csl(args) -> int:
    skips = _parse_int_list(args.skips, "skips")
    d = csl_benchmark(n=args.n, skips=skips, copies=args.copies, seed=args.seed)
    out = _require(args, "out")
    save_dataset(d, out)
    print(f"wrote {len(d.graphs)} graphs ({len(skips)} classes) to {out}")
    return 0


def _cmd_gen_pairs(args) -> int:
    if args.m_min < 3 or args.m_max < args.m_min:
        raise UsageError("need 3 <= m-min <= m-max")
    graphs = []
    for m in range(args.m_min, args.m_max + 1):
        big, twin = gen_wl_hard_pair(m)
        graphs.extend([big, twin])
    out = _require(args, "out")
    save_dataset(GraphDataset(graphs=graphs), out)
    print(f"wrote {len(graphs)} graphs to {out}")
    return 0


def _stratified_split(d: GraphDataset, test_frac: float, seed: int):
    if not 0.0 < test_frac < 1.0:
        raise UsageError(f"--test-frac must lie in (0, 1), got {test_frac}")
    by_class: dict[int, list[str]] = {}
    for g in d.graphs:
        if g.target is None:
            raise ValidationError(f"graph {g.graph_id!r} has no target")
        by_class.setdefault(int(g.target), []).append(g.graph_id)
    rng = np.random.default_rng([seed, 104729])
    test = set()
    for cls in sorted(by_class):
        ids = by_class[cls]
        if len(ids) < 2:
            raise ValidationError(f"class {cls} needs at least 2 graphs to split")
        k = min(len(ids) - 1, max(1, round(test_frac * len(ids))))
        picks = rng.permutation(len(ids))[:k]
        test.update(ids[int(i)] for i in picks)
    train_ids = [g.graph_id for g in d.graphs if g.graph_id not in test]
    test_ids = [g.graph_id for g in d.graphs if g.graph_id in test]
    return train_ids, test_ids


def build_features(d: GraphDataset, pe: str, readout: str = "sum"):
    """Per-graph input tensors plus the colourings a ugc readout needs.

    Color one-hots are sized by the dataset-wide max color; gc appends
    canonical-rank one-hots sized by the max node count; ugc appends
    universe-rank one-hots sized by the full universe.
    """
    color_width = int(max(int(g.colors.max()) for g in d.graphs)) + 1
    xs = [one_hot_colors(g, color_width) for g in d.graphs]
    colourings = None
    if pe == "none":
        features = xs
    elif pe == "gc":
        width = max(g.n for g in d.graphs)
        features = [concat_features(x, gc_encoding(g, width)) for g, x in zip(d.graphs, xs)]
    elif pe == "ugc":
        universe = build_universe(d)
        features = [
            concat_features(x, ugc_encoding(g, universe)) for g, x in zip(d.graphs, xs)
        ]
    else:
        raise UsageError(f"unknown pe mode {pe!r}")
    if readout == "ugc_weighted":
        universe = build_universe(d)
        colourings = [ugc_colouring(g, universe) for g in d.graphs]
    return features, colourings


def _cmd_train(args) -> int:
    d = _load_input(args)
    readout = "ugc_weighted" if args.readout in ("ugc", "ugc_weighted") else args.readout
    features, colourings = build_features(d, args.pe, readout)
    targets = [int(g.target) for g in d.graphs if g.target is not None]
    if len(targets) != len(d.graphs):
        raise ValidationError("every graph needs an integer class target")
    config = MpnnConfig(
        input_width=features[0].cols,
        num_classes=max(targets) + 1,
        num_layers=args.layers,
        hidden_dim=args.dim,
        epsilon=args.epsilon,
        readout=readout,
        seed=args.seed,
        w_diag=args.w_diag,
    )
    split = _stratified_split(d, args.test_frac, args.seed)
    if args.verbose:
        print(
            f"training on {len(split[0])} graphs, testing on {len(split[1])}",
            file=sys.stderr,
        )
    model, report = train(
        config,
        d,
        split,
        features,
        colourings,
        lr=args.lr,
        momentum=args.momentum,
        max_epochs=args.epochs,
        patience=args.patience,
        clip_norm=args.clip_norm,
    )
    if args.save_model:
        save_model(model, args.save_model)
    payload = {
        "split": {"train": split[0], "test": split[1]},
        "report": dataclasses.asdict(report),
    }
    _emit(args, payload, args.report)
    return 0


def _cmd_probe_stability(args) -> int:
    sizes = _parse_int_list(args.sizes, "sizes")
    reports, aggregates = run_probe(
        sizes, trials=args.trials, seed=args.seed, threads=max(1, args.threads)
    )
    payload = {
        "reports": [dataclasses.asdict(r) for r in reports],
        "aggregates": aggregates,
    }
    _emit(args, payload, args.report)
    if args.csv:
        fields = [f.name for f in dataclasses.fields(reports[0])] if reports else []
        lines = [",".join(fields)]
        for r in reports:
            row = []
            for f in fields:
                value = getattr(r, f)
                row.append(f"{value:.17g}" if isinstance(value, float) else str(value))
            lines.append(",".join(row))
        Path(args.csv).write_text("\n".join(lines) + "\n")
    return 0


_HANDLERS = {
    "canonize": _cmd_canonize,
    "encode": _cmd_encode,
    "validate-ugc": _cmd_validate_ugc,
    "distance": _cmd_distance,
    "isotest": _cmd_isotest,
    "gen-csl": _cmd_gen_csl,
    "gen-pairs": _cmd_gen_pairs,
    "train": _cmd_train,
    "probe-stability": _cmd_probe_stability,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, sub = _build_parser()
    try:
        probe, _ = parser.parse_known_args(argv)
        if probe.command is None:
            parser.print_usage(sys.stderr)
            print("usage error: a command is required", file=sys.stderr)
            return 64
        if getattr(probe, "config", None):
            _apply_config(sub[probe.command], probe.command, probe.config)
        args = parser.parse_args(argv)
        return _HANDLERS[args.command](args)
    except UsageError as e:
        print(f"usage error: {_suggest(str(e), parser, sub)}", file=sys.stderr)
        return 64
    except CanonGnnError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
