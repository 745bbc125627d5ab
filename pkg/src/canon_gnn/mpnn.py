"""Minimal message-passing network with hand-rolled reverse-mode gradients.

Layer update, for node features H (one row per node) and adjacency A:

    Z = (1 + eps) * H + A H          aggregation with self-weighting
    H' = relu(Z W1^T + b1) W2^T + b2 two-layer perceptron, shared per layer

Readouts: plain sum, mean, or a label-indexed weighted sum where every
universe rank k owns a trainable matrix W_k applied to the features of the
node carrying that rank. A single affine head produces class logits.
Everything is numpy float64; gradients are exact reverse-mode and checked
against central finite differences in the test suite.
"""

from __future__ import annotations

import hashlib
import struct
import time
from dataclasses import dataclass, field

import numpy as np

from canon_gnn.errors import (
    ConfigurationError,
    DimensionError,
    NumericError,
    ParseError,
    ValidationError,
)
from canon_gnn.graphs import ColoredGraph, DiscreteColouring, FeatureTensor

READOUTS = ("sum", "mean", "ugc_weighted")

CHECKPOINT_MAGIC = b"CGNN"
CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class MpnnConfig:
    input_width: int
    num_classes: int
    num_layers: int = 3
    hidden_dim: int = 32
    epsilon: float | tuple[float, ...] = 0.0
    readout: str = "sum"
    seed: int = 0
    w_diag: bool = False

    def epsilons(self) -> np.ndarray:
        eps = self.epsilon
        if np.isscalar(eps):
            out = np.full(self.num_layers, float(eps))
        else:
            out = np.array(eps, dtype=np.float64)
            if out.shape != (self.num_layers,):
                raise ConfigurationError(
                    f"epsilon needs {self.num_layers} entries, got shape {out.shape}"
                )
        if not np.isfinite(out).all():
            raise ConfigurationError("epsilon values must be finite")
        return out


class MpnnModel:
    """Parameter container; see init_model for the seeded initialization."""

    def __init__(self, config: MpnnConfig, layers, classifier_w, classifier_b):
        self.config = config
        self.epsilons = config.epsilons()
        self.layers = layers  # list of dicts with W1, b1, W2, b2
        self.classifier_w = classifier_w
        self.classifier_b = classifier_b
        # Universe rank -> readout weight, allocated on first sight of the
        # rank. Values derive from (seed, rank) so creation order is
        # irrelevant to the numbers.
        self.readout_weights: dict[int, np.ndarray] = {}

    def readout_weight(self, rank: int) -> np.ndarray:
        w = self.readout_weights.get(rank)
        if w is None:
            rng = np.random.default_rng([self.config.seed, 7919, rank])
            h = self.config.hidden_dim
            if self.config.w_diag:
                w = 1.0 + 0.1 * rng.standard_normal(h)
            else:
                w = np.eye(h) + 0.1 * rng.standard_normal((h, h)) / np.sqrt(h)
            self.readout_weights[rank] = w
        return w

    def parameter_arrays(self):
        """Deterministic (name, array) walk over every parameter group."""
        for t, layer in enumerate(self.layers):
            for key in ("W1", "b1", "W2", "b2"):
                yield f"layer{t}.{key}", layer[key]
        yield "classifier.W", self.classifier_w
        yield "classifier.b", self.classifier_b
        for rank in sorted(self.readout_weights):
            yield f"readout.W{rank}", self.readout_weights[rank]


def init_model(config: MpnnConfig) -> MpnnModel:
    """Seeded Gaussian initialization; classifier starts near zero."""
    if config.num_layers < 1:
        raise ConfigurationError("num_layers must be >= 1")
    if config.hidden_dim < 1:
        raise ConfigurationError("hidden_dim must be >= 1")
    if config.readout not in READOUTS:
        raise ConfigurationError(f"unknown readout {config.readout!r}")
    if config.input_width < 1 or config.num_classes < 1:
        raise ConfigurationError("input_width and num_classes must be >= 1")
    config.epsilons()
    rng = np.random.default_rng(config.seed)
    h = config.hidden_dim
    layers = []
    fan_in = config.input_width
    # The aggregation Z = (1+eps)H + AH multiplies feature scale by about
    # 1 + degree per layer; the 0.25 on W2 counteracts that so deep stacks
    # neither saturate the softmax nor vanish on sparse graphs.
    for _ in range(config.num_layers):
        layers.append(
            {
                "W1": rng.standard_normal((h, fan_in)) * np.sqrt(2.0 / fan_in),
                "b1": np.zeros(h),
                "W2": rng.standard_normal((h, h)) * (0.25 / np.sqrt(h)),
                "b2": np.zeros(h),
            }
        )
        fan_in = h
    # Zero head: with class-balanced data the first gradient steps then
    # cancel the shared embedding component and move along class
    # differences only, which the readout sums otherwise bury.
    classifier_w = np.zeros((config.num_classes, h))
    classifier_b = np.zeros(config.num_classes)
    return MpnnModel(config, layers, classifier_w, classifier_b)


def _forward_cached(model, g, features, colouring):
    cfg = model.config
    if features.rows != g.n:
        raise DimensionError(f"feature rows {features.rows} do not match n={g.n}")
    if features.cols != cfg.input_width:
        raise DimensionError(
            f"feature width {features.cols} does not match model input {cfg.input_width}"
        )
    if cfg.readout == "ugc_weighted" and colouring is None:
        raise ConfigurationError("ugc_weighted readout needs a discrete colouring")
    a = g.adjacency.astype(np.float64)
    h = features.data
    cache = {"A": a, "H": [h], "Z": [], "U": [], "R": []}
    for t, layer in enumerate(model.layers):
        z = (1.0 + model.epsilons[t]) * h + a @ h
        u = z @ layer["W1"].T + layer["b1"]
        r = np.maximum(u, 0.0)
        h = r @ layer["W2"].T + layer["b2"]
        cache["Z"].append(z)
        cache["U"].append(u)
        cache["R"].append(r)
        cache["H"].append(h)
    if cfg.readout == "sum":
        emb = h.sum(axis=0)
    elif cfg.readout == "mean":
        emb = h.mean(axis=0)
    else:
        emb = np.zeros(cfg.hidden_dim)
        for v in range(g.n):
            w = model.readout_weight(colouring.rank(v))
            emb += w * h[v] if cfg.w_diag else w @ h[v]
    logits = model.classifier_w @ emb + model.classifier_b
    cache["emb"] = emb
    cache["logits"] = logits
    cache["colouring"] = colouring
    cache["n"] = g.n
    return cache


def forward(
    model: MpnnModel,
    g: ColoredGraph,
    features: FeatureTensor,
    colouring: DiscreteColouring | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Graph embedding and class logits for one graph."""
    cache = _forward_cached(model, g, features, colouring)
    return cache["emb"], cache["logits"]


class Gradients:
    """Mirrors the model's parameter groups; missing ranks mean zero."""

    def __init__(self, model: MpnnModel):
        self.layers = [
            {k: np.zeros_like(v) for k, v in layer.items()} for layer in model.layers
        ]
        self.classifier_w = np.zeros_like(model.classifier_w)
        self.classifier_b = np.zeros_like(model.classifier_b)
        self.readout_weights = {
            k: np.zeros_like(v) for k, v in model.readout_weights.items()
        }

    def parameter_arrays(self):
        for t, layer in enumerate(self.layers):
            for key in ("W1", "b1", "W2", "b2"):
                yield f"layer{t}.{key}", layer[key]
        yield "classifier.W", self.classifier_w
        yield "classifier.b", self.classifier_b
        for rank in sorted(self.readout_weights):
            yield f"readout.W{rank}", self.readout_weights[rank]


def _softmax(logits):
    shifted = logits - logits.max()
    e = np.exp(shifted)
    return e / e.sum()


def _backward_graph(model, cache, demb, grads):
    cfg = model.config
    h_final = cache["H"][-1]
    n = cache["n"]
    if cfg.readout == "sum":
        dh = np.tile(demb, (n, 1))
    elif cfg.readout == "mean":
        dh = np.tile(demb / n, (n, 1))
    else:
        colouring = cache["colouring"]
        dh = np.zeros_like(h_final)
        for v in range(n):
            rank = colouring.rank(v)
            w = model.readout_weight(rank)
            gw = grads.readout_weights.setdefault(rank, np.zeros_like(w))
            if cfg.w_diag:
                gw += demb * h_final[v]
                dh[v] = w * demb
            else:
                gw += np.outer(demb, h_final[v])
                dh[v] = w.T @ demb
    a = cache["A"]
    for t in reversed(range(len(model.layers))):
        layer = model.layers[t]
        glayer = grads.layers[t]
        r = cache["R"][t]
        u = cache["U"][t]
        z = cache["Z"][t]
        glayer["W2"] += dh.T @ r
        glayer["b2"] += dh.sum(axis=0)
        dr = dh @ layer["W2"]
        du = dr * (u > 0.0)
        glayer["W1"] += du.T @ z
        glayer["b1"] += du.sum(axis=0)
        dz = du @ layer["W1"]
        dh = (1.0 + model.epsilons[t]) * dz + a @ dz


def backward(model: MpnnModel, batch, grad_logits=None) -> tuple[float, Gradients]:
    """Mean cross-entropy loss and exact gradients over a batch.

    ``batch`` is a list of (graph, features, colouring-or-None, target)
    tuples. Accumulation follows ascending graph id so results do not
    depend on list order. ``grad_logits`` overrides the cross-entropy
    upstream gradient per graph (aligned with the sorted order); targets
    may then be None.
    """
    if not batch:
        raise ConfigurationError("empty batch")
    items = sorted(batch, key=lambda item: item[0].graph_id)
    grads = Gradients(model)
    total_loss = 0.0
    bad = []
    for i, (g, features, colouring, target) in enumerate(items):
        cache = _forward_cached(model, g, features, colouring)
        logits = cache["logits"]
        if grad_logits is not None:
            dlogits = np.asarray(grad_logits[i], dtype=np.float64)
        else:
            probs = _softmax(logits)
            y = int(target)
            loss = -np.log(max(probs[y], 1e-300))
            if not np.isfinite(loss):
                bad.append(g.graph_id)
                continue
            total_loss += loss / len(items)
            dlogits = probs.copy()
            dlogits[y] -= 1.0
            dlogits /= len(items)
        grads.classifier_w += np.outer(dlogits, cache["emb"])
        grads.classifier_b += dlogits
        demb = model.classifier_w.T @ dlogits
        _backward_graph(model, cache, demb, grads)
    if bad:
        raise NumericError(f"non-finite loss on graphs {bad}")
    return total_loss, grads


@dataclass(eq=False)
class TrainReport:
    epochs: list = field(default_factory=list)
    final_train_acc: float = 0.0
    final_test_acc: float = 0.0
    best_epoch: int = 0
    params_digest: str = ""
    wall_clock: float = 0.0
    lr: float = 0.0
    seed: int = 0


def predict(model, g, features, colouring=None) -> int:
    _, logits = forward(model, g, features, colouring)
    return int(np.argmax(logits))


def mean_loss(model, items) -> float:
    """Cross-entropy without gradients, for validation tracking."""
    total = 0.0
    for g, features, colouring, target in items:
        _, logits = forward(model, g, features, colouring)
        probs = _softmax(logits)
        total += -np.log(max(probs[int(target)], 1e-300))
    if not np.isfinite(total):
        raise NumericError("non-finite validation loss")
    return total / len(items) if items else 0.0


def accuracy(model, items) -> float:
    if not items:
        return 0.0
    hits = sum(
        1
        for g, x, col, y in items
        if predict(model, g, x, col) == int(y)
    )
    return hits / len(items)


def params_digest(model: MpnnModel) -> str:
    digest = hashlib.sha256()
    for name, arr in model.parameter_arrays():
        digest.update(name.encode())
        digest.update(np.ascontiguousarray(arr, dtype="<f8").tobytes())
    return digest.hexdigest()


def train(
    config: MpnnConfig,
    dataset,
    split,
    features,
    colourings=None,
    lr: float = 1e-2,
    momentum: float = 0.9,
    max_epochs: int = 600,
    patience: int = 25,
    clip_norm: float = 5.0,
) -> tuple[MpnnModel, TrainReport]:
    """Full-batch gradient descent with momentum and early stopping.

    ``split`` is (train_ids, test_ids) of graph ids; ``features`` aligns
    with ``dataset.graphs`` (as do ``colourings`` when given). Test loss
    is the monitored validation metric: training stops once it fails to
    improve for ``patience`` consecutive epochs, and the best-epoch
    parameters are restored. Gradients are rescaled to global norm
    ``clip_norm`` when they exceed it; the unnormalized sum aggregation
    otherwise blows up at useful learning rates. Deterministic given
    config.seed.
    """
    train_ids, test_ids = split
    if not train_ids or not test_ids:
        raise ConfigurationError("both split halves must be non-empty")
    if colourings is None:
        colourings = [None] * len(dataset.graphs)
    by_id = {}
    for g, x, col in zip(dataset.graphs, features, colourings):
        if g.target is None or int(g.target) != g.target:
            raise ValidationError(f"graph {g.graph_id!r} needs an integer class target")
        by_id[g.graph_id] = (g, x, col, int(g.target))
    train_items = [by_id[i] for i in train_ids]
    test_items = [by_id[i] for i in test_ids]

    model = init_model(config)
    start = time.perf_counter()
    velocity = {name: np.zeros_like(arr) for name, arr in model.parameter_arrays()}
    report = TrainReport(lr=lr, seed=config.seed)
    best_loss = np.inf
    best_state = None
    stall = 0
    for epoch in range(max_epochs):
        loss, grads = backward(model, train_items)
        grad_map = dict(grads.parameter_arrays())
        if clip_norm is not None and clip_norm > 0:
            gnorm = np.sqrt(sum(float((g * g).sum()) for g in grad_map.values()))
            if gnorm > clip_norm:
                scale = clip_norm / gnorm
                for g in grad_map.values():
                    g *= scale
        for name, arr in model.parameter_arrays():
            vel = velocity.get(name)
            if vel is None:
                vel = np.zeros_like(arr)
                velocity[name] = vel
            vel *= momentum
            vel += grad_map.get(name, 0.0)
            arr -= lr * vel
        train_acc = accuracy(model, train_items)
        test_acc = accuracy(model, test_items)
        test_loss = mean_loss(model, test_items)
        report.epochs.append(
            {
                "epoch": epoch,
                "loss": float(loss),
                "test_loss": float(test_loss),
                "train_acc": train_acc,
                "test_acc": test_acc,
            }
        )
        if test_loss < best_loss - 1e-12:
            best_loss = test_loss
            report.best_epoch = epoch
            best_state = {
                name: arr.copy() for name, arr in model.parameter_arrays()
            }
            stall = 0
        else:
            stall += 1
            if stall >= patience:
                break
    if best_state is not None:
        for name, arr in model.parameter_arrays():
            if name in best_state:
                arr[...] = best_state[name]
    report.final_train_acc = accuracy(model, train_items)
    report.final_test_acc = accuracy(model, test_items)
    report.params_digest = params_digest(model)
    report.wall_clock = time.perf_counter() - start
    return model, report


def spectral_norm(matrix: np.ndarray, iters: int = 100, seed: int = 0) -> float:
    """Largest singular value by power iteration on M^T M."""
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(matrix.shape[1])
    v /= np.linalg.norm(v)
    for _ in range(iters):
        w = matrix.T @ (matrix @ v)
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0
        v = w / norm
    return float(np.linalg.norm(matrix @ v))


def phi_lipschitz_bound(model: MpnnModel, layer_index: int) -> float:
    """Product of the layer's spectral norms; relu is 1-Lipschitz."""
    layer = model.layers[layer_index]
    return spectral_norm(layer["W1"]) * spectral_norm(layer["W2"])


def save_model(model: MpnnModel, path) -> None:
    """Write the documented binary checkpoint (see docs/formats.md)."""
    cfg = model.config
    readout_code = READOUTS.index(cfg.readout)
    blob = bytearray()
    blob += CHECKPOINT_MAGIC
    blob += struct.pack(
        "<IIIIIBBHq",
        CHECKPOINT_VERSION,
        cfg.num_layers,
        cfg.hidden_dim,
        cfg.input_width,
        cfg.num_classes,
        readout_code,
        1 if cfg.w_diag else 0,
        0,
        cfg.seed,
    )
    blob += model.epsilons.astype("<f8").tobytes()
    for layer in model.layers:
        for key in ("W1", "b1", "W2", "b2"):
            blob += np.ascontiguousarray(layer[key], dtype="<f8").tobytes()
    blob += np.ascontiguousarray(model.classifier_w, dtype="<f8").tobytes()
    blob += np.ascontiguousarray(model.classifier_b, dtype="<f8").tobytes()
    ranks = sorted(model.readout_weights)
    blob += struct.pack("<I", len(ranks))
    for rank in ranks:
        blob += struct.pack("<I", rank)
        blob += np.ascontiguousarray(model.readout_weights[rank], dtype="<f8").tobytes()
    with open(path, "wb") as fh:
        fh.write(bytes(blob))


def load_model(path) -> MpnnModel:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != CHECKPOINT_MAGIC:
        raise ParseError(f"{path}: not a model checkpoint (bad magic)")
    header = struct.Struct("<IIIIIBBHq")
    (
        version,
        num_layers,
        hidden,
        input_width,
        num_classes,
        readout_code,
        w_diag,
        _,
        seed,
    ) = header.unpack_from(blob, 4)
    if version != CHECKPOINT_VERSION:
        raise ParseError(f"{path}: unsupported checkpoint version {version}")
    if readout_code >= len(READOUTS):
        raise ParseError(f"{path}: bad readout code {readout_code}")
    offset = 4 + header.size

    def take(shape):
        nonlocal offset
        count = int(np.prod(shape))
        arr = np.frombuffer(blob, dtype="<f8", count=count, offset=offset)
        offset += count * 8
        return arr.reshape(shape).astype(np.float64)

    epsilons = take((num_layers,))
    config = MpnnConfig(
        input_width=input_width,
        num_classes=num_classes,
        num_layers=num_layers,
        hidden_dim=hidden,
        epsilon=tuple(epsilons.tolist()),
        readout=READOUTS[readout_code],
        seed=int(seed),
        w_diag=bool(w_diag),
    )
    layers = []
    fan_in = input_width
    for _ in range(num_layers):
        layers.append(
            {
                "W1": take((hidden, fan_in)),
                "b1": take((hidden,)),
                "W2": take((hidden, hidden)),
                "b2": take((hidden,)),
            }
        )
        fan_in = hidden
    classifier_w = take((num_classes, hidden))
    classifier_b = take((num_classes,))
    model = MpnnModel(config, layers, classifier_w, classifier_b)
    (count,) = struct.unpack_from("<I", blob, offset)
    offset += 4
    for _ in range(count):
        (rank,) = struct.unpack_from("<I", blob, offset)
        offset += 4
        shape = (hidden,) if w_diag else (hidden, hidden)
        model.readout_weights[rank] = take(shape)
    if offset != len(blob):
        raise ParseError(f"{path}: {len(blob) - offset} trailing bytes")
    return model
