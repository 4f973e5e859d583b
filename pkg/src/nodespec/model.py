"""Per-node spectral filtering models, gradients, and the training loop.

Two pipelines share the same trainable pieces (a 2-layer MLP, a projection W,
and base-filter matrix Gamma):

* ``appnp_like``  - transform features with the MLP, then run the polynomial
  recursion on the transformed features, mixing each order k with the
  node-dependent coefficient sigmoid(X^(k) W) Gamma_k.
* ``sgc_like``    - propagate the raw features once (precomputable, reusable
  across epochs and mini-batches), combine with the same coefficients, and
  apply the MLP last.

``global_only`` is the ablation: a single learned coefficient vector gamma
replaces the factorized per-node coefficients in the appnp pipeline.

Gradients come from the tape in ``autodiff``; optimization is Adam with the
MLP and filter parameters on separate learning rates, and weight decay enters
the loss as an explicit squared-norm penalty.
"""

import json
import struct
from dataclasses import asdict, dataclass, field
from math import comb
from typing import Optional

import numpy as np

from .autodiff import Tensor, parameter, softmax_cross_entropy, sparse_matmul
from .data import Dataset, Split, subset, validate_split
from .graph import (Graph, SparseOperator, estimate_lambda_max,
                    normalized_laplacian, scaled_laplacian)
from .polyfilter import PropagationStack, bernstein_operators, propagate

MODES = ("appnp_like", "sgc_like", "global_only")

CHECKPOINT_MAGIC = b"NODESPEC-CKPT-1\n"

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


class DivergenceError(RuntimeError):
    """Training produced non-finite values; carries the offending epoch."""

    def __init__(self, message: str, epoch: int):
        super().__init__(f"{message} (epoch {epoch})")
        self.epoch = epoch


@dataclass
class TrainConfig:
    lr_l: float = 0.01          # MLP learning rate
    lr_p: float = 0.01          # filtering-layer learning rate
    dp_l: float = 0.5           # MLP dropout
    dp_p: float = 0.5           # filtering-layer dropout
    l2: float = 5e-4            # weight-decay coefficient in the loss
    order: int = 10             # polynomial order K
    rank: int = 1               # factorization rank d
    hidden: int = 64            # MLP hidden width f_h
    epochs: int = 1000
    patience: int = 200
    seed: int = 0
    mode: str = "appnp_like"
    basis: str = "chebyshev"
    batch_size: Optional[int] = None   # sgc_like mini-batching; None = full batch
    static_coefficients: bool = False  # derive H once from the order-0 features
    lambda_max: float = 2.0
    estimate_spectrum: bool = False    # power-iterate lambda_max instead of the bound
    precision: str = "float64"

    def validate(self) -> None:
        for name in ("dp_l", "dp_p"):
            rate = getattr(self, name)
            if not 0.0 <= rate < 1.0:
                raise ValueError(f"{name} must lie in [0, 1)")
        if self.order < 1:
            raise ValueError("polynomial order must be >= 1")
        if self.rank < 1:
            raise ValueError("factorization rank must be >= 1")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.precision not in ("float64", "float32"):
            raise ValueError("precision must be float64 or float32")

    @property
    def dtype(self):
        return np.float64 if self.precision == "float64" else np.float32


@dataclass
class FilterFactorization:
    """Low-rank coefficient factors: per-node rows come from sigmoid(X W) Gamma^T."""

    w: np.ndarray       # (c_in, d) projection
    gamma: np.ndarray   # (K+1, d) base filters

    @property
    def rank(self) -> int:
        return self.w.shape[1]

    @property
    def order(self) -> int:
        return self.gamma.shape[0] - 1


@dataclass
class ModelParams:
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    mode: str
    factorization: Optional[FilterFactorization] = None
    gamma: Optional[np.ndarray] = None   # global_only coefficient vector (K+1, 1)

    def arrays(self) -> dict:
        """Trainable arrays in their declared (checkpoint) order."""
        out = {"mlp.w1": self.w1, "mlp.b1": self.b1,
               "mlp.w2": self.w2, "mlp.b2": self.b2}
        if self.mode == "global_only":
            out["filter.gamma"] = self.gamma
        else:
            out["filter.w"] = self.factorization.w
            out["filter.gamma"] = self.factorization.gamma
        return out

    def copy(self) -> "ModelParams":
        fact = None
        if self.factorization is not None:
            fact = FilterFactorization(self.factorization.w.copy(),
                                       self.factorization.gamma.copy())
        gamma = None if self.gamma is None else self.gamma.copy()
        return ModelParams(self.w1.copy(), self.b1.copy(), self.w2.copy(),
                           self.b2.copy(), self.mode, fact, gamma)


@dataclass
class ForwardTrace:
    """Everything the reverse pass needs: the logits tensor (whose tape
    references all intermediates) and the named parameter tensors."""

    logits: Tensor
    params: dict
    coefficients: np.ndarray
    loss: Optional[Tensor] = None


@dataclass
class TrainResult:
    params: ModelParams
    history: list
    best_epoch: int
    best_validation_accuracy: float
    epochs_run: int


def init_params(cfg: TrainConfig, feature_dim: int, class_count: int,
                rng: np.random.Generator) -> ModelParams:
    """Fan-scaled symmetric-uniform MLP/W init; decayed-coefficient Gamma."""
    cfg.validate()
    dtype = cfg.dtype

    def uniform(fan_in, shape):
        bound = 1.0 / np.sqrt(fan_in)
        return rng.uniform(-bound, bound, size=shape).astype(dtype)

    w1 = uniform(feature_dim, (feature_dim, cfg.hidden))
    b1 = np.zeros(cfg.hidden, dtype=dtype)
    w2 = uniform(cfg.hidden, (cfg.hidden, class_count))
    b2 = np.zeros(class_count, dtype=dtype)
    decay = 0.1 * np.power(0.9, np.arange(cfg.order + 1))
    if cfg.mode == "global_only":
        gamma = decay[:, None].astype(dtype)
        return ModelParams(w1, b1, w2, b2, cfg.mode, gamma=gamma)
    c_in = class_count if cfg.mode == "appnp_like" else feature_dim
    fact = FilterFactorization(
        w=uniform(c_in, (c_in, cfg.rank)),
        gamma=np.tile(decay[:, None], (1, cfg.rank)).astype(dtype),
    )
    return ModelParams(w1, b1, w2, b2, cfg.mode, factorization=fact)


def build_operator(graph: Graph, cfg: TrainConfig) -> SparseOperator:
    """Propagation operator for the configured basis."""
    lap = normalized_laplacian(graph)
    if cfg.basis != "chebyshev":
        return lap
    lam_max = cfg.lambda_max
    if cfg.estimate_spectrum:
        lam_max, _ = estimate_lambda_max(lap)
        lam_max = max(lam_max, 1e-12)
    return scaled_laplacian(lap, lam_max)


def _dropout(t: Tensor, rate: float, training: bool,
             rng: Optional[np.random.Generator]) -> Tensor:
    if not training or rate <= 0.0:
        return t
    keep = (rng.random(t.shape) >= rate).astype(t.data.dtype)
    return t * Tensor(keep / (1.0 - rate))


def _mlp(x: Tensor, tensors: dict, cfg: TrainConfig, training: bool,
         rng) -> Tensor:
    x = _dropout(x, cfg.dp_l, training, rng)
    h = (x @ tensors["mlp.w1"] + tensors["mlp.b1"]).relu()
    h = _dropout(h, cfg.dp_l, training, rng)
    return h @ tensors["mlp.w2"] + tensors["mlp.b2"]


def _propagation_tensors(op: SparseOperator, x0: Tensor, basis: str,
                         order: int) -> list:
    """Differentiable version of the propagation stack, layer k = p_k(op) x0."""
    if basis == "monomial":
        layers = [x0]
        for _ in range(order):
            layers.append(sparse_matmul(op, layers[-1]))
    elif basis == "chebyshev":
        layers = [x0]
        if order >= 1:
            layers.append(sparse_matmul(op, x0))
        for _ in range(2, order + 1):
            layers.append(sparse_matmul(op, layers[-1]) * 2.0 - layers[-2])
    elif basis == "bernstein":
        low, high = bernstein_operators(op)
        powers = [x0]
        for _ in range(order):
            powers.append(sparse_matmul(high, powers[-1]))
        layers = []
        for k in range(order + 1):
            term = powers[k]
            for _ in range(order - k):
                term = sparse_matmul(low, term)
            layers.append(term * float(comb(order, k)))
    else:
        raise ValueError(f"unknown basis {basis!r}")
    return layers


def _combine_layers(layers: list, tensors: dict, params: ModelParams,
                    cfg: TrainConfig) -> tuple[Tensor, np.ndarray]:
    """Mix propagated layers with per-node (or global) coefficients.

    Returns the combined tensor and the realized n x (K+1) coefficient matrix
    for diagnostics.
    """
    order = len(layers) - 1
    n = layers[0].shape[0]
    eta_log = np.empty((n, order + 1))
    out = None
    if params.mode == "global_only":
        gamma = tensors["filter.gamma"]
        for k, layer in enumerate(layers):
            gamma_k = gamma.slice_rows(k, k + 1)          # (1, 1)
            term = layer * gamma_k
            out = term if out is None else out + term
            eta_log[:, k] = gamma.data[k, 0]
        return out, eta_log

    w = tensors["filter.w"]
    gamma = tensors["filter.gamma"]
    h_static = (layers[0] @ w).sigmoid() if cfg.static_coefficients else None
    for k, layer in enumerate(layers):
        h = h_static if h_static is not None else (layer @ w).sigmoid()
        gamma_k = gamma.slice_rows(k, k + 1).transpose()  # (d, 1)
        eta = h @ gamma_k                                 # (n, 1)
        term = layer * eta
        out = term if out is None else out + term
        eta_log[:, k] = eta.data[:, 0]
    return out, eta_log


def _param_tensors(params: ModelParams) -> dict:
    return {name: parameter(arr) for name, arr in params.arrays().items()}


def _check_finite(logits: np.ndarray, epoch: int = -1) -> None:
    if not np.all(np.isfinite(logits)):
        bad = int(np.sum(~np.isfinite(logits)))
        raise DivergenceError(f"logits contain {bad} non-finite entries", epoch)


def forward_appnp_like(params: ModelParams, features: np.ndarray,
                       op: SparseOperator, cfg: TrainConfig,
                       training: bool = False,
                       rng: Optional[np.random.Generator] = None) -> ForwardTrace:
    """Transform-then-propagate pipeline; logits are the combined output."""
    tensors = _param_tensors(params)
    x = Tensor(np.asarray(features, dtype=cfg.dtype))
    x0 = _mlp(x, tensors, cfg, training, rng)
    x0 = _dropout(x0, cfg.dp_p, training, rng)
    layers = _propagation_tensors(op, x0, cfg.basis, cfg.order)
    logits, eta = _combine_layers(layers, tensors, params, cfg)
    _check_finite(logits.data)
    return ForwardTrace(logits=logits, params=tensors, coefficients=eta)


def forward_sgc_like(params: ModelParams, stack: PropagationStack,
                     cfg: TrainConfig, training: bool = False,
                     rng: Optional[np.random.Generator] = None,
                     rows: Optional[np.ndarray] = None) -> ForwardTrace:
    """Propagate-then-transform pipeline over a precomputed stack.

    ``rows`` selects a mini-batch of nodes; the combine and MLP are row-wise,
    so batched outputs concatenate to the full-batch result.
    """
    if stack.order != cfg.order:
        raise ValueError(f"stack order {stack.order} != config order {cfg.order}")
    tensors = _param_tensors(params)
    if rows is None:
        layers = [Tensor(layer.astype(cfg.dtype, copy=False))
                  for layer in stack.layers]
    else:
        rows = np.asarray(rows, dtype=np.int64)
        layers = [Tensor(layer[rows].astype(cfg.dtype, copy=False))
                  for layer in stack.layers]
    combined, eta = _combine_layers(layers, tensors, params, cfg)
    combined = _dropout(combined, cfg.dp_p, training, rng)
    logits = _mlp(combined, tensors, cfg, training, rng)
    _check_finite(logits.data)
    return ForwardTrace(logits=logits, params=tensors, coefficients=eta)


def loss(logits: np.ndarray, labels: np.ndarray, index_set,
         params: ModelParams, l2: float) -> float:
    """Mean cross-entropy over index_set plus l2 * sum of squared parameters."""
    index = np.asarray(index_set, dtype=np.int64)
    if index.size == 0:
        raise ValueError("loss over an empty index set")
    rows = np.asarray(logits, dtype=np.float64)[index]
    shifted = rows - rows.max(axis=1, keepdims=True)
    log_probs = shifted - np.log(np.sum(np.exp(shifted), axis=1))[:, None]
    picked = log_probs[np.arange(index.size), np.asarray(labels)[index]]
    penalty = sum(float(np.sum(a.astype(np.float64) ** 2))
                  for a in params.arrays().values())
    return float(-np.mean(picked) + l2 * penalty)


def attach_loss(trace: ForwardTrace, labels: np.ndarray, index_set,
                l2: float) -> float:
    """Build the loss on the trace's tape; returns its value."""
    total = softmax_cross_entropy(trace.logits, labels, index_set)
    if l2 > 0.0:
        for tensor in trace.params.values():
            total = total + tensor.sum_squares() * l2
    trace.loss = total
    return float(total.data)


def backward(trace: ForwardTrace, seed: float = 1.0) -> dict:
    """Reverse pass through the trace; gradients keyed like params.arrays()."""
    if trace.loss is None:
        raise ValueError("attach_loss must run before backward")
    for tensor in trace.params.values():
        tensor.grad = None
    trace.loss.backward(seed)
    return {name: (np.zeros_like(t.data) if t.grad is None else t.grad)
            for name, t in trace.params.items()}


@dataclass
class AdamState:
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)
    step: int = 0


def adam_step(params: ModelParams, grads: dict, state: AdamState,
              lr_l: float, lr_p: float) -> None:
    """One Adam update; MLP parameters use lr_l, filter parameters lr_p."""
    state.step += 1
    t = state.step
    for name, arr in params.arrays().items():
        g = grads[name]
        if g.shape != arr.shape:
            raise ValueError(f"gradient shape mismatch for {name}")
        if name not in state.m:
            state.m[name] = np.zeros_like(arr, dtype=np.float64)
            state.v[name] = np.zeros_like(arr, dtype=np.float64)
        m = state.m[name]
        v = state.v[name]
        m *= ADAM_BETA1
        m += (1.0 - ADAM_BETA1) * g
        v *= ADAM_BETA2
        v += (1.0 - ADAM_BETA2) * (g * g)
        m_hat = m / (1.0 - ADAM_BETA1 ** t)
        v_hat = v / (1.0 - ADAM_BETA2 ** t)
        lr = lr_l if name.startswith("mlp.") else lr_p
        arr -= (lr * m_hat / (np.sqrt(v_hat) + ADAM_EPS)).astype(arr.dtype)


def parameter_count(cfg: TrainConfig, feature_dim: int,
                    class_count: int) -> dict:
    """Exact trainable-parameter counts; the filter term never depends on n."""
    cfg.validate()
    mlp = (feature_dim * cfg.hidden + cfg.hidden
           + cfg.hidden * class_count + class_count)
    if cfg.mode == "global_only":
        filt = cfg.order + 1
    else:
        c_in = class_count if cfg.mode == "appnp_like" else feature_dim
        filt = c_in * cfg.rank + (cfg.order + 1) * cfg.rank
    return {"filter": filt, "mlp": mlp, "total": filt + mlp}


def _evaluate_logits(params: ModelParams, dataset: Dataset, cfg: TrainConfig,
                     op: SparseOperator,
                     stack: Optional[PropagationStack]) -> ForwardTrace:
    if cfg.mode == "sgc_like":
        return forward_sgc_like(params, stack, cfg, training=False)
    return forward_appnp_like(params, dataset.features, op, cfg, training=False)


def _accuracy(logits: np.ndarray, labels: np.ndarray, index) -> float:
    index = np.asarray(index, dtype=np.int64)
    if index.size == 0:
        return float("nan")
    pred = np.argmax(logits[index], axis=1)
    return float(np.mean(pred == labels[index]))


def train(dataset: Dataset, split: Split, cfg: TrainConfig) -> TrainResult:
    """Full training run with early stopping on validation accuracy.

    In inductive mode the model trains on the subgraph induced by the
    observed nodes (train, validation, observed test); prediction later
    rebuilds the operator on whatever graph it is given.
    """
    cfg.validate()
    validate_split(split, n=dataset.n)
    if split.mode == "inductive":
        observed = split.observed_nodes()
        sub_ds, ids = subset(dataset, observed)
        remap = -np.ones(dataset.n, dtype=np.int64)
        remap[ids] = np.arange(ids.size)
        train_idx = remap[split.train]
        val_idx = remap[split.validation]
        work = sub_ds
    else:
        train_idx = split.train
        val_idx = split.validation
        work = dataset

    rng = np.random.default_rng(cfg.seed)
    params = init_params(cfg, work.feature_dim, work.class_count, rng)
    op = build_operator(work.graph, cfg)
    stack = None
    if cfg.mode == "sgc_like":
        stack = propagate(cfg.basis, op, work.features.astype(cfg.dtype),
                          cfg.order)

    adam = AdamState()
    best = params.copy()
    best_val = -1.0
    best_epoch = 0
    stale = 0
    history = []
    labels = work.labels

    for epoch in range(1, cfg.epochs + 1):
        try:
            if cfg.mode == "sgc_like" and cfg.batch_size:
                order = train_idx[rng.permutation(train_idx.size)]
                for lo in range(0, order.size, cfg.batch_size):
                    batch = order[lo:lo + cfg.batch_size]
                    trace = forward_sgc_like(params, stack, cfg, training=True,
                                             rng=rng, rows=batch)
                    attach_loss(trace, labels[batch],
                                np.arange(batch.size), cfg.l2)
                    adam_step(params, backward(trace), adam, cfg.lr_l, cfg.lr_p)
            elif cfg.mode == "sgc_like":
                trace = forward_sgc_like(params, stack, cfg, training=True,
                                         rng=rng)
                attach_loss(trace, labels, train_idx, cfg.l2)
                adam_step(params, backward(trace), adam, cfg.lr_l, cfg.lr_p)
            else:
                trace = forward_appnp_like(params, work.features, op, cfg,
                                           training=True, rng=rng)
                attach_loss(trace, labels, train_idx, cfg.l2)
                adam_step(params, backward(trace), adam, cfg.lr_l, cfg.lr_p)
        except DivergenceError as exc:
            raise DivergenceError("training diverged", epoch) from exc

        eval_trace = _evaluate_logits(params, work, cfg, op, stack)
        logits = eval_trace.logits.data
        train_loss = loss(logits, labels, train_idx, params, cfg.l2)
        if not np.isfinite(train_loss):
            raise DivergenceError("training loss is not finite", epoch)
        train_acc = _accuracy(logits, labels, train_idx)
        val_acc = _accuracy(logits, labels, val_idx)
        history.append((epoch, train_loss, train_acc, val_acc))

        if val_acc > best_val:
            best_val = val_acc
            best = params.copy()
            best_epoch = epoch
            stale = 0
        else:
            stale += 1
            if stale > cfg.patience:
                break

    return TrainResult(params=best, history=history, best_epoch=best_epoch,
                       best_validation_accuracy=best_val,
                       epochs_run=len(history))


def predict(params: ModelParams, dataset: Dataset, cfg: TrainConfig,
            index_set=None) -> tuple[np.ndarray, np.ndarray]:
    """Predicted labels (argmax, lowest class index wins ties) and logits.

    The operator (and, for sgc_like, the propagation stack) is rebuilt from
    the dataset's graph, so the graph may contain nodes and edges that were
    never seen in training.
    """
    op = build_operator(dataset.graph, cfg)
    stack = None
    if cfg.mode == "sgc_like":
        stack = propagate(cfg.basis, op, dataset.features.astype(cfg.dtype),
                          cfg.order)
    trace = _evaluate_logits(params, dataset, cfg, op, stack)
    logits = trace.logits.data
    if index_set is not None:
        index = np.asarray(index_set, dtype=np.int64)
        logits = logits[index]
    return np.argmax(logits, axis=1), logits


def node_coefficients(params: ModelParams, dataset: Dataset,
                      cfg: TrainConfig) -> np.ndarray:
    """Realized per-node coefficient rows from a deterministic forward pass."""
    op = build_operator(dataset.graph, cfg)
    stack = None
    if cfg.mode == "sgc_like":
        stack = propagate(cfg.basis, op, dataset.features.astype(cfg.dtype),
                          cfg.order)
    return _evaluate_logits(params, dataset, cfg, op, stack).coefficients


def save_checkpoint(path, params: ModelParams, cfg: TrainConfig) -> None:
    """Versioned checkpoint: magic, JSON header, little-endian float64 blobs."""
    arrays = params.arrays()
    header = {
        "version": 1,
        "mode": params.mode,
        "config": asdict(cfg),
        "arrays": [[name, list(arrays[name].shape)] for name in arrays],
    }
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode()
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        for name in arrays:
            fh.write(np.ascontiguousarray(arrays[name],
                                          dtype="<f8").tobytes())


def load_checkpoint(path) -> tuple[ModelParams, TrainConfig]:
    with open(path, "rb") as fh:
        magic = fh.read(len(CHECKPOINT_MAGIC))
        if magic != CHECKPOINT_MAGIC:
            raise ValueError(f"{path}: not a checkpoint (bad magic)")
        (length,) = struct.unpack("<I", fh.read(4))
        header = json.loads(fh.read(length).decode())
        if header.get("version") != 1:
            raise ValueError(f"{path}: unsupported checkpoint version")
        cfg = TrainConfig(**header["config"])
        data = {}
        for name, shape in header["arrays"]:
            count = int(np.prod(shape)) if shape else 1
            raw = fh.read(count * 8)
            data[name] = np.frombuffer(raw, dtype="<f8").reshape(shape).astype(
                cfg.dtype).copy()
    mode = header["mode"]
    if mode == "global_only":
        params = ModelParams(data["mlp.w1"], data["mlp.b1"], data["mlp.w2"],
                             data["mlp.b2"], mode, gamma=data["filter.gamma"])
    else:
        fact = FilterFactorization(w=data["filter.w"],
                                   gamma=data["filter.gamma"])
        params = ModelParams(data["mlp.w1"], data["mlp.b1"], data["mlp.w2"],
                             data["mlp.b2"], mode, factorization=fact)
    return params, cfg
