"""Soft Condorcet optimization and the learned reduced mapping.

The hard Kemeny objective counts the margin of every pair that a score
vector puts in the wrong order. Replacing the step indicator by a scaled
logistic makes the objective differentiable, both for a free score vector
(:func:`sco_scores`) and for the output of a 3-64-1 ReLU network trained on
pixel colors (:func:`train`).
"""
from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import DataFormatError, DimensionError, NumericError
from .ordering import ReducedMapping

__all__ = [
    "SoftConfig",
    "soft_step",
    "soft_step_derivative",
    "SCOResult",
    "sco_scores",
    "MlpParams",
    "MlpMapping",
    "init_params",
    "mlp_forward",
    "pair_margins",
    "batch_soft_loss",
    "loss_gradient",
    "Adam",
    "TrainResult",
    "color_pool",
    "train",
    "save_model",
    "load_model",
    "write_loss_csv",
]

logger = logging.getLogger(__name__)

HIDDEN = 64
MODEL_FORMAT = "condorcet-morph/mlp"
MODEL_VERSION = 1


@dataclass
class SoftConfig:
    """Hyper-parameters of the soft loss and of the training loop."""

    tau: float = 1.0
    epochs: int = 100
    batch_size: int = 1024
    learning_rate: float = 0.001
    beta_1: float = 0.9
    beta_2: float = 0.999
    epsilon: float = 1e-7
    seed: int = 0

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if self.batch_size < 2:
            raise ValueError("batch_size must be at least 2")
        if self.epochs < 0:
            raise ValueError("epochs must be non-negative")


def soft_step(x, tau: float = 1.0):
    """Decreasing logistic ``1 / (1 + exp(x / tau))``.

    Approximates the indicator ``[x <= 0]`` and saturates instead of
    overflowing for large ``|x|``.
    """
    z = np.asarray(x, dtype=np.float64) / tau
    e = np.exp(-np.abs(z))
    out = np.where(z >= 0, e / (1.0 + e), 1.0 / (1.0 + e))
    return out if out.ndim else float(out)


def soft_step_derivative(x, tau: float = 1.0):
    s = soft_step(x, tau)
    return -s * (1.0 - s) / tau


class SCOResult(NamedTuple):
    scores: np.ndarray
    order: list[int]
    loss: float


def _soft_loss_and_score_grad(delta: np.ndarray, s: np.ndarray, tau: float):
    # s may carry leading batch axes; z[..., i, j] = s_j - s_i
    z = s[..., None, :] - s[..., :, None]
    sig = soft_step(z, tau)
    loss = np.sum(delta * sig, axis=(-2, -1))
    g = delta * (-sig * (1.0 - sig) / tau)
    # dz[i,j]/ds_k = [j == k] - [i == k]
    return loss, g.sum(axis=-2) - g.sum(axis=-1)


def sco_scores(
    delta,
    tau: float = 1.0,
    steps: int = 300,
    learning_rate: float = 0.1,
    restarts: int = 10,
    seed: int = 0,
    init=None,
) -> SCOResult:
    """Score vector minimizing the soft Kemeny objective of ``delta``.

    Runs ``steps`` full-gradient Adam updates from ``restarts`` seeded
    standard-normal starting points (or from ``init`` alone) and keeps the
    run with the lowest soft loss. Random starts break the exact symmetry
    of Condorcet cycles, which a constant start never leaves. The induced
    order sorts by score and breaks ties by index.
    """
    delta = np.asarray(delta, dtype=np.float64)
    if delta.ndim != 2 or delta.shape[0] != delta.shape[1]:
        raise DimensionError(f"margin matrix must be square, got {delta.shape}")
    n = delta.shape[0]
    if n < 2:
        raise ValueError("need at least two candidates")
    if init is not None:
        s = np.array(init, dtype=np.float64).reshape(1, n)
    else:
        s = np.random.default_rng(seed).standard_normal((restarts, n))
    opt = Adam([s], learning_rate=learning_rate)
    for step in range(steps):
        loss, grad = _soft_loss_and_score_grad(delta, s, tau)
        if not np.all(np.isfinite(loss)) or not np.all(np.isfinite(grad)):
            raise NumericError(f"soft Condorcet loss diverged at step {step}")
        opt.step([grad])
    loss, _ = _soft_loss_and_score_grad(delta, s, tau)
    best = int(np.argmin(loss))
    scores = s[best].copy()
    order = [int(i) for i in np.lexsort((np.arange(n), scores))]
    return SCOResult(scores, order, float(loss[best]))


@dataclass
class MlpParams:
    """Weights of the 3-64-1 network. The output neuron has no bias."""

    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray

    def __post_init__(self):
        self.W1 = np.asarray(self.W1, dtype=np.float64)
        self.b1 = np.asarray(self.b1, dtype=np.float64)
        self.W2 = np.asarray(self.W2, dtype=np.float64).reshape(1, -1)
        hidden = self.W1.shape[0]
        if self.W1.ndim != 2 or self.b1.shape != (hidden,) or self.W2.shape != (1, hidden):
            raise DimensionError(
                f"inconsistent shapes W1={self.W1.shape} b1={self.b1.shape} W2={self.W2.shape}"
            )

    def arrays(self) -> list[np.ndarray]:
        return [self.W1, self.b1, self.W2]

    def copy(self) -> "MlpParams":
        return MlpParams(self.W1.copy(), self.b1.copy(), self.W2.copy())


def init_params(rng: np.random.Generator, n_in: int = 3, hidden: int = HIDDEN) -> MlpParams:
    """Glorot-uniform weights, zero bias."""
    lim1 = np.sqrt(6.0 / (n_in + hidden))
    lim2 = np.sqrt(6.0 / (hidden + 1))
    W1 = rng.uniform(-lim1, lim1, size=(hidden, n_in))
    W2 = rng.uniform(-lim2, lim2, size=(1, hidden))
    return MlpParams(W1, np.zeros(hidden), W2)


def _forward(params: MlpParams, X: np.ndarray):
    pre = X @ params.W1.T + params.b1
    hid = np.maximum(pre, 0.0)
    return pre, hid, hid @ params.W2[0]


def mlp_forward(params: MlpParams, x) -> np.ndarray:
    """Network score for one color ``(3,)`` or a batch ``(..., 3)``."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1:] != (params.W1.shape[1],):
        raise DimensionError(f"expected {params.W1.shape[1]} channels, got shape {x.shape}")
    flat = x.reshape(-1, x.shape[-1])
    out = _forward(params, flat)[2].reshape(x.shape[:-1])
    return out if out.ndim else float(out)


class MlpMapping(ReducedMapping):
    """Reduced mapping backed by trained network weights."""

    def __init__(self, params: MlpParams, name: str = "learned"):
        self.params = params
        self.dim = params.W1.shape[1]
        self.name = name

    def scores(self, colors):
        return np.asarray(mlp_forward(self.params, colors), dtype=np.float64)


def pair_margins(mappings: Sequence[Callable], batch: np.ndarray) -> np.ndarray:
    """Vote margins of every ordered pair in the batch, ties counting zero."""
    total = np.zeros((len(batch), len(batch)))
    for h in mappings:
        s = np.asarray(h(batch), dtype=np.float64)
        total += np.sign(s[None, :] - s[:, None])
    return total / len(mappings)


def _check_batch(batch):
    batch = np.asarray(batch, dtype=np.float64)
    if batch.ndim != 2 or len(batch) < 2:
        raise DimensionError("a batch is an (n, d) array with n >= 2")
    return batch


def batch_soft_loss(params: MlpParams, batch, mappings, tau: float = 1.0, delta=None) -> float:
    """Sum over ordered pairs ``(i, j)`` of ``delta_ij * soft_step(h(x_j) - h(x_i))``."""
    batch = _check_batch(batch)
    if delta is None:
        delta = pair_margins(mappings, batch)
    s = _forward(params, batch)[2]
    return float(np.sum(delta * soft_step(s[None, :] - s[:, None], tau)))


def loss_gradient(params: MlpParams, batch, mappings, tau: float = 1.0, delta=None):
    """Loss and its gradient ``[dW1, db1, dW2]`` by backpropagation.

    Returns ``(loss, grads)``. The ReLU subgradient at zero is zero.
    """
    batch = _check_batch(batch)
    if delta is None:
        delta = pair_margins(mappings, batch)
    pre, hid, s = _forward(params, batch)
    loss, g_s = _soft_loss_and_score_grad(delta, s, tau)
    loss = float(loss)
    dW2 = (g_s @ hid)[None, :]
    g_pre = g_s[:, None] * params.W2[0][None, :] * (pre > 0)
    dW1 = g_pre.T @ batch
    db1 = g_pre.sum(axis=0)
    return loss, [dW1, db1, dW2]


class Adam:
    """Adam updates applied in place to a list of arrays."""

    def __init__(self, arrays, learning_rate=0.001, beta_1=0.9, beta_2=0.999, epsilon=1e-7):
        self.arrays = arrays
        self.lr = learning_rate
        self.beta_1 = beta_1
        self.beta_2 = beta_2
        self.epsilon = epsilon
        self.m = [np.zeros_like(a) for a in arrays]
        self.v = [np.zeros_like(a) for a in arrays]
        self.t = 0

    def step(self, grads):
        self.t += 1
        b1, b2 = self.beta_1, self.beta_2
        lr_t = self.lr * np.sqrt(1.0 - b2**self.t) / (1.0 - b1**self.t)
        for a, g, m, v in zip(self.arrays, grads, self.m, self.v):
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g * g
            a -= lr_t * m / (np.sqrt(v) + self.epsilon)


@dataclass
class TrainResult:
    params: MlpParams
    train_loss: list[float] = field(default_factory=list)
    val_loss: list[float] = field(default_factory=list)
    config: SoftConfig = field(default_factory=SoftConfig)

    @property
    def mapping(self) -> MlpMapping:
        return MlpMapping(self.params)


def color_pool(images) -> np.ndarray:
    """All pixels of all images stacked into an ``(n, d)`` array, duplicates kept."""
    images = [np.asarray(im, dtype=np.float64) for im in images]
    if not images:
        return np.zeros((0, 3))
    return np.concatenate([im.reshape(-1, im.shape[-1]) for im in images])


def _batches(pool: np.ndarray, order: np.ndarray, size: int):
    for start in range(0, len(order), size):
        idx = order[start : start + size]
        if len(idx) >= 2:
            yield pool[idx]


def _pairs(n):
    return n * (n - 1)


def _mean_pair_loss(params, pool, order, mappings, cfg) -> float:
    total, pairs = 0.0, 0
    for batch in _batches(pool, order, cfg.batch_size):
        total += batch_soft_loss(params, batch, mappings, cfg.tau)
        pairs += _pairs(len(batch))
    return total / pairs if pairs else float("nan")


def train(
    trainset,
    valset,
    mappings: Sequence[Callable],
    cfg: SoftConfig | None = None,
    params: MlpParams | None = None,
    callback: Callable[[int, float, float | None], None] | None = None,
) -> TrainResult:
    """Fit the network to the soft Kemeny loss of ``mappings`` on image colors.

    Each epoch shuffles the training pool, splits it into batches and takes
    one Adam step per batch on the mean per-pair loss of that batch. The
    reported training loss is the pair-weighted running mean over the
    epoch; the validation loss is evaluated at the end of the epoch on a
    fixed shuffle of the validation pool.
    """
    cfg = cfg or SoftConfig()
    pool = color_pool(trainset)
    if len(pool) < 2:
        raise ValueError("training set must contain at least two pixels")
    val_pool = color_pool(valset)
    rng = np.random.default_rng(cfg.seed)
    if params is None:
        params = init_params(rng, n_in=pool.shape[1])
    else:
        params = params.copy()
    val_order = rng.permutation(len(val_pool))
    opt = Adam(
        params.arrays(),
        learning_rate=cfg.learning_rate,
        beta_1=cfg.beta_1,
        beta_2=cfg.beta_2,
        epsilon=cfg.epsilon,
    )
    result = TrainResult(params=params, config=cfg)
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(len(pool))
        total, pairs = 0.0, 0
        for b, batch in enumerate(_batches(pool, order, cfg.batch_size)):
            n_pairs = _pairs(len(batch))
            loss, grads = loss_gradient(params, batch, mappings, cfg.tau)
            if not np.isfinite(loss) or not all(np.all(np.isfinite(g)) for g in grads):
                raise NumericError(f"non-finite loss at epoch {epoch}, batch {b}")
            opt.step([g / n_pairs for g in grads])
            total += loss
            pairs += n_pairs
        result.train_loss.append(total / pairs)
        val = None
        if len(val_pool) >= 2:
            val = _mean_pair_loss(params, val_pool, val_order, mappings, cfg)
            result.val_loss.append(val)
        logger.debug("epoch %d train=%.6f val=%s", epoch, result.train_loss[-1], val)
        if callback is not None:
            callback(epoch, result.train_loss[-1], val)
    return result


def save_model(path, params: MlpParams, cfg: SoftConfig | None = None, extra: dict | None = None):
    doc = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "architecture": {
            "layers": [params.W1.shape[1], params.W1.shape[0], 1],
            "hidden_activation": "relu",
            "output_activation": "identity",
            "output_bias": False,
        },
        "weights": {
            "W1": params.W1.tolist(),
            "b1": params.b1.tolist(),
            "W2": params.W2.tolist(),
        },
        "config": asdict(cfg) if cfg is not None else None,
        "seed": cfg.seed if cfg is not None else None,
    }
    if extra:
        doc.update(extra)
    Path(path).write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")


def load_model(path) -> tuple[MlpParams, SoftConfig | None]:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"{path}: not a JSON model file ({exc})") from None
    if doc.get("format") != MODEL_FORMAT:
        raise DataFormatError(f"{path}: unexpected model format {doc.get('format')!r}")
    if doc.get("version") != MODEL_VERSION:
        raise DataFormatError(f"{path}: unsupported model version {doc.get('version')!r}")
    w = doc["weights"]
    params = MlpParams(np.array(w["W1"]), np.array(w["b1"]), np.array(w["W2"]))
    cfg = SoftConfig(**doc["config"]) if doc.get("config") else None
    return params, cfg


def write_loss_csv(path, result: TrainResult):
    lines = ["epoch,train_loss,val_loss"]
    for k, tr in enumerate(result.train_loss):
        val = repr(result.val_loss[k]) if k < len(result.val_loss) else ""
        lines.append(f"{k + 1},{tr!r},{val}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
