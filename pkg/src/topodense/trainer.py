"""Desk-scale training of a feature extractor plus linear classifier.

The model is an MLP ``phi`` (leaky-ReLU hidden layers, linear output into the
latent space) followed by a linear classifier ``gamma``. Training minimises
cross-entropy plus ``lambda_topo`` times the connectivity penalty on the latent
sub-batches, using SGD with momentum, per-group weight decay and cosine
learning-rate annealing.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .persistence import batch_death_times
from .regularizer import connectivity_loss_and_grad
from .sampler import (
    LabeledDataset,
    SamplerConfig,
    default_batches_per_epoch,
    epoch_iterator,
    sample_minibatch,
)

__all__ = [
    "ModelConfig",
    "TrainConfig",
    "ModelState",
    "init_model",
    "forward",
    "predict",
    "loss_and_grads",
    "training_step",
    "cosine_lr",
    "evaluate",
    "train",
    "TrainResult",
    "make_blobs",
    "train_test_split",
    "latents_by_class",
]

LOSS_VARIANTS = ("two-sided", "one-sided")


@dataclass(frozen=True)
class ModelConfig:
    input_dim: int
    hidden_layers: tuple[int, ...] = (32,)
    latent_dim: int = 8
    num_classes: int = 3
    leaky_slope: float = 0.1

    def __post_init__(self):
        object.__setattr__(self, "hidden_layers", tuple(int(w) for w in self.hidden_layers))
        if self.input_dim < 1:
            raise ValueError(f"input_dim must be >= 1, got {self.input_dim}")
        if self.latent_dim < 2:
            raise ValueError(f"latent_dim must be >= 2, got {self.latent_dim}")
        if self.num_classes < 2:
            raise ValueError(f"num_classes must be >= 2, got {self.num_classes}")
        if any(w < 1 for w in self.hidden_layers):
            raise ValueError(f"hidden layer widths must be >= 1, got {self.hidden_layers}")

    @property
    def layer_dims(self) -> list[int]:
        return [self.input_dim, *self.hidden_layers, self.latent_dim]


@dataclass(frozen=True)
class TrainConfig:
    lr0: float = 0.1
    momentum: float = 0.9
    epochs: int = 200
    weight_decay_phi: float = 1e-3
    weight_decay_gamma: float = 1e-3
    lambda_topo: float | None = None  # None: calibrate at initialisation
    beta: float = 1.0
    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    seed: int = 0
    loss_variant: str = "two-sided"
    batches_per_epoch: int | None = None
    eval_subbatches: int = 64

    def __post_init__(self):
        if not self.lr0 > 0:
            raise ValueError(f"lr0 must be positive, got {self.lr0}")
        if not 0 <= self.momentum < 1:
            raise ValueError(f"momentum must lie in [0, 1), got {self.momentum}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.lambda_topo is not None and self.lambda_topo < 0:
            raise ValueError(f"lambda_topo must be >= 0, got {self.lambda_topo}")
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        if self.loss_variant not in LOSS_VARIANTS:
            raise ValueError(f"loss_variant must be one of {LOSS_VARIANTS}")


@dataclass
class ModelState:
    """Parameters and momentum buffers, keyed ``phi.<k>.weight`` etc."""

    config: ModelConfig
    params: dict[str, np.ndarray]
    buffers: dict[str, np.ndarray]

    @property
    def n_phi_layers(self) -> int:
        return len(self.config.layer_dims) - 1

    def copy(self) -> "ModelState":
        return ModelState(
            self.config,
            {k: v.copy() for k, v in self.params.items()},
            {k: v.copy() for k, v in self.buffers.items()},
        )


def init_model(config: ModelConfig, seed: int | np.random.Generator = 0) -> ModelState:
    """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights and biases, zero buffers."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    params = {}
    dims = config.layer_dims
    for k, (fan_in, fan_out) in enumerate(zip(dims[:-1], dims[1:])):
        bound = 1.0 / math.sqrt(fan_in)
        params[f"phi.{k}.weight"] = rng.uniform(-bound, bound, (fan_in, fan_out))
        params[f"phi.{k}.bias"] = rng.uniform(-bound, bound, fan_out)
    bound = 1.0 / math.sqrt(config.latent_dim)
    params["gamma.weight"] = rng.uniform(-bound, bound, (config.latent_dim, config.num_classes))
    params["gamma.bias"] = rng.uniform(-bound, bound, config.num_classes)
    buffers = {k: np.zeros_like(v) for k, v in params.items()}
    return ModelState(config, params, buffers)


def _forward_cache(model: ModelState, x: np.ndarray):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != model.config.input_dim:
        raise ValueError(
            f"inputs must have shape (m, {model.config.input_dim}), got {x.shape}"
        )
    slope = model.config.leaky_slope
    p = model.params
    last = model.n_phi_layers - 1
    h = x
    cache = [(x, None)]
    for k in range(model.n_phi_layers):
        a = h @ p[f"phi.{k}.weight"] + p[f"phi.{k}.bias"]
        h = a if k == last else np.where(a > 0, a, slope * a)
        cache.append((h, a))
    logits = h @ p["gamma.weight"] + p["gamma.bias"]
    return h, logits, cache


def forward(model: ModelState, inputs) -> tuple[np.ndarray, np.ndarray]:
    """Return (latents, logits) for a batch of inputs."""
    z, logits, _ = _forward_cache(model, inputs)
    return z, logits


def predict(model: ModelState, inputs) -> np.ndarray:
    # np.argmax resolves ties to the lowest class index
    return np.argmax(forward(model, inputs)[1], axis=1)


def _cross_entropy(logits: np.ndarray, y: np.ndarray) -> tuple[float, np.ndarray]:
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_z = np.log(np.exp(shifted).sum(axis=1))
    m = len(y)
    loss = float(np.mean(log_z - shifted[np.arange(m), y]))
    probs = np.exp(shifted - log_z[:, None])
    probs[np.arange(m), y] -= 1.0
    return loss, probs / m


def loss_and_grads(
    model: ModelState,
    x,
    y,
    n_sub: int,
    lambda_topo: float,
    beta: float,
    one_sided: bool = False,
) -> tuple[dict[str, float], dict[str, np.ndarray]]:
    """Loss ``CE + lambda_topo * penalty`` and its gradient w.r.t. every parameter.

    Rows of ``x`` are laid out sub-batch by sub-batch: ``n_sub`` consecutive
    groups of equal size. Weight decay is not part of this loss.
    """
    y = np.asarray(y, dtype=np.intp)
    z, logits, cache = _forward_cache(model, x)
    if not (np.all(np.isfinite(z)) and np.all(np.isfinite(logits))):
        raise FloatingPointError("non-finite latents or logits in forward pass")
    ce, dlogits = _cross_entropy(logits, y)
    m, d = z.shape
    if m % n_sub:
        raise ValueError(f"{m} rows cannot be split into {n_sub} equal sub-batches")
    groups = z.reshape(n_sub, m // n_sub, d)
    topo, topo_grads, degenerate = connectivity_loss_and_grad(groups, beta, one_sided)

    p = model.params
    grads = {
        "gamma.weight": z.T @ dlogits,
        "gamma.bias": dlogits.sum(axis=0),
    }
    dh = dlogits @ p["gamma.weight"].T
    if lambda_topo != 0.0:
        dh = dh + lambda_topo * np.concatenate(topo_grads, axis=0)
    slope = model.config.leaky_slope
    last = model.n_phi_layers - 1
    for k in range(last, -1, -1):
        h_prev = cache[k][0]
        a = cache[k + 1][1]
        da = dh if k == last else dh * np.where(a > 0, 1.0, slope)
        grads[f"phi.{k}.weight"] = h_prev.T @ da
        grads[f"phi.{k}.bias"] = da.sum(axis=0)
        if k:
            dh = da @ p[f"phi.{k}.weight"].T
    metrics = {
        "ce_loss": ce,
        "topo_loss": topo,
        "total": ce + lambda_topo * topo,
        "degenerate": float(degenerate),
    }
    return metrics, grads


def training_step(
    model: ModelState,
    x,
    y,
    config: TrainConfig,
    lr: float | None = None,
    lambda_topo: float | None = None,
) -> tuple[ModelState, dict[str, float]]:
    """One SGD-with-momentum step on a sub-batch structured mini-batch.

    Update per parameter: ``g += wd * w; buf = momentum * buf + g; w -= lr * buf``
    with ``wd`` chosen by parameter group (phi or gamma).
    """
    lr = config.lr0 if lr is None else lr
    lam = config.lambda_topo if lambda_topo is None else lambda_topo
    if lam is None:
        raise ValueError("lambda_topo is unresolved; calibrate it before stepping")
    metrics, grads = loss_and_grads(
        model, x, y, config.sampler.n, lam, config.beta, config.loss_variant == "one-sided"
    )
    if not all(math.isfinite(metrics[k]) for k in ("ce_loss", "topo_loss", "total")):
        raise FloatingPointError(f"non-finite loss at lr={lr}: {metrics}")
    new = model.copy()
    for name, g in grads.items():
        wd = config.weight_decay_gamma if name.startswith("gamma") else config.weight_decay_phi
        g = g + wd * model.params[name]
        buf = config.momentum * model.buffers[name] + g
        new.buffers[name] = buf
        new.params[name] = model.params[name] - lr * buf
        if not np.all(np.isfinite(new.params[name])):
            raise FloatingPointError(f"parameter {name} became non-finite at lr={lr}")
    return new, metrics


def cosine_lr(lr0: float, t: int, T: int) -> float:
    """``lr0 * (1 + cos(pi t / T)) / 2`` for 0 <= t <= T."""
    if T < 1:
        raise ValueError(f"T must be >= 1, got {T}")
    if not 0 <= t <= T:
        raise ValueError(f"step index t={t} outside [0, {T}]")
    return lr0 * 0.5 * (1.0 + math.cos(math.pi * t / T))


def evaluate(model: ModelState, dataset: LabeledDataset) -> float:
    if len(dataset) == 0:
        raise ValueError("cannot evaluate on an empty dataset")
    return float(np.mean(predict(model, dataset.features) != dataset.labels))


@dataclass
class TrainResult:
    model: ModelState
    trace: list[dict[str, float]]
    lambda_topo: float


def _minibatch_arrays(dataset: LabeledDataset, subs) -> tuple[np.ndarray, np.ndarray]:
    idx = np.concatenate([s.indices for s in subs])
    return dataset.features[idx], dataset.labels[idx]


def calibrate_lambda(
    model: ModelState, dataset: LabeledDataset, config: TrainConfig, ratio: float = 0.1
) -> float:
    """Weight with ``lambda * penalty = ratio * cross-entropy`` on one initial mini-batch.

    The default keeps the weighted penalty at the low end of the 10x band
    around the cross-entropy; equal weighting diverges easily at desk scale.
    """
    subs = sample_minibatch(dataset, config.sampler, np.random.default_rng(config.seed))
    x, y = _minibatch_arrays(dataset, subs)
    metrics, _ = loss_and_grads(
        model, x, y, config.sampler.n, 0.0, config.beta, config.loss_variant == "one-sided"
    )
    if metrics["topo_loss"] == 0.0:
        return ratio
    return ratio * metrics["ce_loss"] / metrics["topo_loss"]


def _eval_row(model, train_set, test_set, eval_groups, config, epoch, lr, lam):
    z, logits = forward(model, train_set.features)
    ce, _ = _cross_entropy(logits, train_set.labels)
    deaths = batch_death_times(z[eval_groups])
    gap = deaths - config.beta
    per_sub = np.maximum(gap, 0.0) if config.loss_variant == "one-sided" else np.abs(gap)
    return {
        "epoch": epoch,
        "ce_loss": ce,
        "topo_loss": float(per_sub.sum(axis=1).mean() * config.sampler.n),
        "train_err": float(np.mean(np.argmax(logits, axis=1) != train_set.labels)),
        "test_err": evaluate(model, test_set) if test_set is not None and len(test_set) else float("nan"),
        "mean_death": float(deaths.mean()),
        "lr": lr,
    }


def train(
    model_config: ModelConfig,
    config: TrainConfig,
    train_set: LabeledDataset,
    test_set: LabeledDataset | None = None,
) -> TrainResult:
    """Full training run; returns the final model and one metrics row per epoch.

    Row 0 describes the initial model. ``mean_death`` and ``topo_loss`` are
    measured on a fixed set of label-pure training sub-batches drawn once from
    ``config.seed``, so rows are comparable across epochs.
    """
    init_ss, eval_ss = np.random.SeedSequence(config.seed).spawn(2)
    model = init_model(model_config, np.random.default_rng(init_ss))
    lam = config.lambda_topo
    if lam is None:
        lam = calibrate_lambda(model, train_set, config)

    eval_cfg = replace(config.sampler, n=config.eval_subbatches)
    eval_groups = np.stack(
        [s.indices for s in sample_minibatch(train_set, eval_cfg, np.random.default_rng(eval_ss))]
    )

    bpe = config.batches_per_epoch or default_batches_per_epoch(len(train_set), config.sampler)
    total_steps = config.epochs * bpe
    rng = np.random.default_rng(config.sampler.seed)
    trace = [_eval_row(model, train_set, test_set, eval_groups, config, 0, config.lr0, lam)]
    t = 0
    for epoch in range(1, config.epochs + 1):
        for subs in epoch_iterator(train_set, config.sampler, bpe, rng):
            x, y = _minibatch_arrays(train_set, subs)
            lr = cosine_lr(config.lr0, t, total_steps)
            model, _ = training_step(model, x, y, config, lr=lr, lambda_topo=lam)
            t += 1
        trace.append(
            _eval_row(model, train_set, test_set, eval_groups, config, epoch,
                      cosine_lr(config.lr0, t, total_steps), lam)
        )
    return TrainResult(model=model, trace=trace, lambda_topo=lam)


def make_blobs(
    num_classes: int,
    per_class: int,
    dim: int,
    centers=None,
    sigma: float = 1.0,
    seed: int = 0,
    center_scale: float = 3.0,
) -> LabeledDataset:
    """Isotropic Gaussian clusters, ``per_class`` points each.

    ``centers`` defaults to ``center_scale`` times standard normal draws.
    """
    if sigma < 0:
        raise ValueError(f"sigma must be nonnegative, got {sigma}")
    if per_class < 1:
        raise ValueError(f"per_class must be >= 1, got {per_class}")
    rng = np.random.default_rng(seed)
    if centers is None:
        centers = center_scale * rng.standard_normal((num_classes, dim))
    centers = np.asarray(centers, dtype=np.float64)
    if centers.shape != (num_classes, dim):
        raise ValueError(f"centers must have shape ({num_classes}, {dim}), got {centers.shape}")
    labels = np.repeat(np.arange(num_classes), per_class)
    features = centers[labels] + sigma * rng.standard_normal((len(labels), dim))
    return LabeledDataset(features, labels, num_classes)


def train_test_split(
    dataset: LabeledDataset, train_size: int, seed: int = 0
) -> tuple[LabeledDataset, LabeledDataset]:
    """Stratified split with ``train_size`` training samples in total.

    Per-class training counts follow class proportions (largest remainder).
    """
    m = len(dataset)
    if not 0 < train_size < m:
        raise ValueError(f"train_size must lie in (0, {m}), got {train_size}")
    rng = np.random.default_rng(seed)
    by_class = dataset.class_indices()
    quotas = {k: train_size * len(v) / m for k, v in by_class.items()}
    counts = {k: int(math.floor(q)) for k, q in quotas.items()}
    short = train_size - sum(counts.values())
    for k in sorted(quotas, key=lambda k: (counts[k] - quotas[k], k))[:short]:
        counts[k] += 1
    train_idx, test_idx = [], []
    for k, idx in by_class.items():
        perm = rng.permutation(idx)
        train_idx.append(perm[: counts[k]])
        test_idx.append(perm[counts[k] :])
    return (
        dataset.subset(np.sort(np.concatenate(train_idx))),
        dataset.subset(np.sort(np.concatenate(test_idx))),
    )


def latents_by_class(model: ModelState, dataset: LabeledDataset) -> dict[int, np.ndarray]:
    z, _ = forward(model, dataset.features)
    return {k: z[idx] for k, idx in dataset.class_indices().items()}
