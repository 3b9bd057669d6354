"""Class-stratified mini-batches: n sub-batches of b same-class indices."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np

__all__ = [
    "LabeledDataset",
    "SamplerConfig",
    "SubBatch",
    "ConfigurationError",
    "sample_minibatch",
    "epoch_iterator",
    "default_batches_per_epoch",
]

CLASS_POLICIES = ("auto", "with-replacement", "without-replacement")


class ConfigurationError(ValueError):
    pass


@dataclass
class LabeledDataset:
    """Features of shape (m, D) with integer labels in ``range(num_classes)``."""

    features: np.ndarray
    labels: np.ndarray
    num_classes: int | None = None

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        if self.features.ndim == 1:
            self.features = self.features[:, None]
        self.labels = np.asarray(self.labels)
        if self.labels.ndim != 1 or len(self.labels) != len(self.features):
            raise ValueError("features and labels must have the same length")
        if len(self.labels) and not np.issubdtype(self.labels.dtype, np.integer):
            as_int = self.labels.astype(np.int64)
            if not np.array_equal(as_int, self.labels):
                raise ValueError("labels must be integers")
            self.labels = as_int
        self.labels = self.labels.astype(np.int64)
        if self.num_classes is None:
            self.num_classes = int(self.labels.max()) + 1 if len(self.labels) else 0
        if len(self.labels) and (self.labels.min() < 0 or self.labels.max() >= self.num_classes):
            raise ValueError(f"labels must lie in [0, {self.num_classes - 1}]")

    def __len__(self) -> int:
        return len(self.labels)

    def class_indices(self) -> dict[int, np.ndarray]:
        return {
            k: np.flatnonzero(self.labels == k)
            for k in range(self.num_classes)
            if np.any(self.labels == k)
        }

    def subset(self, idx) -> "LabeledDataset":
        idx = np.asarray(idx, dtype=np.intp)
        return LabeledDataset(self.features[idx], self.labels[idx], self.num_classes)


@dataclass(frozen=True)
class SamplerConfig:
    """Sub-batch layout and draw policy.

    ``class_policy`` is one of ``"auto"`` (draw without replacement whenever the
    class has at least b samples, otherwise with replacement),
    ``"with-replacement"`` or ``"without-replacement"``. With
    ``distinct_classes`` the n slot classes of one mini-batch are all different.
    """

    b: int = 16
    n: int = 8
    seed: int = 0
    class_policy: str = "auto"
    distinct_classes: bool = False

    def __post_init__(self):
        if self.b < 2:
            raise ConfigurationError(f"sub-batch size b must be >= 2, got {self.b}")
        if self.n < 1:
            raise ConfigurationError(f"number of sub-batches n must be >= 1, got {self.n}")
        if self.class_policy not in CLASS_POLICIES:
            raise ConfigurationError(
                f"class_policy must be one of {CLASS_POLICIES}, got {self.class_policy!r}"
            )

    @property
    def batch_size(self) -> int:
        return self.b * self.n


class SubBatch(NamedTuple):
    class_id: int
    indices: np.ndarray


def _validate(dataset: LabeledDataset, config: SamplerConfig) -> dict[int, np.ndarray]:
    by_class = dataset.class_indices()
    if not by_class:
        raise ConfigurationError("dataset has no samples")
    if config.class_policy == "without-replacement":
        for k, idx in by_class.items():
            if len(idx) < config.b:
                raise ConfigurationError(
                    f"class {k} has {len(idx)} samples, fewer than b={config.b} "
                    "required for sampling without replacement"
                )
    if config.distinct_classes and len(by_class) < config.n:
        raise ConfigurationError(
            f"distinct_classes needs at least n={config.n} classes, dataset has {len(by_class)}"
        )
    return by_class


def _draw(by_class, config: SamplerConfig, rng: np.random.Generator) -> list[SubBatch]:
    classes = np.array(sorted(by_class))
    slots = rng.choice(classes, size=config.n, replace=not config.distinct_classes)
    out = []
    for k in slots:
        pool = by_class[int(k)]
        replace = config.class_policy == "with-replacement" or (
            config.class_policy == "auto" and len(pool) < config.b
        )
        out.append(SubBatch(int(k), rng.choice(pool, size=config.b, replace=replace)))
    return out


def sample_minibatch(
    dataset: LabeledDataset, config: SamplerConfig, rng: np.random.Generator | None = None
) -> list[SubBatch]:
    """Draw n label-pure sub-batches of b indices each.

    Slot classes are drawn uniformly from the classes present in ``dataset``.
    ``rng`` defaults to a fresh generator seeded with ``config.seed``.
    """
    by_class = _validate(dataset, config)
    if rng is None:
        rng = np.random.default_rng(config.seed)
    return _draw(by_class, config, rng)


def default_batches_per_epoch(m: int, config: SamplerConfig) -> int:
    return max(1, math.ceil(m / config.batch_size))


def epoch_iterator(
    dataset: LabeledDataset,
    config: SamplerConfig,
    batches_per_epoch: int | None = None,
    rng: np.random.Generator | None = None,
) -> Iterator[list[SubBatch]]:
    """Yield ``batches_per_epoch`` mini-batches (default ceil(m / (n b)))."""
    if batches_per_epoch is None:
        batches_per_epoch = default_batches_per_epoch(len(dataset), config)
    if batches_per_epoch < 1:
        raise ConfigurationError(f"batches_per_epoch must be >= 1, got {batches_per_epoch}")
    by_class = _validate(dataset, config)
    if rng is None:
        rng = np.random.default_rng(config.seed)
    return (_draw(by_class, config, rng) for _ in range(batches_per_epoch))
