"""Empirical estimators on latent representations, and exact checks on toys.

* lifetime distributions over random label-pure sub-batches,
* the probability ``c_beta`` that a b-sample is beta-connected,
* reference-set masses ``(p, q)`` as the ball radius grows,
* exact validation of the generalization bound on discrete toy problems.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .measures import ReferenceSet
from .persistence import as_point_cloud, batch_death_times

__all__ = [
    "ReferenceSet",
    "LifetimeStats",
    "CBetaEstimate",
    "MassPoint",
    "DiscreteToyProblem",
    "Lemma1Report",
    "draw_subbatches",
    "lifetime_distribution",
    "estimate_c_beta",
    "estimate_mass_concentration",
    "mass_concentration_by_class",
    "set_margin",
    "validate_lemma1",
    "random_toy",
]


def draw_subbatches(
    latents_by_class: Mapping[int, np.ndarray],
    b: int,
    trials: int,
    seed: int = 0,
    replace: bool | None = None,
) -> dict[int, np.ndarray]:
    """Draw ``trials`` random b-subsets per class, as (trials, b, d) arrays.

    ``replace=None`` draws without replacement when a class has at least b
    latents and with replacement otherwise. Empty classes are skipped with a
    warning. Draws depend only on the class sizes and the seed.
    """
    if b < 2:
        raise ValueError(f"b must be >= 2, got {b}")
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    out = {}
    classes = sorted(latents_by_class)
    children = np.random.SeedSequence(seed).spawn(len(classes))
    for k, ss in zip(classes, children):
        z = np.asarray(latents_by_class[k], dtype=np.float64)
        if z.ndim == 1:
            z = z[:, None]
        if len(z) == 0:
            warnings.warn(f"class {k} has no latents; skipped", RuntimeWarning, stacklevel=2)
            continue
        rng = np.random.default_rng(ss)
        rep = len(z) < b if replace is None else replace
        if rep:
            idx = rng.integers(0, len(z), size=(trials, b))
        else:
            idx = np.argsort(rng.random((trials, len(z))), axis=1)[:, :b]
        out[k] = z[idx]
    return out


@dataclass
class LifetimeStats:
    """Death-times of ``trials`` sub-batches (rows) of b points each."""

    deaths: np.ndarray
    class_ids: np.ndarray
    bin_edges: np.ndarray
    counts: np.ndarray = field(init=False)

    def __post_init__(self):
        self.counts, _ = np.histogram(
            np.clip(self.deaths.ravel(), self.bin_edges[0], self.bin_edges[-1]),
            bins=self.bin_edges,
        )

    @property
    def trials(self) -> int:
        return self.deaths.shape[0]

    @property
    def deaths_per_trial(self) -> int:
        return self.deaths.shape[1]

    @property
    def mean(self) -> float:
        return float(self.deaths.mean())

    @property
    def variance(self) -> float:
        return float(self.deaths.var())

    def histogram_rows(self) -> list[tuple[float, float, int]]:
        e = self.bin_edges
        return [(float(e[i]), float(e[i + 1]), int(c)) for i, c in enumerate(self.counts)]


def lifetime_distribution(
    latents_by_class: Mapping[int, np.ndarray],
    b: int,
    trials: int = 500,
    seed: int = 0,
    bin_edges: Sequence[float] | None = None,
    threads: int = 1,
) -> LifetimeStats:
    """Death-times of ``trials`` random label-pure b-subsets.

    Each trial first picks a class uniformly, then b of its latents. Values
    outside the histogram range are counted in the outermost bins, so the
    histogram always holds every death-time.
    """
    ss_class, ss_draw = np.random.SeedSequence(seed).spawn(2)
    classes = sorted(k for k, v in latents_by_class.items() if len(v))
    if not classes:
        raise ValueError("no class has any latents")
    pick = np.random.default_rng(ss_class).choice(classes, size=trials)
    per_class = {k: int(np.sum(pick == k)) for k in classes}
    drawn = draw_subbatches(
        {k: latents_by_class[k] for k in classes if per_class[k]},
        b,
        max(per_class.values()),
        int(ss_draw.generate_state(1)[0]),
    )
    counters = {k: 0 for k in classes}
    rows = []
    for k in pick:
        rows.append(drawn[k][counters[k]])
        counters[k] += 1
    deaths = batch_death_times(np.stack(rows), threads)
    if bin_edges is None:
        hi = float(deaths.max()) if deaths.size and deaths.max() > 0 else 1.0
        bin_edges = np.linspace(0.0, hi, 21)
    return LifetimeStats(deaths=deaths, class_ids=np.asarray(pick), bin_edges=np.asarray(bin_edges, dtype=np.float64))


@dataclass(frozen=True)
class CBetaEstimate:
    per_class: dict[int, float]
    per_class_se: dict[int, float]
    pooled: float
    pooled_se: float
    trials: int


def estimate_c_beta(
    latents_by_class: Mapping[int, np.ndarray],
    b: int,
    beta: float,
    trials: int = 500,
    seed: int = 0,
    replace: bool | None = None,
    threads: int = 1,
) -> CBetaEstimate:
    """Fraction of random b-subsets that are beta-connected, per class and pooled.

    The subset draws do not depend on ``beta``, so for a fixed seed the
    estimate is monotone in ``beta``.
    """
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta}")
    drawn = draw_subbatches(latents_by_class, b, trials, seed, replace)
    if not drawn:
        raise ValueError("no class has any latents")
    per, se = {}, {}
    hits = 0
    for k, clouds in drawn.items():
        ok = np.all(batch_death_times(clouds, threads) < beta, axis=1)
        c = float(ok.mean())
        per[k] = c
        se[k] = math.sqrt(c * (1 - c) / trials)
        hits += int(ok.sum())
    n_total = trials * len(drawn)
    pooled = hits / n_total
    return CBetaEstimate(per, se, pooled, math.sqrt(pooled * (1 - pooled) / n_total), trials)


@dataclass(frozen=True)
class MassPoint:
    r: float
    p_hat: float
    q_hat: float


def estimate_mass_concentration(
    reference: ReferenceSet, test_latents, r_grid: Sequence[float], beta: float
) -> list[MassPoint]:
    """Fractions of test latents within r (p_hat) and r + beta (q_hat) of an anchor.

    Only ``reference.anchors`` is used; the radius comes from ``r_grid``.
    Balls are closed.
    """
    z = np.asarray(test_latents, dtype=np.float64)
    if z.ndim == 1:
        z = z[:, None]
    if len(z) == 0:
        raise ValueError("test latents are empty")
    if beta < 0:
        raise ValueError(f"beta must be nonnegative, got {beta}")
    dmin = reference.distance(z)
    return [
        MassPoint(float(r), float(np.mean(dmin <= r)), float(np.mean(dmin <= r + beta)))
        for r in r_grid
    ]


def mass_concentration_by_class(
    anchors_by_class: Mapping[int, np.ndarray],
    test_by_class: Mapping[int, np.ndarray],
    r_grid: Sequence[float],
    beta: float,
    max_anchors: int = 500,
    seed: int = 0,
) -> tuple[dict[int, list[MassPoint]], list[MassPoint]]:
    """Per-class mass curves and the pooled curve over all test latents.

    At most ``max_anchors`` anchors per class are used, picked at random.
    The pooled curve counts each test latent against the anchors of its own
    class.
    """
    rng = np.random.default_rng(seed)
    per = {}
    d_all = []
    for k in sorted(test_by_class):
        if k not in anchors_by_class or len(test_by_class[k]) == 0:
            continue
        a = as_point_cloud(anchors_by_class[k])
        if len(a) > max_anchors:
            a = a[np.sort(rng.choice(len(a), max_anchors, replace=False))]
        ref = ReferenceSet(a, radius=0.0)
        per[k] = estimate_mass_concentration(ref, test_by_class[k], r_grid, beta)
        d_all.append(ref.distance(test_by_class[k]))
    if not d_all:
        raise ValueError("no class has both anchors and test latents")
    d = np.concatenate(d_all)
    pooled = [
        MassPoint(float(r), float(np.mean(d <= r)), float(np.mean(d <= r + beta)))
        for r in r_grid
    ]
    return per, pooled


def set_margin(a, b) -> float:
    """Smallest distance between a point of ``a`` and a point of ``b``."""
    a = as_point_cloud(a)
    b = as_point_cloud(b)
    if a.shape[1] != b.shape[1]:
        raise ValueError("point sets have different dimensions")
    diff = a[:, None, :] - b[None, :, :]
    return float(np.sqrt(np.einsum("ijk,ijk->ij", diff, diff)).min())


@dataclass
class DiscreteToyProblem:
    """Finite sample space with exact masses.

    ``masses[i]`` is P(x_i), ``labels[i]`` is c(x_i) in ``range(K)``,
    ``latents[i]`` is phi(x_i) (equal rows mean equal representations), and
    the classifier is ``argmax(z @ weight + bias)``.
    """

    masses: Sequence[Fraction]
    labels: Sequence[int]
    latents: np.ndarray
    weight: np.ndarray
    bias: np.ndarray

    def __post_init__(self):
        self.masses = [Fraction(m) for m in self.masses]
        self.labels = [int(c) for c in self.labels]
        self.latents = as_point_cloud(self.latents)
        self.weight = np.asarray(self.weight, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64)
        n = len(self.masses)
        if len(self.labels) != n or self.latents.shape[0] != n:
            raise ValueError("masses, labels and latents must have equal length")
        if any(m < 0 for m in self.masses) or sum(self.masses) != 1:
            raise ValueError("masses must be nonnegative and sum to 1")
        K = self.num_classes
        if any(not 0 <= c < K for c in self.labels):
            raise ValueError(f"labels must lie in [0, {K - 1}]")

    @property
    def num_classes(self) -> int:
        return self.weight.shape[1]

    def predictions(self) -> np.ndarray:
        return np.argmax(self.latents @ self.weight + self.bias, axis=1)


@dataclass(frozen=True)
class Lemma1Report:
    class_deficit: dict[int, Fraction]
    error: Fraction
    pessimistic_error: Fraction
    uniform_bound: Fraction
    per_class_bound: Fraction
    holds: bool


def validate_lemma1(toy: DiscreteToyProblem, epsilon: Fraction | float | None = None) -> Lemma1Report:
    """Exact check of the error bounds from per-class decision-region masses.

    With ``eps_k = 1 - Q_k(D_k)`` computed exactly, verifies
    ``error <= K (K-1) eps`` for the given ``epsilon`` (default max_k eps_k,
    and the hypothesis ``eps_k <= epsilon`` must hold) and
    ``error <= sum_k sum_{i != k} eps_i``. Classes with no support contribute
    ``eps_k = 0``. The pessimistic error, which counts every latent shared
    by several labels as an error, is checked against the same bounds.
    """
    K = toy.num_classes
    pred = toy.predictions()
    keys = [tuple(row) for row in toy.latents]
    labels_at: dict[tuple, set[int]] = {}
    for key, c in zip(keys, toy.labels):
        labels_at.setdefault(key, set()).add(c)

    deficit = {}
    for k in range(K):
        c_k = {key for key, c in zip(keys, toy.labels) if c == k}
        mass_ck = sum((m for m, key in zip(toy.masses, keys) if key in c_k), Fraction(0))
        if mass_ck == 0:
            deficit[k] = Fraction(0)
            continue
        inside = sum(
            (m for m, key, y in zip(toy.masses, keys, pred) if key in c_k and y == k),
            Fraction(0),
        )
        deficit[k] = 1 - inside / mass_ck

    error = sum(
        (m for m, c, y in zip(toy.masses, toy.labels, pred) if y != c), Fraction(0)
    )
    pessimistic = sum(
        (
            m
            for m, key, y in zip(toy.masses, keys, pred)
            if len(labels_at[key]) != 1 or y not in labels_at[key]
        ),
        Fraction(0),
    )
    eps_max = max(deficit.values())
    eps = eps_max if epsilon is None else Fraction(epsilon)
    uniform = K * (K - 1) * eps
    per_class = (K - 1) * sum(deficit.values(), Fraction(0))
    holds = (
        eps_max <= eps
        and error <= pessimistic
        and pessimistic <= uniform
        and pessimistic <= per_class
    )
    return Lemma1Report(deficit, error, pessimistic, uniform, per_class, holds)


def random_toy(
    rng: np.random.Generator,
    max_classes: int = 4,
    max_support: int = 100,
    latent_dim: int = 2,
    n_latents: int | None = None,
) -> DiscreteToyProblem:
    """Random toy problem with integer-weighted exact masses.

    Latents are drawn from a small pool of distinct points so that several
    support points, possibly of different labels, often share a latent.
    """
    K = int(rng.integers(2, max_classes + 1))
    n = int(rng.integers(K, max_support + 1))
    labels = rng.permutation(np.concatenate([np.arange(K), rng.integers(0, K, n - K)]))
    weights = rng.integers(1, 50, n)
    total = int(weights.sum())
    masses = [Fraction(int(w), total) for w in weights]
    pool = n_latents or int(rng.integers(1, n + 1))
    centers = rng.integers(-5, 6, (pool, latent_dim)).astype(np.float64)
    latents = centers[rng.integers(0, pool, n)]
    weight = rng.standard_normal((latent_dim, K))
    bias = rng.standard_normal(K)
    return DiscreteToyProblem(masses, labels, latents, weight, bias)
