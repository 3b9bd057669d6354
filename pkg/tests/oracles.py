"""Independent reference computations used by the test-suite.

Nothing here imports the code under test.
"""
from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def all_spanning_trees(n: int) -> np.ndarray:
    """Every labelled tree on n vertices as an (n^(n-2), n-1, 2) edge array.

    Decodes all Pruefer sequences at once.
    """
    if n == 1:
        return np.zeros((1, 0, 2), dtype=np.intp)
    if n == 2:
        return np.array([[[0, 1]]], dtype=np.intp)
    seqs = np.array(list(itertools.product(range(n), repeat=n - 2)), dtype=np.intp)
    T = len(seqs)
    rows = np.arange(T)
    degree = np.ones((T, n), dtype=np.intp)
    for k in range(n - 2):
        np.add.at(degree, (rows, seqs[:, k]), 1)
    edges = np.empty((T, n - 1, 2), dtype=np.intp)
    for k in range(n - 2):
        leaf = np.argmax(degree == 1, axis=1)
        edges[:, k, 0] = leaf
        edges[:, k, 1] = seqs[:, k]
        degree[rows, leaf] = 0
        degree[rows, seqs[:, k]] -= 1
    last = np.argsort(degree != 1, axis=1, kind="stable")[:, :2]
    edges[:, n - 2] = last
    return edges


def brute_force_mst_weight(points: np.ndarray) -> float:
    z = np.asarray(points, dtype=np.float64)
    n = len(z)
    if n == 1:
        return 0.0
    dist = np.sqrt(((z[:, None, :] - z[None, :, :]) ** 2).sum(-1))
    trees = all_spanning_trees(n)
    weights = dist[trees[..., 0], trees[..., 1]].sum(axis=1)
    return float(weights.min())


def central_difference(f, x: np.ndarray, h: float = 1e-6) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    g = np.zeros_like(x)
    for idx in np.ndindex(x.shape):
        xp = x.copy()
        xm = x.copy()
        xp[idx] += h
        xm[idx] -= h
        g[idx] = (f(xp) - f(xm)) / (2 * h)
    return g


def generic_cloud(rng: np.random.Generator, n: int, d: int, min_gap: float = 1e-3) -> np.ndarray:
    """Random cloud whose pairwise distances are pairwise separated by >= min_gap."""
    while True:
        z = rng.uniform(-1, 1, (n, d)) * max(1.0, n ** (1 / d))
        iu = np.triu_indices(n, 1)
        dist = np.sqrt(((z[:, None, :] - z[None, :, :]) ** 2).sum(-1))[iu]
        s = np.sort(dist)
        if n < 2 or (s[0] > min_gap and (len(s) < 2 or np.diff(s).min() > min_gap)):
            return z


def psi_exact(p, q, b: int, l: int):
    """Psi in exact rational arithmetic, by summing over the full simplex."""
    from fractions import Fraction
    from math import comb

    p, q = Fraction(p), Fraction(q)
    total = Fraction(0)
    for u in range(b + 1):
        for v in range(b + 1 - u):
            w = b - u - v
            if u >= 1 and v >= 1 and w <= l - 1:
                total += comb(b, u) * comb(b - u, v) * p**u * (1 - q) ** v * (q - p) ** w
    return total


def trinomial_scipy(p_m: float, p_o: float, b: int, l: int) -> float:
    from scipy.stats import multinomial

    p_n = 1.0 - p_m - p_o
    cells = [
        (n1, n2, b - n1 - n2)
        for n1 in range(1, b + 1)
        for n2 in range(1, b + 1 - n1)
        if b - n1 - n2 <= l - 1
    ]
    if not cells:
        return 0.0
    return float(sum(multinomial.pmf(cells, b, [p_m, p_n, p_o])))


def margin_separated_cloud(rng, l, beta, d=2):
    """Two clusters at margin >= l*beta bridged by at most l-1 points."""
    direction = rng.normal(size=d)
    direction /= np.linalg.norm(direction)
    margin = l * beta * (1 + rng.uniform(0, 0.5))
    a = rng.normal(size=(int(rng.integers(1, 6)), d)) * 0.1
    a -= direction * (a @ direction).max()  # A lies in {x . u <= 0}
    b = rng.normal(size=(int(rng.integers(1, 6)), d)) * 0.1
    b += direction * (margin - (b @ direction).min())  # B lies in {x . u >= margin}
    k = int(rng.integers(0, l))
    mids = np.outer(np.arange(1, k + 1) / (k + 1), direction) * margin
    return a, b, mids
