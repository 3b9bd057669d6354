"""Mass-concentration bounds for (b, c_beta)-connected measures.

A b-sample falling into a reference set M, the complement N of its
l*beta-extension, and the shell O in between, with at least one point in M and
N and at most l-1 points in O, can never be beta-connected. The probability of
that event is the polynomial ``psi(p, q; b, l)`` with ``p`` the mass of M and
``q`` the mass of the extension, hence ``1 - c_beta >= psi(p, q; b, l)``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from ._blocks import run_blocks
from .measures import Distribution, ReferenceSet
from .persistence import batch_is_beta_connected

__all__ = [
    "IndexTriple",
    "BoundQuery",
    "index_set",
    "psi",
    "psi_rewrites",
    "critical_mass_threshold",
    "critical_mass_holds",
    "min_extension_mass",
    "trinomial_event_probability",
    "TheoremCheck",
    "monte_carlo_theorem1",
]

_FACTORIALS = [math.factorial(k) for k in range(65)]


def _factorial(k: int) -> int:
    return _FACTORIALS[k] if k < len(_FACTORIALS) else math.factorial(k)


@lru_cache(maxsize=None)
def _multinomial(b: int, u: int, v: int, w: int) -> float:
    return float(_factorial(b) // (_factorial(u) * _factorial(v) * _factorial(w)))


class IndexTriple(NamedTuple):
    u: int
    v: int
    w: int


@dataclass(frozen=True)
class BoundQuery:
    p: float
    q: float
    b: int
    l: int = 1
    c_beta: float = 0.0

    def __post_init__(self):
        _check_pq(self.p, self.q)
        _check_bl(self.b, self.l)
        _check_unit("c_beta", self.c_beta)

    def psi(self) -> float:
        return psi(self.p, self.q, self.b, self.l)

    def min_extension_mass(self) -> float:
        return min_extension_mass(self.p, self.l, self.b, self.c_beta)


def _check_unit(name: str, x: float) -> None:
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {x}")


def _check_pq(p: float, q: float) -> None:
    _check_unit("p", p)
    _check_unit("q", q)
    if p > q:
        raise ValueError(f"p must not exceed q, got p={p} > q={q}")


def _check_bl(b: int, l: int) -> None:
    if int(b) != b or b < 1:
        raise ValueError(f"b must be a positive integer, got {b}")
    if int(l) != l or l < 1:
        raise ValueError(f"l must be a positive integer, got {l}")


def index_set(b: int, l: int) -> list[IndexTriple]:
    """All (u, v, w) with u + v + w = b, u, v >= 1 and w <= l - 1.

    For ``b < 2`` the set is empty; a ``RuntimeWarning`` says so.
    """
    _check_bl(b, l)
    if b < 2:
        warnings.warn(f"index set I({b}, {l}) is empty: b < 2", RuntimeWarning, stacklevel=2)
        return []
    return [
        IndexTriple(u, v, b - u - v)
        for u in range(1, b)
        for v in range(1, b - u + 1)
        if b - u - v <= l - 1
    ]


def _term(p: float, q: float, b: int, u: int, v: int, w: int) -> float:
    return _multinomial(b, u, v, w) * p**u * (1.0 - q) ** v * (q - p) ** w


def psi(p: float, q: float, b: int, l: int = 1) -> float:
    """Sum over I(b, l) of b!/(u! v! w!) p^u (1-q)^v (q-p)^w, with 0^0 = 1."""
    _check_pq(p, q)
    _check_bl(b, l)
    if b < 2:
        return 0.0
    return math.fsum(_term(p, q, b, *t) for t in index_set(b, l))


def psi_rewrites(p: float, q: float, b: int, l: int = 1) -> tuple[float, float, float]:
    """Evaluate psi by direct enumeration and by both nested-sum rewrites.

    With ``g(x) = max(1, b - x - l + 1)`` the rewrites are
    ``sum_{n1=1}^{b-1} sum_{n2=g(n1)}^{b-n1}`` and the same with the roles of
    n1 and n2 swapped.
    """
    direct = psi(p, q, b, l)

    def g(x: int) -> int:
        return max(1, b - x - l + 1)

    outer_m = math.fsum(
        _term(p, q, b, n1, n2, b - n1 - n2)
        for n1 in range(1, b)
        for n2 in range(g(n1), b - n1 + 1)
    )
    outer_n = math.fsum(
        _term(p, q, b, n1, n2, b - n1 - n2)
        for n2 in range(1, b)
        for n1 in range(g(n2), b - n2 + 1)
    )
    return direct, outer_m, outer_n


def critical_mass_threshold(p: float, b: int) -> float:
    """psi(p, p; b, l) = 1 - p^b - (1-p)^b, independent of l."""
    _check_unit("p", p)
    return 1.0 - p**b - (1.0 - p) ** b


def critical_mass_holds(p: float, b: int, c_beta: float) -> bool:
    """True iff 1 - c_beta < 1 - p^b - (1-p)^b, i.e. the extension bound exceeds p."""
    _check_unit("c_beta", c_beta)
    _check_bl(b, 1)
    return 1.0 - c_beta < critical_mass_threshold(p, b)


def min_extension_mass(
    p: float,
    l: int,
    b: int,
    c_beta: float,
    tol: float = 1e-10,
    max_iter: int = 100,
) -> float:
    """Smallest q in [p, 1] with psi(p, q; b, l) <= 1 - c_beta.

    Bisection on q, valid since psi is nonincreasing in q and vanishes at q = 1.
    The returned value always satisfies the inequality and lies within ``tol``
    of the true minimum.
    """
    _check_unit("p", p)
    _check_unit("c_beta", c_beta)
    _check_bl(b, l)
    slack = 1.0 - c_beta
    if psi(p, p, b, l) <= slack:
        return float(p)
    if slack == 0.0:
        # psi(p, q) >= b p (1-q)^(b-1) > 0 for p > 0, q < 1
        return 1.0
    lo, hi = float(p), 1.0
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if psi(p, mid, b, l) <= slack:
            hi = mid
        else:
            lo = mid
    return hi


def trinomial_event_probability(p_m: float, p_o: float, b: int, l: int = 1) -> float:
    """P(n_M >= 1, n_N >= 1, n_O <= l-1) for a trinomial b-sample.

    Cell probabilities are ``p_m`` (reference set), ``p_o`` (shell) and
    ``1 - p_m - p_o`` (outside the extension). Sums the pmf over the whole
    trinomial support and keeps the qualifying cells.
    """
    if p_m < 0 or p_o < 0 or p_m + p_o > 1.0 + 1e-15:
        raise ValueError(f"invalid simplex coordinates p_m={p_m}, p_o={p_o}")
    _check_bl(b, l)
    p_n = max(0.0, 1.0 - p_m - p_o)
    total = []
    for n1 in range(b + 1):
        for n2 in range(b + 1 - n1):
            n3 = b - n1 - n2
            if n1 >= 1 and n2 >= 1 and n3 <= l - 1:
                coef = math.factorial(b) / (
                    math.factorial(n1) * math.factorial(n2) * math.factorial(n3)
                )
                total.append(coef * p_m**n1 * p_n**n2 * p_o**n3)
    return math.fsum(total)


@dataclass(frozen=True)
class TheoremCheck:
    c_beta_hat: float
    p_hat: float
    q_hat: float
    psi_value: float
    sigma: float
    slack: float
    inequality_holds: bool
    n_samples: int
    n_mass_samples: int


def _psi_partials(p: float, q: float, b: int, l: int, h: float = 1e-6) -> tuple[float, float]:
    def safe(pp, qq):
        pp = min(max(pp, 0.0), 1.0)
        qq = min(max(qq, pp), 1.0)
        return psi(pp, qq, b, l)

    p_lo, p_hi = max(p - h, 0.0), min(p + h, q)
    q_lo, q_hi = max(q - h, p), min(q + h, 1.0)
    dp = (safe(p_hi, q) - safe(p_lo, q)) / (p_hi - p_lo) if p_hi > p_lo else 0.0
    dq = (safe(p, q_hi) - safe(p, q_lo)) / (q_hi - q_lo) if q_hi > q_lo else 0.0
    return dp, dq


def monte_carlo_theorem1(
    distribution: Distribution,
    reference: ReferenceSet,
    b: int,
    l: int,
    beta: float,
    n_samples: int = 100_000,
    n_mass_samples: int = 100_000,
    seed: int = 0,
    block_size: int = 8192,
    workers: int = 1,
) -> TheoremCheck:
    """Check 1 - c_beta >= psi(p, q; b, l) by sampling.

    ``c_beta`` is estimated from ``n_samples`` independent b-samples; ``p`` and
    ``q`` from ``n_mass_samples`` points as the fractions inside the reference
    set and inside its ``l * beta`` extension. The inequality is accepted when
    the slack ``(1 - c_hat) - psi(p_hat, q_hat)`` is at least ``-3 sigma``,
    where sigma propagates the binomial standard errors (and the covariance of
    p_hat and q_hat) through psi to first order.
    """
    if not hasattr(distribution, "sample"):
        raise ValueError(f"{distribution!r} is not a samplable distribution")
    if n_samples < 10_000 or n_mass_samples < 10_000:
        raise ValueError("Monte Carlo check needs at least 10^4 samples of each kind")
    _check_bl(b, l)
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta}")

    conn_ss, mass_ss = np.random.SeedSequence(seed).spawn(2)

    def conn_block(rng: np.random.Generator, size: int) -> int:
        z = distribution.sample(rng, size * b).reshape(size, b, -1)
        return int(batch_is_beta_connected(z, beta).sum())

    def mass_block(rng: np.random.Generator, size: int) -> tuple[int, int]:
        z = distribution.sample(rng, size)
        dmin = reference.distance(z)
        return int((dmin <= reference.radius).sum()), int(
            (dmin <= reference.radius + l * beta).sum()
        )

    connected = sum(run_blocks(conn_block, n_samples, conn_ss, block_size, workers))
    counts = run_blocks(mass_block, n_mass_samples, mass_ss, block_size, workers)
    in_m = sum(c[0] for c in counts)
    in_ext = sum(c[1] for c in counts)

    c_hat = connected / n_samples
    p_hat = in_m / n_mass_samples
    q_hat = in_ext / n_mass_samples
    psi_value = psi(p_hat, q_hat, b, l)
    dp, dq = _psi_partials(p_hat, q_hat, b, l)
    var = (
        c_hat * (1 - c_hat) / n_samples
        + dp**2 * p_hat * (1 - p_hat) / n_mass_samples
        + dq**2 * q_hat * (1 - q_hat) / n_mass_samples
        # p_hat and q_hat share one sample: Cov = p (1 - q) / N
        + 2 * dp * dq * p_hat * (1 - q_hat) / n_mass_samples
    )
    sigma = math.sqrt(max(var, 0.0))
    slack = (1.0 - c_hat) - psi_value
    return TheoremCheck(
        c_beta_hat=c_hat,
        p_hat=p_hat,
        q_hat=q_hat,
        psi_value=psi_value,
        sigma=sigma,
        slack=slack,
        inequality_holds=slack >= -3.0 * sigma,
        n_samples=n_samples,
        n_mass_samples=n_mass_samples,
    )
