"""Seeded block decomposition of Monte Carlo work.

Work of ``total`` draws is cut into fixed-size blocks, each with its own child
seed. Results depend only on (total, seed, block_size), never on ``workers``.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, TypeVar

import numpy as np

T = TypeVar("T")


def block_sizes(total: int, block_size: int) -> list[int]:
    if total < 0 or block_size < 1:
        raise ValueError("total must be >= 0 and block_size >= 1")
    full, rest = divmod(total, block_size)
    return [block_size] * full + ([rest] if rest else [])


def run_blocks(
    fn: Callable[[np.random.Generator, int], T],
    total: int,
    seed: int | np.random.SeedSequence,
    block_size: int = 8192,
    workers: int = 1,
) -> list[T]:
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    sizes = block_sizes(total, block_size)
    children = ss.spawn(len(sizes))
    jobs = [(np.random.default_rng(c), s) for c, s in zip(children, sizes)]
    if workers <= 1 or len(jobs) <= 1:
        return [fn(rng, s) for rng, s in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda job: fn(*job), jobs))
