"""Connectivity penalty on label-pure sub-batches of latent representations.

For a mini-batch made of sub-batches B_1..B_n the two-sided penalty is
``sum_i sum_{d in deaths(B_i)} |d - beta|``; the one-sided variant only
charges deaths above ``beta``. Gradients flow through the MST edge endpoints,
the edge selection itself being piecewise constant.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .persistence import as_point_cloud, barcode, barcode_backward

__all__ = [
    "connectivity_loss",
    "one_sided_connectivity_loss",
    "connectivity_loss_backward",
    "connectivity_loss_and_grad",
]


def _sub_batches(batch) -> list[np.ndarray]:
    subs = list(batch)
    if not subs:
        raise ValueError("mini-batch has no sub-batches")
    out = []
    for k, sb in enumerate(subs):
        z = as_point_cloud(sb)
        if z.shape[0] < 2:
            raise ValueError(f"sub-batch {k} has {z.shape[0]} point(s); at least 2 needed")
        out.append(z)
    return out


def _check_beta(beta: float) -> None:
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta}")


def connectivity_loss_and_grad(
    batch, beta: float, one_sided: bool = False
) -> tuple[float, list[np.ndarray], bool]:
    """Penalty value, per-sub-batch latent gradients and a degeneracy flag.

    ``batch`` is an (n, b, d) array or a sequence of (b_i, d) arrays. The
    subgradient of |.| at 0 is taken as 0.
    """
    _check_beta(beta)
    total = 0.0
    grads = []
    degenerate = False
    for z in _sub_batches(batch):
        bc = barcode(z)
        gap = bc.deaths - beta
        if one_sided:
            total += float(np.maximum(gap, 0.0).sum())
            upstream = (gap > 0).astype(np.float64)
        else:
            total += float(np.abs(gap).sum())
            upstream = np.sign(gap)
        g, flag = barcode_backward(z, bc, upstream)
        grads.append(g)
        degenerate |= flag
    return total, grads, degenerate


def connectivity_loss(batch, beta: float) -> float:
    return connectivity_loss_and_grad(batch, beta)[0]


def one_sided_connectivity_loss(batch, beta: float) -> float:
    return connectivity_loss_and_grad(batch, beta, one_sided=True)[0]


def connectivity_loss_backward(batch, beta: float, one_sided: bool = False):
    """Gradient of the penalty w.r.t. every latent.

    Returns an array shaped like ``batch`` when it was an (n, b, d) array,
    otherwise a list of per-sub-batch arrays.
    """
    _, grads, _ = connectivity_loss_and_grad(batch, beta, one_sided)
    if isinstance(batch, np.ndarray) and batch.ndim == 3:
        return np.stack(grads)
    return grads
