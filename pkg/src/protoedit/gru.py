"""Gated recurrent unit with hand-written forward and backward passes.

Gate convention (update gate drives the candidate in):

    u = sigmoid(Wx_u x + Wh_u h_prev + b_u)
    r = sigmoid(Wx_r x + Wh_r h_prev + b_r)
    c = tanh(Wx_c x + Wh_c (r * h_prev) + b_c)
    h = (1 - u) * h_prev + u * c

Parameters are packed as (3H, ·) matrices with row blocks in the order
update / reset / candidate. With all-zero parameters and a zero initial
state every output state is zero, which several shape tests rely on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


@dataclass
class GRUBlock:
    wx: np.ndarray  # (3H, input_dim)
    wh: np.ndarray  # (3H, H)
    b: np.ndarray  # (3H,)

    @property
    def hidden_dim(self) -> int:
        return self.wh.shape[1]

    @property
    def input_dim(self) -> int:
        return self.wx.shape[1]


# Cache of one step's intermediates, consumed by gru_step_backward.
GRUCache = tuple


def gru_step(block: GRUBlock, h_prev: np.ndarray, x: np.ndarray) -> tuple[np.ndarray, GRUCache]:
    h = block.hidden_dim
    pre = block.wx @ x + block.b
    u = sigmoid(pre[:h] + block.wh[:h] @ h_prev)
    r = sigmoid(pre[h : 2 * h] + block.wh[h : 2 * h] @ h_prev)
    rh = r * h_prev
    c = np.tanh(pre[2 * h :] + block.wh[2 * h :] @ rh)
    h_new = (1.0 - u) * h_prev + u * c
    return h_new, (x, h_prev, u, r, rh, c)


def gru_step_backward(
    block: GRUBlock,
    grads: GRUBlock,
    cache: GRUCache,
    dh: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Accumulate parameter gradients for one step; returns (dx, dh_prev)."""
    x, h_prev, u, r, rh, c = cache
    h = block.hidden_dim

    du = dh * (c - h_prev)
    dc = dh * u
    dh_prev = dh * (1.0 - u)

    dc_pre = dc * (1.0 - c * c)
    grads.wx[2 * h :] += np.outer(dc_pre, x)
    grads.wh[2 * h :] += np.outer(dc_pre, rh)
    grads.b[2 * h :] += dc_pre
    drh = block.wh[2 * h :].T @ dc_pre
    dr = drh * h_prev
    dh_prev = dh_prev + drh * r

    du_pre = du * u * (1.0 - u)
    dr_pre = dr * r * (1.0 - r)
    grads.wx[:h] += np.outer(du_pre, x)
    grads.wh[:h] += np.outer(du_pre, h_prev)
    grads.b[:h] += du_pre
    grads.wx[h : 2 * h] += np.outer(dr_pre, x)
    grads.wh[h : 2 * h] += np.outer(dr_pre, h_prev)
    grads.b[h : 2 * h] += dr_pre

    dx = block.wx[:h].T @ du_pre + block.wx[h : 2 * h].T @ dr_pre + block.wx[2 * h :].T @ dc_pre
    dh_prev = dh_prev + block.wh[:h].T @ du_pre + block.wh[h : 2 * h].T @ dr_pre
    return dx, dh_prev


def run_gru(
    block: GRUBlock, xs: np.ndarray, reverse: bool = False
) -> tuple[np.ndarray, list[GRUCache]]:
    """Run a GRU over ``xs`` (T, input_dim) from a zero initial state.

    Returns per-position states (T, H) in input order; with ``reverse`` the
    recurrence runs right to left but states stay aligned with positions.
    """
    t_total = xs.shape[0]
    states = np.zeros((t_total, block.hidden_dim), dtype=xs.dtype)
    caches: list[GRUCache] = [None] * t_total  # type: ignore[list-item]
    h = np.zeros(block.hidden_dim, dtype=xs.dtype)
    order = range(t_total - 1, -1, -1) if reverse else range(t_total)
    for t in order:
        h, cache = gru_step(block, h, xs[t])
        states[t] = h
        caches[t] = cache
    return states, caches


def run_gru_backward(
    block: GRUBlock,
    grads: GRUBlock,
    caches: list[GRUCache],
    dstates: np.ndarray,
    reverse: bool = False,
) -> np.ndarray:
    """Backward through ``run_gru``; returns gradient w.r.t. the inputs."""
    t_total = dstates.shape[0]
    dxs = np.zeros((t_total, block.input_dim), dtype=dstates.dtype)
    dh = np.zeros(block.hidden_dim, dtype=dstates.dtype)
    order = range(t_total) if reverse else range(t_total - 1, -1, -1)
    for t in order:
        dxs[t], dh = gru_step_backward(block, grads, caches[t], dstates[t] + dh)
    return dxs


def zeros_like_block(block: GRUBlock) -> GRUBlock:
    return GRUBlock(
        wx=np.zeros_like(block.wx),
        wh=np.zeros_like(block.wh),
        b=np.zeros_like(block.b),
    )
