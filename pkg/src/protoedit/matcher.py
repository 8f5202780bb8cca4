"""Dual recurrent-encoder context/response matcher used for reranking.

Two GRU encoders (one per side) share an embedding table over the corpus
vocabulary; a bilinear form followed by a sigmoid scores how well a response
fits a context. Trained with binary cross-entropy against uniformly sampled
negative responses at a 1:9 positive:negative ratio.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from typing import Iterator

import numpy as np

from .corpus import Pair, Utterance, Vocab, encode
from .gru import GRUBlock, run_gru, run_gru_backward, zeros_like_block

TrainingExample = tuple[list[int], list[int], int]  # (context ids, response ids, label)


@dataclass
class MatcherHyperparams:
    emb_dim: int = 512
    hidden_dim: int = 1024
    neg_ratio: int = 9
    batch_size: int = 128
    lr_init: float = 1e-3
    grad_clip_norm: float = 5.0
    max_epochs: int = 10
    patience: int = 2
    seed: int = 0
    vocab_size: int = 30000
    dtype: str = "float32"

    @property
    def np_dtype(self) -> type:
        return np.float32 if self.dtype == "float32" else np.float64


@dataclass
class MatcherParams:
    emb: np.ndarray  # (V, E), trained for the matcher, same vocab as the editor
    ctx_gru: GRUBlock
    resp_gru: GRUBlock
    bilinear: np.ndarray  # (H, H)

    def named_arrays(self) -> Iterator[tuple[str, np.ndarray]]:
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, GRUBlock):
                yield f"{f.name}.wx", value.wx
                yield f"{f.name}.wh", value.wh
                yield f"{f.name}.b", value.b
            else:
                yield f.name, value

    def copy(self) -> "MatcherParams":
        return MatcherParams(
            emb=self.emb.copy(),
            ctx_gru=GRUBlock(self.ctx_gru.wx.copy(), self.ctx_gru.wh.copy(), self.ctx_gru.b.copy()),
            resp_gru=GRUBlock(self.resp_gru.wx.copy(), self.resp_gru.wh.copy(), self.resp_gru.b.copy()),
            bilinear=self.bilinear.copy(),
        )


def init_matcher(hp: MatcherHyperparams) -> MatcherParams:
    rng = np.random.default_rng(hp.seed)
    dt = hp.np_dtype

    def glorot(shape):
        fan_out, fan_in = shape
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-limit, limit, size=shape).astype(dt)

    def gru(input_dim, hidden):
        return GRUBlock(
            wx=glorot((3 * hidden, input_dim)),
            wh=glorot((3 * hidden, hidden)),
            b=np.zeros(3 * hidden, dtype=dt),
        )

    return MatcherParams(
        emb=glorot((hp.vocab_size, hp.emb_dim)),
        ctx_gru=gru(hp.emb_dim, hp.hidden_dim),
        resp_gru=gru(hp.emb_dim, hp.hidden_dim),
        bilinear=glorot((hp.hidden_dim, hp.hidden_dim)),
    )


def zeros_like_matcher(params: MatcherParams) -> MatcherParams:
    return MatcherParams(
        emb=np.zeros_like(params.emb),
        ctx_gru=zeros_like_block(params.ctx_gru),
        resp_gru=zeros_like_block(params.resp_gru),
        bilinear=np.zeros_like(params.bilinear),
    )


def _sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def _score_ids(params: MatcherParams, ctx_ids: list[int], resp_ids: list[int], keep_cache=False):
    ctx_states, ctx_caches = run_gru(params.ctx_gru, params.emb[ctx_ids])
    resp_states, resp_caches = run_gru(params.resp_gru, params.emb[resp_ids])
    c_vec = ctx_states[-1]
    r_vec = resp_states[-1]
    pre = float(c_vec @ params.bilinear @ r_vec)
    cache = (ctx_ids, resp_ids, ctx_caches, resp_caches, c_vec, r_vec) if keep_cache else None
    return pre, cache


def match_score(
    params: MatcherParams, vocab: Vocab, context: Utterance, response: Utterance
) -> float:
    """sigmoid(context_vec · M · response_vec), strictly inside (0, 1)."""
    if not context or not response:
        raise ValueError("matcher inputs must be nonempty")
    pre, _ = _score_ids(params, encode(context, vocab), encode(response, vocab))
    return _sigmoid(pre)


def loss_and_grads(
    params: MatcherParams, batch: list[TrainingExample]
) -> tuple[float, MatcherParams]:
    """Mean binary cross-entropy over the batch, with gradients."""
    if not batch:
        raise ValueError("empty batch")
    grads = zeros_like_matcher(params)
    total = 0.0
    for ctx_ids, resp_ids, label in batch:
        pre, cache = _score_ids(params, ctx_ids, resp_ids, keep_cache=True)
        # BCE in a numerically safe form: y*softplus(-x) + (1-y)*softplus(x).
        total += label * np.logaddexp(0.0, -pre) + (1 - label) * np.logaddexp(0.0, pre)
        dpre = _sigmoid(pre) - label
        _backward_example(params, grads, cache, dpre)
    scale = 1.0 / len(batch)
    for _, arr in grads.named_arrays():
        arr *= scale
    return total / len(batch), grads


def _backward_example(params, grads, cache, dpre: float) -> None:
    ctx_ids, resp_ids, ctx_caches, resp_caches, c_vec, r_vec = cache
    grads.bilinear += dpre * np.outer(c_vec, r_vec)
    dc = dpre * (params.bilinear @ r_vec)
    dr = dpre * (params.bilinear.T @ c_vec)
    dctx_states = np.zeros((len(ctx_ids), params.ctx_gru.hidden_dim), dtype=params.emb.dtype)
    dctx_states[-1] = dc
    dresp_states = np.zeros((len(resp_ids), params.resp_gru.hidden_dim), dtype=params.emb.dtype)
    dresp_states[-1] = dr
    dxs_ctx = run_gru_backward(params.ctx_gru, grads.ctx_gru, ctx_caches, dctx_states)
    dxs_resp = run_gru_backward(params.resp_gru, grads.resp_gru, resp_caches, dresp_states)
    np.add.at(grads.emb, ctx_ids, dxs_ctx)
    np.add.at(grads.emb, resp_ids, dxs_resp)


def build_training_stream(
    pairs: list[Pair],
    vocab: Vocab,
    neg_ratio: int,
    rng: np.random.Generator,
) -> list[TrainingExample]:
    """One positive plus ``neg_ratio`` sampled negatives per pair.

    Negatives take the context of the pair and the response of a uniformly
    sampled *different* pair — never the pair's own response.
    """
    stream: list[TrainingExample] = []
    n = len(pairs)
    for i, pair in enumerate(pairs):
        ctx_ids = encode(pair.context, vocab)
        stream.append((ctx_ids, encode(pair.response, vocab), 1))
        if n < 2:
            continue  # no other pair to sample a negative from
        for _ in range(neg_ratio):
            j = int(rng.integers(n - 1))
            if j >= i:
                j += 1  # uniform over all other pairs
            stream.append((ctx_ids, encode(pairs[j].response, vocab), 0))
    return stream


def stream_loss(params: MatcherParams, stream: list[TrainingExample]) -> float:
    total = 0.0
    for ctx_ids, resp_ids, label in stream:
        pre, _ = _score_ids(params, ctx_ids, resp_ids)
        total += label * np.logaddexp(0.0, -pre) + (1 - label) * np.logaddexp(0.0, pre)
    return float(total / len(stream))


def stream_accuracy(params: MatcherParams, stream: list[TrainingExample]) -> float:
    """Fraction classified correctly at the 0.5 threshold."""
    correct = 0
    for ctx_ids, resp_ids, label in stream:
        pre, _ = _score_ids(params, ctx_ids, resp_ids)
        correct += int((pre > 0) == bool(label))
    return correct / len(stream)


@dataclass
class MatcherResult:
    params: MatcherParams
    log: list[dict] = field(default_factory=list)
    best_epoch: int = -1
    best_val_loss: float = math.inf


def train_matcher(
    train_pairs: list[Pair],
    val_pairs: list[Pair],
    vocab: Vocab,
    hp: MatcherHyperparams,
) -> MatcherResult:
    """BCE training with per-epoch negative resampling and early stopping."""
    if not train_pairs or not val_pairs:
        raise ValueError("train and validation sets must both be nonempty")
    from .training import Adam, clip_gradients  # shared optimizer machinery

    params = init_matcher(hp)
    optimizer = Adam(params)
    rng = np.random.default_rng(hp.seed + 1)
    val_stream = build_training_stream(val_pairs, vocab, hp.neg_ratio, np.random.default_rng(hp.seed + 2))
    result = MatcherResult(params=params.copy())
    since_best = 0
    for epoch in range(1, hp.max_epochs + 1):
        stream = build_training_stream(train_pairs, vocab, hp.neg_ratio, rng)
        order = rng.permutation(len(stream))
        epoch_loss = 0.0
        n_batches = 0
        for start in range(0, len(order), hp.batch_size):
            batch = [stream[i] for i in order[start : start + hp.batch_size]]
            loss, grads = loss_and_grads(params, batch)
            if not math.isfinite(loss):
                raise RuntimeError(f"matcher training diverged at epoch {epoch} (loss {loss})")
            clip_gradients(grads, hp.grad_clip_norm)
            optimizer.step(params, grads, hp.lr_init)
            epoch_loss += loss
            n_batches += 1
        val_loss = stream_loss(params, val_stream)
        result.log.append(
            {"epoch": epoch, "train_loss": epoch_loss / n_batches, "val_loss": val_loss}
        )
        if val_loss < result.best_val_loss:
            result.best_val_loss = val_loss
            result.best_epoch = epoch
            result.params = params.copy()
            since_best = 0
        else:
            since_best += 1
            if since_best >= hp.patience:
                break
    return result


def rerank(
    params: MatcherParams,
    vocab: Vocab,
    context: Utterance,
    candidates: list[Utterance],
) -> list[tuple[Utterance, float]]:
    """Candidates scored against the context, stable-sorted best first."""
    if not candidates:
        raise ValueError("no candidates to rerank")
    scored = [(cand, match_score(params, vocab, context, cand)) for cand in candidates]
    scored.sort(key=lambda cs: -cs[1])
    return scored
