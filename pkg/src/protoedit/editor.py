"""Context-aware neural editor.

Generation works on a retrieved prototype response: a bidirectional GRU
encodes the prototype, lexical differences between the current context and
the prototype context are attention-pooled into an edit vector, and a GRU
decoder with attention over the encoder states emits the revised response
with the edit vector appended to every input embedding.

Everything here is plain numpy with explicit gradients; ``loss_and_grads``
is validated against central finite differences in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from typing import Iterator, Literal

import numpy as np

from .corpus import BOS_ID, Utterance, Vocab, encode
from .gru import GRUBlock, gru_step, gru_step_backward, run_gru, run_gru_backward, zeros_like_block

Ablation = Literal["full", "ins_only", "del_only", "none"]
ABLATIONS = ("full", "ins_only", "del_only", "none")


@dataclass
class Hyperparams:
    emb_dim: int = 512
    edit_dim: int = 512
    enc_hidden_per_dir: int = 512  # concatenated encoder state is twice this
    dec_hidden: int = 1024
    attn_dim: int = 0  # 0 means "same as emb_dim"
    vocab_size: int = 30000
    batch_size: int = 128
    lr_init: float = 1e-3
    beam: int = 20
    max_decode_len: int = 30
    grad_clip_norm: float = 5.0
    max_epochs: int = 20
    seed: int = 0
    ablation: Ablation = "full"
    dtype: str = "float32"  # float64 is the gradient-check build

    def __post_init__(self) -> None:
        if self.attn_dim == 0:
            self.attn_dim = self.emb_dim
        for name in ("emb_dim", "edit_dim", "enc_hidden_per_dir", "dec_hidden",
                     "attn_dim", "vocab_size", "batch_size", "beam",
                     "max_decode_len", "max_epochs"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.lr_init <= 0:
            raise ValueError(f"lr_init must be positive, got {self.lr_init}")
        if self.ablation not in ABLATIONS:
            raise ValueError(f"ablation must be one of {ABLATIONS}, got {self.ablation!r}")
        if self.dtype not in ("float32", "float64"):
            raise ValueError(f"dtype must be float32 or float64, got {self.dtype!r}")

    @property
    def enc_out_dim(self) -> int:
        return 2 * self.enc_hidden_per_dir

    @property
    def np_dtype(self) -> type:
        return np.float32 if self.dtype == "float32" else np.float64


@dataclass
class ModelParams:
    """Every learned tensor of the editor.

    Shapes (V vocab, E embedding, H encoder hidden per direction, Z edit,
    D decoder hidden, A attention):
      emb (V,E) | enc_fwd/enc_bwd GRU over E->H | ins/del attention
      w (A, E+2H), v (A,) | edit projection (Z, 2E) + (Z,) |
      bridge (D, 2H) + (D,) | dec GRU over E+Z->D |
      decoder attention w (A, 2H+D), v (A,) | output (V, E+D+2H) + (V,).
    """

    emb: np.ndarray
    enc_fwd: GRUBlock
    enc_bwd: GRUBlock
    ins_att_w: np.ndarray
    ins_att_v: np.ndarray
    del_att_w: np.ndarray
    del_att_v: np.ndarray
    edit_w: np.ndarray
    edit_b: np.ndarray
    bridge_w: np.ndarray
    bridge_b: np.ndarray
    dec: GRUBlock
    attn_w: np.ndarray
    attn_v: np.ndarray
    out_w: np.ndarray
    out_b: np.ndarray

    def named_arrays(self) -> Iterator[tuple[str, np.ndarray]]:
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, GRUBlock):
                yield f"{f.name}.wx", value.wx
                yield f"{f.name}.wh", value.wh
                yield f"{f.name}.b", value.b
            else:
                yield f.name, value

    def copy(self) -> "ModelParams":
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, GRUBlock):
                out[f.name] = GRUBlock(value.wx.copy(), value.wh.copy(), value.b.copy())
            else:
                out[f.name] = value.copy()
        return ModelParams(**out)

    @property
    def dtype(self) -> np.dtype:
        return self.emb.dtype


def _glorot(rng: np.random.Generator, shape: tuple[int, ...], dtype: type) -> np.ndarray:
    fan_out, fan_in = (shape if len(shape) == 2 else (shape[0], 1))
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape).astype(dtype)


def _init_gru(rng: np.random.Generator, input_dim: int, hidden: int, dtype: type) -> GRUBlock:
    return GRUBlock(
        wx=_glorot(rng, (3 * hidden, input_dim), dtype),
        wh=_glorot(rng, (3 * hidden, hidden), dtype),
        b=np.zeros(3 * hidden, dtype=dtype),
    )


def init_params(hp: Hyperparams) -> ModelParams:
    rng = np.random.default_rng(hp.seed)
    dt = hp.np_dtype
    e, h, z, d, a, v = (hp.emb_dim, hp.enc_hidden_per_dir, hp.edit_dim,
                        hp.dec_hidden, hp.attn_dim, hp.vocab_size)
    return ModelParams(
        emb=_glorot(rng, (v, e), dt),
        enc_fwd=_init_gru(rng, e, h, dt),
        enc_bwd=_init_gru(rng, e, h, dt),
        ins_att_w=_glorot(rng, (a, e + 2 * h), dt),
        ins_att_v=_glorot(rng, (a,), dt),
        del_att_w=_glorot(rng, (a, e + 2 * h), dt),
        del_att_v=_glorot(rng, (a,), dt),
        edit_w=_glorot(rng, (z, 2 * e), dt),
        edit_b=np.zeros(z, dtype=dt),
        bridge_w=_glorot(rng, (d, 2 * h), dt),
        bridge_b=np.zeros(d, dtype=dt),
        dec=_init_gru(rng, e + z, d, dt),
        attn_w=_glorot(rng, (a, 2 * h + d), dt),
        attn_v=_glorot(rng, (a,), dt),
        out_w=_glorot(rng, (v, e + d + 2 * h), dt),
        out_b=np.zeros(v, dtype=dt),
    )


def zeros_like_params(params: ModelParams) -> ModelParams:
    out = {}
    for f in fields(ModelParams):
        value = getattr(params, f.name)
        if isinstance(value, GRUBlock):
            out[f.name] = zeros_like_block(value)
        else:
            out[f.name] = np.zeros_like(value)
    return ModelParams(**out)


def softmax(x: np.ndarray) -> np.ndarray:
    shifted = x - np.max(x)
    e = np.exp(shifted)
    return e / e.sum()


def log_softmax(x: np.ndarray) -> np.ndarray:
    shifted = x - np.max(x)
    return shifted - np.log(np.exp(shifted).sum())


# ---------------------------------------------------------------------------
# Edit sets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EditSets:
    """Words to work in (insertions) and to write out (deletions).

    Insertions are context words absent from the prototype context;
    deletions are prototype-context words absent from the current context.
    Order is first occurrence in the source utterance, duplicates removed.
    """

    insertions: list[str]
    deletions: list[str]


def compute_edit_sets(
    context: Utterance,
    proto_context: Utterance,
    vocab: Vocab | None = None,
) -> EditSets:
    """Set differences over unique words.

    When a vocabulary is supplied, out-of-vocabulary words are dropped from
    both sets rather than mapped to UNK: a shared UNK embedding would inject
    the same noise into unrelated edits.
    """
    ctx_words = set(context)
    proto_words = set(proto_context)
    ins = [w for w in dict.fromkeys(context) if w not in proto_words]
    dels = [w for w in dict.fromkeys(proto_context) if w not in ctx_words]
    if vocab is not None:
        ins = [w for w in ins if w in vocab]
        dels = [w for w in dels if w in vocab]
    return EditSets(insertions=ins, deletions=dels)


# ---------------------------------------------------------------------------
# Shared attention helper: weights over rows, keyed by a fixed vector
# ---------------------------------------------------------------------------

_AttendCache = tuple


def _attend(
    w: np.ndarray, v: np.ndarray, rows: np.ndarray, key: np.ndarray
) -> tuple[np.ndarray, np.ndarray, _AttendCache]:
    """softmax(v . tanh(w [row ; key])) over rows; returns (pooled, weights)."""
    m = rows.shape[0]
    feats = np.concatenate([rows, np.broadcast_to(key, (m, key.shape[0]))], axis=1)
    act = np.tanh(feats @ w.T)
    weights = softmax(act @ v)
    pooled = weights @ rows
    return pooled, weights, (rows, feats, act, weights)


def _attend_backward(
    w: np.ndarray,
    v: np.ndarray,
    g_w: np.ndarray,
    g_v: np.ndarray,
    cache: _AttendCache,
    dpooled: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Returns (drows, dkey) and accumulates into g_w / g_v."""
    rows, feats, act, weights = cache
    row_dim = rows.shape[1]
    dweights = rows @ dpooled
    drows = np.outer(weights, dpooled)
    dscores = weights * (dweights - weights @ dweights)
    g_v += act.T @ dscores
    dact = np.outer(dscores, v)
    dpre = dact * (1.0 - act * act)
    g_w += dpre.T @ feats
    dfeats = dpre @ w
    drows += dfeats[:, :row_dim]
    dkey = dfeats[:, row_dim:].sum(axis=0)
    return drows, dkey


# ---------------------------------------------------------------------------
# Encoder
# ---------------------------------------------------------------------------

@dataclass
class EncoderOutput:
    states: np.ndarray  # (n, 2H): forward ⊕ backward at each position
    h_last: np.ndarray  # concatenated state at the final position
    fwd_caches: list | None = None
    bwd_caches: list | None = None
    ids: list[int] = field(default_factory=list)


def encode_prototype(
    params: ModelParams, proto_ids: list[int], keep_cache: bool = False
) -> EncoderOutput:
    """Bi-GRU over the prototype response, zero initial states."""
    if not proto_ids:
        raise ValueError("cannot encode an empty prototype")
    xs = params.emb[proto_ids]
    fwd_states, fwd_caches = run_gru(params.enc_fwd, xs, reverse=False)
    bwd_states, bwd_caches = run_gru(params.enc_bwd, xs, reverse=True)
    states = np.concatenate([fwd_states, bwd_states], axis=1)
    return EncoderOutput(
        states=states,
        h_last=states[-1],
        fwd_caches=fwd_caches if keep_cache else None,
        bwd_caches=bwd_caches if keep_cache else None,
        ids=list(proto_ids),
    )


def _encoder_backward(
    params: ModelParams,
    grads: ModelParams,
    enc: EncoderOutput,
    dstates: np.ndarray,
    dh_last: np.ndarray,
) -> None:
    h = params.enc_fwd.hidden_dim
    dstates = dstates.copy()
    dstates[-1] += dh_last
    dxs = run_gru_backward(
        params.enc_fwd, grads.enc_fwd, enc.fwd_caches, dstates[:, :h], reverse=False
    )
    dxs += run_gru_backward(
        params.enc_bwd, grads.enc_bwd, enc.bwd_caches, dstates[:, h:], reverse=True
    )
    np.add.at(grads.emb, enc.ids, dxs)


# ---------------------------------------------------------------------------
# Edit vector
# ---------------------------------------------------------------------------

@dataclass
class EditVector:
    z: np.ndarray  # (edit_dim,), tanh range
    ins_weights: np.ndarray  # attention over insertion words ([] when unused)
    del_weights: np.ndarray
    diff: np.ndarray  # (2E,) pooled insertion half ⊕ pooled deletion half
    cache: tuple | None = None


def edit_vector(
    params: ModelParams,
    ins_ids: list[int],
    del_ids: list[int],
    h_last: np.ndarray,
    ablation: Ablation = "full",
    keep_cache: bool = False,
) -> EditVector:
    """Pool edit-word embeddings by attention keyed on the encoder state.

    An empty or ablated side contributes a zero half to the difference
    vector; ``ins_only`` zeroes the deletion half, ``del_only`` the insertion
    half, and ``none`` both (leaving z = tanh(bias)).
    """
    dt = params.dtype
    e = params.emb.shape[1]
    ins_vec = np.zeros(e, dtype=dt)
    del_vec = np.zeros(e, dtype=dt)
    ins_w = np.zeros(0, dtype=dt)
    del_w = np.zeros(0, dtype=dt)
    ins_cache = del_cache = None
    use_ins = ablation in ("full", "ins_only") and len(ins_ids) > 0
    use_del = ablation in ("full", "del_only") and len(del_ids) > 0
    if use_ins:
        ins_vec, ins_w, ins_cache = _attend(
            params.ins_att_w, params.ins_att_v, params.emb[ins_ids], h_last
        )
    if use_del:
        del_vec, del_w, del_cache = _attend(
            params.del_att_w, params.del_att_v, params.emb[del_ids], h_last
        )
    diff = np.concatenate([ins_vec, del_vec])
    z = np.tanh(params.edit_w @ diff + params.edit_b)
    cache = (diff, z, ins_cache, del_cache, list(ins_ids), list(del_ids)) if keep_cache else None
    return EditVector(z=z, ins_weights=ins_w, del_weights=del_w, diff=diff, cache=cache)


def _edit_vector_backward(
    params: ModelParams,
    grads: ModelParams,
    ev: EditVector,
    dz: np.ndarray,
) -> np.ndarray:
    """Returns the gradient w.r.t. the encoder's final state."""
    diff, z, ins_cache, del_cache, ins_ids, del_ids = ev.cache
    e = params.emb.shape[1]
    dz_pre = dz * (1.0 - z * z)
    grads.edit_w += np.outer(dz_pre, diff)
    grads.edit_b += dz_pre
    ddiff = params.edit_w.T @ dz_pre
    dh_last = np.zeros(params.bridge_w.shape[1], dtype=params.dtype)
    if ins_cache is not None:
        drows, dkey = _attend_backward(
            params.ins_att_w, params.ins_att_v,
            grads.ins_att_w, grads.ins_att_v, ins_cache, ddiff[:e],
        )
        np.add.at(grads.emb, ins_ids, drows)
        dh_last += dkey
    if del_cache is not None:
        drows, dkey = _attend_backward(
            params.del_att_w, params.del_att_v,
            grads.del_att_w, grads.del_att_v, del_cache, ddiff[e:],
        )
        np.add.at(grads.emb, del_ids, drows)
        dh_last += dkey
    return dh_last


# ---------------------------------------------------------------------------
# Decoder
# ---------------------------------------------------------------------------

def decoder_init_state(params: ModelParams, h_last: np.ndarray) -> np.ndarray:
    """Learned bridge from the encoder's final state to the decoder state."""
    return np.tanh(params.bridge_w @ h_last + params.bridge_b)


_StepCache = tuple


def _decoder_step_logits(
    params: ModelParams,
    state: np.ndarray,
    prev_id: int,
    z: np.ndarray,
    enc_states: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, _StepCache]:
    """One decode step; the edit vector rides along with every input embedding."""
    prev_emb = params.emb[prev_id]
    x = np.concatenate([prev_emb, z])
    new_state, gru_cache = gru_step(params.dec, state, x)
    ctx, _, att_cache = _attend(params.attn_w, params.attn_v, enc_states, new_state)
    out_in = np.concatenate([prev_emb, new_state, ctx])
    logits = params.out_w @ out_in + params.out_b
    return new_state, logits, (prev_id, gru_cache, att_cache, out_in)


def decoder_step(
    params: ModelParams,
    state: np.ndarray,
    prev_id: int,
    z: np.ndarray,
    enc_states: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Public single-step API: returns (new state, probability distribution)."""
    new_state, logits, _ = _decoder_step_logits(params, state, prev_id, z, enc_states)
    return new_state, softmax(logits)


def decoder_log_probs(
    params: ModelParams,
    state: np.ndarray,
    prev_id: int,
    z: np.ndarray,
    enc_states: np.ndarray,
    forbid_unk: bool = False,
    unk_id: int = 3,
) -> tuple[np.ndarray, np.ndarray]:
    """Log-probability step used by decoding; UNK is masked pre-normalization."""
    new_state, logits, _ = _decoder_step_logits(params, state, prev_id, z, enc_states)
    if forbid_unk and unk_id < logits.shape[0]:
        logits = logits.copy()
        logits[unk_id] = -np.inf
    return new_state, log_softmax(logits)


# ---------------------------------------------------------------------------
# Training forward / backward over encoded examples
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Example:
    """One encoded training instance."""

    proto_ids: list[int]  # prototype response, no terminators
    target_ids: list[int]  # response with EOS appended
    ins_ids: list[int]
    del_ids: list[int]


@dataclass
class _ExampleCache:
    enc: EncoderOutput
    ev: EditVector
    init_state: np.ndarray
    steps: list  # per step: (cache, probs, target_id)


def forward_example(
    params: ModelParams,
    ex: Example,
    ablation: Ablation = "full",
    keep_cache: bool = False,
) -> tuple[float, int, _ExampleCache | None]:
    """Teacher-forced forward; returns (sum token NLL, token count, cache)."""
    if not ex.target_ids:
        raise ValueError("example has no target tokens")
    enc = encode_prototype(params, ex.proto_ids, keep_cache=keep_cache)
    ev = edit_vector(
        params, ex.ins_ids, ex.del_ids, enc.h_last, ablation, keep_cache=keep_cache
    )
    state = decoder_init_state(params, enc.h_last)
    init_state = state
    prev_ids = [BOS_ID] + ex.target_ids[:-1]
    nll_sum = 0.0
    steps = []
    for prev_id, target_id in zip(prev_ids, ex.target_ids):
        state, logits, step_cache = _decoder_step_logits(
            params, state, prev_id, ev.z, enc.states
        )
        logp = log_softmax(logits)
        nll_sum -= float(logp[target_id])
        if keep_cache:
            steps.append((step_cache, np.exp(logp), target_id))
    cache = _ExampleCache(enc=enc, ev=ev, init_state=init_state, steps=steps) if keep_cache else None
    return nll_sum, len(ex.target_ids), cache


def _backward_example(params: ModelParams, grads: ModelParams, cache: _ExampleCache) -> None:
    """Backward for the summed (not averaged) token NLL of one example."""
    dt = params.dtype
    e = params.emb.shape[1]
    d = params.dec.hidden_dim
    enc_states = cache.enc.states
    dstate = np.zeros(d, dtype=dt)
    dz = np.zeros_like(cache.ev.z)
    denc_states = np.zeros_like(enc_states)
    for step_cache, probs, target_id in reversed(cache.steps):
        prev_id, gru_cache, att_cache, out_in = step_cache
        dlogits = probs.copy()
        dlogits[target_id] -= 1.0
        grads.out_w += np.outer(dlogits, out_in)
        grads.out_b += dlogits
        d_out_in = params.out_w.T @ dlogits
        grads.emb[prev_id] += d_out_in[:e]
        dstate = dstate + d_out_in[e : e + d]
        dctx = d_out_in[e + d :]
        drows, dkey = _attend_backward(
            params.attn_w, params.attn_v, grads.attn_w, grads.attn_v, att_cache, dctx
        )
        denc_states += drows
        dstate = dstate + dkey
        dx, dstate = gru_step_backward(params.dec, grads.dec, gru_cache, dstate)
        grads.emb[prev_id] += dx[:e]
        dz += dx[e:]
    # Bridge into the decoder's initial state.
    ds0_pre = dstate * (1.0 - cache.init_state * cache.init_state)
    grads.bridge_w += np.outer(ds0_pre, cache.enc.h_last)
    grads.bridge_b += ds0_pre
    dh_last = params.bridge_w.T @ ds0_pre
    dh_last = dh_last + _edit_vector_backward(params, grads, cache.ev, dz)
    _encoder_backward(params, grads, cache.enc, denc_states, dh_last)


def nll(params: ModelParams, batch: list[Example], ablation: Ablation = "full") -> float:
    """Mean negative log-likelihood per target token across the batch."""
    if not batch:
        raise ValueError("empty batch")
    total, tokens = 0.0, 0
    for ex in batch:
        s, n, _ = forward_example(params, ex, ablation, keep_cache=False)
        total += s
        tokens += n
    return total / tokens


def loss_and_grads(
    params: ModelParams, batch: list[Example], ablation: Ablation = "full"
) -> tuple[float, ModelParams]:
    """Token-mean NLL and its gradient for every parameter block."""
    if not batch:
        raise ValueError("empty batch")
    grads = zeros_like_params(params)
    total, tokens = 0.0, 0
    for ex in batch:
        s, n, cache = forward_example(params, ex, ablation, keep_cache=True)
        _backward_example(params, grads, cache)
        total += s
        tokens += n
    scale = 1.0 / tokens
    for _, arr in grads.named_arrays():
        arr *= scale
    return total / tokens, grads


def encode_quadruple(quad, vocab: Vocab) -> Example:
    """Turn a (context, response, prototype) quadruple into id sequences."""
    sets = compute_edit_sets(quad.context, quad.proto_context, vocab)
    return Example(
        proto_ids=encode(quad.proto_response, vocab),
        target_ids=encode(quad.response, vocab, add_eos=True),
        ins_ids=[vocab.word_to_id[w] for w in sets.insertions],
        del_ids=[vocab.word_to_id[w] for w in sets.deletions],
    )
