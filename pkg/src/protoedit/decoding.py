"""Beam and greedy decoding over a trained editor.

Scores are raw cumulative log-probabilities — no length normalization; the
reranker, not the beam, is the place to handle length bias. With UNK
forbidden its logit is set to -inf before the softmax, so every step still
emits a proper distribution.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .corpus import BOS_ID, EOS_ID, UNK_ID
from .editor import EncoderOutput, ModelParams, decoder_init_state, decoder_log_probs


@dataclass
class BeamConfig:
    width: int = 20
    max_len: int = 30
    forbid_unk: bool = True

    def __post_init__(self) -> None:
        if self.width < 1:
            raise ValueError(f"beam width must be >= 1, got {self.width}")
        if self.max_len < 1:
            raise ValueError(f"max_len must be >= 1, got {self.max_len}")


@dataclass
class Hypothesis:
    """A (partial) decode: ids exclude BOS; EOS stays when it ended the hypothesis."""

    token_ids: list[int] = field(default_factory=list)
    log_prob: float = 0.0
    state: np.ndarray | None = None
    finished: bool = False

    def surface_ids(self) -> list[int]:
        """Token ids with a trailing EOS stripped."""
        if self.token_ids and self.token_ids[-1] == EOS_ID:
            return self.token_ids[:-1]
        return list(self.token_ids)


def beam_search(
    params: ModelParams,
    enc_out: EncoderOutput,
    z: np.ndarray,
    config: BeamConfig,
) -> list[Hypothesis]:
    """Standard beam search, deterministic tie-breaking.

    Each step keeps the ``width`` best expansions overall (score descending,
    then token id, then parent beam order); hypotheses that emit EOS are set
    aside as finished and the beam continues until ``width`` of them exist or
    every active beam has finished or hit ``max_len``. Output is sorted by
    cumulative log-probability, best first, at most ``width`` entries.
    """
    start = Hypothesis(state=decoder_init_state(params, enc_out.h_last))
    active = [start]
    finished: list[Hypothesis] = []
    steps = 0
    while active and len(finished) < config.width and steps < config.max_len:
        candidates = []  # (-score, token_id, parent_order, state)
        for parent_order, hyp in enumerate(active):
            prev_id = hyp.token_ids[-1] if hyp.token_ids else BOS_ID
            state, logp = decoder_log_probs(
                params, hyp.state, prev_id, z, enc_out.states,
                forbid_unk=config.forbid_unk, unk_id=UNK_ID,
            )
            # Only the top `width` tokens of one parent can survive globally;
            # stable sort keeps ties in token-id order, matching greedy.
            top = np.argsort(-logp, kind="stable")[: config.width]
            for token_id in top:
                score = hyp.log_prob + float(logp[token_id])
                if score == -np.inf:
                    continue
                candidates.append((-score, int(token_id), parent_order, state))
        candidates.sort(key=lambda c: (c[0], c[1], c[2]))
        next_active = []
        for neg_score, token_id, parent_order, state in candidates[: config.width]:
            parent = active[parent_order]
            child = Hypothesis(
                token_ids=parent.token_ids + [token_id],
                log_prob=-neg_score,
                state=state,
                finished=token_id == EOS_ID,
            )
            if child.finished:
                finished.append(child)
            else:
                next_active.append(child)
        active = next_active
        steps += 1
    if steps == config.max_len:
        # Remaining beams ran out of length; abandoned prefixes (early stop
        # on enough finished hypotheses) are dropped, not returned.
        for hyp in active:
            hyp.finished = True
            finished.append(hyp)
    finished.sort(key=lambda h: (-h.log_prob, h.token_ids))
    return finished[: config.width]


def greedy_decode(
    params: ModelParams,
    enc_out: EncoderOutput,
    z: np.ndarray,
    max_len: int = 30,
    forbid_unk: bool = True,
) -> Hypothesis:
    """Argmax decoding until EOS or ``max_len``; deterministic."""
    state = decoder_init_state(params, enc_out.h_last)
    hyp = Hypothesis(state=state)
    for _ in range(max_len):
        prev_id = hyp.token_ids[-1] if hyp.token_ids else BOS_ID
        state, logp = decoder_log_probs(
            params, hyp.state, prev_id, z, enc_out.states,
            forbid_unk=forbid_unk, unk_id=UNK_ID,
        )
        token_id = int(np.argmax(logp))
        hyp.token_ids.append(token_id)
        hyp.log_prob += float(logp[token_id])
        hyp.state = state
        if token_id == EOS_ID:
            break
    hyp.finished = True
    return hyp


def score_sequence(
    params: ModelParams,
    enc_out: EncoderOutput,
    z: np.ndarray,
    token_ids: list[int],
    forbid_unk: bool = True,
) -> float:
    """Teacher-forced cumulative log-probability of a token sequence.

    Applies the same UNK masking as the decoders, so a beam hypothesis's
    score must reproduce exactly from its own tokens.
    """
    state = decoder_init_state(params, enc_out.h_last)
    prev_id = BOS_ID
    total = 0.0
    for token_id in token_ids:
        state, logp = decoder_log_probs(
            params, state, prev_id, z, enc_out.states,
            forbid_unk=forbid_unk, unk_id=UNK_ID,
        )
        total += float(logp[token_id])
        prev_id = token_id
    return total
