"""Shared builders for tiny vocabularies, models, and synthetic corpora."""

from __future__ import annotations

import numpy as np

from protoedit.corpus import RESERVED, Pair, Vocab
from protoedit.editor import Example, Hyperparams, ModelParams, init_params
from protoedit.retrieval import Quadruple


def vocab_from_words(words: list[str]) -> Vocab:
    id_to_word = list(RESERVED) + list(dict.fromkeys(words))
    return Vocab(
        word_to_id={w: i for i, w in enumerate(id_to_word)},
        id_to_word=id_to_word,
    )


def tiny_hp(**overrides) -> Hyperparams:
    base = dict(
        emb_dim=6,
        edit_dim=5,
        enc_hidden_per_dir=4,
        dec_hidden=7,
        attn_dim=5,
        vocab_size=12,
        batch_size=4,
        max_decode_len=8,
        seed=7,
        dtype="float64",
    )
    base.update(overrides)
    return Hyperparams(**base)


def tiny_model(**overrides) -> tuple[Hyperparams, ModelParams]:
    hp = tiny_hp(**overrides)
    return hp, init_params(hp)


def random_example(
    rng: np.random.Generator,
    vocab_size: int,
    proto_len: int = 4,
    target_len: int = 4,
    n_ins: int = 2,
    n_del: int = 2,
) -> Example:
    def words(n):
        return [int(i) for i in rng.integers(4, vocab_size, size=n)]

    from protoedit.corpus import EOS_ID

    return Example(
        proto_ids=words(proto_len),
        target_ids=words(target_len) + [EOS_ID],
        ins_ids=words(n_ins),
        del_ids=words(n_del),
    )


def word_substitution_corpus(
    n_quads: int = 64, seed: int = 3
) -> tuple[list[Quadruple], list[str]]:
    """Quadruples where the response swaps one slot word named by the context.

    Prototype: context "i like X", response "X is good stuff"; current pair
    replaces X with Y. The insertion set is {Y}, the deletion set {X}, so the
    editor must route Y through the edit vector to get the target right.
    """
    rng = np.random.default_rng(seed)
    slot_words = [f"w{i}" for i in range(16)]
    quads = []
    seen = set()
    while len(quads) < n_quads:
        x, y = rng.choice(len(slot_words), size=2, replace=False)
        if (x, y) in seen:
            continue
        seen.add((x, y))
        wx, wy = slot_words[x], slot_words[y]
        quads.append(
            Quadruple(
                context=["i", "like", wy],
                response=[wy, "is", "good", "stuff"],
                proto_context=["i", "like", wx],
                proto_response=[wx, "is", "good", "stuff"],
                jaccard=3 / 5,
                pair_id=len(quads),
                proto_id=1000 + len(quads),
            )
        )
    words = slot_words + ["i", "like", "is", "good", "stuff"]
    return quads, words


def identity_corpus(
    n_quads: int, seed: int, min_len: int = 3, max_len: int = 6, n_words: int = 12
) -> tuple[list[Quadruple], list[str]]:
    """Copy-task quadruples: the response equals its prototype response."""
    rng = np.random.default_rng(seed)
    words = [f"t{i}" for i in range(n_words)]
    quads = []
    for i in range(n_quads):
        length = int(rng.integers(min_len, max_len + 1))
        sent = [words[int(j)] for j in rng.integers(0, n_words, size=length)]
        ctx = [words[int(j)] for j in rng.integers(0, n_words, size=3)]
        quads.append(
            Quadruple(
                context=ctx,
                response=sent,
                proto_context=ctx,
                proto_response=sent,
                jaccard=1.0,
                pair_id=i,
                proto_id=10**6 + i,
            )
        )
    return quads, words


def keyword_match_pairs(n_pairs: int, n_topics: int = 25, seed: int = 7) -> list[Pair]:
    """Separable matcher task: context and response end in the same topic word.

    Enough topics keep uniformly sampled negatives rarely topic-matched, so
    a topic-matching scorer has headroom well above 0.9 accuracy.
    """
    rng = np.random.default_rng(seed)
    topics = [f"topic{i}" for i in range(n_topics)]
    fillers = [f"f{i}" for i in range(8)]
    pairs = []
    for i in range(n_pairs):
        topic = topics[int(rng.integers(n_topics))]
        filler = fillers[int(rng.integers(len(fillers)))]
        pairs.append(Pair(i, ["ask", "about", topic], ["answer", filler, topic]))
    return pairs


def topical_pairs(
    n_pairs: int,
    seed: int = 11,
    n_topics: int = 25,
    n_fillers: int = 40,
) -> list[Pair]:
    """Synthetic pairs whose context and response share a topic word.

    Responses within one topic reuse most words, so response-similarity
    retrieval finds them and many candidate pairs land in the Jaccard band.
    """
    rng = np.random.default_rng(seed)
    topics = [f"topic{i}" for i in range(n_topics)]
    fillers = [f"f{i}" for i in range(n_fillers)]
    moods = ["great", "bad", "fine", "odd"]
    pairs = []
    for i in range(n_pairs):
        topic = topics[int(rng.integers(n_topics))]
        mood = moods[int(rng.integers(len(moods)))]
        extra_c = [fillers[int(j)] for j in rng.integers(0, n_fillers, size=2)]
        extra_r = fillers[int(rng.integers(n_fillers))]
        context = ["tell", "me", "about", topic] + extra_c
        response = ["the", topic, "is", mood, extra_r]
        pairs.append(Pair(id=i, context=context, response=response))
    return pairs


def write_pairs_tsv(pairs: list[Pair], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for p in pairs:
            fh.write(" ".join(p.context) + "\t" + " ".join(p.response) + "\n")
