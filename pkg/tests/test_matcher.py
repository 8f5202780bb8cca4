import numpy as np
import pytest

from protoedit.corpus import Pair
from protoedit.matcher import (
    MatcherHyperparams,
    build_training_stream,
    init_matcher,
    match_score,
    rerank,
    stream_accuracy,
    train_matcher,
)
from util import keyword_match_pairs, vocab_from_words


def matcher_setup(seed=0):
    words = [f"w{i}" for i in range(12)]
    vocab = vocab_from_words(words)
    hp = MatcherHyperparams(
        emb_dim=6, hidden_dim=5, vocab_size=len(vocab), seed=seed, dtype="float64"
    )
    return vocab, init_matcher(hp)


class TestMatchScore:
    def test_score_strictly_inside_unit_interval(self):
        vocab, params = matcher_setup()
        s = match_score(params, vocab, ["w0", "w1"], ["w2"])
        assert 0.0 < s < 1.0

    def test_zero_bilinear_gives_half(self):
        vocab, params = matcher_setup()
        params.bilinear[:] = 0.0
        for ctx, resp in ((["w0"], ["w1"]), (["w2", "w3"], ["w4", "w5", "w6"])):
            assert match_score(params, vocab, ctx, resp) == 0.5

    def test_response_change_changes_score(self):
        vocab, params = matcher_setup(seed=1)
        base = match_score(params, vocab, ["w0", "w1"], ["w2", "w3"])
        other = match_score(params, vocab, ["w0", "w1"], ["w4", "w5"])
        assert base != other

    def test_empty_inputs_rejected(self):
        vocab, params = matcher_setup()
        with pytest.raises(ValueError):
            match_score(params, vocab, [], ["w1"])
        with pytest.raises(ValueError):
            match_score(params, vocab, ["w1"], [])

    def test_pure_per_pair_function(self):
        vocab, params = matcher_setup(seed=3)
        first = match_score(params, vocab, ["w1"], ["w2"])
        match_score(params, vocab, ["w3", "w4"], ["w5"])  # unrelated call
        assert match_score(params, vocab, ["w1"], ["w2"]) == first


class TestTrainingStream:
    def test_one_to_nine_ratio(self):
        pairs = keyword_match_pairs(n_pairs=40)
        vocab = vocab_from_words([w for p in pairs for w in p.context + p.response])
        stream = build_training_stream(pairs, vocab, neg_ratio=9, rng=np.random.default_rng(0))
        labels = [label for _, _, label in stream]
        assert labels.count(1) == 40
        assert labels.count(0) == 360

    def test_negative_never_own_response(self):
        pairs = [Pair(i, ["c", f"t{i}"], ["r", f"t{i}"]) for i in range(30)]
        vocab = vocab_from_words([w for p in pairs for w in p.context + p.response])
        rng = np.random.default_rng(1)
        stream = build_training_stream(pairs, vocab, neg_ratio=9, rng=rng)
        own = {tuple(ctx): tuple(resp) for ctx, resp, label in stream if label == 1}
        for ctx, resp, label in stream:
            if label == 0:
                assert tuple(resp) != own[tuple(ctx)]

    def test_single_pair_yields_no_negatives(self):
        pairs = [Pair(0, ["a"], ["b"])]
        vocab = vocab_from_words(["a", "b"])
        stream = build_training_stream(pairs, vocab, neg_ratio=9, rng=np.random.default_rng(0))
        assert len(stream) == 1


class TestRerank:
    def test_singleton_unchanged(self):
        vocab, params = matcher_setup()
        out = rerank(params, vocab, ["w0"], [["w1", "w2"]])
        assert [c for c, _ in out] == [["w1", "w2"]]

    def test_output_is_permutation_of_input(self):
        vocab, params = matcher_setup(seed=4)
        cands = [["w1"], ["w2", "w3"], ["w4"], ["w5", "w6", "w7"]]
        out = rerank(params, vocab, ["w0"], cands)
        assert sorted(map(tuple, (c for c, _ in out))) == sorted(map(tuple, cands))

    def test_permutation_invariant_result_set(self):
        vocab, params = matcher_setup(seed=5)
        cands = [["w1"], ["w2"], ["w3"], ["w4"]]
        out1 = rerank(params, vocab, ["w0"], cands)
        out2 = rerank(params, vocab, ["w0"], list(reversed(cands)))
        assert {tuple(c) for c, _ in out1} == {tuple(c) for c, _ in out2}
        assert [s for _, s in out1] == sorted((s for _, s in out1), reverse=True)

    def test_agrees_with_independent_scoring(self):
        vocab, params = matcher_setup(seed=6)
        ctx = ["w0", "w1"]
        cands = [["w2"], ["w3", "w4"], ["w5"]]
        out = rerank(params, vocab, ctx, cands)
        for cand, score in out:
            assert score == match_score(params, vocab, ctx, cand)

    def test_stable_on_equal_scores(self):
        vocab, params = matcher_setup()
        params.bilinear[:] = 0.0  # every score 0.5
        cands = [["w1"], ["w2"], ["w3"]]
        out = rerank(params, vocab, ["w0"], cands)
        assert [c for c, _ in out] == cands

    def test_empty_candidates_rejected(self):
        vocab, params = matcher_setup()
        with pytest.raises(ValueError):
            rerank(params, vocab, ["w0"], [])


class TestTrainMatcher:
    def test_learns_separable_topic_task(self):
        pairs = keyword_match_pairs(n_pairs=250, n_topics=25, seed=7)
        words = sorted({w for p in pairs for w in p.context + p.response})
        vocab = vocab_from_words(words)
        hp = MatcherHyperparams(
            emb_dim=16, hidden_dim=16, vocab_size=len(vocab),
            neg_ratio=4, batch_size=16, lr_init=1e-2, max_epochs=12, seed=0,
        )
        train_pairs, val_pairs = pairs[:200], pairs[200:]
        result = train_matcher(train_pairs, val_pairs, vocab, hp)
        val_stream = build_training_stream(val_pairs, vocab, 4, np.random.default_rng(9))
        assert stream_accuracy(result.params, val_stream) >= 0.9
        losses = [entry["train_loss"] for entry in result.log]
        assert losses[-1] < losses[0]

    def test_empty_sets_rejected(self):
        vocab = vocab_from_words(["a", "b"])
        hp = MatcherHyperparams(emb_dim=4, hidden_dim=4, vocab_size=len(vocab))
        with pytest.raises(ValueError):
            train_matcher([], [Pair(0, ["a"], ["b"])], vocab, hp)
