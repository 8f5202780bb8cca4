import json
from pathlib import Path

import numpy as np
import pytest

from protoedit.corpus import UNK, build_vocab
from protoedit.editor import Hyperparams, init_params
from protoedit.matcher import MatcherHyperparams, init_matcher
from protoedit.pipeline import (
    PipelineConfig,
    PipelineEngine,
    validate_trace,
)
from protoedit.retrieval import build_index
from util import keyword_match_pairs, topical_pairs

SCHEMA_PATH = Path(__file__).parent.parent / "schemas" / "edit_trace.schema.json"


@pytest.fixture(scope="module")
def engine():
    """Small engine over a topical corpus; models are random but shaped right."""
    pairs = topical_pairs(300, seed=21)
    vocab = build_vocab(pairs, max_size=500)
    context_index = build_index([(p.id, p.context) for p in pairs], side="context")
    hp = Hyperparams(
        emb_dim=10, edit_dim=8, enc_hidden_per_dir=6, dec_hidden=10, attn_dim=8,
        vocab_size=len(vocab), seed=3, dtype="float32",
    )
    editor = init_params(hp)
    mhp = MatcherHyperparams(emb_dim=8, hidden_dim=8, vocab_size=len(vocab), seed=4)
    matcher = init_matcher(mhp)
    config = PipelineConfig(
        vocab="unused", pairs="unused", context_index="unused", editor="unused",
        matcher="unused", variant="edit-n-rerank", k=5, beam_width=4, beam_max_len=6,
        fallback_response="sorry , i have nothing to say .",
    )
    return PipelineEngine(vocab, pairs, context_index, editor, hp, matcher, config)


def check_schema(trace_dict):
    problems = validate_trace(trace_dict)
    assert problems == [], problems
    jsonschema = pytest.importorskip("jsonschema")
    schema = json.loads(SCHEMA_PATH.read_text(encoding="utf-8"))
    jsonschema.validate(trace_dict, schema)


CONTEXT = "tell me about topic3 f1 f2"


class TestVariants:
    @pytest.mark.parametrize("variant", ["edit-default", "edit-1-rerank", "edit-n-rerank", "edit-merge"])
    def test_traces_are_schema_valid(self, engine, variant):
        trace = engine.respond(CONTEXT, variant=variant)
        check_schema(trace.to_dict())
        assert trace.variant == variant
        assert not trace.fallback
        assert trace.response

    @pytest.mark.parametrize("variant", ["edit-default", "edit-1-rerank", "edit-n-rerank", "edit-merge"])
    def test_deterministic_repeat(self, engine, variant):
        t1 = engine.respond(CONTEXT, variant=variant)
        t2 = engine.respond(CONTEXT, variant=variant)
        d1, d2 = t1.to_dict(), t2.to_dict()
        d1.pop("timings_ms")
        d2.pop("timings_ms")
        assert d1 == d2

    def test_response_is_top_candidate(self, engine):
        for variant in ("edit-default", "edit-1-rerank", "edit-n-rerank", "edit-merge"):
            trace = engine.respond(CONTEXT, variant=variant)
            assert trace.response == trace.candidates[0].response

    def test_no_unk_in_responses(self, engine):
        for variant in ("edit-default", "edit-n-rerank"):
            trace = engine.respond(CONTEXT, variant=variant)
            assert UNK not in trace.response.split()

    def test_fallback_on_unmatchable_context(self, engine):
        trace = engine.respond("qqq zzz xxx")
        assert trace.fallback
        assert trace.response == engine.config.fallback_response
        assert trace.prototype is None
        assert trace.candidates == []
        check_schema(trace.to_dict())

    def test_default_has_single_unscored_candidate(self, engine):
        trace = engine.respond(CONTEXT, variant="edit-default")
        assert len(trace.candidates) == 1
        assert trace.candidates[0].origin == "edited"
        assert trace.candidates[0].score is None
        assert trace.prototype["pair_id"] in engine.pairs_by_id

    def test_one_rerank_candidates_sorted_and_headed_by_response(self, engine):
        trace = engine.respond(CONTEXT, variant="edit-1-rerank", k=5)
        head, *rest = trace.candidates
        assert head.origin == "edited"
        assert head.response == trace.response
        assert all(c.origin == "retrieved" for c in rest)
        scores = [c.score for c in rest]
        assert scores == sorted(scores, reverse=True)

    def test_one_rerank_picks_matcher_argmax(self, engine):
        k = 5
        trace = engine.respond(CONTEXT, variant="edit-1-rerank", k=k)
        ctx = trace.context_tokens
        protos = engine._retrieve(ctx, k)
        best = max(protos, key=lambda ps: engine._match(ctx, ps[0].response))
        assert trace.prototype["pair_id"] == best[0].id

    def test_n_rerank_has_k_edited_candidates(self, engine):
        k = 5
        trace = engine.respond(CONTEXT, variant="edit-n-rerank", k=k)
        assert len(trace.candidates) == k
        assert all(c.origin == "edited" for c in trace.candidates)
        scores = [c.score for c in trace.candidates]
        assert scores == sorted(scores, reverse=True)

    def test_n_rerank_selection_matches_independent_rescoring(self, engine):
        trace = engine.respond(CONTEXT, variant="edit-n-rerank", k=4)
        rescored = [
            engine._match(trace.context_tokens, c.response.split())
            for c in trace.candidates
        ]
        assert trace.candidates[0].score == pytest.approx(max(rescored))

    def test_merge_pool_bounded_and_deduped(self, engine):
        k = 5
        trace = engine.respond(CONTEXT, variant="edit-merge", k=k)
        assert len(trace.candidates) <= 2 * k
        strings = [c.response for c in trace.candidates]
        assert len(strings) == len(set(strings))
        top = trace.candidates[0]
        assert all(top.score >= c.score for c in trace.candidates)

    def test_merge_contains_retrieved_origin_entries(self, engine):
        trace = engine.respond(CONTEXT, variant="edit-merge", k=5)
        origins = {c.origin for c in trace.candidates}
        assert "retrieved" in origins

    def test_k_one_rerank_degenerates_to_default(self, engine):
        default = engine.respond(CONTEXT, variant="edit-default")
        one = engine.respond(CONTEXT, variant="edit-1-rerank", k=1)
        n = engine.respond(CONTEXT, variant="edit-n-rerank", k=1)
        assert one.response == default.response
        assert n.response == default.response
        assert one.prototype["pair_id"] == default.prototype["pair_id"]

    def test_unknown_variant_rejected(self, engine):
        with pytest.raises(ValueError):
            engine.respond(CONTEXT, variant="edit-everything")

    def test_bad_k_rejected(self, engine):
        with pytest.raises(ValueError):
            engine.respond(CONTEXT, k=0)

    def test_insertion_words_echoed(self, engine):
        trace = engine.respond("tell me about topic3 f1 f2", variant="edit-default")
        proto_words = set(trace.prototype["context"].split())
        for entry in trace.insertions:
            assert entry["word"] not in proto_words
            assert 0.0 <= entry["weight"] <= 1.0


class TestConfig:
    def test_missing_paths_rejected(self, tmp_path):
        config = PipelineConfig(
            vocab=str(tmp_path / "nope.txt"),
            pairs=str(tmp_path / "nope.tsv"),
            context_index=str(tmp_path / "nope.idx"),
            editor=str(tmp_path / "nope.ckpt"),
        )
        with pytest.raises(FileNotFoundError):
            PipelineEngine.from_config(config)

    def test_bad_variant_rejected(self):
        with pytest.raises(ValueError):
            PipelineConfig(vocab="v", pairs="p", context_index="i", editor="e", variant="nope")

    def test_bad_k_rejected(self):
        with pytest.raises(ValueError):
            PipelineConfig(vocab="v", pairs="p", context_index="i", editor="e", k=0)

    def test_rerank_without_matcher_rejected(self, engine):
        bare = PipelineEngine(
            engine.vocab,
            list(engine.pairs_by_id.values()),
            engine.context_index,
            engine.editor_params,
            engine.editor_hp,
            None,
            engine.config,
        )
        with pytest.raises(ValueError, match="matcher"):
            bare.respond(CONTEXT, variant="edit-n-rerank")
        trace = bare.respond(CONTEXT, variant="edit-default")
        assert trace.response
