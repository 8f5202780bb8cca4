"""Pipeline variants wiring retrieval, editing, decoding, and reranking.

Each request produces an EditTrace: the chosen prototype, the insertion and
deletion words with their attention weights, every candidate considered with
its origin and score, the emitted response, and per-stage timings. The trace
is the single wire format the HTTP API serves and the inspector UI renders;
its JSON shape is pinned by ``schemas/edit_trace.schema.json`` (version 1).
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import checkpoints, retrieval
from .corpus import Pair, Utterance, Vocab, decode, encode, load_pairs, load_vocab, tokenize
from .decoding import BeamConfig, beam_search
from .editor import Hyperparams, ModelParams, compute_edit_sets, edit_vector, encode_prototype
from .matcher import MatcherParams, match_score
from .retrieval import InvertedIndex, select_prototypes_for_inference
from .serialization import file_sha256

SCHEMA_VERSION = 1
VARIANTS = ("edit-default", "edit-1-rerank", "edit-n-rerank", "edit-merge")


@dataclass
class PipelineConfig:
    vocab: str
    pairs: str
    context_index: str
    editor: str
    matcher: str | None = None
    variant: str = "edit-n-rerank"
    k: int = 20
    beam_width: int = 20
    beam_max_len: int = 30
    forbid_unk: bool = True
    fallback_response: str = "i am not sure what to say ."
    lowercase: bool = True
    request_log: str | None = None
    host: str = "127.0.0.1"
    port: int = 8472

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")

    @classmethod
    def from_file(cls, path: str | Path) -> "PipelineConfig":
        with open(path, encoding="utf-8") as fh:
            return cls(**json.load(fh))

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class TraceCandidate:
    response: str
    origin: str  # "edited" or "retrieved"
    score: float | None


@dataclass
class EditTrace:
    variant: str
    context: str
    context_tokens: list[str]
    response: str
    fallback: bool = False
    prototype: dict | None = None  # pair_id, context, response, retrieval_score
    insertions: list[dict] = field(default_factory=list)  # word + weight
    deletions: list[dict] = field(default_factory=list)
    candidates: list[TraceCandidate] = field(default_factory=list)
    timings_ms: dict = field(default_factory=dict)
    schema_version: int = SCHEMA_VERSION

    def to_dict(self) -> dict:
        return asdict(self)  # recurses through TraceCandidate entries


def validate_trace(data: dict) -> list[str]:
    """Structural check of an EditTrace dict; returns a list of problems."""
    problems = []

    def need(key, types):
        if key not in data:
            problems.append(f"missing field {key!r}")
            return None
        if not isinstance(data[key], types):
            problems.append(f"field {key!r} has type {type(data[key]).__name__}")
            return None
        return data[key]

    if need("schema_version", int) != SCHEMA_VERSION:
        problems.append("unsupported schema_version")
    variant = need("variant", str)
    if variant is not None and variant not in VARIANTS:
        problems.append(f"unknown variant {variant!r}")
    need("context", str)
    need("context_tokens", list)
    need("response", str)
    need("fallback", bool)
    proto = data.get("prototype")
    if proto is not None:
        if not isinstance(proto, dict):
            problems.append("prototype must be an object or null")
        else:
            for key, types in (
                ("pair_id", int),
                ("context", str),
                ("response", str),
                ("retrieval_score", (int, float)),
            ):
                if not isinstance(proto.get(key), types):
                    problems.append(f"prototype.{key} missing or mistyped")
    for side in ("insertions", "deletions"):
        entries = need(side, list)
        for entry in entries or []:
            if not isinstance(entry, dict) or not isinstance(entry.get("word"), str) \
                    or not isinstance(entry.get("weight"), (int, float)):
                problems.append(f"bad entry in {side}")
                break
    candidates = need("candidates", list)
    for cand in candidates or []:
        if not isinstance(cand, dict):
            problems.append("candidate is not an object")
            break
        if not isinstance(cand.get("response"), str) or cand.get("origin") not in ("edited", "retrieved"):
            problems.append("candidate missing response/origin")
            break
        if cand.get("score") is not None and not isinstance(cand["score"], (int, float)):
            problems.append("candidate score must be a number or null")
            break
    timings = need("timings_ms", dict)
    if timings is not None and not all(
        isinstance(v, (int, float)) for v in timings.values()
    ):
        problems.append("timings_ms values must be numbers")
    return problems


class _Timer:
    def __init__(self) -> None:
        self.marks: dict[str, float] = {}
        self._start = time.perf_counter()
        self._last = self._start

    def mark(self, name: str) -> None:
        now = time.perf_counter()
        self.marks[name] = self.marks.get(name, 0.0) + (now - self._last) * 1000.0
        self._last = now

    def done(self) -> dict[str, float]:
        self.marks["total"] = (time.perf_counter() - self._start) * 1000.0
        return {k: round(v, 3) for k, v in self.marks.items()}


@dataclass
class _Edited:
    """Result of editing one prototype."""

    tokens: Utterance
    proto: Pair
    retrieval_score: float
    insertions: list[dict]
    deletions: list[dict]


class PipelineEngine:
    """Immutable snapshot of vocab, pairs, index, and model parameters.

    All variant methods are pure with respect to the snapshot, so concurrent
    requests can share one engine.
    """

    def __init__(
        self,
        vocab: Vocab,
        pairs: list[Pair],
        context_index: InvertedIndex,
        editor_params: ModelParams,
        editor_hp: Hyperparams,
        matcher_params: MatcherParams | None,
        config: PipelineConfig,
        model_hashes: dict | None = None,
    ) -> None:
        self.vocab = vocab
        self.pairs_by_id = {p.id: p for p in pairs}
        self.context_index = context_index
        self.editor_params = editor_params
        self.editor_hp = editor_hp
        self.matcher_params = matcher_params
        self.config = config
        self.beam = BeamConfig(
            width=config.beam_width,
            max_len=config.beam_max_len,
            forbid_unk=config.forbid_unk,
        )
        self.model_hashes = model_hashes or {}

    @classmethod
    def from_config(cls, config: PipelineConfig) -> "PipelineEngine":
        for name in ("vocab", "pairs", "context_index", "editor"):
            path = getattr(config, name)
            if not Path(path).exists():
                raise FileNotFoundError(f"config.{name}: no such file: {path}")
        if config.matcher is not None and not Path(config.matcher).exists():
            raise FileNotFoundError(f"config.matcher: no such file: {config.matcher}")
        vocab = load_vocab(config.vocab)
        pairs, _ = load_pairs(config.pairs, max_len=10**9, lowercase=False)
        context_index = retrieval.load_index(config.context_index)
        editor_params, editor_hp, _ = checkpoints.load_editor(config.editor)
        matcher_params = None
        hashes = {
            "vocab": file_sha256(config.vocab),
            "context_index": file_sha256(config.context_index),
            "editor": file_sha256(config.editor),
        }
        if config.matcher is not None:
            matcher_params, _, _ = checkpoints.load_matcher(config.matcher)
            hashes["matcher"] = file_sha256(config.matcher)
        return cls(
            vocab, pairs, context_index, editor_params, editor_hp,
            matcher_params, config, hashes,
        )

    # -- variant entry points ------------------------------------------------

    def respond(self, context_text: str, variant: str | None = None, k: int | None = None) -> EditTrace:
        variant = variant or self.config.variant
        if variant not in VARIANTS:
            raise ValueError(f"unknown variant {variant!r}")
        k = self.config.k if k is None else k
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        if variant != "edit-default" and self.matcher_params is None:
            raise ValueError(f"variant {variant!r} needs a matcher checkpoint")
        method = {
            "edit-default": self.edit_default,
            "edit-1-rerank": self.edit_1_rerank,
            "edit-n-rerank": self.edit_n_rerank,
            "edit-merge": self.edit_merge,
        }[variant]
        return method(context_text, k)

    def edit_default(self, context_text: str, k: int = 1) -> EditTrace:
        """Edit the single best prototype by context similarity."""
        timer = _Timer()
        ctx = tokenize(context_text, self.config.lowercase)
        protos = self._retrieve(ctx, 1)
        timer.mark("retrieve")
        if not protos:
            return self._fallback_trace("edit-default", context_text, ctx, timer)
        edited = self._edit_one(ctx, *protos[0], timer)
        if not edited.tokens:
            return self._fallback_trace("edit-default", context_text, ctx, timer)
        trace = self._base_trace("edit-default", context_text, ctx, edited)
        trace.candidates = [TraceCandidate(trace.response, "edited", None)]
        trace.timings_ms = timer.done()
        return trace

    def edit_1_rerank(self, context_text: str, k: int) -> EditTrace:
        """Matcher-rerank the k retrieved prototypes, then edit the best one."""
        timer = _Timer()
        ctx = tokenize(context_text, self.config.lowercase)
        protos = self._retrieve(ctx, k)
        timer.mark("retrieve")
        if not protos:
            return self._fallback_trace("edit-1-rerank", context_text, ctx, timer)
        scored = self._score_protos(ctx, protos)
        timer.mark("rerank")
        best_proto, best_retr, _ = scored[0]
        edited = self._edit_one(ctx, best_proto, best_retr, timer)
        if not edited.tokens:
            return self._fallback_trace("edit-1-rerank", context_text, ctx, timer)
        trace = self._base_trace("edit-1-rerank", context_text, ctx, edited)
        head_score = self._match(ctx, edited.tokens)
        timer.mark("rerank")
        trace.candidates = [TraceCandidate(trace.response, "edited", head_score)] + [
            TraceCandidate(" ".join(p.response), "retrieved", s) for p, _, s in scored
        ]
        trace.timings_ms = timer.done()
        return trace

    def edit_n_rerank(self, context_text: str, k: int) -> EditTrace:
        """Edit every retrieved prototype, then matcher-rerank the revisions."""
        timer = _Timer()
        ctx = tokenize(context_text, self.config.lowercase)
        protos = self._retrieve(ctx, k)
        timer.mark("retrieve")
        if not protos:
            return self._fallback_trace("edit-n-rerank", context_text, ctx, timer)
        pool = [self._edit_one(ctx, p, s, timer) for p, s in protos]
        pool = [e for e in pool if e.tokens]
        if not pool:
            return self._fallback_trace("edit-n-rerank", context_text, ctx, timer)
        ranked = self._rank_edited(ctx, pool)
        timer.mark("rerank")
        winner, _ = ranked[0]
        trace = self._base_trace("edit-n-rerank", context_text, ctx, winner)
        trace.candidates = [
            TraceCandidate(" ".join(e.tokens), "edited", s) for e, s in ranked
        ]
        trace.timings_ms = timer.done()
        return trace

    def edit_merge(self, context_text: str, k: int) -> EditTrace:
        """Pool revised and raw retrieved responses, rerank the union."""
        timer = _Timer()
        ctx = tokenize(context_text, self.config.lowercase)
        protos = self._retrieve(ctx, k)
        timer.mark("retrieve")
        if not protos:
            return self._fallback_trace("edit-merge", context_text, ctx, timer)
        edited_pool = [self._edit_one(ctx, p, s, timer) for p, s in protos]
        edited_pool = [e for e in edited_pool if e.tokens]
        # Dedup by response string; an edited entry wins a tie with its raw twin.
        pool: dict[str, tuple[str, _Edited]] = {}
        for e in edited_pool:
            pool.setdefault(" ".join(e.tokens), ("edited", e))
        for proto, score in protos:
            raw = _Edited(
                tokens=proto.response, proto=proto, retrieval_score=score,
                insertions=[], deletions=[],
            )
            pool.setdefault(" ".join(proto.response), ("retrieved", raw))
        if not pool:
            return self._fallback_trace("edit-merge", context_text, ctx, timer)
        scored = [
            (origin, entry, self._match(ctx, entry.tokens))
            for origin, entry in pool.values()
        ]
        scored.sort(key=lambda t: -t[2])
        timer.mark("rerank")
        origin, winner, _ = scored[0]
        trace = self._base_trace("edit-merge", context_text, ctx, winner)
        if origin == "retrieved":
            trace.insertions = []
            trace.deletions = []
        trace.candidates = [
            TraceCandidate(" ".join(e.tokens), o, s) for o, e, s in scored
        ]
        trace.timings_ms = timer.done()
        return trace

    # -- shared internals ----------------------------------------------------

    def _retrieve(self, ctx: Utterance, k: int) -> list[tuple[Pair, float]]:
        return select_prototypes_for_inference(ctx, self.context_index, self.pairs_by_id, k)

    def _match(self, ctx: Utterance, response: Utterance) -> float:
        return match_score(self.matcher_params, self.vocab, ctx, response)

    def _score_protos(self, ctx, protos) -> list[tuple[Pair, float, float]]:
        scored = [(p, retr, self._match(ctx, p.response)) for p, retr in protos]
        scored.sort(key=lambda t: -t[2])
        return scored

    def _rank_edited(self, ctx, pool: list[_Edited]) -> list[tuple[_Edited, float]]:
        ranked = [(e, self._match(ctx, e.tokens)) for e in pool]
        ranked.sort(key=lambda es: -es[1])
        return ranked

    def _edit_one(
        self, ctx: Utterance, proto: Pair, retrieval_score: float, timer: _Timer
    ) -> _Edited:
        sets = compute_edit_sets(ctx, proto.context, self.vocab)
        ins_ids = [self.vocab.word_to_id[w] for w in sets.insertions]
        del_ids = [self.vocab.word_to_id[w] for w in sets.deletions]
        enc = encode_prototype(self.editor_params, encode(proto.response, self.vocab))
        ev = edit_vector(
            self.editor_params, ins_ids, del_ids, enc.h_last, self.editor_hp.ablation
        )
        timer.mark("edit")
        hyps = beam_search(self.editor_params, enc, ev.z, self.beam)
        timer.mark("decode")
        tokens: Utterance = []
        for hyp in hyps:  # best hypothesis with a nonempty surface
            surface = hyp.surface_ids()
            if surface:
                tokens = decode(surface, self.vocab)
                break
        return _Edited(
            tokens=tokens,
            proto=proto,
            retrieval_score=retrieval_score,
            insertions=[
                {"word": w, "weight": float(x)}
                for w, x in zip(sets.insertions, ev.ins_weights)
            ],
            deletions=[
                {"word": w, "weight": float(x)}
                for w, x in zip(sets.deletions, ev.del_weights)
            ],
        )

    def _base_trace(self, variant: str, context_text: str, ctx: Utterance, edited: _Edited) -> EditTrace:
        return EditTrace(
            variant=variant,
            context=context_text,
            context_tokens=ctx,
            response=" ".join(edited.tokens),
            prototype={
                "pair_id": edited.proto.id,
                "context": " ".join(edited.proto.context),
                "response": " ".join(edited.proto.response),
                "retrieval_score": edited.retrieval_score,
            },
            insertions=edited.insertions,
            deletions=edited.deletions,
        )

    def _fallback_trace(self, variant: str, context_text: str, ctx: Utterance, timer: _Timer) -> EditTrace:
        return EditTrace(
            variant=variant,
            context=context_text,
            context_tokens=ctx,
            response=self.config.fallback_response,
            fallback=True,
            timings_ms=timer.done(),
        )
