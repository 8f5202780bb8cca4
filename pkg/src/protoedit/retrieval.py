"""Inverted-index retrieval over contexts and responses.

At inference time prototypes are found by context similarity; for building
training data we search by *response* similarity instead and keep candidates
whose response Jaccard overlap with the query response falls in a band that
excludes both near-duplicates and unrelated text.

Scoring is BM25 (k1=1.2, b=0.75) with OR semantics over unique query terms.
The idf uses the ``log(1 + ...)`` form so scores are always nonnegative:

    idf(t)      = ln(1 + (N - df + 0.5) / (df + 0.5))
    score(d, q) = sum_t idf(t) * tf * (k1 + 1) / (tf + k1 * (1 - b + b * dl / avgdl))
"""

from __future__ import annotations

import json
import math
import struct
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import Pair, Utterance, tokenize

BM25_K1 = 1.2
BM25_B = 0.75

JACCARD_LOW = 0.3
JACCARD_HIGH = 0.7

_INDEX_MAGIC = b"PEIX"
_INDEX_VERSION = 1


def jaccard(a: set[str] | Utterance, b: set[str] | Utterance) -> float:
    """Overlap of two bags of words as unique-word sets: |A∩B| / |A∪B|.

    Two empty sets count as identical (1.0).
    """
    sa, sb = set(a), set(b)
    union = sa | sb
    if not union:
        return 1.0
    return len(sa & sb) / len(union)


@dataclass(frozen=True)
class RetrievalHit:
    doc_id: int
    score: float


@dataclass
class Posting:
    doc_ids: np.ndarray  # int64, ascending
    tfs: np.ndarray  # int64, aligned with doc_ids
    # Derived at build/load time, not serialized:
    slots: np.ndarray | None = None  # positions into the index's doc table
    contrib: np.ndarray | None = None  # precomputed BM25 contribution per doc


@dataclass
class InvertedIndex:
    """Term -> postings map over one side (contexts or responses) of a corpus."""

    side: str  # "context" or "response"
    postings: dict[str, Posting] = field(default_factory=dict)
    doc_len: dict[int, int] = field(default_factory=dict)
    doc_count: int = 0
    avg_doc_len: float = 0.0
    # Derived doc table (ascending doc id), rebuilt after load:
    doc_table: np.ndarray | None = None


def _finalize(index: InvertedIndex) -> InvertedIndex:
    """Precompute per-doc norms and per-term score contributions."""
    doc_ids_sorted = sorted(index.doc_len)
    index.doc_table = np.array(doc_ids_sorted, dtype=np.int64)
    slot_of = {d: i for i, d in enumerate(doc_ids_sorted)}
    lens = np.array([index.doc_len[d] for d in doc_ids_sorted], dtype=np.float64)
    norm = BM25_K1 * (1.0 - BM25_B + BM25_B * lens / index.avg_doc_len)
    for posting in index.postings.values():
        slots = np.array([slot_of[d] for d in posting.doc_ids.tolist()], dtype=np.int64)
        tf = posting.tfs.astype(np.float64)
        df = len(posting.doc_ids)
        idf = math.log(1.0 + (index.doc_count - df + 0.5) / (df + 0.5))
        posting.slots = slots
        posting.contrib = idf * tf * (BM25_K1 + 1.0) / (tf + norm[slots])
    return index


def build_index(docs: list[tuple[int, Utterance]], side: str) -> InvertedIndex:
    """Index ``(doc_id, tokens)`` documents. Ids must be unique."""
    if side not in ("context", "response"):
        raise ValueError(f"side must be 'context' or 'response', got {side!r}")
    if not docs:
        raise ValueError("cannot build an index over an empty document list")
    seen_ids: set[int] = set()
    term_docs: dict[str, list[tuple[int, int]]] = {}
    doc_len: dict[int, int] = {}
    for doc_id, tokens in docs:
        if doc_id in seen_ids:
            raise ValueError(f"duplicate document id {doc_id}")
        seen_ids.add(doc_id)
        doc_len[doc_id] = len(tokens)
        for term, tf in Counter(tokens).items():
            term_docs.setdefault(term, []).append((doc_id, tf))
    postings = {}
    for term, entries in term_docs.items():
        entries.sort()
        ids = np.array([d for d, _ in entries], dtype=np.int64)
        tfs = np.array([t for _, t in entries], dtype=np.int64)
        postings[term] = Posting(doc_ids=ids, tfs=tfs)
    n = len(docs)
    return _finalize(
        InvertedIndex(
            side=side,
            postings=postings,
            doc_len=doc_len,
            doc_count=n,
            avg_doc_len=sum(doc_len.values()) / n,
        )
    )


def _unique_terms(query: Utterance) -> list[str]:
    """Unique query terms in first-occurrence order (OR semantics)."""
    return list(dict.fromkeys(query))


def search(index: InvertedIndex, query: Utterance, k: int) -> list[RetrievalHit]:
    """Top-k documents by BM25, descending score, ties by ascending doc id.

    Documents matching no query term are never returned, so fewer than ``k``
    hits come back on sparse matches; an empty query yields no hits.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if not query:
        return []
    scores = np.zeros(index.doc_count, dtype=np.float64)
    matched = np.zeros(index.doc_count, dtype=bool)
    for term in _unique_terms(query):
        posting = index.postings.get(term)
        if posting is None:
            continue
        scores[posting.slots] += posting.contrib
        matched[posting.slots] = True
    slots = np.nonzero(matched)[0]
    if slots.size == 0:
        return []
    # Primary key: score descending; tie break: doc id ascending.
    order = np.lexsort((index.doc_table[slots], -scores[slots]))
    top = slots[order[:k]]
    return [
        RetrievalHit(doc_id=int(index.doc_table[s]), score=float(scores[s]))
        for s in top
    ]


def search_brute_force(
    docs: list[tuple[int, Utterance]], query: Utterance, k: int
) -> list[RetrievalHit]:
    """Linear-scan BM25 over raw documents; ``search`` must agree with this.

    Independent of the inverted index: term statistics are recomputed here
    from the documents themselves.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if not query:
        return []
    n = len(docs)
    avgdl = sum(len(tokens) for _, tokens in docs) / n
    terms = _unique_terms(query)
    df = {t: sum(1 for _, tokens in docs if t in tokens) for t in terms}
    idf = {
        t: math.log(1.0 + (n - df[t] + 0.5) / (df[t] + 0.5))
        for t in terms
        if df[t] > 0
    }
    hits = []
    for doc_id, tokens in sorted(docs):
        counts = Counter(tokens)
        norm = BM25_K1 * (1.0 - BM25_B + BM25_B * float(len(tokens)) / avgdl)
        score = 0.0
        hit = False
        for term in terms:
            if term not in idf or term not in counts:
                continue
            tf = float(counts[term])
            score += idf[term] * tf * (BM25_K1 + 1.0) / (tf + norm)
            hit = True
        if hit:
            hits.append(RetrievalHit(doc_id=doc_id, score=score))
    hits.sort(key=lambda h: (-h.score, h.doc_id))
    return hits[:k]


@dataclass(frozen=True)
class Quadruple:
    """A training instance pairing an example with its selected prototype."""

    context: Utterance
    response: Utterance
    proto_context: Utterance
    proto_response: Utterance
    jaccard: float
    pair_id: int = -1
    proto_id: int = -1


def build_training_quadruples(
    dataset: list[Pair],
    response_index: InvertedIndex,
    k: int = 20,
) -> list[Quadruple]:
    """For each pair, retrieve the top-k similar responses and keep banded ones.

    The pair itself is dropped by id, and a candidate survives only when the
    response Jaccard overlap lies in [0.3, 0.7] — close enough to edit, far
    enough that the editor cannot simply copy. A pair may yield 0..k
    quadruples.
    """
    by_id = {p.id: p for p in dataset}
    quads: list[Quadruple] = []
    for pair in dataset:
        for hit in search(response_index, pair.response, k):
            if hit.doc_id == pair.id:
                continue
            proto = by_id[hit.doc_id]
            j = jaccard(pair.response, proto.response)
            if JACCARD_LOW <= j <= JACCARD_HIGH:
                quads.append(
                    Quadruple(
                        context=pair.context,
                        response=pair.response,
                        proto_context=proto.context,
                        proto_response=proto.response,
                        jaccard=j,
                        pair_id=pair.id,
                        proto_id=proto.id,
                    )
                )
    return quads


def select_prototypes_for_inference(
    context: Utterance,
    context_index: InvertedIndex,
    pairs_by_id: dict[int, Pair],
    k: int,
) -> list[tuple[Pair, float]]:
    """Top-k prototype pairs by context similarity, with retrieval scores."""
    return [
        (pairs_by_id[h.doc_id], h.score) for h in search(context_index, context, k)
    ]


def save_quadruples(quads: list[Quadruple], path: str | Path) -> None:
    """UTF-8 TSV export: context, response, proto context, proto response."""
    with open(path, "w", encoding="utf-8") as fh:
        for q in quads:
            fh.write(
                "\t".join(
                    " ".join(u)
                    for u in (q.context, q.response, q.proto_context, q.proto_response)
                )
                + "\n"
            )


def load_quadruples(path: str | Path) -> list[Quadruple]:
    quads = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            cols = line.split("\t")
            if len(cols) != 4:
                raise ValueError(f"{path}:{line_no}: expected 4 columns, got {len(cols)}")
            c, r, pc, pr = (tokenize(col, lowercase=False) for col in cols)
            quads.append(
                Quadruple(
                    context=c,
                    response=r,
                    proto_context=pc,
                    proto_response=pr,
                    jaccard=jaccard(r, pr),
                )
            )
    return quads


def save_index(index: InvertedIndex, path: str | Path) -> None:
    """Versioned little-endian binary: magic, version byte, header, postings."""
    header = {
        "side": index.side,
        "doc_count": index.doc_count,
        "avg_doc_len": index.avg_doc_len,
        "doc_len": sorted(index.doc_len.items()),
    }
    header_bytes = json.dumps(header).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_INDEX_MAGIC)
        fh.write(struct.pack("<B", _INDEX_VERSION))
        fh.write(struct.pack("<I", len(header_bytes)))
        fh.write(header_bytes)
        fh.write(struct.pack("<I", len(index.postings)))
        for term in sorted(index.postings):
            posting = index.postings[term]
            term_bytes = term.encode("utf-8")
            fh.write(struct.pack("<H", len(term_bytes)))
            fh.write(term_bytes)
            fh.write(struct.pack("<I", len(posting.doc_ids)))
            fh.write(posting.doc_ids.astype("<i8").tobytes())
            fh.write(posting.tfs.astype("<i8").tobytes())


def load_index(path: str | Path) -> InvertedIndex:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _INDEX_MAGIC:
            raise ValueError(f"{path}: not an index file (bad magic {magic!r})")
        (version,) = struct.unpack("<B", fh.read(1))
        if version != _INDEX_VERSION:
            raise ValueError(f"{path}: unsupported index version {version}")
        (header_len,) = struct.unpack("<I", fh.read(4))
        header = json.loads(fh.read(header_len).decode("utf-8"))
        (n_terms,) = struct.unpack("<I", fh.read(4))
        postings = {}
        for _ in range(n_terms):
            (term_len,) = struct.unpack("<H", fh.read(2))
            term = fh.read(term_len).decode("utf-8")
            (n_docs,) = struct.unpack("<I", fh.read(4))
            ids = np.frombuffer(fh.read(8 * n_docs), dtype="<i8").astype(np.int64)
            tfs = np.frombuffer(fh.read(8 * n_docs), dtype="<i8").astype(np.int64)
            postings[term] = Posting(doc_ids=ids, tfs=tfs)
    return _finalize(
        InvertedIndex(
            side=header["side"],
            postings=postings,
            doc_len={int(d): int(n) for d, n in header["doc_len"]},
            doc_count=header["doc_count"],
            avg_doc_len=header["avg_doc_len"],
        )
    )
