"""Corpus ingestion and BM25 prototype retrieval, end to end on a toy corpus.

Builds a small context/response corpus, indexes both sides, searches by
context similarity (the inference path), then constructs banded training
quadruples by response similarity (the training-data path).
"""

import tempfile
from pathlib import Path

from protoedit.corpus import build_vocab, encode, load_pairs
from protoedit.retrieval import (
    build_index,
    build_training_quadruples,
    jaccard,
    search,
    select_prototypes_for_inference,
)

RAW = """\
what should i eat tonight\ttry the noodle place on main street
any dinner ideas for tonight\tmake a big pot of curry tonight
what should i cook for dinner\tmake a big pot of curry instead
i am bored on this rainy day\twatch an old movie and relax
what do you do on rainy days\twatch an old movie with tea
best way to learn the guitar\tpractice chords ten minutes every day
how do i get better at piano\tpractice scales ten minutes every day
tell me about your weekend\ti hiked up the mountain with friends
what did you do last weekend\ti hiked along the river with friends
what should i eat tonight\ttry the noodle place on main street
"""

with tempfile.TemporaryDirectory() as tmp:
    corpus_path = Path(tmp) / "toy.tsv"
    corpus_path.write_text(RAW, encoding="utf-8")

    pairs, errors = load_pairs(corpus_path, max_len=30)
    print(f"loaded {len(pairs)} pairs ({len(errors)} bad lines) — the duplicate line collapsed")

    vocab = build_vocab(pairs, max_size=200)
    print(f"vocab size {len(vocab)}; 'curry' -> id {vocab.id_of('curry')}")
    print(f"encoded first context: {encode(pairs[0].context, vocab)}")

    # Inference-side retrieval: find a prototype for a new context.
    ctx_index = build_index([(p.id, p.context) for p in pairs], side="context")
    query = "what could i eat for dinner tonight".split()
    print(f"\nquery: {' '.join(query)}")
    for pair, score in select_prototypes_for_inference(query, ctx_index, {p.id: p for p in pairs}, k=3):
        print(f"  bm25 {score:5.2f}  #{pair.id}  {' '.join(pair.context)}  ->  {' '.join(pair.response)}")

    # Training-side: quadruples from response similarity, Jaccard band [0.3, 0.7].
    resp_index = build_index([(p.id, p.response) for p in pairs], side="response")
    quads = build_training_quadruples(pairs, resp_index, k=5)
    print(f"\n{len(quads)} training quadruples (prototype close to the target, but not identical):")
    for q in quads:
        print(f"  jaccard {q.jaccard:.2f}  R: {' '.join(q.response)}")
        print(f"                R': {' '.join(q.proto_response)}")

    # The band excludes copies: identical responses score jaccard 1.0.
    print(f"\njaccard of a response with itself: {jaccard(pairs[0].response, pairs[0].response)}")
    hits = search(resp_index, pairs[0].response, k=1)
    print(f"top hit for pair 0's own response is itself: doc {hits[0].doc_id}")
