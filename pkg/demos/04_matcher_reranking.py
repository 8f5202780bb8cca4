"""Train the dual-encoder matcher and use it to rerank response candidates.

The toy task is separable: a response is correct for a context exactly when
the two share their topic word. Negatives are sampled uniformly at 1:9.
"""

import numpy as np

from protoedit.corpus import RESERVED, Pair, Vocab
from protoedit.matcher import (
    MatcherHyperparams,
    build_training_stream,
    match_score,
    rerank,
    stream_accuracy,
    train_matcher,
)

rng = np.random.default_rng(7)
topics = [f"topic{i}" for i in range(20)]
fillers = [f"f{i}" for i in range(8)]
pairs = []
for i in range(220):
    topic = topics[int(rng.integers(len(topics)))]
    filler = fillers[int(rng.integers(len(fillers)))]
    pairs.append(Pair(i, ["ask", "about", topic], ["answer", filler, topic]))

words = sorted({w for p in pairs for w in p.context + p.response})
id_to_word = list(RESERVED) + words
vocab = Vocab(word_to_id={w: i for i, w in enumerate(id_to_word)}, id_to_word=id_to_word)

stream = build_training_stream(pairs, vocab, neg_ratio=9, rng=np.random.default_rng(0))
labels = [label for _, _, label in stream]
print(f"training stream: {labels.count(1)} positives, {labels.count(0)} negatives (1:9)")

hp = MatcherHyperparams(
    emb_dim=20, hidden_dim=20, vocab_size=len(vocab),
    neg_ratio=9, batch_size=32, lr_init=1e-2, max_epochs=12, seed=0,
)
result = train_matcher(pairs[:180], pairs[180:], vocab, hp)
val_stream = build_training_stream(pairs[180:], vocab, 9, np.random.default_rng(9))
print(f"validation accuracy at threshold 0.5: {stream_accuracy(result.params, val_stream):.3f}")

context = ["ask", "about", "topic3"]
candidates = [
    ["answer", "f0", "topic3"],
    ["answer", "f1", "topic9"],
    ["answer", "f2", "topic3"],
    ["answer", "f3", "topic17"],
]
print(f"\nreranking candidates for: {' '.join(context)}")
for cand, score in rerank(result.params, vocab, context, candidates):
    marker = "<-- topic match" if "topic3" in cand else ""
    print(f"  {score:.3f}  {' '.join(cand)}  {marker}")

print("\nper-pair scores are pure functions:")
s1 = match_score(result.params, vocab, context, candidates[0])
s2 = match_score(result.params, vocab, context, candidates[0])
print(f"  repeated call: {s1:.6f} == {s2:.6f}")
