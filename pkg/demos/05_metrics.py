"""The automatic metric suite: relevance, diversity, originality.

Word vectors for the embedding metrics are trained on the corpus itself with
skip-gram negative sampling; any external "word v1 ... vd" table works too.
"""

from protoedit.metrics import (
    distinct_n,
    embedding_average,
    embedding_extrema,
    embedding_greedy,
    evaluate_suite,
    originality,
)
from protoedit.wordvecs import train_word_vectors

corpus = [
    "the curry was rich and spicy".split(),
    "the noodle soup was rich and warm".split(),
    "we hiked the mountain at dawn".split(),
    "we hiked the river trail at noon".split(),
    "practice guitar chords every day".split(),
    "practice piano scales every day".split(),
] * 30  # repetition stands in for corpus scale

vectors = train_word_vectors(corpus, dim=24, epochs=8, seed=1)
print(f"trained {len(vectors)} word vectors (dim 24) on {len(corpus)} sentences")

hyp = "the curry was rich and warm".split()
ref = "the curry was rich and spicy".split()
print(f"\nhyp: {' '.join(hyp)}")
print(f"ref: {' '.join(ref)}")
print(f"  average: {embedding_average(hyp, ref, vectors):.3f}")
print(f"  extrema: {embedding_extrema(hyp, ref, vectors):.3f}")
print(f"  greedy : {embedding_greedy(hyp, ref, vectors):.3f}")
unrelated = "practice piano scales every day".split()
print(f"against an unrelated reference: average {embedding_average(hyp, unrelated, vectors):.3f}")

outputs = [
    "the curry was rich and warm".split(),
    "the curry was rich and warm".split(),
    "we hiked the mountain at dawn".split(),
    "practice violin pieces every night".split(),
]
print(f"\ndistinct-1 {distinct_n(outputs, 1):.3f}, distinct-2 {distinct_n(outputs, 2):.3f}")
print(f"originality vs corpus: {originality(outputs, corpus):.3f}  "
      "(the hike response appears verbatim in training)")

references = [ref, ref, "we hiked the mountain at dawn".split(), "practice guitar chords every day".split()]
report = evaluate_suite(outputs, references, corpus, vectors)
print("\nfull report:")
print(report.to_table())
