"""Word vectors for the embedding metrics.

Metric code only consumes a word -> vector table; this module can train one
at desk scale with skip-gram negative sampling, or load a user-supplied
table from the plain text format ``word v1 v2 ... vd`` (one word per line).
"""

from __future__ import annotations

from collections import Counter
from pathlib import Path

import numpy as np

from .corpus import Utterance
from .metrics import WordVectors


def train_word_vectors(
    sentences: list[Utterance],
    dim: int = 64,
    window: int = 2,
    epochs: int = 3,
    negatives: int = 5,
    lr: float = 0.025,
    min_count: int = 1,
    seed: int = 0,
) -> WordVectors:
    """Skip-gram with negative sampling over whitespace-tokenized sentences."""
    counts = Counter(w for sent in sentences for w in sent)
    words = [w for w, c in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0])) if c >= min_count]
    if not words:
        raise ValueError("no words above min_count")
    word_id = {w: i for i, w in enumerate(words)}
    v = len(words)

    rng = np.random.default_rng(seed)
    w_in = (rng.random((v, dim)) - 0.5) / dim
    w_out = np.zeros((v, dim))

    # Unigram^0.75 negative-sampling table.
    freq = np.array([counts[w] for w in words], dtype=np.float64) ** 0.75
    neg_prob = freq / freq.sum()

    encoded = [[word_id[w] for w in sent if w in word_id] for sent in sentences]
    encoded = [sent for sent in encoded if len(sent) >= 2]

    buffer_size = 1 << 16
    neg_buffer = rng.choice(v, size=buffer_size, p=neg_prob)
    buffer_pos = 0

    labels = np.zeros(negatives + 1)
    labels[0] = 1.0
    for epoch in range(epochs):
        step_lr = lr * (1.0 - epoch / max(epochs, 1)) + 1e-4
        for sent in encoded:
            for i, center in enumerate(sent):
                lo = max(0, i - window)
                hi = min(len(sent), i + window + 1)
                for j in range(lo, hi):
                    if j == i:
                        continue
                    if buffer_pos + negatives > buffer_size:
                        neg_buffer = rng.choice(v, size=buffer_size, p=neg_prob)
                        buffer_pos = 0
                    targets = np.empty(negatives + 1, dtype=np.int64)
                    targets[0] = sent[j]
                    targets[1:] = neg_buffer[buffer_pos : buffer_pos + negatives]
                    buffer_pos += negatives
                    vin = w_in[center].copy()
                    vout = w_out[targets]
                    scores = vout @ vin
                    g = (1.0 / (1.0 + np.exp(-scores)) - labels) * step_lr
                    w_in[center] -= g @ vout
                    w_out[targets] -= np.outer(g, vin)
    return {w: w_in[i].copy() for w, i in word_id.items()}


def save_word_vectors(vectors: WordVectors, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for word, vec in vectors.items():
            fh.write(word + " " + " ".join(f"{x:.6f}" for x in vec) + "\n")


def load_word_vectors(path: str | Path) -> WordVectors:
    vectors: WordVectors = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            parts = line.rstrip("\n").split(" ")
            if len(parts) < 2:
                raise ValueError(f"{path}:{line_no}: malformed word-vector line")
            vectors[parts[0]] = np.array([float(x) for x in parts[1:]])
    return vectors
