"""Automatic evaluation: embedding relevance, distinct-n diversity, originality.

The three embedding metrics consume a plain word -> vector table and skip
out-of-table words; a sentence with no in-table words scores 0 against
anything. Diversity follows the unique-over-total n-gram convention, and
originality is the fraction of outputs whose exact token string never occurs
among the training responses.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .corpus import Utterance

WordVectors = dict[str, np.ndarray]


def _cosine(u: np.ndarray, v: np.ndarray) -> float:
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(u @ v) / (nu * nv)


def _known(words: Utterance, vectors: WordVectors) -> list[np.ndarray]:
    return [vectors[w] for w in words if w in vectors]


def embedding_average(hyp: Utterance, ref: Utterance, vectors: WordVectors) -> float:
    """Cosine of the mean word vectors of the two sentences."""
    hv = _known(hyp, vectors)
    rv = _known(ref, vectors)
    if not hv or not rv:
        return 0.0
    return _cosine(np.mean(hv, axis=0), np.mean(rv, axis=0))


def embedding_extrema(hyp: Utterance, ref: Utterance, vectors: WordVectors) -> float:
    """Cosine of per-dimension signed extreme values across each sentence."""
    hv = _known(hyp, vectors)
    rv = _known(ref, vectors)
    if not hv or not rv:
        return 0.0
    return _cosine(_extrema_vector(hv), _extrema_vector(rv))


def _extrema_vector(vecs: list[np.ndarray]) -> np.ndarray:
    stacked = np.stack(vecs)
    idx = np.argmax(np.abs(stacked), axis=0)
    return stacked[idx, np.arange(stacked.shape[1])]


def embedding_greedy(hyp: Utterance, ref: Utterance, vectors: WordVectors) -> float:
    """Greedy word matching, symmetrized by averaging the two directions."""
    hv = _known(hyp, vectors)
    rv = _known(ref, vectors)
    if not hv or not rv:
        return 0.0
    return 0.5 * (_greedy_direction(hv, rv) + _greedy_direction(rv, hv))


def _greedy_direction(side_a: list[np.ndarray], side_b: list[np.ndarray]) -> float:
    return float(np.mean([max(_cosine(a, b) for b in side_b) for a in side_a]))


def distinct_n(responses: list[Utterance], n: int) -> float:
    """Unique n-grams over total n-grams across all responses."""
    if n not in (1, 2):
        raise ValueError(f"distinct-n is defined for n in {{1, 2}}, got {n}")
    if not responses:
        raise ValueError("no responses to score")
    total = 0
    unique: set[tuple[str, ...]] = set()
    for resp in responses:
        for i in range(len(resp) - n + 1):
            unique.add(tuple(resp[i : i + n]))
            total += 1
    if total == 0:
        return 0.0
    return len(unique) / total


def originality(responses: list[Utterance], training_responses: list[Utterance]) -> float:
    """Fraction of responses that never occur verbatim among training responses."""
    if not responses:
        raise ValueError("no responses to score")
    seen = {" ".join(r) for r in training_responses}
    novel = sum(1 for r in responses if " ".join(r) not in seen)
    return novel / len(responses)


@dataclass
class MetricReport:
    average: float
    extrema: float
    greedy: float
    distinct1: float
    distinct2: float
    originality: float
    num_pairs: int

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)

    def to_table(self) -> str:
        rows = [
            ("average", self.average),
            ("extrema", self.extrema),
            ("greedy", self.greedy),
            ("distinct-1", self.distinct1),
            ("distinct-2", self.distinct2),
            ("originality", self.originality),
        ]
        width = max(len(name) for name, _ in rows)
        lines = [f"{name:<{width}}  {value:8.4f}" for name, value in rows]
        lines.append(f"{'pairs':<{width}}  {self.num_pairs:8d}")
        return "\n".join(lines)


def evaluate_suite(
    outputs: list[Utterance],
    references: list[Utterance],
    training_responses: list[Utterance],
    vectors: WordVectors,
) -> MetricReport:
    """Mean per-pair embedding metrics plus corpus-level diversity/originality."""
    if len(outputs) != len(references):
        raise ValueError(
            f"outputs and references differ in length: {len(outputs)} vs {len(references)}"
        )
    if not outputs:
        raise ValueError("nothing to evaluate")
    avg = float(np.mean([embedding_average(h, r, vectors) for h, r in zip(outputs, references)]))
    ext = float(np.mean([embedding_extrema(h, r, vectors) for h, r in zip(outputs, references)]))
    gre = float(np.mean([embedding_greedy(h, r, vectors) for h, r in zip(outputs, references)]))
    return MetricReport(
        average=avg,
        extrema=ext,
        greedy=gre,
        distinct1=distinct_n(outputs, 1),
        distinct2=distinct_n(outputs, 2),
        originality=originality(outputs, training_responses),
        num_pairs=len(outputs),
    )
