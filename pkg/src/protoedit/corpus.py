"""Corpus ingestion, tokenization, vocabulary, and id encoding.

The corpus format is UTF-8 TSV, one ``context<TAB>response`` per line.
Everything downstream (retrieval, editor, matcher, metrics) works on
whitespace tokens and integer ids produced here.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

Utterance = list[str]

PAD, BOS, EOS, UNK = "<pad>", "<bos>", "<eos>", "<unk>"
RESERVED = (PAD, BOS, EOS, UNK)
PAD_ID, BOS_ID, EOS_ID, UNK_ID = 0, 1, 2, 3

DEFAULT_MAX_LEN = 30


@dataclass(frozen=True)
class Pair:
    """One context/response pair; the corpus atom."""

    id: int
    context: Utterance
    response: Utterance


@dataclass(frozen=True)
class LineError:
    line_no: int
    reason: str


def tokenize(text: str, lowercase: bool = True) -> Utterance:
    """Split ``text`` on runs of whitespace; never yields empty tokens."""
    if lowercase:
        text = text.lower()
    return text.split()


def load_pairs(
    path: str | Path,
    max_len: int = DEFAULT_MAX_LEN,
    lowercase: bool = True,
) -> tuple[list[Pair], list[LineError]]:
    """Read a TSV corpus, returning filtered pairs and record-level errors.

    Filtering: malformed lines (no tab, or an empty side) are reported in the
    error list; exact duplicates (same tokenized context and response) and
    pairs with either side longer than ``max_len`` are silently dropped.
    Surviving pairs get sequential ids in file order. An unreadable file
    raises ``OSError``.
    """
    pairs: list[Pair] = []
    errors: list[LineError] = []
    seen: set[tuple[str, str]] = set()
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            if "\t" not in line:
                errors.append(LineError(line_no, "no tab separator"))
                continue
            ctx_text, _, resp_text = line.partition("\t")
            context = tokenize(ctx_text, lowercase)
            response = tokenize(resp_text, lowercase)
            if not context or not response:
                errors.append(LineError(line_no, "empty context or response"))
                continue
            if len(context) > max_len or len(response) > max_len:
                continue
            key = (" ".join(context), " ".join(response))
            if key in seen:
                continue
            seen.add(key)
            pairs.append(Pair(id=len(pairs), context=context, response=response))
    return pairs, errors


def save_pairs(pairs: list[Pair], path: str | Path) -> None:
    """Write pairs back out as canonical TSV (one pair per line)."""
    with open(path, "w", encoding="utf-8") as fh:
        for p in pairs:
            fh.write(" ".join(p.context) + "\t" + " ".join(p.response) + "\n")


@dataclass
class Vocab:
    """Bijective word/id mapping with fixed reserved ids 0..3.

    ``id_to_word`` is dense: ids run 0..len-1 with reserved tokens first.
    """

    word_to_id: dict[str, int] = field(default_factory=dict)
    id_to_word: list[str] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.id_to_word)

    def id_of(self, word: str) -> int:
        return self.word_to_id.get(word, UNK_ID)

    def __contains__(self, word: str) -> bool:
        return word in self.word_to_id

    def word_of(self, idx: int) -> str:
        if not 0 <= idx < len(self.id_to_word):
            raise ValueError(f"unknown token id {idx} (vocab size {len(self)})")
        return self.id_to_word[idx]


def build_vocab(pairs: list[Pair], max_size: int = 30000) -> Vocab:
    """Frequency-ranked vocabulary over all context and response tokens.

    Ties in frequency break lexicographically so builds are reproducible.
    The top ``max_size - 4`` words are kept; reserved tokens occupy ids 0..3.
    """
    if max_size < 5:
        raise ValueError(f"max_size must be at least 5, got {max_size}")
    if not pairs:
        raise ValueError("cannot build a vocabulary from an empty corpus")
    counts: Counter[str] = Counter()
    for p in pairs:
        counts.update(p.context)
        counts.update(p.response)
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    words = [w for w, _ in ranked[: max_size - len(RESERVED)]]
    id_to_word = list(RESERVED) + words
    word_to_id = {w: i for i, w in enumerate(id_to_word)}
    return Vocab(word_to_id=word_to_id, id_to_word=id_to_word)


def encode(utterance: Utterance, vocab: Vocab, add_eos: bool = False) -> list[int]:
    """Map words to ids; out-of-vocabulary words map to the UNK id.

    ``add_eos`` appends the EOS id, as needed for decoder targets.
    """
    ids = [vocab.id_of(w) for w in utterance]
    if add_eos:
        ids.append(EOS_ID)
    return ids


def decode(ids: list[int], vocab: Vocab) -> Utterance:
    """Map ids back to words; raises on ids outside the vocabulary."""
    return [vocab.word_of(i) for i in ids]


def save_vocab(vocab: Vocab, path: str | Path) -> None:
    """Persist as UTF-8 text, one word per line in id order."""
    with open(path, "w", encoding="utf-8") as fh:
        for word in vocab.id_to_word:
            fh.write(word + "\n")


def load_vocab(path: str | Path) -> Vocab:
    id_to_word = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            id_to_word.append(line.rstrip("\n"))
    if id_to_word[: len(RESERVED)] != list(RESERVED):
        raise ValueError(f"vocab file {path} does not start with the reserved tokens")
    return Vocab(
        word_to_id={w: i for i, w in enumerate(id_to_word)},
        id_to_word=id_to_word,
    )
