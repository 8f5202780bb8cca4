"""Editor and matcher checkpoints in the shared binary container."""

from __future__ import annotations

import hashlib
from dataclasses import asdict, fields
from pathlib import Path

from .corpus import Vocab
from .editor import Hyperparams, ModelParams
from .gru import GRUBlock
from .matcher import MatcherHyperparams, MatcherParams
from .serialization import read_checkpoint, write_checkpoint

EDITOR_KIND = "editor"
MATCHER_KIND = "matcher"


def vocab_hash(vocab: Vocab) -> str:
    digest = hashlib.sha256("\n".join(vocab.id_to_word).encode("utf-8"))
    return digest.hexdigest()[:16]


def _rebuild(cls, blocks):
    kwargs = {}
    for f in fields(cls):
        if f"{f.name}.wx" in blocks:  # GRU blocks were flattened on save
            kwargs[f.name] = GRUBlock(
                wx=blocks[f"{f.name}.wx"],
                wh=blocks[f"{f.name}.wh"],
                b=blocks[f"{f.name}.b"],
            )
        else:
            kwargs[f.name] = blocks[f.name]
    return cls(**kwargs)


def save_editor(
    path: str | Path, params: ModelParams, hp: Hyperparams, vocab: Vocab
) -> None:
    meta = {"hyperparams": asdict(hp), "vocab_hash": vocab_hash(vocab)}
    write_checkpoint(path, EDITOR_KIND, meta, dict(params.named_arrays()))


def load_editor(path: str | Path) -> tuple[ModelParams, Hyperparams, dict]:
    meta, blocks = read_checkpoint(path, expected_kind=EDITOR_KIND)
    hp = Hyperparams(**meta["hyperparams"])
    return _rebuild(ModelParams, blocks), hp, meta


def save_matcher(
    path: str | Path, params: MatcherParams, hp: MatcherHyperparams, vocab: Vocab
) -> None:
    meta = {"hyperparams": asdict(hp), "vocab_hash": vocab_hash(vocab)}
    write_checkpoint(path, MATCHER_KIND, meta, dict(params.named_arrays()))


def load_matcher(path: str | Path) -> tuple[MatcherParams, MatcherHyperparams, dict]:
    meta, blocks = read_checkpoint(path, expected_kind=MATCHER_KIND)
    hp = MatcherHyperparams(**meta["hyperparams"])
    return _rebuild(MatcherParams, blocks), hp, meta
