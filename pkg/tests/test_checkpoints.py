import numpy as np
import pytest

from protoedit.checkpoints import (
    load_editor,
    load_matcher,
    save_editor,
    save_matcher,
    vocab_hash,
)
from protoedit.decoding import BeamConfig, beam_search
from protoedit.editor import edit_vector, encode_prototype
from protoedit.matcher import MatcherHyperparams, init_matcher
from protoedit.serialization import read_checkpoint, write_checkpoint
from util import tiny_model, vocab_from_words


class TestContainer:
    def test_roundtrip_blocks_and_meta(self, tmp_path):
        path = tmp_path / "x.ckpt"
        blocks = {
            "a": np.arange(6, dtype=np.float32).reshape(2, 3),
            "b": np.array([1.5, -2.5], dtype=np.float64),
            "scalarish": np.array([7], dtype=np.int64),
        }
        write_checkpoint(path, "demo", {"note": "hi", "n": 3}, blocks)
        meta, loaded = read_checkpoint(path, expected_kind="demo")
        assert meta == {"note": "hi", "n": 3}
        for name, arr in blocks.items():
            assert loaded[name].dtype == arr.dtype
            assert np.array_equal(loaded[name], arr)

    def test_kind_mismatch_rejected(self, tmp_path):
        path = tmp_path / "x.ckpt"
        write_checkpoint(path, "demo", {}, {"a": np.zeros(2)})
        with pytest.raises(ValueError, match="kind"):
            read_checkpoint(path, expected_kind="other")

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "junk.ckpt"
        path.write_bytes(b"WHAT" + b"\x00" * 8)
        with pytest.raises(ValueError, match="magic"):
            read_checkpoint(path)


class TestModelCheckpoints:
    def test_editor_roundtrip_identical_decodes(self, tmp_path):
        hp, params = tiny_model(seed=11, dtype="float32")
        vocab = vocab_from_words([f"w{i}" for i in range(hp.vocab_size - 4)])
        path = tmp_path / "editor.ckpt"
        save_editor(path, params, hp, vocab)
        loaded, loaded_hp, meta = load_editor(path)
        assert loaded_hp == hp
        assert meta["vocab_hash"] == vocab_hash(vocab)
        for (n1, a1), (n2, a2) in zip(params.named_arrays(), loaded.named_arrays()):
            assert n1 == n2
            assert np.array_equal(a1, a2)
        enc = encode_prototype(loaded, [4, 5, 6])
        ev = edit_vector(loaded, [7], [8], enc.h_last)
        hyps = beam_search(loaded, enc, ev.z, BeamConfig(width=2, max_len=4))
        enc0 = encode_prototype(params, [4, 5, 6])
        ev0 = edit_vector(params, [7], [8], enc0.h_last)
        hyps0 = beam_search(params, enc0, ev0.z, BeamConfig(width=2, max_len=4))
        assert [h.token_ids for h in hyps] == [h.token_ids for h in hyps0]

    def test_matcher_roundtrip(self, tmp_path):
        hp = MatcherHyperparams(emb_dim=5, hidden_dim=4, vocab_size=9, seed=2)
        params = init_matcher(hp)
        vocab = vocab_from_words([f"w{i}" for i in range(5)])
        path = tmp_path / "matcher.ckpt"
        save_matcher(path, params, hp, vocab)
        loaded, loaded_hp, _ = load_matcher(path)
        assert loaded_hp == hp
        for (_, a1), (_, a2) in zip(params.named_arrays(), loaded.named_arrays()):
            assert np.array_equal(a1, a2)

    def test_editor_cannot_load_as_matcher(self, tmp_path):
        hp, params = tiny_model(seed=12)
        vocab = vocab_from_words(["a"])
        path = tmp_path / "editor.ckpt"
        save_editor(path, params, hp, vocab)
        with pytest.raises(ValueError, match="kind"):
            load_matcher(path)
