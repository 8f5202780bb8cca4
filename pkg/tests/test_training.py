import math

import numpy as np
import pytest

import protoedit.training as training_mod
from protoedit.editor import Hyperparams
from protoedit.training import (
    Adam,
    TrainingDiverged,
    ValidationSchedule,
    clip_gradients,
    train,
)
from util import tiny_model, vocab_from_words, word_substitution_corpus


def small_hp(**overrides) -> Hyperparams:
    base = dict(
        emb_dim=12,
        edit_dim=10,
        enc_hidden_per_dir=8,
        dec_hidden=12,
        attn_dim=8,
        vocab_size=25,
        batch_size=8,
        lr_init=5e-3,
        max_epochs=5,
        seed=1,
        dtype="float32",
    )
    base.update(overrides)
    return Hyperparams(**base)


def toy_setup(n_quads=16):
    quads, words = word_substitution_corpus(n_quads=n_quads)
    vocab = vocab_from_words(words)
    hp = small_hp(vocab_size=len(vocab))
    return quads, vocab, hp


class TestValidationSchedule:
    def test_halves_on_increase(self):
        sched = ValidationSchedule(1.0)
        assert not sched.update(10.0)
        assert not sched.update(11.0)
        assert sched.lr == 0.5

    def test_stops_after_two_successive_increases(self):
        sched = ValidationSchedule(1.0)
        assert not sched.update(10.0)
        assert not sched.update(11.0)
        assert sched.update(12.0)
        assert sched.lr == 0.25

    def test_recovery_resets_the_streak(self):
        sched = ValidationSchedule(1.0)
        sched.update(10.0)
        assert not sched.update(11.0)  # one increase
        assert not sched.update(9.0)  # improvement resets
        assert not sched.update(9.5)  # a single new increase does not stop
        assert sched.lr == 0.25

    def test_flat_perplexity_never_stops(self):
        sched = ValidationSchedule(1.0)
        for _ in range(10):
            assert not sched.update(5.0)
        assert sched.lr == 1.0


class TestAdamAndClipping:
    def test_adam_moves_toward_minimum(self):
        _, params = tiny_model(seed=2)
        target = params.copy()
        target.emb += 1.0
        opt = Adam(params)
        for _ in range(400):
            grads = params.copy()
            for (_, g), (_, p), (_, t) in zip(
                grads.named_arrays(), params.named_arrays(), target.named_arrays()
            ):
                g[:] = p - t
            opt.step(params, grads, lr=0.05)
        assert np.allclose(params.emb, target.emb, atol=0.02)

    def test_clip_rescales_to_max_norm(self):
        _, params = tiny_model(seed=3)
        grads = params.copy()
        before = clip_gradients(grads, max_norm=1.0)
        assert before > 1.0
        after = math.sqrt(
            sum(float(np.sum(a.astype(np.float64) ** 2)) for _, a in grads.named_arrays())
        )
        assert after == pytest.approx(1.0, rel=1e-6)

    def test_clip_leaves_small_gradients_alone(self):
        _, params = tiny_model(seed=4)
        grads = params.copy()
        for _, arr in grads.named_arrays():
            arr *= 1e-6
        snapshot = [arr.copy() for _, arr in grads.named_arrays()]
        clip_gradients(grads, max_norm=5.0)
        for (_, arr), saved in zip(grads.named_arrays(), snapshot):
            assert np.array_equal(arr, saved)


class TestTrain:
    def test_loss_decreases_over_first_epochs(self):
        quads, vocab, hp = toy_setup()
        result = train(quads, quads, vocab, hp)
        losses = [s.train_loss for s in result.log]
        assert len(losses) == hp.max_epochs
        assert all(b < a for a, b in zip(losses, losses[1:]))

    def test_identical_seeds_bitwise_identical(self):
        quads, vocab, hp = toy_setup(n_quads=8)
        hp = small_hp(vocab_size=len(vocab), max_epochs=2)
        r1 = train(quads, quads, vocab, hp)
        r2 = train(quads, quads, vocab, hp)
        for (n1, a1), (n2, a2) in zip(r1.params.named_arrays(), r2.params.named_arrays()):
            assert n1 == n2
            assert np.array_equal(a1, a2)
        assert [s.train_loss for s in r1.log] == [s.train_loss for s in r2.log]

    def test_returns_best_validation_params(self):
        quads, vocab, hp = toy_setup(n_quads=8)
        result = train(quads, quads, vocab, hp)
        best = min(result.log, key=lambda s: s.val_perplexity)
        assert result.best_epoch == best.epoch
        assert result.best_val_perplexity == best.val_perplexity

    def test_divergence_aborts_with_diagnostic(self, monkeypatch):
        quads, vocab, hp = toy_setup(n_quads=4)

        def bad_loss(params, batch, ablation="full"):
            from protoedit.editor import zeros_like_params

            return float("nan"), zeros_like_params(params)

        monkeypatch.setattr(training_mod, "loss_and_grads", bad_loss)
        with pytest.raises(TrainingDiverged, match="non-finite"):
            train(quads, quads, vocab, hp)

    def test_empty_sets_rejected(self):
        quads, vocab, hp = toy_setup(n_quads=4)
        with pytest.raises(ValueError):
            train([], quads, vocab, hp)
        with pytest.raises(ValueError):
            train(quads, [], vocab, hp)

    def test_log_written_as_jsonl(self, tmp_path):
        import json

        quads, vocab, hp = toy_setup(n_quads=4)
        hp = small_hp(vocab_size=len(vocab), max_epochs=2)
        log_path = tmp_path / "log.jsonl"
        train(quads, quads, vocab, hp, log_path=log_path)
        lines = log_path.read_text().strip().split("\n")
        assert len(lines) == 2
        entry = json.loads(lines[0])
        assert set(entry) == {"epoch", "train_loss", "val_perplexity", "lr"}
        assert entry["lr"] == hp.lr_init
