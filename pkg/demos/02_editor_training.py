"""Train the neural editor to perform word substitutions driven by context.

The corpus teaches one skill: when the current context swaps the keyword of
the prototype context, swap it in the response too. Everything the model
needs travels through the edit vector — the prototype response alone is
ambiguous about which word to produce.
"""

import numpy as np

from protoedit.corpus import RESERVED, Vocab, decode
from protoedit.decoding import greedy_decode
from protoedit.editor import Hyperparams, edit_vector, encode_prototype
from protoedit.retrieval import Quadruple
from protoedit.training import encode_quadruples, train

rng = np.random.default_rng(3)
slots = [f"thing{i}" for i in range(12)]
quads = []
for i in range(48):
    x, y = rng.choice(len(slots), size=2, replace=False)
    quads.append(
        Quadruple(
            context=["i", "like", slots[y]],
            response=[slots[y], "is", "good"],
            proto_context=["i", "like", slots[x]],
            proto_response=[slots[x], "is", "good"],
            jaccard=0.5,
            pair_id=i,
            proto_id=100 + i,
        )
    )

words = list(dict.fromkeys(slots + ["i", "like", "is", "good"]))
id_to_word = list(RESERVED) + words
vocab = Vocab(word_to_id={w: i for i, w in enumerate(id_to_word)}, id_to_word=id_to_word)

hp = Hyperparams(
    emb_dim=24, edit_dim=16, enc_hidden_per_dir=12, dec_hidden=24, attn_dim=16,
    vocab_size=len(vocab), batch_size=16, lr_init=8e-3, max_epochs=120, seed=0,
)
print(f"training on {len(quads)} substitution quadruples, vocab {len(vocab)}")
result = train(quads, quads, vocab, hp)

print("\nloss curve (every 20 epochs):")
for stats in result.log[::20]:
    print(f"  epoch {stats.epoch:3d}  train {stats.train_loss:.4f}  val ppl {stats.val_perplexity:.3f}")
print(f"best validation perplexity {result.best_val_perplexity:.4f} at epoch {result.best_epoch}")

print("\ngreedy decodes on three training quadruples:")
for ex, quad in list(zip(encode_quadruples(quads, vocab), quads))[:3]:
    enc = encode_prototype(result.params, ex.proto_ids)
    ev = edit_vector(result.params, ex.ins_ids, ex.del_ids, enc.h_last)
    hyp = greedy_decode(result.params, enc, ev.z, max_len=8)
    print(f"  prototype: {' '.join(quad.proto_response)}")
    print(f"     target: {' '.join(quad.response)}")
    print(f"    decoded: {' '.join(decode(hyp.surface_ids(), vocab))}")
