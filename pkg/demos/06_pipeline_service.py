"""The full service: ingest -> index -> quadruples -> train -> serve -> chat.

Drives the CLI entry points on a synthetic corpus, starts the HTTP API on an
ephemeral port, and exercises every pipeline variant over POST /chat. This is
the complete system the chat-inspector UI talks to.
"""

import json
import tempfile
import urllib.request
from pathlib import Path

import numpy as np

from protoedit.cli import main
from protoedit.pipeline import PipelineConfig
from protoedit.server import ChatServer

rng = np.random.default_rng(11)
topics = [f"topic{i}" for i in range(15)]
fillers = [f"f{i}" for i in range(20)]
moods = ["great", "bad", "fine", "odd"]

with tempfile.TemporaryDirectory() as tmp:
    root = Path(tmp)
    raw = root / "raw.tsv"
    with open(raw, "w", encoding="utf-8") as fh:
        for _ in range(1500):
            topic = topics[int(rng.integers(len(topics)))]
            mood = moods[int(rng.integers(len(moods)))]
            f1, f2 = (fillers[int(i)] for i in rng.integers(0, len(fillers), 2))
            fh.write(f"tell me about {topic} {f1} {f2}\tthe {topic} is {mood} {f1}\n")

    steps = [
        ["ingest", "--input", str(raw), "--out-pairs", str(root / "pairs.tsv"),
         "--out-vocab", str(root / "vocab.txt"), "--vocab-size", "500"],
        ["index", "--pairs", str(root / "pairs.tsv"), "--side", "context",
         "--out", str(root / "ctx.idx")],
        ["index", "--pairs", str(root / "pairs.tsv"), "--side", "response",
         "--out", str(root / "resp.idx")],
        ["make-quads", "--pairs", str(root / "pairs.tsv"), "--index", str(root / "resp.idx"),
         "--out", str(root / "quads.tsv"), "--k", "8"],
        ["train", "--quads", str(root / "quads.tsv"), "--vocab", str(root / "vocab.txt"),
         "--out", str(root / "editor.ckpt"), "--emb-dim", "16", "--edit-dim", "12",
         "--enc-hidden", "10", "--dec-hidden", "16", "--batch-size", "32",
         "--max-epochs", "8", "--lr", "3e-3", "--max-quads", "1200"],
        ["train-matcher", "--pairs", str(root / "pairs.tsv"), "--vocab", str(root / "vocab.txt"),
         "--out", str(root / "matcher.ckpt"), "--emb-dim", "12", "--hidden-dim", "12",
         "--max-epochs", "1", "--max-pairs", "400"],
    ]
    for argv in steps:
        print(f"\n$ protoedit {' '.join(argv)}")
        assert main(argv) == 0

    config = PipelineConfig(
        vocab=str(root / "vocab.txt"),
        pairs=str(root / "pairs.tsv"),
        context_index=str(root / "ctx.idx"),
        editor=str(root / "editor.ckpt"),
        matcher=str(root / "matcher.ckpt"),
        k=5, beam_width=5, beam_max_len=10,
        host="127.0.0.1", port=0,
    )
    server = ChatServer(config)
    server.start()
    server.load()
    url = f"http://127.0.0.1:{server.port}"
    print(f"\nservice up at {url}")

    with urllib.request.urlopen(url + "/health") as resp:
        print("GET /health ->", json.loads(resp.read()))

    try:
        for variant in ("edit-default", "edit-1-rerank", "edit-n-rerank", "edit-merge"):
            payload = json.dumps(
                {"context": "tell me about topic4 f2 f7", "variant": variant}
            ).encode()
            req = urllib.request.Request(
                url + "/chat", data=payload, headers={"Content-Type": "application/json"}
            )
            with urllib.request.urlopen(req) as resp:
                trace = json.loads(resp.read())
            proto = trace["prototype"]
            print(f"\nPOST /chat variant={variant}")
            print(f"  prototype : {proto['context']}  ->  {proto['response']}")
            ins = ", ".join(f"{e['word']}:{e['weight']:.2f}" for e in trace["insertions"]) or "-"
            dels = ", ".join(f"{e['word']}:{e['weight']:.2f}" for e in trace["deletions"]) or "-"
            print(f"  insertions: {ins}")
            print(f"  deletions : {dels}")
            print(f"  response  : {trace['response']}")
            print(f"  candidates: {len(trace['candidates'])}, total {trace['timings_ms']['total']:.0f} ms")
    finally:
        server.shutdown()
        print("\nserver stopped")
