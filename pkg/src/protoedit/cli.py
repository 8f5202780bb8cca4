"""Command-line entry points: ingest, index, make-quads, train, train-matcher,
eval, chat, serve.

Every flag can also come from a JSON config file (``--config``), organized as
one object per subcommand; explicit flags win over config values:

    {"train": {"emb_dim": 64, "max_epochs": 10}, "serve": {"port": 8472}}
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import checkpoints, retrieval, training, wordvecs
from .corpus import build_vocab, load_pairs, load_vocab, save_pairs, save_vocab, tokenize
from .editor import ABLATIONS, Hyperparams
from .matcher import MatcherHyperparams, train_matcher
from .metrics import evaluate_suite
from .pipeline import PipelineConfig, PipelineEngine
from .server import serve


def _add(parser: argparse.ArgumentParser, section: dict, name: str, **kwargs):
    """add_argument with the config section supplying the default."""
    key = name.lstrip("-").replace("-", "_")
    if key in section:
        kwargs["default"] = section[key]
        kwargs.pop("required", None)
    parser.add_argument(name, **kwargs)


def _read_lines(path: str) -> list[list[str]]:
    with open(path, encoding="utf-8") as fh:
        return [tokenize(line, lowercase=False) for line in fh if line.strip()]


# ---------------------------------------------------------------------------
# Subcommand implementations
# ---------------------------------------------------------------------------

def cmd_ingest(args) -> int:
    pairs, errors = load_pairs(args.input, max_len=args.max_len, lowercase=not args.no_lowercase)
    for err in errors:
        print(f"{args.input}:{err.line_no}: {err.reason}", file=sys.stderr)
    if not pairs:
        print("error: no usable pairs in input", file=sys.stderr)
        return 1
    save_pairs(pairs, args.out_pairs)
    vocab = build_vocab(pairs, max_size=args.vocab_size)
    save_vocab(vocab, args.out_vocab)
    print(f"ingested {len(pairs)} pairs ({len(errors)} bad lines), vocab {len(vocab)}")
    return 0


def cmd_index(args) -> int:
    pairs, _ = load_pairs(args.pairs, max_len=10**9, lowercase=False)
    docs = [
        (p.id, p.context if args.side == "context" else p.response) for p in pairs
    ]
    index = retrieval.build_index(docs, side=args.side)
    retrieval.save_index(index, args.out)
    print(f"indexed {index.doc_count} {args.side} docs, {len(index.postings)} terms")
    return 0


def cmd_make_quads(args) -> int:
    pairs, _ = load_pairs(args.pairs, max_len=10**9, lowercase=False)
    index = retrieval.load_index(args.index)
    if index.side != "response":
        print("error: make-quads needs a response-side index", file=sys.stderr)
        return 1
    quads = retrieval.build_training_quadruples(pairs, index, k=args.k)
    retrieval.save_quadruples(quads, args.out)
    print(f"built {len(quads)} quadruples from {len(pairs)} pairs (k={args.k})")
    return 0


def _split_validation(items: list, fraction: float, seed: int) -> tuple[list, list]:
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(items))
    n_val = max(1, int(len(items) * fraction))
    val_idx = set(order[:n_val].tolist())
    train = [items[i] for i in range(len(items)) if i not in val_idx]
    val = [items[i] for i in sorted(val_idx)]
    return train, val


def cmd_train(args) -> int:
    quads = retrieval.load_quadruples(args.quads)
    if args.max_quads and len(quads) > args.max_quads:
        quads = quads[: args.max_quads]
    vocab = load_vocab(args.vocab)
    hp = Hyperparams(
        emb_dim=args.emb_dim,
        edit_dim=args.edit_dim,
        enc_hidden_per_dir=args.enc_hidden,
        dec_hidden=args.dec_hidden,
        vocab_size=len(vocab),
        batch_size=args.batch_size,
        lr_init=args.lr,
        max_epochs=args.max_epochs,
        grad_clip_norm=args.grad_clip,
        seed=args.seed,
        ablation=args.ablation,
        max_decode_len=args.max_decode_len,
    )
    if args.val_quads:
        train_quads, val_quads = quads, retrieval.load_quadruples(args.val_quads)
    else:
        train_quads, val_quads = _split_validation(quads, args.val_fraction, hp.seed)
    result = training.train(train_quads, val_quads, vocab, hp, log_path=args.log)
    checkpoints.save_editor(args.out, result.params, hp, vocab)
    last = result.log[-1]
    print(
        f"trained {len(train_quads)} quads for {last.epoch} epochs; "
        f"best val perplexity {result.best_val_perplexity:.3f} "
        f"(epoch {result.best_epoch}) -> {args.out}"
    )
    return 0


def cmd_train_matcher(args) -> int:
    pairs, _ = load_pairs(args.pairs, max_len=10**9, lowercase=False)
    if args.max_pairs and len(pairs) > args.max_pairs:
        pairs = pairs[: args.max_pairs]
    vocab = load_vocab(args.vocab)
    hp = MatcherHyperparams(
        emb_dim=args.emb_dim,
        hidden_dim=args.hidden_dim,
        neg_ratio=args.neg_ratio,
        batch_size=args.batch_size,
        lr_init=args.lr,
        max_epochs=args.max_epochs,
        seed=args.seed,
        vocab_size=len(vocab),
    )
    train_pairs, val_pairs = _split_validation(pairs, args.val_fraction, hp.seed)
    result = train_matcher(train_pairs, val_pairs, vocab, hp)
    checkpoints.save_matcher(args.out, result.params, hp, vocab)
    print(
        f"trained matcher on {len(train_pairs)} pairs; "
        f"best val loss {result.best_val_loss:.4f} (epoch {result.best_epoch}) -> {args.out}"
    )
    return 0


def cmd_eval(args) -> int:
    outputs = _read_lines(args.outputs)
    references = _read_lines(args.references)
    train_responses = _read_lines(args.train_responses)
    if args.word_vectors:
        vectors = wordvecs.load_word_vectors(args.word_vectors)
    else:
        vectors = wordvecs.train_word_vectors(
            train_responses + references, dim=args.vector_dim, seed=args.seed
        )
    report = evaluate_suite(outputs, references, train_responses, vectors)
    print(report.to_table())
    if args.report_out:
        Path(args.report_out).write_text(report.to_json() + "\n", encoding="utf-8")
        print(f"report written to {args.report_out}")
    return 0


def _pipeline_config(args) -> PipelineConfig:
    base = {}
    if args.pipeline_config:
        with open(args.pipeline_config, encoding="utf-8") as fh:
            base = json.load(fh)
    for key in (
        "vocab", "pairs", "context_index", "editor", "matcher", "variant",
        "k", "beam_width", "beam_max_len", "fallback_response", "request_log",
        "host", "port",
    ):
        value = getattr(args, key, None)
        if value is not None:
            base[key] = value
    return PipelineConfig(**base)


def _print_trace(trace) -> None:
    print(f"[{trace.variant}] response: {trace.response}")
    if trace.fallback:
        print("  (fallback: retrieval found no prototype)")
        return
    proto = trace.prototype
    print(f"  prototype #{proto['pair_id']} (score {proto['retrieval_score']:.3f})")
    print(f"    context : {proto['context']}")
    print(f"    response: {proto['response']}")
    ins = ", ".join(f"{e['word']}:{e['weight']:.2f}" for e in trace.insertions) or "-"
    dels = ", ".join(f"{e['word']}:{e['weight']:.2f}" for e in trace.deletions) or "-"
    print(f"  insertions: {ins}")
    print(f"  deletions : {dels}")
    for cand in trace.candidates[:5]:
        score = "-" if cand.score is None else f"{cand.score:.3f}"
        print(f"    [{cand.origin:9s}] {score}  {cand.response}")


def cmd_chat(args) -> int:
    engine = PipelineEngine.from_config(_pipeline_config(args))
    print(f"variant {engine.config.variant}, k={engine.config.k}; empty line quits")
    while True:
        try:
            line = input("> ").strip()
        except EOFError:
            break
        if not line:
            break
        _print_trace(engine.respond(line))
    return 0


def cmd_serve(args) -> int:
    serve(_pipeline_config(args))
    return 0


# ---------------------------------------------------------------------------
# Parser assembly
# ---------------------------------------------------------------------------

def build_parser(cfg: dict) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="protoedit",
        description="Retrieve-then-edit response generation toolkit",
    )
    parser.add_argument("--config", help="JSON file with per-subcommand defaults")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="filter a raw TSV corpus and build the vocab")
    s = cfg.get("ingest", {})
    _add(p, s, "--input", required=True)
    _add(p, s, "--out-pairs", required=True)
    _add(p, s, "--out-vocab", required=True)
    _add(p, s, "--max-len", type=int, default=30)
    _add(p, s, "--vocab-size", type=int, default=30000)
    _add(p, s, "--no-lowercase", action="store_true", default=False)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("index", help="build a BM25 inverted index over one side")
    s = cfg.get("index", {})
    _add(p, s, "--pairs", required=True)
    _add(p, s, "--side", choices=["context", "response"], required=True)
    _add(p, s, "--out", required=True)
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("make-quads", help="construct banded training quadruples")
    s = cfg.get("make_quads", {})
    _add(p, s, "--pairs", required=True)
    _add(p, s, "--index", required=True, help="response-side index file")
    _add(p, s, "--out", required=True)
    _add(p, s, "--k", type=int, default=20)
    p.set_defaults(func=cmd_make_quads)

    p = sub.add_parser("train", help="train the editor on quadruples")
    s = cfg.get("train", {})
    _add(p, s, "--quads", required=True)
    _add(p, s, "--vocab", required=True)
    _add(p, s, "--out", required=True)
    _add(p, s, "--val-quads")
    _add(p, s, "--val-fraction", type=float, default=0.1)
    _add(p, s, "--log", help="append JSONL epoch stats here")
    _add(p, s, "--emb-dim", type=int, default=512)
    _add(p, s, "--edit-dim", type=int, default=512)
    _add(p, s, "--enc-hidden", type=int, default=512)
    _add(p, s, "--dec-hidden", type=int, default=1024)
    _add(p, s, "--batch-size", type=int, default=128)
    _add(p, s, "--lr", type=float, default=1e-3)
    _add(p, s, "--max-epochs", type=int, default=20)
    _add(p, s, "--grad-clip", type=float, default=5.0)
    _add(p, s, "--max-decode-len", type=int, default=30)
    _add(p, s, "--seed", type=int, default=0)
    _add(p, s, "--ablation", choices=list(ABLATIONS), default="full")
    _add(p, s, "--max-quads", type=int, default=0, help="cap training quadruples (0 = all)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("train-matcher", help="train the rerank matcher on pairs")
    s = cfg.get("train_matcher", {})
    _add(p, s, "--pairs", required=True)
    _add(p, s, "--vocab", required=True)
    _add(p, s, "--out", required=True)
    _add(p, s, "--val-fraction", type=float, default=0.1)
    _add(p, s, "--emb-dim", type=int, default=512)
    _add(p, s, "--hidden-dim", type=int, default=1024)
    _add(p, s, "--neg-ratio", type=int, default=9)
    _add(p, s, "--batch-size", type=int, default=128)
    _add(p, s, "--lr", type=float, default=1e-3)
    _add(p, s, "--max-epochs", type=int, default=10)
    _add(p, s, "--seed", type=int, default=0)
    _add(p, s, "--max-pairs", type=int, default=0, help="cap training pairs (0 = all)")
    p.set_defaults(func=cmd_train_matcher)

    p = sub.add_parser("eval", help="score system outputs against references")
    s = cfg.get("eval", {})
    _add(p, s, "--outputs", required=True, help="one response per line")
    _add(p, s, "--references", required=True)
    _add(p, s, "--train-responses", required=True)
    _add(p, s, "--word-vectors", help="text table; trained on the fly if omitted")
    _add(p, s, "--vector-dim", type=int, default=64)
    _add(p, s, "--seed", type=int, default=0)
    _add(p, s, "--report-out", help="write the MetricReport JSON here")
    p.set_defaults(func=cmd_eval)

    for name, fn, help_text in (
        ("chat", cmd_chat, "interactive terminal chat printing each EditTrace"),
        ("serve", cmd_serve, "run the HTTP JSON API"),
    ):
        p = sub.add_parser(name, help=help_text)
        s = cfg.get(name, {})
        _add(p, s, "--pipeline-config", help="JSON file with PipelineConfig fields")
        _add(p, s, "--vocab")
        _add(p, s, "--pairs")
        _add(p, s, "--context-index")
        _add(p, s, "--editor")
        _add(p, s, "--matcher")
        _add(p, s, "--variant")
        _add(p, s, "--k", type=int)
        _add(p, s, "--beam-width", type=int)
        _add(p, s, "--beam-max-len", type=int)
        _add(p, s, "--fallback-response")
        _add(p, s, "--request-log")
        _add(p, s, "--host")
        _add(p, s, "--port", type=int)
        p.set_defaults(func=fn)

    return parser


def main(argv: list[str] | None = None) -> int:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    cfg = {}
    if known.config:
        try:
            with open(known.config, encoding="utf-8") as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            print(f"error: cannot read config {known.config}: {exc}", file=sys.stderr)
            return 1
    parser = build_parser(cfg)
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except KeyboardInterrupt:
        return 130
    except Exception as exc:  # fail with a message, not a stack trace
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
