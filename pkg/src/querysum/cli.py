"""Operator entry points.

Subcommands: synth, train, infer, eval, querygen, serve, gradcheck.  Every
result is a single machine-parseable JSON document on stdout; diagnostics go
to stderr.  Exit codes: 0 success, 1 usage error, 2 data error.

``infer`` and ``eval`` delegate to the same :class:`~.service.Backend` as the
HTTP endpoints, so their stdout is byte-identical to the corresponding
response bodies.
"""

import argparse
import json
import sys

import numpy as np

from .errors import ConfigError, QuerysumError
from .model import ModelConfig, QuerysumModel, default_budget, mix_scores, select_summary
from .querygen import generate_visual_query
from .service import Backend, canonical_json
from .store import load_video_record, save_checkpoint, synth_dataset
from .training import TrainConfig, train, evaluate_heldout

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on bad flags; the contract here is exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _emit(obj_or_text):
    if isinstance(obj_or_text, str):
        sys.stdout.write(obj_or_text + "\n")
    else:
        sys.stdout.write(canonical_json(obj_or_text) + "\n")
    sys.stdout.flush()


def _note(msg):
    print(msg, file=sys.stderr)


def _parse_shots(text):
    try:
        return [int(s) for s in text.split(",") if s.strip() != ""]
    except ValueError:
        raise ConfigError(f"--shots must be comma-separated integers, got {text!r}")


def _load_config(path):
    if path is None:
        return {}
    with open(path) as fh:
        return json.load(fh)


def build_parser():
    p = _Parser(prog="querysum", description="Query-steered video summarization toolkit.")
    sub = p.add_subparsers(dest="subcommand")

    sp = sub.add_parser("synth", parents=[], help="generate a synthetic dataset")
    sp.add_argument("--data-dir", required=True)
    sp.add_argument("--seed", type=int, default=42)
    sp.add_argument("--videos", type=int, default=4)
    sp.add_argument("--shots", type=int, default=256)
    sp.add_argument("--feature-dim", type=int, default=64)
    sp.add_argument("--vocab", type=int, default=16)

    tp = sub.add_parser("train", help="train a model and write a checkpoint")
    tp.add_argument("--data-dir", required=True)
    tp.add_argument("--checkpoint", required=True, help="output checkpoint path")
    tp.add_argument("--config", default=None,
                    help='JSON file: {"model": {...}, "train": {...}} overrides')
    tp.add_argument("--seed", type=int, default=0)
    tp.add_argument("--epochs", type=int, default=None)
    tp.add_argument("--delta", type=float, default=None)
    tp.add_argument("--modality", choices=["text", "visual"], default="text")
    tp.add_argument("--init-checkpoint", default=None,
                    help="start from this checkpoint instead of a fresh model")
    tp.add_argument("--freeze-summary", action="store_true",
                    help="train only the intent pathway (transfer setting)")

    ip = sub.add_parser("infer", help="intent probabilities + per-intent shot scores")
    ip.add_argument("--data-dir", required=True)
    ip.add_argument("--checkpoint", required=True, help="checkpoint id under <data-dir>/checkpoints")
    ip.add_argument("--video", required=True)
    ip.add_argument("--c1")
    ip.add_argument("--c2")
    ip.add_argument("--shots", help="comma-separated shot indices for a visual query")

    ep = sub.add_parser("eval", help="P/R/F1 of a summary against the ground truth")
    ep.add_argument("--data-dir", required=True)
    ep.add_argument("--video", required=True)
    ep.add_argument("--shots", help="comma-separated predicted summary shots")
    ep.add_argument("--mask", help="comma-separated shots to exclude from both sides")
    ep.add_argument("--checkpoint", help="select the summary with a model instead of --shots")
    ep.add_argument("--c1")
    ep.add_argument("--c2")
    ep.add_argument("--budget", type=int, default=None)
    ep.add_argument("--threshold", type=float, default=None)

    qp = sub.add_parser("querygen", help="derive a visual query from a summary")
    qp.add_argument("--data-dir", required=True)
    qp.add_argument("--video", required=True)
    qp.add_argument("--shots", required=True, help="comma-separated summary shots")
    qp.add_argument("--size", type=int, default=5, help="number of query shots")

    vp = sub.add_parser("serve", help="run the HTTP service")
    vp.add_argument("--data-dir", required=True)
    vp.add_argument("--bind", default="127.0.0.1:8000")

    gp = sub.add_parser("gradcheck", help="run the full gradient-check suite")
    gp.add_argument("--json", action="store_true", help="(default) JSON report")

    return p


# ---------------------------------------------------------------------------
# subcommand bodies


def cmd_synth(args):
    report = synth_dataset(
        args.data_dir,
        seed=args.seed,
        n_videos=args.videos,
        n_shots=args.shots,
        feature_dim=args.feature_dim,
        vocab_size=args.vocab,
    )
    _emit({"data_dir": args.data_dir, **report})
    return EXIT_OK


def cmd_train(args):
    from .datasets import load_samples
    from .store import load_checkpoint

    overrides = _load_config(args.config)
    train_over = dict(overrides.get("train", {}))
    train_over.setdefault("seed", args.seed)
    if args.epochs is not None:
        train_over["epochs"] = args.epochs
    if args.delta is not None:
        train_over["delta"] = args.delta
    tcfg = TrainConfig(**train_over)

    samples = load_samples(args.data_dir, split="train", modality=args.modality)
    heldout = load_samples(args.data_dir, split="heldout", modality=args.modality)

    if args.init_checkpoint:
        model = load_checkpoint(args.init_checkpoint)
    else:
        mcfg = ModelConfig.toy(
            feature_dim=samples[0].features.shape[1], **overrides.get("model", {})
        )
        model = QuerysumModel(mcfg, seed=args.seed)

    _note(f"training on {len(samples)} samples for {tcfg.epochs} epochs")
    record = train(
        model, samples, tcfg, heldout=heldout,
        freeze_summary=args.freeze_summary,
        log=lambda e: _note(f"epoch {e['epoch']:3d}  loss {e['loss']:.5f}  lr {e['lr']:.2e}"),
    )
    save_checkpoint(args.checkpoint, model)
    _emit({"checkpoint": args.checkpoint, "record": record.to_dict()})
    return EXIT_OK


def _require(parser_hint, cond, msg):
    if not cond:
        print(f"error: {msg}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def cmd_infer(args):
    backend = Backend(args.data_dir)
    text_mode = args.c1 is not None or args.c2 is not None
    _require("infer", text_mode != (args.shots is not None),
             "provide either --c1/--c2 or --shots")
    if text_mode:
        _require("infer", args.c1 is not None and args.c2 is not None,
                 "textual queries need both --c1 and --c2")
        body = backend.infer_text(args.checkpoint, args.video, args.c1, args.c2)
    else:
        body = backend.infer_visual(args.checkpoint, args.video, _parse_shots(args.shots))
    _emit(body)
    return EXIT_OK


def cmd_eval(args):
    backend = Backend(args.data_dir)
    mask = _parse_shots(args.mask) if args.mask else None
    if args.shots is not None:
        summary = _parse_shots(args.shots)
    else:
        _require("eval", args.checkpoint and args.c1 and args.c2,
                 "without --shots, eval needs --checkpoint, --c1 and --c2")
        infer_body = json.loads(
            backend.infer_text(args.checkpoint, args.video, args.c1, args.c2))
        g = np.asarray(infer_body["intent_probs"])
        h = np.asarray(infer_body["intent_shot_scores"])
        scores, _ = mix_scores(g, h, infer_body["delta"])
        if args.threshold is not None:
            summary = select_summary(scores, mode="threshold", threshold=args.threshold)
        else:
            budget = args.budget or default_budget(len(scores))
            summary = select_summary(scores, mode="budget", budget=budget)
        _note(f"selected summary: {summary}")
    _emit(backend.evaluate(args.video, summary, mask=mask))
    return EXIT_OK


def cmd_querygen(args):
    rec = load_video_record(args.data_dir, args.video)
    summary = _parse_shots(args.shots)
    query = generate_visual_query(summary, rec.tags, k=args.size)
    _emit({"video": args.video, "query_shots": query})
    return EXIT_OK


def cmd_serve(args):
    import uvicorn

    from .service import create_app

    host, _, port = args.bind.rpartition(":")
    _require("serve", host and port.isdigit(), "--bind must look like HOST:PORT")
    app = create_app(args.data_dir)
    _note(f"serving {args.data_dir} on {host}:{port}")
    uvicorn.run(app, host=host, port=int(port), log_level="warning")
    return EXIT_OK


def cmd_gradcheck(args):
    from .checks import run_suite

    results = run_suite()
    worst = max(results.values())
    for name, err in results.items():
        _note(f"{name:24s} {err:.3e}")
    _emit({"checks": results, "worst": worst, "passed": bool(worst < 1e-4)})
    return EXIT_OK if worst < 1e-4 else EXIT_DATA


COMMANDS = {
    "synth": cmd_synth,
    "train": cmd_train,
    "infer": cmd_infer,
    "eval": cmd_eval,
    "querygen": cmd_querygen,
    "serve": cmd_serve,
    "gradcheck": cmd_gradcheck,
}


def run(argv):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else EXIT_OK
    if args.subcommand is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.subcommand](args)
    except SystemExit as exc:
        return exc.code if exc.code is not None else EXIT_OK
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (QuerysumError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


def main():
    raise SystemExit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
