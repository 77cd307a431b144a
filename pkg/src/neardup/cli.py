"""Command line entry points for every pipeline stage.

Each subcommand is a thin shell over the module operations (the same
functions the tests exercise). ``compare`` encodes its verdict in the exit
status - 0 similar, 1 dissimilar, 2 error - so shell pipelines can branch
on similarity; every other subcommand exits 0 on success and 2 on error.
``--json`` switches output to machine-readable JSON on stdout.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from .errors import NeardupError

EXIT_OK = 0
EXIT_DISSIMILAR = 1
EXIT_ERROR = 2


def parse_thresholds(spec: str) -> list[float]:
    """Accept 't1..t2:step' ranges or comma-separated lists."""
    spec = spec.strip()
    if ".." in spec:
        range_part, _, step_part = spec.partition(":")
        if not step_part:
            raise ValueError("range form is t1..t2:step")
        start_s, _, end_s = range_part.partition("..")
        start, end, step = float(start_s), float(end_s), float(step_part)
        if step <= 0:
            raise ValueError("step must be > 0")
        values = []
        t = start
        while t <= end + 1e-9:
            values.append(round(t, 10))
            t += step
        return values
    return [float(tok) for tok in spec.split(",") if tok.strip()]


def _emit(args, payload: dict, human: str) -> None:
    if args.json:
        print(json.dumps(payload, indent=2))
    else:
        print(human)


def _make_method(args, seed=None):
    from .methods import make_method

    return make_method(args.method, threshold=getattr(args, "threshold", None),
                       checkpoint=getattr(args, "checkpoint", None), rng_seed=seed)


def cmd_ingest(args) -> int:
    from .ingest import ingest_corpus

    keywords = [k.strip() for k in args.keywords.split(",") if k.strip()]
    corpus = ingest_corpus(args.source, keywords, args.out, max_posts=args.max_posts)
    payload = {"corpus_id": corpus.corpus_id, "posts": len(corpus.posts),
               "images": len(corpus.images), "failures": len(corpus.failures),
               "out": str(args.out)}
    _emit(args, payload,
          f"corpus {corpus.corpus_id}: {len(corpus.posts)} posts, "
          f"{len(corpus.images)} images ({len(corpus.failures)} failed downloads) "
          f"-> {args.out}")
    return EXIT_OK


def cmd_compare(args) -> int:
    from .imagecore import load_image

    method = _make_method(args, seed=args.seed)
    img_a = load_image(args.a)
    img_b = load_image(args.b)
    t0 = time.perf_counter()
    verdict = method.compare(img_a, img_b)
    elapsed = time.perf_counter() - t0
    payload = {"method": verdict.method, "score": verdict.score,
               "threshold": verdict.threshold, "similar": verdict.similar,
               "degenerate": verdict.degenerate, "elapsed_s": round(elapsed, 6)}
    _emit(args, payload,
          f"{verdict.method}: score={verdict.score:.6g} threshold={verdict.threshold:g} "
          f"verdict={'similar' if verdict.similar else 'dissimilar'} "
          f"elapsed={elapsed:.3f}s")
    return EXIT_OK if verdict.similar else EXIT_DISSIMILAR


def cmd_search(args) -> int:
    from .ingest import load_corpus
    from .retrieval import search
    from .service import result_payload

    method = _make_method(args, seed=args.seed)
    corpus = load_corpus(args.corpus)
    result = search(method, args.query, corpus, threads=args.threads)
    payload = result_payload(result, corpus)
    Path(args.out).write_text(json.dumps(payload, indent=2))
    _emit(args, {"out": str(args.out), "retrieved": len(result.entries),
                 "corpus_size": result.corpus_size,
                 "reduction_pct": result.reduction_pct},
          f"retrieved {len(result.entries)} of {result.corpus_size} "
          f"(search space reduced {result.reduction_pct:.1f}%) -> {args.out}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    from .retrieval import evaluate_accuracy, load_annotated_set

    method = _make_method(args, seed=args.seed)
    annotated = load_annotated_set(args.set)
    accuracy = evaluate_accuracy(method, annotated, threshold=args.threshold)
    _emit(args, {"method": args.method, "threshold": method.threshold,
                 "accuracy": accuracy, "entries": len(annotated.entries)},
          f"accuracy {accuracy:.4f} over {len(annotated.entries)} entries")
    return EXIT_OK


def cmd_sweep(args) -> int:
    from .retrieval import load_annotated_set, threshold_sweep, variance_at, write_sweep_csv

    method = _make_method(args, seed=args.seed)
    thresholds = parse_thresholds(args.thresholds)
    curves = {}
    for set_path in args.sets.split(","):
        set_path = set_path.strip()
        annotated = load_annotated_set(set_path)
        curves[Path(set_path).stem] = threshold_sweep(method, annotated, thresholds)
    write_sweep_csv(curves, args.out)
    payload = {"out": str(args.out), "sets": sorted(curves), "thresholds": thresholds}
    human = f"swept {len(thresholds)} thresholds over {len(curves)} sets -> {args.out}"
    if args.variance_at:
        points = [float(p) for p in args.variance_at.split(",")]
        avg_var = variance_at(curves, points)
        payload["variance_points"] = points
        payload["average_variance"] = avg_var
        human += f"; average variance at {points} = {avg_var:.4g}"
    _emit(args, payload, human)
    return EXIT_OK


def cmd_augment(args) -> int:
    from .augment import generate_pairs

    pairs = generate_pairs(args.in_dir, args.out, args.pairs_per_image, args.seed)
    manifest = Path(args.out) / "manifest.ndjson"
    _emit(args, {"manifest": str(manifest), "pairs": len(pairs)},
          f"wrote {len(pairs)} labeled pairs -> {manifest}")
    return EXIT_OK


def cmd_train(args) -> int:
    import csv

    from .augment import read_manifest
    from .cnn import ModelConfig, PairSimilarityNet, TrainConfig, train

    pairs = read_manifest(args.manifest)
    model = PairSimilarityNet(ModelConfig(input_size=args.input_size), rng_seed=args.seed)
    cfg = TrainConfig(epochs=args.epochs, batch_size=args.batch_size,
                      learning_rate=args.lr, rng_seed=args.seed,
                      checkpoint_every=args.checkpoint_every)
    history, skipped = train(model, pairs, cfg, checkpoint_path=args.out,
                             verbose=not args.json)
    history_csv = Path(args.out).with_suffix(".history.csv")
    with open(history_csv, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["epoch", "loss", "accuracy"])
        writer.writeheader()
        writer.writerows(history)
    final = history[-1]
    _emit(args, {"checkpoint": str(args.out), "history_csv": str(history_csv),
                 "skipped_pairs": skipped, "final": final},
          f"trained {args.epochs} epochs (loss {final['loss']:.4f}, "
          f"accuracy {final['accuracy']:.3f}) -> {args.out}")
    return EXIT_OK


def cmd_serve(args) -> int:
    from .service import ServiceConfig, serve

    host, _, port = args.bind.partition(":")
    config = ServiceConfig(data_root=Path(args.data_root),
                           default_source=args.source,
                           default_method=args.method,
                           default_threshold=args.threshold,
                           checkpoint=args.checkpoint,
                           workers=args.workers,
                           threads=args.threads,
                           ui_dir=Path(args.ui) if args.ui else None)
    serve(config, host=host or "127.0.0.1", port=int(port or 8000))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="neardup",
                                     description="near-duplicate image retrieval toolkit")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--seed", type=int, default=0, help="seed for stochastic steps")
    common.add_argument("--threads", type=int, default=1,
                        help="worker threads for per-image comparisons")
    common.add_argument("--data-root",
                        default=os.environ.get("NEARDUP_DATA_ROOT", "neardup-data"),
                        help="data directory for the service")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[common], help="build a corpus from a feed")
    p.add_argument("--source", required=True, help="feed URL or NDJSON file")
    p.add_argument("--keywords", required=True, help="comma-separated keywords")
    p.add_argument("--out", required=True, help="corpus output directory")
    p.add_argument("--max-posts", type=int, default=500)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("compare", parents=[common], help="compare two images")
    p.add_argument("--method", required=True)
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--threshold", type=float)
    p.add_argument("--checkpoint", help="model checkpoint for method cnn")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("search", parents=[common], help="search a corpus for a query image")
    p.add_argument("--method", required=True)
    p.add_argument("--query", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--threshold", type=float)
    p.add_argument("--checkpoint")
    p.add_argument("--out", required=True, help="results JSON path")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("evaluate", parents=[common], help="accuracy on an annotated set")
    p.add_argument("--method", required=True)
    p.add_argument("--set", required=True, help="annotated CSV (query,path header)")
    p.add_argument("--threshold", type=float)
    p.add_argument("--checkpoint")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sweep", parents=[common], help="threshold sweep over annotated sets")
    p.add_argument("--method", required=True)
    p.add_argument("--sets", required=True, help="comma-separated annotated CSVs")
    p.add_argument("--thresholds", required=True, help="t1..t2:step or comma list")
    p.add_argument("--out", required=True, help="curve CSV path")
    p.add_argument("--variance-at", help="comma-separated threshold points")
    p.add_argument("--checkpoint")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("augment", parents=[common], help="generate labeled image pairs")
    p.add_argument("--in", dest="in_dir", required=True, help="source image directory")
    p.add_argument("--out", required=True)
    p.add_argument("--pairs-per-image", type=int, default=1)
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("train", parents=[common], help="train the similarity network")
    p.add_argument("--manifest", required=True)
    p.add_argument("--epochs", type=int, default=35)
    p.add_argument("--batch-size", type=int, default=16)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--input-size", type=int, default=128)
    p.add_argument("--checkpoint-every", type=int)
    p.add_argument("--out", required=True, help="checkpoint path (.npz)")
    p.set_defaults(func=cmd_train)

    # every serve flag falls back to a NEARDUP_* environment variable
    env = os.environ
    p = sub.add_parser("serve", parents=[common], help="run the HTTP job service")
    p.add_argument("--bind", default=env.get("NEARDUP_BIND", "127.0.0.1:8000"))
    p.add_argument("--source", default=env.get("NEARDUP_SOURCE"),
                   help="default feed source for jobs")
    p.add_argument("--method", default=env.get("NEARDUP_METHOD", "improved-orb"))
    p.add_argument("--threshold", type=float,
                   default=float(env["NEARDUP_THRESHOLD"]) if "NEARDUP_THRESHOLD" in env else None)
    p.add_argument("--checkpoint", default=env.get("NEARDUP_CHECKPOINT"))
    p.add_argument("--workers", type=int, default=int(env.get("NEARDUP_WORKERS", "1")))
    p.add_argument("--ui", default=env.get("NEARDUP_UI"),
                   help="directory with the built web UI (index.html + dist/)")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NeardupError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
