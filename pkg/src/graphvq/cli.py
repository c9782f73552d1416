"""
gvq - command-line entry point.

    gvq gen-train    synthetic training descriptors
    gvq build-vocab  k-means vocabulary with its embedded k-NN graph
    gvq gen-seq      synthetic frame sequence
    gvq quantize     per-image bag-of-words with any search method
    gvq calibrate    carry noise for a target shared-word fraction
    gvq bench        run an experiment
    gvq sweep        run an experiment over its parameter grids
    gvq report       render a saved report
    gvq configs      list experiment configurations
    gvq serve        run the retrieval service
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from graphvq import __version__
from graphvq.core.config import settings
from graphvq.core.bench import (
    calibrate_sigma,
    frontier_csv,
    load_report,
    render_table,
    run_experiment,
    write_report,
)
from graphvq.core.bow import quantize_image
from graphvq.core.config_loader import ConfigNotFoundError, list_available_configs, load_config
from graphvq.core.errors import GraphVQError
from graphvq.core.indexes import IndexFactory
from graphvq.core.sequence import SequenceDataset, generate, propagate_hints, synthetic_descriptors
from graphvq.core.vectors import Rng, VectorStore
from graphvq.core.vocabulary import build_vocabulary, load_vocabulary, save_vocabulary
from graphvq.models.build_config import KMeansConfig, SequenceConfig, TrainingSetConfig
from graphvq.models.experiment import ExperimentOverrides
from graphvq.models.search_params import METHOD_SPECS

logger = logging.getLogger("graphvq.cli")


def _method_spec(args: argparse.Namespace):
    """Method spec from the --method flag and whichever parameter flags apply to it"""
    spec_type = METHOD_SPECS[args.method]
    data: Dict[str, Any] = {}
    for name in spec_type.model_fields:
        value = getattr(args, name, None)
        if name != "method" and value is not None:
            data[name] = value
    return spec_type(**data)


# --- Commands --------------------------------------------------------------


def cmd_gen_train(args: argparse.Namespace) -> int:
    cfg = TrainingSetConfig(
        count=args.count,
        dim=args.dim,
        clusters=args.clusters,
        intrinsic_dim=args.intrinsic_dim,
        cluster_spread=args.cluster_spread,
        seed=args.seed,
    )
    synthetic_descriptors(cfg).save(args.out)
    return 0


def cmd_build_vocab(args: argparse.Namespace) -> int:
    train = VectorStore.load(args.train)
    cfg = KMeansConfig(C=args.clusters, max_iters=args.max_iters, tol=args.tol, seed=args.seed)
    vocab = build_vocabulary(train, cfg, args.graph_k, threads=args.threads)
    save_vocabulary(vocab, args.out)
    stats = vocab.stats
    print(
        json.dumps(
            {
                "words": vocab.size,
                "graph_k": vocab.graph.k,
                "objective": vocab.meta.objective,
                "kmeans_iterations": stats.kmeans_iterations,
                "final_assignment_evals": stats.final_assignment_evals,
                "centroid_distance_evals": stats.centroid_distance_evals,
            },
            sort_keys=True,
        )
    )
    return 0


def cmd_gen_seq(args: argparse.Namespace) -> int:
    vocab = load_vocabulary(args.vocab) if args.vocab else None
    cfg = SequenceConfig(
        num_frames=args.frames,
        features_per_frame=args.size,
        size_spread=args.size_spread,
        overlap=args.overlap,
        carry_noise_sigma=args.sigma,
        anchored_fraction=args.anchored_fraction,
        dim=vocab.words.dim if vocab else args.dim,
        seed=args.seed,
    )
    generate(cfg, vocab).save(args.out)
    return 0


def cmd_quantize(args: argparse.Namespace) -> int:
    vocab = load_vocabulary(args.vocab)
    spec = _method_spec(args)
    index = IndexFactory.create_index(spec, vocab, seed=args.seed)

    features = Path(args.features)
    if features.is_dir():
        dataset = SequenceDataset.load(features)
        frames = dataset.frames
        links = dataset.links(args.hints, ratio=args.ratio) if args.hints != "none" else None
    else:
        frames = [VectorStore.load(features).data64]
        links = None

    root = Rng(args.seed)
    out_path = Path(args.out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    total_evals = 0
    total_features = 0
    prev_words: Optional[np.ndarray] = None
    with open(out_path, "w") as fh:
        for t, frame in enumerate(frames):
            hints = None
            if index.supports_hints and links is not None and prev_words is not None:
                hints = propagate_hints(links[t], prev_words, frame.shape[0])
            tf, results = quantize_image(index, frame, hints=hints, rng=root.child(t))
            prev_words = np.asarray([r.word_id for r in results], dtype=np.int64)
            evals = sum(r.dist_evals for r in results)
            total_evals += evals
            total_features += len(results)
            record = {
                "image_id": t,
                "words": tf.items(),
                "evals_total": evals,
                "evals_per_feature": evals / len(results) if results else 0.0,
            }
            fh.write(json.dumps(record) + "\n")

    logger.info(
        f"Quantized {total_features} features in {len(frames)} image(s) with {spec.method}: "
        f"{total_evals / max(total_features, 1):.2f} evaluations per feature"
    )
    return 0


def cmd_calibrate(args: argparse.Namespace) -> int:
    vocab = load_vocabulary(args.vocab)
    sequence = SequenceConfig(
        num_frames=1,
        anchored_fraction=args.anchored_fraction,
        dim=vocab.words.dim,
    )
    result = calibrate_sigma(
        vocab,
        target=args.target,
        sigmas=args.sigmas,
        samples=args.samples,
        iterations=args.iterations,
        sequence=sequence,
        seed=args.seed,
    )
    print(json.dumps({"sigma": result.sigma, "shared_fraction": result.shared_fraction}))
    return 0


def _load_experiment(args: argparse.Namespace):
    cfg = load_config(args.config)
    overrides = ExperimentOverrides(
        vocab_path=args.vocab,
        dataset_path=args.dataset,
        seeds=args.seeds,
        hint_source=args.hints,
        output_path=args.out,
    )
    return overrides.apply(cfg)


def _run(args: argparse.Namespace, include_sweep: bool) -> int:
    cfg = _load_experiment(args)
    report = run_experiment(cfg, include_sweep=include_sweep)
    out = cfg.output_path or Path(f"{cfg.id}-report.json")
    write_report(report, out)
    if include_sweep and args.csv:
        Path(args.csv).write_text(frontier_csv(report.frontier))
        logger.info(f"Wrote frontier to {args.csv}")
    sys.stdout.write(render_table(report))
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    return _run(args, include_sweep=False)


def cmd_sweep(args: argparse.Namespace) -> int:
    return _run(args, include_sweep=True)


def cmd_report(args: argparse.Namespace) -> int:
    report = load_report(args.report)
    if args.csv:
        Path(args.csv).write_text(frontier_csv(report.frontier))
    sys.stdout.write(render_table(report))
    return 0


def cmd_configs(args: argparse.Namespace) -> int:
    for cfg in list_available_configs():
        print(f"{cfg.id:<20} {cfg.name}")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    if args.vocab:
        settings.vocab_path = Path(args.vocab)
    uvicorn.run(
        "graphvq.api.main:app",
        host=args.host or settings.api_host,
        port=args.port or settings.api_port,
    )
    return 0


# --- Parser ----------------------------------------------------------------


def _add_method_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--method", choices=["gnns", "sgnns", "kd", "hkm", "linear"], default="gnns")
    p.add_argument("--E", type=int, help="graph expansions per step")
    p.add_argument("--R", type=int, help="random restarts")
    p.add_argument("--T", type=int, help="greedy steps (default: stop at a local minimum)")
    p.add_argument("--trees", type=int, help="KD trees")
    p.add_argument("--checks", type=int, help="leaf points evaluated (KD/HKM)")
    p.add_argument("--branching", type=int, help="HKM branching factor")
    p.add_argument("--iterations", type=int, help="HKM k-means iterations per split")


def _add_experiment_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", required=True, help="config id or YAML path")
    p.add_argument("--vocab", type=Path, help="vocabulary file (overrides the config)")
    p.add_argument("--dataset", type=Path, help="dataset directory (overrides the config)")
    p.add_argument("--seeds", type=int, nargs="+", help="seeds (override the config)")
    p.add_argument("--hints", choices=["none", "truth", "ratio"], help="hint source")
    p.add_argument("--out", type=Path, help="report JSON path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gvq", description="Graph-based vector quantization for visual place recognition"
    )
    parser.add_argument("--version", action="version", version=f"gvq {__version__}")
    parser.add_argument("--log-level", default=None, help="override GVQ_LOG_LEVEL")
    parser.add_argument("--threads", type=int, default=None, help="override GVQ_THREADS")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-train", help="generate synthetic training descriptors")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--dim", type=int, default=128)
    p.add_argument("--clusters", type=int, default=64, help="latent mixture components")
    p.add_argument("--intrinsic-dim", type=int, default=12)
    p.add_argument("--cluster-spread", type=float, default=1.0, help="component std-dev")
    p.add_argument("--seed", type=int, default=settings.default_seed)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_gen_train)

    p = sub.add_parser("build-vocab", help="train a vocabulary and its k-NN graph")
    p.add_argument("--train", type=Path, required=True, help="training vectors (.gvq)")
    p.add_argument("--clusters", "-C", type=int, required=True)
    p.add_argument("--graph-k", "-k", type=int, required=True)
    p.add_argument("--max-iters", type=int, default=100)
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--seed", type=int, default=settings.default_seed)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_build_vocab)

    p = sub.add_parser("gen-seq", help="generate a synthetic frame sequence")
    p.add_argument("--frames", type=int, required=True)
    p.add_argument("--size", type=int, default=316, help="mean features per frame")
    p.add_argument("--size-spread", type=float, default=0.0)
    p.add_argument("--overlap", type=float, default=0.13)
    p.add_argument("--sigma", type=float, default=0.0, help="carry noise per component")
    p.add_argument("--anchored-fraction", type=float, default=0.7)
    p.add_argument("--vocab", type=Path, help="anchor fresh features near these words")
    p.add_argument("--dim", type=int, default=128, help="dimension when no vocabulary is given")
    p.add_argument("--seed", type=int, default=settings.default_seed)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_gen_seq)

    p = sub.add_parser("quantize", help="quantize images into bag-of-words records")
    p.add_argument("--vocab", type=Path, required=True)
    p.add_argument("--features", type=Path, required=True, help="dataset dir or .gvq file")
    _add_method_args(p)
    p.add_argument("--hints", choices=["none", "truth", "ratio"], default="truth")
    p.add_argument("--ratio", type=float, default=0.8)
    p.add_argument("--seed", type=int, default=settings.default_seed)
    p.add_argument("--out", type=Path, required=True, help="JSON lines output")
    p.set_defaults(func=cmd_quantize)

    p = sub.add_parser("calibrate", help="find the carry noise for a shared-word fraction")
    p.add_argument("--vocab", type=Path, required=True)
    p.add_argument("--target", type=float, default=0.64)
    p.add_argument("--sigmas", type=float, nargs="+", help="grid to pick from (default: bisection)")
    p.add_argument("--samples", type=int, default=4000)
    p.add_argument("--iterations", type=int, default=24)
    p.add_argument("--anchored-fraction", type=float, default=0.7)
    p.add_argument("--seed", type=int, default=settings.default_seed)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("bench", help="run an experiment")
    _add_experiment_args(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("sweep", help="run an experiment over its parameter grids")
    _add_experiment_args(p)
    p.add_argument("--csv", type=Path, help="write the frontier as CSV")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("report", help="render a saved report")
    p.add_argument("report", type=Path)
    p.add_argument("--csv", type=Path, help="write the frontier as CSV")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("configs", help="list experiment configurations")
    p.set_defaults(func=cmd_configs)

    p = sub.add_parser("serve", help="run the retrieval service")
    p.add_argument("--vocab", type=Path)
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    level = (args.log_level or settings.log_level).upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.INFO),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )
    if args.threads is not None:
        if args.threads < 1:
            parser.error("--threads must be >= 1")
        settings.threads = args.threads

    try:
        return args.func(args)
    except (GraphVQError, ConfigNotFoundError, ValueError, FileNotFoundError) as e:
        print(f"gvq {args.command}: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
