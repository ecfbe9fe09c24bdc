"""Command line entry point: transitgap <command> --config <path>."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .config import PipelineConfig
from .errors import TransitGapError
from .pipeline import (
    cmd_evaluate,
    cmd_gaps,
    cmd_ingest,
    cmd_serve,
    cmd_significance,
    cmd_train,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="transitgap",
        description="Transit supply/demand analytics pipeline and scenario service",
    )
    parser.add_argument("--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="path to the pipeline config JSON")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--out", default=None, help="override the output directory")
        return p

    common(sub.add_parser("ingest", help="load sources and persist design matrices"))
    train = common(sub.add_parser("train", help="train configured models"))
    train.add_argument(
        "--which",
        choices=["temporal_supply", "temporal_demand", "spatial_supply", "spatial_demand"],
        default=None,
        help="train a single model slot instead of the configured jobs",
    )
    train.add_argument(
        "--kind",
        choices=["linear", "polynomial", "random_forest", "neural_net"],
        default=None,
        help="model kind for --which (default: neural_net)",
    )
    common(sub.add_parser("evaluate", help="compare all model kinds on every dataset"))
    sig = common(sub.add_parser("significance", help="averaged input-gradient significance"))
    sig.add_argument(
        "--model",
        choices=["temporal_demand", "spatial_demand"],
        default="temporal_demand",
    )
    common(sub.add_parser("gaps", help="score service gaps and export GeoJSON"))
    serve = common(sub.add_parser("serve", help="run the scenario REST service"))
    serve.add_argument("--bind", default="127.0.0.1:8000", help="host:port to listen on")
    serve.add_argument("--ui", default=None, metavar="DIR",
                       help="also serve a built dashboard directory at /ui")
    return parser


def load_config(args) -> PipelineConfig:
    config = PipelineConfig.from_json(args.config)
    if args.seed is not None:
        config.seed = args.seed
    if args.out is not None:
        config.out_dir = args.out
    return config


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        config = load_config(args)
        if args.command == "ingest":
            manifest = cmd_ingest(config)
            print(f"ingested; {len(manifest.artifacts)} artifacts in {config.out_dir}")
        elif args.command == "train":
            manifest = cmd_train(config, which=args.which, kind=args.kind)
            for name, metric in sorted(manifest.metrics.get("train", {}).items()):
                print(f"{name}: rmse={metric['rmse']:.4f} rrmse={metric['relative_rmse']:.4f}")
        elif args.command == "evaluate":
            report = cmd_evaluate(config)
            print(json.dumps(report, sort_keys=True, indent=2))
        elif args.command == "significance":
            report = cmd_significance(config, model=args.model)
            for name in report.ranking():
                i = report.feature_names.index(name)
                print(f"{name}: significance={report.mean_abs_gradient[i]:.4f} "
                      f"direction={report.mean_signed_gradient[i]:+.4f}")
        elif args.command == "gaps":
            report = cmd_gaps(config)
            for entry in report.stops:
                ratio = "inf" if entry.gap_ratio_infinite else f"{entry.gap_ratio:.1f}"
                print(f"{entry.stop_id}: ratio={ratio} {entry.classification}")
            print(f"unserviced blocks: {list(report.unserviced_block_ids)}")
        elif args.command == "serve":
            cmd_serve(config, bind=args.bind, ui_dir=args.ui)
    except TransitGapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
