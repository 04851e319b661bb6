"""Command-line entry point: ``partbench <stage> --config <path>``."""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys

from . import pipeline
from .errors import ConfigError, PartbenchError, StageError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_STAGE = 3


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="partbench", description="Part-level 3D benchmark pipeline")
    p.add_argument("stage", choices=pipeline.STAGES)
    p.add_argument("--config", required=True, help="pipeline config JSON")
    p.add_argument("--seed", type=int, default=None, help="override the dataset seed")
    p.add_argument("--completer", default=None, help="oracle, passthrough or symmetry")
    p.add_argument("--mode", choices=("auto", "seeded"), default="auto", help="segment stage mode")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = pipeline.PipelineConfig.load(args.config)
        if args.seed is not None:
            cfg = dataclasses.replace(cfg, seeds={**cfg.seeds, "dataset": args.seed})
        if args.completer is not None:
            cfg = dataclasses.replace(cfg, completer=args.completer)
    except ConfigError as exc:
        print(f"partbench: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        result = _dispatch(cfg, args)
    except ConfigError as exc:
        print(f"partbench: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except StageError as exc:
        print(f"partbench: stage {exc.stage} failed: {exc}", file=sys.stderr)
        return EXIT_STAGE
    except (PartbenchError, OSError, ValueError) as exc:
        print(f"partbench: stage {args.stage} failed: {exc}", file=sys.stderr)
        return EXIT_STAGE
    if isinstance(result, dict):
        print(json.dumps(result, indent=1, sort_keys=True))
    return EXIT_OK


def _dispatch(cfg, args):
    stage = args.stage
    if stage == "gen":
        return pipeline.cmd_gen(cfg)
    if stage == "render":
        return pipeline.cmd_render(cfg)
    if stage == "segment":
        return pipeline.cmd_segment(cfg, args.mode)
    if stage == "eval":
        return pipeline.cmd_eval(cfg)
    if stage == "complete":
        return pipeline.cmd_complete(cfg, args.completer)
    if stage == "carve":
        return pipeline.cmd_carve(cfg)
    if stage == "compose":
        return pipeline.cmd_compose(cfg)
    return pipeline.cmd_all(cfg, args.completer)


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
