from __future__ import annotations

import argparse
import logging
from dataclasses import replace
from pathlib import Path
from typing import Dict

from . import Command, register
from .. import config as cfg
from ..core.corpus import load_jsonl
from ..core.oracle import OracleRecord, load_cache
from ..core.storage import ManifestRecorder
from ..core.trainer import emit_curve, load_config, save_checkpoint, train

log = logging.getLogger(__name__)


def curve_path_for(checkpoint: str | Path) -> Path:
    p = Path(checkpoint)
    return p.with_name(p.stem + ".curve.csv")


def load_caches(paths) -> Dict[str, OracleRecord]:
    merged: Dict[str, OracleRecord] = {}
    for p in paths:
        merged.update(load_cache(p))
    return merged


@register("train")
class TrainCommand(Command):
    help = "Train the affinity scorer with policy gradient."

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--train", required=True, help="Training corpus JSONL")
        parser.add_argument("--dev", required=True, help="Dev corpus JSONL (per-epoch curve)")
        parser.add_argument("--cache", required=True, nargs="+", help="Oracle cache(s) covering the training corpus")
        parser.add_argument("--config", default=str(cfg.DEFAULT_TRAINER_CONFIG), help="Trainer config (key = value)")
        parser.add_argument("--seed", type=int, default=None, help="Overrides the config seed")
        parser.add_argument("--out", required=True, help="Checkpoint JSON to write")

    def run(self, args: argparse.Namespace) -> int:
        conf = load_config(args.config)
        if args.seed is not None:
            conf = replace(conf, seed=args.seed)

        rec = ManifestRecorder("train", conf.to_dict())
        corpus_train = load_jsonl(args.train, "train")
        corpus_dev = load_jsonl(args.dev, "dev")
        cache = load_caches(args.cache)
        for p in (args.train, args.dev, args.config, *args.cache):
            rec.add_input(p)

        state = train(corpus_train, corpus_dev, cache, conf)

        save_checkpoint(state, args.out)
        curve = curve_path_for(args.out)
        emit_curve(state, curve)
        rec.add_output(args.out)
        rec.add_output(curve)
        rec.manifest.config["data_sources"] = list(state.sources)
        rec.write(args.out)
        return 0
