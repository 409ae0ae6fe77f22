from __future__ import annotations

import argparse
import logging

from . import Command, register
from ..core.corpus import load_jsonl
from ..core.oracle import precompute_cache
from ..core.storage import ManifestRecorder

log = logging.getLogger(__name__)


@register("precompute")
class PrecomputeCommand(Command):
    help = "Compute per-sentence ROUGE scores and oracle triplets into a cache."

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--in", dest="inp", required=True, help="Input corpus JSONL")
        parser.add_argument("--out", required=True, help="Cache JSONL to write")

    def run(self, args: argparse.Namespace) -> int:
        rec = ManifestRecorder("precompute")
        corpus = load_jsonl(args.inp)
        rec.add_input(args.inp)
        records = precompute_cache(corpus, args.out)
        rec.add_output(args.out)
        rec.write(args.out)
        if records:
            mean_best = sum(r.best_score for r in records) / len(records)
            log.info(f"[cli] precompute: {len(records)} records, mean oracle AvgRouge={mean_best:.4f}")
        return 0
