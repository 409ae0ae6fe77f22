from __future__ import annotations

import argparse
import logging

from . import Command, register
from ..core.corpus import save_jsonl
from ..core.storage import ManifestRecorder
from ..core.synth import generate_corpus
from .. import config as cfg

log = logging.getLogger(__name__)


@register("generate")
class GenerateCommand(Command):
    help = "Generate a synthetic lead-biased corpus."

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--out", required=True, help="Output corpus JSONL")
        parser.add_argument("--docs", type=int, default=500, help="Number of documents")
        parser.add_argument("--sentences", type=int, default=15, help="Sentences per document")
        parser.add_argument("--lead-prob", type=float, default=0.7, help="Probability the salient sentences are the lead")
        parser.add_argument("--split", default="train", choices=cfg.SPLITS)
        parser.add_argument("--seed", type=int, default=0)

    def run(self, args: argparse.Namespace) -> int:
        conf = {"docs": args.docs, "sentences": args.sentences, "lead_prob": args.lead_prob,
                "split": args.split, "seed": args.seed}
        rec = ManifestRecorder("generate", conf)
        corpus = generate_corpus(args.docs, args.sentences, args.lead_prob, args.seed, args.split)
        save_jsonl(corpus, args.out)
        rec.add_output(args.out)
        rec.write(args.out)
        return 0
