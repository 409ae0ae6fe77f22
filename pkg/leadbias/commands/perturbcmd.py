from __future__ import annotations

import argparse
import logging
from pathlib import Path

from . import Command, register
from ..core.corpus import KINDS, Perturbation, load_jsonl, perturb_corpus, perturbed_filename, save_jsonl
from ..core.storage import ManifestRecorder

log = logging.getLogger(__name__)


def resolve_output(out: str, split: str, kind: str, seed: int) -> Path:
    """A directory (existing, or spelled with a trailing slash) gets the <split>.<kind>.<seed>.jsonl name."""
    p = Path(out)
    if p.is_dir() or out.endswith(("/", "\\")):
        return p / perturbed_filename(split, kind, seed)
    return p


@register("perturb")
class PerturbCommand(Command):
    help = "Write a sentence-position perturbation of a corpus."

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--in", dest="inp", required=True, help="Input corpus JSONL")
        parser.add_argument("--kind", required=True, choices=KINDS, help="Perturbation kind")
        parser.add_argument("--seed", type=int, default=0, help="Random seed (u64)")
        parser.add_argument("--out", required=True, help="Output JSONL file, or a directory")

    def run(self, args: argparse.Namespace) -> int:
        rec = ManifestRecorder("perturb", {"kind": args.kind, "seed": args.seed})
        corpus = load_jsonl(args.inp)
        rec.add_input(args.inp)
        out = resolve_output(args.out, corpus.split_name, args.kind, args.seed)

        perturbed = perturb_corpus(corpus, Perturbation(args.kind, args.seed))
        save_jsonl(perturbed, out)
        rec.add_output(out)
        rec.write(out)
        log.info(f"[cli] perturb {args.kind}: {len(perturbed)} documents -> {out}")
        return 0
