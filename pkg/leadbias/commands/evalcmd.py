from __future__ import annotations

import argparse
import logging
from pathlib import Path
from typing import Dict, List, Tuple

from . import Command, register
from .. import config as cfg
from ..core.corpus import KINDS, load_jsonl
from ..core.evalharness import (
    evaluate,
    partition_by_position,
    partition_scores,
    perturbation_matrix,
    report,
    significance_table,
)
from ..core.policy import load_params
from ..core.selectors import Selector, get_builtin, list_builtins, policy_selector
from ..core.storage import ManifestRecorder
from .traincmd import load_caches

log = logging.getLogger(__name__)


def parse_checkpoint_arg(raw: str) -> Tuple[str, str]:
    """NAME=PATH, or a bare PATH named after its file stem."""
    if "=" in raw:
        name, path = raw.split("=", 1)
        return name.strip(), path.strip()
    return Path(raw).stem, raw


@register("eval")
class EvalCommand(Command):
    help = "Evaluate checkpoints and built-in selectors; write the JSON report."

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--test", required=True, help="Test corpus JSONL")
        parser.add_argument("--cache", nargs="+", default=[], help="Oracle cache(s) for the test corpus")
        parser.add_argument("--checkpoint", action="append", default=[], metavar="NAME=PATH",
                            help="Trained checkpoint (repeatable)")
        parser.add_argument("--builtin", action="append", choices=list_builtins(), default=None,
                            help="Built-in selector (repeatable; default: all)")
        parser.add_argument("--report", required=True, help="Report JSON to write")
        parser.add_argument("--matrix", action="store_true",
                            help=f"Perturbation matrix; needs checkpoints named {', '.join(KINDS)}")
        parser.add_argument("--partitions", type=int, default=None, metavar="K",
                            help="Score the early/med/late position partitions of size K")
        parser.add_argument("--significance-vs", default=None, metavar="NAME",
                            help="Bootstrap every system against NAME (default: first checkpoint)")
        parser.add_argument("--iterations", type=int, default=cfg.BOOTSTRAP_ITERATIONS)
        parser.add_argument("--seed", type=int, default=0)

    def run(self, args: argparse.Namespace) -> int:
        rec = ManifestRecorder("eval", {
            "matrix": args.matrix, "partitions": args.partitions, "seed": args.seed,
            "iterations": args.iterations, "significance_vs": args.significance_vs,
        })
        corpus = load_jsonl(args.test)
        rec.add_input(args.test)
        cache = load_caches(args.cache)
        for p in args.cache:
            rec.add_input(p)

        # systems: builtins first, then checkpoints in flag order
        selectors: Dict[str, Selector] = {}
        for name in (args.builtin or list(list_builtins())):
            selectors[name] = get_builtin(name, cache=cache)
        checkpoint_names: List[str] = []
        trained: Dict[str, Selector] = {}
        for raw in args.checkpoint:
            name, path = parse_checkpoint_arg(raw)
            params, _ = load_params(path)
            rec.add_input(path)
            trained[name] = policy_selector(params)
            checkpoint_names.append(name)
        selectors.update(trained)

        reports = {name: evaluate(sel, corpus) for name, sel in selectors.items()}
        for name, r in reports.items():
            log.info(f"[eval] {name}: R1={r.rouge1_f1:.4f} R2={r.rouge2_f1:.4f} RL={r.rougeL_f1:.4f} "
                     f"avg={r.avg_rouge:.4f} overlap={r.lead_overlap_pct:.1f}%")

        matrix = None
        if args.matrix:
            missing = [k for k in KINDS if k not in trained]
            if missing:
                raise ValueError(f"--matrix needs checkpoints named {', '.join(missing)}")
            matrix = perturbation_matrix(lambda kind: trained[kind], corpus, args.seed,
                                         baselines={"lead3": get_builtin("lead3")})

        partitions = None
        if args.partitions is not None:
            part = partition_by_position(corpus, cache, args.partitions)
            partitions = partition_scores(selectors, corpus, part)

        significance = {}
        baseline = args.significance_vs or (checkpoint_names[0] if checkpoint_names else None)
        if baseline is not None and len(reports) > 1 and len(corpus) >= 2:
            significance = {
                "baseline": baseline,
                "iterations": args.iterations,
                "p_values": significance_table(reports, baseline, args.iterations, args.seed),
            }

        report(args.report, reports, matrix, partitions, significance)
        rec.add_output(args.report)
        rec.write(args.report)
        return 0
