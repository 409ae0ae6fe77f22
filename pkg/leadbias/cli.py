# leadbias/cli.py
from __future__ import annotations

import argparse
import importlib
import logging
import sys
from typing import List, Optional

from dotenv import load_dotenv

from . import config as cfg
from .commands import get_command_cls, list_registered

load_dotenv()

log = logging.getLogger("leadbias")

# List of command modules to load
COMMAND_MODULES = [
    "leadbias.commands.generatecmd",
    "leadbias.commands.perturbcmd",
    "leadbias.commands.precomputecmd",
    "leadbias.commands.traincmd",
    "leadbias.commands.evalcmd",
]


def _setup_logging() -> None:
    logging.basicConfig(
        level=getattr(logging, cfg.LOG_LEVEL, logging.INFO),
        format="[%(levelname)s] %(name)s: %(message)s",
        stream=sys.stdout,
    )


def build_parser() -> argparse.ArgumentParser:
    for mod in COMMAND_MODULES:
        importlib.import_module(mod)

    parser = argparse.ArgumentParser(
        prog="leadbias",
        description="Diagnose and counter lead bias in extractive summarization.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="{perturb,precompute,train,eval,generate}")
    for name, cls in list_registered().items():
        p = sub.add_parser(name, help=cls.help, description=cls.help)
        cls().add_arguments(p)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # usage errors exit 2
    _setup_logging()

    command = get_command_cls(args.command)()
    try:
        return command.run(args)
    except (ValueError, KeyError, OSError) as e:
        log.error(f"[cli] {args.command} failed: {e}")
        return 1
    except Exception:
        log.exception(f"[cli] {args.command} crashed")
        return 1


if __name__ == "__main__":
    sys.exit(main())
