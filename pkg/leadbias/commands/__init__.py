from __future__ import annotations
import argparse
from typing import Callable, Dict, Optional, Type

# ---- registry ----
_REGISTRY: Dict[str, "Type[Command]"] = {}


def register(name: str) -> Callable[[Type["Command"]], Type["Command"]]:
    key = name.lower().strip()

    def _wrap(cls: Type["Command"]) -> Type["Command"]:
        cls.name = key
        _REGISTRY[key] = cls
        return cls
    return _wrap


def get_command_cls(name: str) -> Optional["Type[Command]"]:
    return _REGISTRY.get((name or "").lower().strip())


def list_registered() -> Dict[str, "Type[Command]"]:
    return dict(_REGISTRY)


# ---- exported base ----
class Command:
    """
    A CLI subcommand. Subclasses declare their flags and do the work in
    `run`, returning the process exit code. Errors propagate to the CLI.
    """
    name: str = "command"
    help: str = ""

    def add_arguments(self, parser: argparse.ArgumentParser) -> None: ...

    def run(self, args: argparse.Namespace) -> int:
        raise NotImplementedError
