# leadbias/core/storage.py
from __future__ import annotations

import hashlib
import json
import os
import tempfile
import time
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Any, Dict, Iterable, List
import logging

log = logging.getLogger(__name__)

# -------------------------------------------------------------------
# Atomic writers
# -------------------------------------------------------------------
def atomic_write_text(path: str | Path, text: str) -> None:
    path = str(path)
    dirpath = os.path.dirname(os.path.abspath(path)) or "."
    os.makedirs(dirpath, exist_ok=True)

    fd, tmp_path = tempfile.mkstemp(prefix=os.path.basename(path) + ".", dir=dirpath)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp_path, path)
    except Exception:
        try:
            if os.path.exists(tmp_path):
                os.remove(tmp_path)
        except OSError:
            pass
        raise


def write_json(path: str | Path, data: Any, *, sort_keys: bool = False) -> None:
    text = json.dumps(data, ensure_ascii=False, indent=2, sort_keys=sort_keys) + "\n"
    atomic_write_text(path, text)


def read_json(path: str | Path) -> Any:
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def write_lines(path: str | Path, lines: Iterable[str]) -> int:
    """Write already-serialized lines; returns the line count."""
    buf: List[str] = []
    for line in lines:
        buf.append(line)
    atomic_write_text(path, "".join(l + "\n" for l in buf))
    return len(buf)


# -------------------------------------------------------------------
# Helpers
# -------------------------------------------------------------------
def fmt_float(x: float) -> str:
    """17 significant digits: exact float round-trip, stable across runs."""
    return format(float(x), ".17g")


def file_sha256(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


# -------------------------------------------------------------------
# Run manifest
# -------------------------------------------------------------------
@dataclass
class RunManifest:
    command: str
    config: Dict[str, Any] = field(default_factory=dict)
    inputs: Dict[str, str] = field(default_factory=dict)   # path -> sha256
    outputs: List[str] = field(default_factory=list)
    wall_time_s: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)


class ManifestRecorder:
    """Collects what a command read and wrote, then writes one manifest."""

    def __init__(self, command: str, config: Dict[str, Any] | None = None):
        self.manifest = RunManifest(command=command, config=dict(config or {}))
        self._t0 = time.perf_counter()

    def add_input(self, path: str | Path) -> None:
        self.manifest.inputs[str(path)] = file_sha256(path)

    def add_output(self, path: str | Path) -> None:
        self.manifest.outputs.append(str(path))

    def write(self, primary_output: str | Path) -> Path:
        self.manifest.wall_time_s = round(time.perf_counter() - self._t0, 3)
        out = manifest_path_for(primary_output)
        write_json(out, self.manifest.to_dict(), sort_keys=True)
        log.info(f"[storage] Manifest written: {out}")
        return out


def manifest_path_for(output: str | Path) -> Path:
    p = Path(output)
    return p.with_name(p.name + ".manifest.json")
