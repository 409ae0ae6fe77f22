from __future__ import annotations
import os
from pathlib import Path

# -------------------------------------------------------------------
# Paths
# -------------------------------------------------------------------

# Base directory = repository root (where README, requirements.txt live)
BASE_DIR = Path(__file__).resolve().parents[1]  # ascend from leadbias/ to root
DATA_DIR = Path(__file__).resolve().parent / "data"
DEFAULT_TRAINER_CONFIG = DATA_DIR / "trainer_default.cfg"


def _env_bool(name: str, default: bool) -> bool:
    raw = os.getenv(name)
    if raw is None:
        return default
    return raw.strip().lower() not in ("0", "false", "no", "off", "")


# -------------------------------------------------------------------
# Runtime knobs (env overridable)
# -------------------------------------------------------------------
LOG_LEVEL = os.getenv("LEADBIAS_LOG_LEVEL", "INFO").upper()
WORKERS = max(1, int(os.getenv("LEADBIAS_WORKERS", "1") or 1))
PROGRESS = _env_bool("LEADBIAS_PROGRESS", True)

# -------------------------------------------------------------------
# Corpus / summary shape
# -------------------------------------------------------------------
MAX_SENTENCES = 100       # only the first 100 sentences of an article are considered
SUMMARY_SIZE = 3          # triplets everywhere
LEAD_SIZE = 3             # "lead-3"
SPLITS = ("train", "dev", "test")

# -------------------------------------------------------------------
# Policy
# -------------------------------------------------------------------
FEATURE_DIM = 8
FEATURE_VERSION = 1
LENGTH_NORM = 40.0        # sentence length feature divisor

# -------------------------------------------------------------------
# Trainer defaults
# -------------------------------------------------------------------
DEFAULT_ALPHA = 1e-4
DEFAULT_BETA = 0.0095
DEFAULT_EPOCHS = 4
DEFAULT_PRETRAIN_EPOCHS = 2
DEFAULT_SAMPLES_PER_DOC = 20
DEFAULT_REGIME = "base"
DEFAULT_SEED = 0

# -------------------------------------------------------------------
# Evaluation defaults
# -------------------------------------------------------------------
BOOTSTRAP_ITERATIONS = 10_000
PARTITION_K = 100
REPORT_DECIMALS = 4
