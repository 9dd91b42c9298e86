"""
Shared Utilities for the partition L-infinity toolkit.
Provides logging, configuration, and small file helpers used by every module.
"""

import os
import sys
import json
import logging
from pathlib import Path
from typing import Any, Dict
from dotenv import load_dotenv

# Load environment variables
load_dotenv()

# ========================= CONFIGURATION =========================

PROJECT_ROOT = Path(__file__).parent
CORPUS_PATH = PROJECT_ROOT / "corpus"

DEFAULT_P = int(os.getenv("PLINF_P", "2"))
DEFAULT_W = int(os.getenv("PLINF_W", "2"))
DEFAULT_MAX_LEAVES = int(os.getenv("PLINF_MAX_LEAVES", "3"))
DEFAULT_CAP = int(os.getenv("PLINF_CAP", str(2 ** 20)))
DEFAULT_SEED = int(os.getenv("PLINF_SEED", "0"))
# 'full' inserts at spots 0..r+1, 'displayed' at spots 0..r
INSERTION_RANGE = os.getenv("PLINF_INSERTION_RANGE", "full").lower()
LOG_LEVEL = getattr(logging, os.getenv("PLINF_LOG_LEVEL", "INFO").upper(), logging.INFO)

REPORT_SCHEMA = "partition-linf/report@1"
ALGEBRA_SCHEMA = "partition-linf/algebra@1"

# ========================= LOGGING =========================

def setup_logging(name: str, level: int = LOG_LEVEL) -> logging.Logger:
    """
    Configure logging for a module.
    """
    logger = logging.getLogger(name)
    logger.setLevel(level)

    if not logger.handlers:
        console_handler = logging.StreamHandler(sys.stdout)
        console_handler.setLevel(level)

        formatter = logging.Formatter(
            '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
            datefmt='%Y-%m-%d %H:%M:%S'
        )
        console_handler.setFormatter(formatter)
        logger.addHandler(console_handler)

    return logger

logger = setup_logging(__name__)

# ========================= PATHS & FILES =========================

def get_project_root() -> Path:
    """Returns the project root directory."""
    return PROJECT_ROOT

def get_insertion_range() -> str:
    """
    Returns the configured insertion range for the Barratt-Eccles dual differential.

    Raises:
        ValueError: If the environment holds an unknown mode.
    """
    if INSERTION_RANGE not in ("full", "displayed"):
        logger.error(f"PLINF_INSERTION_RANGE has unknown value '{INSERTION_RANGE}'.")
        raise ValueError(
            f"Unknown insertion range '{INSERTION_RANGE}'. "
            "Use 'full' or 'displayed' in your .env file or environment variables."
        )
    return INSERTION_RANGE

def write_json(path: Path, payload: Dict[str, Any]) -> None:
    """
    Writes a report deterministically (sorted keys, fixed indentation).
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")
    logger.info(f"Wrote {path}")
