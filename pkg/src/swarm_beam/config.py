"""
Application Configuration

Application constants, output directory management and per-module seed
splitting.
"""

import os
import zlib
from pathlib import Path
from typing import Optional

import numpy as np
import psutil

from . import __version__
from .core.errors import OutputDirError

# Application constants
APP_NAME = "swarm-beam"
APP_VERSION = __version__
ENV_PREFIX = "SWARM_BEAM"
DEFAULT_OUTPUT_DIR = Path("results")


def derive_seed(seed: int, name: str) -> np.random.SeedSequence:
    """
    Independent seed sequence for a named module stream.

    The stream key is the CRC-32 of the module name, so adding a new stream
    never shifts the numbers drawn by existing ones.
    """
    return np.random.SeedSequence(int(seed), spawn_key=(zlib.crc32(name.encode("utf-8")),))


def make_rng(seed: int, name: str) -> np.random.Generator:
    return np.random.default_rng(derive_seed(seed, name))


def default_thread_count() -> int:
    """Physical core count, falling back to logical cores and then one."""
    return psutil.cpu_count(logical=False) or psutil.cpu_count() or 1


def peak_rss_mb() -> float:
    """Resident set size of this process in MiB (peak where the platform reports it)."""
    info = psutil.Process().memory_info()
    peak = getattr(info, "peak_wset", None) or info.rss
    return peak / (1024 * 1024)


def prepare_output_dir(path: Optional[Path]) -> Path:
    """Create the output directory and check it accepts files."""
    out_dir = Path(path) if path is not None else DEFAULT_OUTPUT_DIR
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OutputDirError(f"cannot create output directory {out_dir}: {e}") from e
    if not out_dir.is_dir() or not os.access(out_dir, os.W_OK):
        raise OutputDirError(f"output directory {out_dir} is not writable", {"path": str(out_dir)})
    return out_dir
