"""
Artifact Writers

CSV and JSON output of experiment runs plus the run manifest. Floats are
written with 17 significant digits so repeated runs produce identical
bytes; nothing time-dependent goes into CSV payloads.
"""

import csv
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence

import numpy as np

MANIFEST_NAME = "run_manifest.json"


def format_value(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def json_safe(value: Any) -> Any:
    """Plain-JSON form: numpy scalars and arrays unwrapped, non-finite floats as null."""
    if isinstance(value, dict):
        return {str(k): json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [json_safe(v) for v in value]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


class ArtifactWriter:
    """Writes files into one output directory and remembers what it wrote."""

    def __init__(self, out_dir: Path):
        self.out_dir = Path(out_dir)
        self.logger = logging.getLogger(__name__)
        self.written: List[str] = []

    def register(self, name: str) -> Path:
        if name not in self.written:
            self.written.append(name)
        return self.out_dir / name

    def write_csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
        path = self.register(name)
        count = 0
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([format_value(v) for v in row])
                count += 1
        self.logger.debug(f"Wrote {path} ({count} rows)")
        return path

    def write_json(self, name: str, payload: Dict[str, Any]) -> Path:
        path = self.register(name)
        path.write_text(
            json.dumps(json_safe(payload), indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        self.logger.debug(f"Wrote {path}")
        return path


@dataclass
class RunManifest:
    command: str
    config_hash: str
    seed: int
    library_version: str
    threads: int
    artifacts: List[str] = field(default_factory=list)
    wall_times_s: Dict[str, float] = field(default_factory=dict)
    peak_rss_mb: float = 0.0
    log_files: List[str] = field(default_factory=list)

    def write(self, out_dir: Path) -> Path:
        payload = asdict(self)
        payload["artifacts"] = sorted(self.artifacts)
        path = Path(out_dir) / MANIFEST_NAME
        path.write_text(
            json.dumps(json_safe(payload), indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        return path
