"""
Resources Module

Shipped scenario files and helpers to locate them.
"""

from pathlib import Path
from typing import Optional

DEFAULT_SCENARIO = "default"


def get_resource_path(filename: str) -> Path:
    """Get the full path to a resource file."""
    resources_dir = Path(__file__).parent
    return resources_dir / filename


def shipped_scenario(name: str) -> Optional[Path]:
    """Path of a bundled scenario given by bare name (``default``), if it exists."""
    candidate = get_resource_path(f"{name}.json")
    return candidate if candidate.is_file() else None


def resolve_config_path(value: str) -> Path:
    """Existing file paths win; otherwise a bare name selects a shipped scenario."""
    path = Path(value)
    if path.exists():
        return path
    return shipped_scenario(value) or path
