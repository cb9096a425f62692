"""
Environment Settings

Overrides taken from SWARM_BEAM_* environment variables and merged into a
scenario document before validation.

    SWARM_BEAM__<SECTION>__<KEY>=<value>   nested key, e.g. SWARM_BEAM__SELECTION__K=3
    SWARM_BEAM_SEED=<int>                  top-level seed
    SWARM_BEAM_LOG_LEVEL=<level>           top-level log level

Values are parsed as JSON when possible and used as plain strings
otherwise, so lists and numbers need no extra quoting.
"""

import copy
import json
import logging
from typing import Any, Dict, List, Mapping, Tuple

from .config import ENV_PREFIX
from .core.errors import ConfigError

NESTED_PREFIX = f"{ENV_PREFIX}__"
TOP_LEVEL = {f"{ENV_PREFIX}_SEED": "seed", f"{ENV_PREFIX}_LOG_LEVEL": "log_level"}


def _parse_value(raw: str) -> Any:
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


class Settings:
    """Reads overrides from an environment mapping."""

    def __init__(self, environ: Mapping[str, str]):
        self.logger = logging.getLogger(__name__)
        self._environ = environ

    def overrides(self) -> List[Tuple[Tuple[str, ...], Any]]:
        """(key path, value) pairs in sorted variable order."""
        found = []
        for name in sorted(self._environ):
            raw = self._environ[name]
            if name in TOP_LEVEL:
                found.append(((TOP_LEVEL[name],), _parse_value(raw)))
            elif name.startswith(NESTED_PREFIX):
                parts = tuple(p.lower() for p in name[len(NESTED_PREFIX):].split("__"))
                if not all(parts):
                    raise ConfigError(f"malformed override variable {name}", ConfigError.INVALID)
                found.append((parts, _parse_value(raw)))
        return found

    def apply(self, document: Dict[str, Any]) -> Dict[str, Any]:
        """Copy of ``document`` with every override written into it."""
        merged = copy.deepcopy(document)
        for path, value in self.overrides():
            target = merged
            for part in path[:-1]:
                node = target.setdefault(part, {})
                if not isinstance(node, dict):
                    key = ".".join(path)
                    raise ConfigError(f"{key}: cannot override inside a non-object value",
                                      ConfigError.INVALID, key)
                target = node
            target[path[-1]] = value
            self.logger.debug(f"Override {'.'.join(path)} = {value!r}")
        return merged


def apply_env_overrides(document: Dict[str, Any], environ: Mapping[str, str]) -> Dict[str, Any]:
    return Settings(environ).apply(document)
