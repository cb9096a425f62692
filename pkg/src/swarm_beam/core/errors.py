"""
Error Types

Exception hierarchy shared by the simulation core, the learning agent
and the command-line runner.
"""

from typing import Any, Dict, Optional


class SwarmBeamError(Exception):
    """Base error for all swarm-beam failures."""

    def __init__(self, message: str, context: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.context = context or {}


class GeometryError(SwarmBeamError, ValueError):
    """Invalid or degenerate geometry."""


class DegenerateChannelError(SwarmBeamError):
    """Channel vector that cannot be normalized or a zero link distance."""


class UndefinedCorrelationError(SwarmBeamError):
    """Correlation requested on a series without variance."""


class DimensionError(SwarmBeamError, ValueError):
    """Mismatched lengths or shapes."""


class InvalidActionError(SwarmBeamError, ValueError):
    """Action index outside the environment's action space."""


class ConfigError(SwarmBeamError):
    """Scenario configuration could not be loaded or validated."""

    MISSING_FILE = "missing_file"
    MALFORMED = "malformed"
    INVALID = "invalid"

    def __init__(self, message: str, kind: str, key: Optional[str] = None):
        super().__init__(message, {"kind": kind, "key": key})
        self.kind = kind
        self.key = key


class OutputDirError(SwarmBeamError):
    """Output directory missing or not writable."""
