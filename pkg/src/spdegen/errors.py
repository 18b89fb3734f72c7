"""Exception types shared across the package.

Every failure mode callers are expected to branch on gets its own class so
the CLI can map them to distinct exit codes.
"""

from __future__ import annotations


class SpdegenError(Exception):
    """Base class for all package-specific errors."""


class InvalidArgumentError(SpdegenError, ValueError):
    """A caller-supplied value violates an interface contract."""


class ResourceLimitError(SpdegenError, RuntimeError):
    """A request exceeds a configured size or memory cap."""


class DivergenceError(SpdegenError, RuntimeError):
    """A solve produced non-finite values or blew past a magnitude guard."""

    def __init__(self, equation: str, step: int, detail: str = ""):
        self.equation = equation
        self.step = step
        msg = f"{equation}: diverged at step {step}"
        if detail:
            msg = f"{msg} ({detail})"
        super().__init__(msg)


class UndefinedMetricError(SpdegenError, ValueError):
    """A metric is mathematically undefined for the given inputs."""


class SchemaError(SpdegenError, ValueError):
    """A dataset file or record does not match the expected layout."""


class ConfigError(SpdegenError, ValueError):
    """A run configuration file is malformed or inconsistent."""
