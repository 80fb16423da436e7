"""Exception types shared across the package.

Every error raised on a violated precondition derives from QuasidiffError so
callers (and the CLI) can map library failures to a usage/config exit code
without string matching.
"""

from __future__ import annotations


class QuasidiffError(Exception):
    """Base class for all library errors."""


class InvalidArgumentError(QuasidiffError, ValueError):
    """An argument violates a documented precondition."""


class InsufficientExtentError(QuasidiffError):
    """A window or scan radius exceeds the generated extent of a point set."""


class NotUniformlyDiscreteError(QuasidiffError):
    """An operation requires a positive separation radius and got none."""


class SeamViolationError(QuasidiffError):
    """Splicing two sets produced a pairwise gap below both inputs' separation."""


class DuplicatePointError(QuasidiffError):
    """Two points (or atoms) coincide exactly where distinctness is required."""


class AmbiguousRemovalError(QuasidiffError):
    """Two removal targets matched the same point."""


class DegenerateTrialError(QuasidiffError):
    """A recovery trial has no valid frequency node left under the guard."""


class EmptySpectrumError(QuasidiffError):
    """Peak analysis was asked to run on an empty spectrum."""


class FormatError(QuasidiffError):
    """A file being read does not conform to the documented format."""


class ConfigError(QuasidiffError):
    """A scenario/CLI configuration is malformed or has unknown keys."""


class UnknownScenarioError(ConfigError):
    """Requested scenario name is not registered."""
