"""Exception types shared across smoothlab."""

from __future__ import annotations


class SmoothlabError(Exception):
    """Base class for smoothlab errors."""


class DescriptorError(SmoothlabError, ValueError):
    """A multiplier or operator descriptor is malformed or cannot be evaluated."""


class ConfigError(SmoothlabError, ValueError):
    """An experiment configuration is invalid."""


class SingularityError(SmoothlabError, ArithmeticError):
    """A transition function has a nonremovable singularity."""
