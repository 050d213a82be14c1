"""Exception types shared across the package.

Every error raised by nlwr derives from :class:`NlwrError`, so callers can
catch one base class at an API boundary (the command-line driver does exactly
that).  The subclasses mirror the distinct failure modes of the library:
invalid model parameters, incompatible discrete objects, violated stability
conditions, and malformed configuration input.
"""

from __future__ import annotations

__all__ = [
    "NlwrError",
    "ParameterError",
    "GridMismatchError",
    "KernelSupportError",
    "CFLViolationError",
    "NonFiniteStateError",
    "DensityBoundsError",
    "PairMismatchError",
    "WindowError",
    "ConfigError",
]


class NlwrError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(NlwrError, ValueError):
    """A model or solver parameter is outside its admissible range."""


class GridMismatchError(NlwrError, ValueError):
    """Two discrete objects that must share a grid do not."""


class KernelSupportError(NlwrError, ValueError):
    """A convolution kernel is wider than the periodic domain."""


class CFLViolationError(NlwrError, RuntimeError):
    """A requested time step exceeds the stable CFL bound."""


class NonFiniteStateError(NlwrError, RuntimeError):
    """The evolved state contains NaN or infinite values."""


class DensityBoundsError(NlwrError, RuntimeError):
    """The evolved density left the invariant range [0, 1] beyond tolerance."""


class PairMismatchError(NlwrError, ValueError):
    """A problem pair does not satisfy the sharing requirements of a bound."""


class WindowError(NlwrError, ValueError):
    """A space interval lies outside the computational domain."""


class ConfigError(NlwrError, ValueError):
    """A configuration file could not be parsed.

    Carries enough context (file, line number, key) to point at the
    offending entry.
    """

    def __init__(self, message: str, *, path: str | None = None,
                 line: int | None = None, key: str | None = None) -> None:
        self.path = path
        self.line = line
        self.key = key
        where = []
        if path is not None:
            where.append(str(path))
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key '{key}'")
        prefix = ": ".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)
