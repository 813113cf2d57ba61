"""Exception hierarchy. Each family maps to a CLI exit code."""

from __future__ import annotations


class NcppError(Exception):
    exit_code = 1


class ValidationError(NcppError, ValueError):
    """Malformed input; ``location`` is a key path such as ``links[2].b``."""

    exit_code = 2

    def __init__(self, message: str, location: str | None = None):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


class InfeasibleError(NcppError):
    exit_code = 3


class NoPathError(InfeasibleError):
    pass


class NoDisjointPairError(InfeasibleError):
    pass


class SpectrumBlockedError(InfeasibleError):
    def __init__(self, message: str, tightest_link: str | None = None):
        self.tightest_link = tightest_link
        super().__init__(message)


class UnreachableTargetError(InfeasibleError):
    def __init__(self, message: str, nearest: tuple = ()):
        self.nearest = nearest
        super().__init__(message)


class InfeasibleGroupError(InfeasibleError):
    pass


class InvariantViolation(NcppError):
    exit_code = 4
