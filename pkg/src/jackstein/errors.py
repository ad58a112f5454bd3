"""Exception types shared by every module."""


class JacksteinError(Exception):
    """Base class for errors raised by this package."""


class DomainError(JacksteinError, ValueError):
    """An argument lies outside the domain of an operation."""


class ResourceError(JacksteinError, RuntimeError):
    """A computation would exceed a configured size or memory limit."""


class VerificationError(JacksteinError):
    """A checked identity or inequality failed.

    ``failures`` holds one human-readable line per offending check.
    """

    def __init__(self, message, failures=()):
        super().__init__(message)
        self.failures = list(failures)
