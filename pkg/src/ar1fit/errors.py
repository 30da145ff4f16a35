"""Exception hierarchy shared by all modules."""


class Ar1FitError(Exception):
    """Base class for errors raised by :mod:`ar1fit`."""


class DomainError(Ar1FitError, ValueError):
    """An argument lies outside the domain where the operation is defined."""


class UninformativeLagError(DomainError):
    """gamma(N) and r(N) both vanish, so the lag carries no information on phi."""


class InconsistencyError(Ar1FitError):
    """Two assumed noise values admit no common root (misspecified noise)."""


class TestUnavailableError(Ar1FitError):
    """The plug-in variance of a test statistic is not positive."""

    __test__ = False  # keep pytest from collecting this as a test class
