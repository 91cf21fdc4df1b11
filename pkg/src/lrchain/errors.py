"""Exception types shared across the package.

The CLI maps these onto exit codes, so every numerical routine raises one
of them rather than a bare ``ValueError`` when the failure is domain related.
"""


class LRChainError(Exception):
    """Base class for all package errors."""


class DomainError(LRChainError, ValueError):
    """A quantity is undefined or divergent for the requested arguments."""


class ResourceError(LRChainError):
    """A Hilbert space or enumeration exceeds its configured budget."""


class NumericalError(LRChainError):
    """An iterative or dense solver failed to produce a trustworthy answer."""


class BranchError(LRChainError, ValueError):
    """Couplings do not define the requested extremum branch."""


class NotALevelError(BranchError):
    """The pair (J_mu, B_mu) does not yield a semiclassical level."""
