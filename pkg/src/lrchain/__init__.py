"""Exact and semiclassical spectra of long-range transverse-field spin chains."""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"

from .errors import BranchError, DomainError, LRChainError, NotALevelError, NumericalError, ResourceError
from .model import INF, Boundary, ChainSpec, coupling_matrix, index_set, zeta_eta

__all__ = [
    "INF",
    "Boundary",
    "BranchError",
    "ChainSpec",
    "DomainError",
    "LRChainError",
    "NotALevelError",
    "NumericalError",
    "ResourceError",
    "coupling_matrix",
    "index_set",
    "zeta_eta",
]
