"""Problem specification, coupling matrices and special functions.

Everything here is a pure function of its arguments. ``INF`` doubles as the
sentinel for an infinite interaction exponent (nearest-neighbour limit) and
for an infinite chain (thermodynamic limit).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import mpmath
import numpy as np

from .errors import DomainError, ResourceError

INF = math.inf

#: Default cap on the Hilbert dimension accepted by exact diagonalization.
DEFAULT_DIM_BUDGET = 20_000

_LN2 = math.log(2.0)
_CVZ_BASE = 3.0 + math.sqrt(8.0)


class Boundary(str, enum.Enum):
    OPEN = "open"
    PERIODIC = "periodic"


def _is_inf(x) -> bool:
    return isinstance(x, float) and math.isinf(x) and x > 0


@dataclass(frozen=True)
class ChainSpec:
    """A transverse-field chain of ``n_sites`` spins of length ``spin2 / 2``.

    Pair couplings decay as ``j0 / d**alpha``; ``alpha = INF`` keeps only
    nearest neighbours and ``alpha = 0`` couples all pairs equally. With
    ``kac_rescale`` the bare coupling is divided by ``n_sites``.
    """

    n_sites: int | float
    spin2: int = 1
    alpha: float = 1.0
    j0: float = 1.0
    b: float = 0.0
    boundary: Boundary = Boundary.OPEN
    kac_rescale: bool = False

    def __post_init__(self):
        n = self.n_sites
        if _is_inf(n):
            object.__setattr__(self, "n_sites", INF)
        else:
            if isinstance(n, float):
                if not n.is_integer():
                    raise ValueError(f"n_sites must be an integer or INF, got {n!r}")
                n = int(n)
                object.__setattr__(self, "n_sites", n)
            if not isinstance(n, (int, np.integer)) or n < 1:
                raise ValueError(f"n_sites must be >= 1, got {n!r}")
            object.__setattr__(self, "n_sites", int(n))
        if int(self.spin2) != self.spin2 or self.spin2 < 1:
            raise ValueError(f"spin2 must be a positive integer, got {self.spin2!r}")
        object.__setattr__(self, "spin2", int(self.spin2))
        alpha = float(self.alpha)
        if math.isnan(alpha) or alpha < 0:
            raise ValueError(f"alpha must be non-negative or INF, got {self.alpha!r}")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "j0", float(self.j0))
        b = float(self.b)
        if math.isnan(b) or b < 0:
            raise ValueError(f"field b must be non-negative, got {self.b!r}")
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "boundary", Boundary(self.boundary))

    @property
    def spin(self) -> float:
        return self.spin2 / 2

    @property
    def infinite(self) -> bool:
        return _is_inf(self.n_sites)

    @property
    def coupling(self) -> float:
        """Bare coupling after the optional Kac rescaling."""
        if self.kac_rescale:
            if self.infinite:
                raise DomainError("Kac rescaling is undefined for an infinite chain")
            return self.j0 / self.n_sites
        return self.j0

    @property
    def hilbert_dim(self) -> int | float:
        if self.infinite:
            return INF
        return (self.spin2 + 1) ** self.n_sites

    def replace(self, **changes) -> "ChainSpec":
        return replace(self, **changes)

    def require_finite(self, what: str = "this operation") -> int:
        if self.infinite:
            raise DomainError(f"{what} needs a finite number of sites")
        return self.n_sites

    def check_budget(self, budget: int = DEFAULT_DIM_BUDGET) -> int:
        """Return the Hilbert dimension, raising if it exceeds ``budget``."""
        self.require_finite("exact diagonalization")
        dim = self.hilbert_dim
        if dim > budget:
            raise ResourceError(
                f"Hilbert dimension {dim} = ({self.spin2}+1)^{self.n_sites} exceeds budget {budget}"
            )
        return dim

    def to_dict(self) -> dict:
        return {
            "n_sites": "inf" if self.infinite else self.n_sites,
            "spin2": self.spin2,
            "alpha": "inf" if _is_inf(self.alpha) else self.alpha,
            "j0": self.j0,
            "b": self.b,
            "boundary": self.boundary.value,
            "kac_rescale": self.kac_rescale,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ChainSpec":
        d = dict(data)
        for key in ("n_sites", "alpha"):
            if isinstance(d.get(key), str):
                d[key] = parse_inf(d[key])
        return cls(**d)


def parse_inf(text: str | float | int) -> float | int:
    """Parse a number that may be the literal ``inf``."""
    if isinstance(text, (int, float)):
        return text
    t = text.strip().lower()
    if t in ("inf", "infinity", "+inf"):
        return INF
    value = float(t)
    return int(value) if value.is_integer() and "." not in t and "e" not in t else value


@dataclass(frozen=True)
class IndexSet:
    """Ordered ring displacements ``I_N`` (or ``I_N`` without zero)."""

    members: tuple[int, ...]

    def __iter__(self):
        return iter(self.members)

    def __len__(self):
        return len(self.members)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.members, dtype=np.int64)


class ThermoCouplings(NamedTuple):
    zeta_alpha: float
    eta_alpha: float
    j_e_inf: float
    j_a_inf: float
    c_n: float


def index_set(n: int, exclude_zero: bool = False) -> IndexSet:
    """Quasimomentum / displacement labels of an ``n``-site ring.

    Even ``n`` runs from ``-n/2`` to ``n/2 - 1``; odd ``n`` is symmetric.
    """
    if int(n) != n or n < 2:
        raise ValueError(f"index_set needs an integer n >= 2, got {n!r}")
    n = int(n)
    if n % 2 == 0:
        members = range(-n // 2, n // 2)
    else:
        members = range(-(n - 1) // 2, (n - 1) // 2 + 1)
    return IndexSet(tuple(m for m in members if not (exclude_zero and m == 0)))


def distance_weight(d, alpha: float):
    """``1/|d|**alpha`` with the INF convention ``1`` at ``|d| = 1`` else ``0``.

    Accepts scalars or arrays of non-zero integer distances.
    """
    d = np.abs(np.asarray(d, dtype=float))
    if _is_inf(alpha):
        w = (d == 1.0).astype(float)
    elif alpha == 0:
        w = np.ones_like(d)
    else:
        w = d ** (-alpha)
    return w if w.ndim else float(w)


def coupling_matrix(spec: ChainSpec) -> np.ndarray:
    """Pair couplings ``J_ij`` of the open chain or the ring.

    For the ring the weight of a pair is assembled from the signed
    displacements in ``I_N^0``, so for even ``N`` the antipodal pair is
    counted once from each end.
    """
    n = spec.require_finite("coupling_matrix")
    j0 = spec.coupling
    k = np.zeros((n, n))
    if n == 1:
        return k
    idx = np.arange(n)
    if spec.boundary is Boundary.OPEN:
        d = np.abs(idx[:, None] - idx[None, :])
        off = d > 0
        k[off] = j0 * distance_weight(d[off], spec.alpha)
        return k
    for r in index_set(n, exclude_zero=True):
        w = 0.5 * j0 * distance_weight(r, spec.alpha)
        if w == 0.0:
            continue
        jdx = (idx + r) % n
        np.add.at(k, (idx, jdx), w)
        np.add.at(k, (jdx, idx), w)
    return k


def _cvz_alternating(terms) -> float:
    """Cohen-Rodriguez Villegas-Zagier sum of ``sum_k (-1)^k terms[k]``."""
    n = len(terms)
    d = _CVZ_BASE**n
    d = 0.5 * (d + 1.0 / d)
    b = -1.0
    c = -d
    s = 0.0
    for k in range(n):
        c = b - c
        s += c * terms[k]
        b = (k + n) * (k - n) * b / ((k + 0.5) * (k + 1.0))
    return s / d


def dirichlet_eta(alpha: float, tol: float = 1e-12) -> float:
    """Dirichlet eta function for ``alpha >= 0`` by an accelerated alternating sum."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    alpha = float(alpha)
    if math.isnan(alpha) or alpha < 0:
        raise DomainError(f"eta is only provided for alpha >= 0, got {alpha}")
    if alpha == 0:
        return 0.5
    if _is_inf(alpha):
        return 1.0
    n = min(int(math.ceil(math.log(3.0 / tol) / math.log(_CVZ_BASE))) + 3, 64)
    terms = [(k + 1.0) ** (-alpha) for k in range(n)]
    return _cvz_alternating(terms)


def riemann_zeta(alpha: float, tol: float = 1e-12) -> float:
    """Riemann zeta for ``alpha > 1`` via ``eta / (1 - 2**(1 - alpha))``."""
    alpha = float(alpha)
    if not alpha > 1:
        raise DomainError(f"zeta({alpha}) diverges: the lattice sum needs alpha > 1")
    if _is_inf(alpha):
        return 1.0
    return dirichlet_eta(alpha, tol) / -math.expm1((1.0 - alpha) * _LN2)


def zeta_eta(alpha: float, tol: float = 1e-12, j0: float = 1.0, n_sites: int | float = INF) -> ThermoCouplings:
    """Thermodynamic-limit couplings of the equal and alternating configurations.

    ``zeta_alpha`` (and hence ``j_e_inf``) is ``inf`` when the sum diverges
    (``alpha <= 1``); call :func:`riemann_zeta` directly to get a
    :class:`DomainError` instead.
    """
    eta = dirichlet_eta(alpha, tol)
    zeta = riemann_zeta(alpha, tol) if alpha > 1 else INF
    c_n = 1.0 if _is_inf(n_sites) else 1.0 - 1.0 / n_sites
    return ThermoCouplings(zeta, eta, j0 * zeta, -j0 * eta, c_n)


def clausen_truncated(alpha: float, k, n: int | float):
    """``C_alpha^(N)(k) = 1/2 sum_{r in I_N^0} cos(k r) / |r|**alpha``.

    With ``n = INF`` this is ``Re Li_alpha(exp(ik))``. Scalars in, scalar out;
    arrays are evaluated elementwise.
    """
    k_arr = np.asarray(k, dtype=float)
    if _is_inf(n):
        out = np.array([_clausen_inf(alpha, float(kk)) for kk in k_arr.ravel()]).reshape(k_arr.shape)
    else:
        r = index_set(n, exclude_zero=True).as_array()
        w = distance_weight(r, alpha)
        out = 0.5 * np.cos(np.multiply.outer(k_arr, r)) @ w
    return float(out) if out.ndim == 0 else out


def _clausen_inf(alpha: float, k: float) -> float:
    kr = math.remainder(k, 2.0 * math.pi)
    if kr == 0.0:
        if alpha <= 1:
            raise DomainError(f"Re Li_{alpha}(1) diverges for alpha <= 1")
        return riemann_zeta(alpha)
    if _is_inf(alpha):
        return math.cos(k)
    return float(mpmath.re(mpmath.polylog(alpha, mpmath.expj(kr))))


def lerch_truncated(k: float, alpha: float, a: float, n_terms: int) -> tuple[complex, float]:
    """Partial Lerch sum ``sum_{m<n_terms} exp(ikm) / (m + a)**alpha``.

    Returns the partial sum and a bound on the neglected tail (``inf`` when
    the series does not converge).
    """
    if a <= 0:
        raise ValueError("Lerch shift a must be positive")
    if n_terms < 1:
        raise ValueError("n_terms must be >= 1")
    m = np.arange(n_terms, dtype=float)
    value = complex(np.sum(np.exp(1j * k * m) * (m + a) ** (-alpha)))
    s = abs(math.sin(0.5 * k))
    if s > 1e-15:
        tail = (n_terms + a) ** (-alpha) / s if alpha > 0 else INF
    elif alpha > 1:
        tail = (n_terms + a - 1.0) ** (1.0 - alpha) / (alpha - 1.0)
    else:
        tail = INF
    return value, tail


def lerch(k: float, alpha: float, a: float) -> complex:
    """Full Lerch transcendent ``Phi(exp(ik), alpha, a)``."""
    if a <= 0:
        raise ValueError("Lerch shift a must be positive")
    if math.remainder(k, 2.0 * math.pi) == 0.0 and alpha <= 1:
        raise DomainError("Lerch series at z=1 diverges for alpha <= 1")
    return complex(mpmath.lerchphi(mpmath.expj(k), alpha, a))
