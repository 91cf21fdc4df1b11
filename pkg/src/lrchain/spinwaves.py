"""Spin waves on a periodic ring around single-angle mean-field configurations.

The ring energy per elementary spin is

    E(phi) = -(1/N) sum_{i<j} K_ij sin(phi_i) sin(phi_j) - (B/N) sum_i cos(phi_i)

with ``K`` the periodic coupling matrix. Quadratic fluctuations around a
uniform or alternating stationary point are diagonal in quasimomentum and
take the canonical form with coefficients

    G(k) = -J0 cos(phi_c)**2 C(k),   F(k) = G(k) - E0,
    E0 = -2 J_p sin(phi_c)**2 - B cos(phi_c),

giving the Bogoliubov energy ``eps(k) = 2 sqrt(F**2 - G**2)``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
import scipy.linalg as sla

from .errors import BranchError, DomainError, NumericalError
from .model import INF, Boundary, ChainSpec, clausen_truncated, coupling_matrix, index_set, zeta_eta

logger = logging.getLogger(__name__)

Kind = Literal["uniform", "alternating"]
DEFAULT_INF_POINTS = 1024


@dataclass(frozen=True)
class StationaryAngle:
    kind: str
    phi_c: float
    regime: Literal["ordered", "polarized"]
    j_eff_p: float
    b: float = 0.0

    @property
    def branch(self) -> Literal["min", "max"]:
        return "min" if self.j_eff_p > 0 else "max"


@dataclass
class DispersionCurve:
    """Spin-wave band of one stationary configuration.

    ``stable`` marks modes with real frequency around a genuine extremum:
    ``F**2 >= G**2`` with ``F > 0`` at a minimum or ``F < 0`` at a maximum.
    Where ``F**2 < G**2`` the band entry is 0 and ``imag`` carries the
    magnitude of the imaginary frequency.
    """

    k_grid: np.ndarray
    g: np.ndarray
    f: np.ndarray
    e0: float
    theta: np.ndarray
    energy: np.ndarray
    imag: np.ndarray
    stable: np.ndarray
    angle: StationaryAngle

    @property
    def gap_mode(self) -> int:
        return int(np.argmin(self.energy))

    @property
    def gap(self) -> float:
        return float(self.energy[self.gap_mode])

    @property
    def corr_length(self) -> float:
        return correlation_length(self.gap)

    @property
    def status(self) -> str:
        return "ok" if bool(np.all(self.stable)) else "unstable"


@dataclass
class GapScan:
    b: np.ndarray
    gap: np.ndarray
    corr_length: np.ndarray
    b_c: float
    exponent: float | None
    kind: str


def correlation_length(gap: float) -> float:
    """``1/sqrt(gap)``, infinite when the gap closes."""
    return math.inf if gap <= 0 else 1.0 / math.sqrt(gap)


def _require_periodic(spec: ChainSpec, what: str) -> None:
    if spec.boundary is not Boundary.PERIODIC:
        raise ValueError(f"{what} requires a periodic chain")


def mean_field_energy_periodic(spec: ChainSpec, phi) -> tuple[float, np.ndarray]:
    """Ring energy per elementary spin and its analytic gradient."""
    _require_periodic(spec, "mean_field_energy_periodic")
    n = spec.require_finite("mean_field_energy_periodic")
    phi = np.asarray(phi, dtype=float)
    if phi.shape != (n,):
        raise ValueError(f"expected {n} angles, got shape {phi.shape}")
    kmat = coupling_matrix(spec)
    s, c = np.sin(phi), np.cos(phi)
    ks = kmat @ s
    energy = -0.5 * float(s @ ks) / n - spec.b * float(c.sum()) / n
    grad = (-c * ks + spec.b * s) / n
    return energy, grad


def effective_couplings_periodic(spec: ChainSpec) -> tuple[float, float]:
    """``(J_e^p, J_a^p)``: ring sums of the equal and alternating patterns."""
    j0 = spec.coupling
    if spec.infinite:
        tc = zeta_eta(spec.alpha, j0=j0)
        if math.isinf(tc.j_e_inf):
            raise DomainError(f"J_e^p diverges in the thermodynamic limit for alpha={spec.alpha} <= 1")
        return tc.j_e_inf, tc.j_a_inf
    n = spec.n_sites
    if n < 2:
        raise ValueError("a ring needs n >= 2")
    return j0 * float(clausen_truncated(spec.alpha, 0.0, n)), j0 * float(clausen_truncated(spec.alpha, math.pi, n))


def _relevant_coupling(spec: ChainSpec, kind: str) -> float:
    if kind == "uniform":
        return effective_couplings_periodic(spec)[0]
    if kind == "alternating":
        if spec.infinite:
            return -spec.coupling * zeta_eta(spec.alpha).eta_alpha
        return effective_couplings_periodic(spec)[1]
    raise ValueError(f"unknown configuration kind {kind!r}")


def stationary_angle(spec: ChainSpec, kind: str = "uniform", b: float | None = None) -> StationaryAngle:
    """Stationary base angle of the uniform or alternating ring pattern.

    Both patterns share ``sin(phi) (B - 2 J_p cos(phi)) = 0``. Below
    ``B_c = 2|J_p|`` the ordered root ``cos(phi_c) = B/(2 J_p)`` applies;
    above it the polarised root is ``0`` for ``J_p > 0`` (minimum) and
    ``pi`` for ``J_p < 0`` (maximum).
    """
    _require_periodic(spec, "stationary_angle")
    b = spec.b if b is None else float(b)
    if b < 0:
        raise BranchError("field must be non-negative")
    if kind in ("intermediate_1", "intermediate_2"):
        _require_even(spec)
        if b != 0:
            raise BranchError("the intermediate pattern is stationary only at zero field")
        j_a = effective_couplings_periodic(spec)[1]
        return StationaryAngle(kind, math.pi / 2 if kind == "intermediate_1" else 0.0, "ordered", j_a, b)
    if kind == "alternating":
        _require_even(spec)
    j = _relevant_coupling(spec, kind)
    if j == 0:
        raise BranchError(f"{kind} pattern has zero effective coupling; no ordered branch")
    if b <= 2.0 * abs(j):
        return StationaryAngle(kind, math.acos(min(1.0, max(-1.0, b / (2.0 * j)))), "ordered", j, b)
    return StationaryAngle(kind, 0.0 if j > 0 else math.pi, "polarized", j, b)


def _require_even(spec: ChainSpec) -> None:
    if not spec.infinite and spec.n_sites % 2:
        raise DomainError(f"the two-site pattern does not close on a ring of odd length {spec.n_sites}")


def expand_angles(n: int, angle: StationaryAngle) -> np.ndarray:
    """Per-site angles of a stationary pattern on an ``n``-site ring."""
    phi = angle.phi_c
    sites = np.arange(n)
    if angle.kind == "uniform":
        return np.full(n, phi)
    if angle.kind == "alternating":
        return np.where(sites % 2 == 0, phi, -phi)
    # intermediate: every other site flipped by pi
    return np.where(sites % 2 == 0, phi, phi + math.pi)


def k_grid(n: int | float, n_points: int = DEFAULT_INF_POINTS) -> np.ndarray:
    """Quantised momenta ``2 pi m / N`` for ``m`` in ``I_N``, or a dense grid at ``N = INF``."""
    if math.isinf(n):
        return np.linspace(-math.pi, math.pi, n_points)
    return 2.0 * math.pi * np.asarray(index_set(int(n)).members, dtype=float) / n


def clausen_profile(spec: ChainSpec, k) -> np.ndarray:
    return np.asarray(clausen_truncated(spec.alpha, k, spec.n_sites), dtype=float)


def _coefficients(spec: ChainSpec, angle: StationaryAngle, k: np.ndarray):
    c, s = math.cos(angle.phi_c), math.sin(angle.phi_c)
    e0 = -2.0 * angle.j_eff_p * s * s - angle.b * c
    g = -spec.coupling * c * c * clausen_profile(spec, k)
    return g, g - e0, e0


def _bogoliubov(f: np.ndarray, g: np.ndarray, e0: float, branch: str):
    # F^2 - G^2 = (F - G)(F + G) = (-E0)(2G - E0), free of cancellation
    disc = (-e0) * (2.0 * g - e0)
    energy = 2.0 * np.sqrt(np.clip(disc, 0.0, None))
    imag = 2.0 * np.sqrt(np.clip(-disc, 0.0, None))
    sign_ok = f > 0 if branch == "min" else f < 0
    stable = (disc >= 0) & (sign_ok | (f == 0) & (g == 0))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(f != 0, -g / f, np.nan)
        theta = np.where(np.abs(ratio) < 1, 0.5 * np.arctanh(np.clip(ratio, -1.0, 1.0)), np.nan)
    return energy, imag, stable, theta


def dispersion(
    spec: ChainSpec, kind: Kind = "uniform", b: float | None = None, n_points: int = DEFAULT_INF_POINTS
) -> DispersionCurve:
    """Spin-wave band of the uniform or alternating stationary configuration."""
    angle = stationary_angle(spec, kind, b)
    k = k_grid(spec.n_sites, n_points)
    g, f, e0 = _coefficients(spec, angle, k)
    energy, imag, stable, theta = _bogoliubov(f, g, e0, angle.branch)
    curve = DispersionCurve(k, g, f, e0, theta, energy, imag, stable, angle)
    if curve.status != "ok":
        logger.warning("%s configuration at B=%g has %d unstable modes", kind, angle.b, int((~stable).sum()))
    return curve


def critical_field(spec: ChainSpec, kind: Kind = "uniform") -> float:
    """Field ``2|J_p|`` at which the pattern's gap closes."""
    _require_periodic(spec, "critical_field")
    if kind == "alternating":
        _require_even(spec)
    j = _relevant_coupling(spec, kind)
    if j == 0:
        raise BranchError(f"{kind} pattern has zero effective coupling")
    return 2.0 * abs(j)


def gap_momentum(kind: str) -> float:
    return 0.0 if kind == "uniform" else math.pi


def mode_energy(spec: ChainSpec, kind: Kind, b: float, k: float) -> float:
    angle = stationary_angle(spec, kind, b)
    g, f, e0 = _coefficients(spec, angle, np.array([k]))
    return float(_bogoliubov(f, g, e0, angle.branch)[0][0])


def fit_gap_exponent(b, gap, b_c: float, side: str = "auto", floor: float = 1e-8) -> float | None:
    """Power-law exponent of ``gap`` in ``|B - B_c|`` over the decade nearest ``B_c``.

    Points with ``gap < floor`` are dropped. ``side`` selects fields above or
    below ``B_c``; ``auto`` takes whichever side has more points in its window.
    """
    b = np.asarray(b, dtype=float)
    gap = np.asarray(gap, dtype=float)
    dist = np.abs(b - b_c)
    keep = (gap >= floor) & (dist > 0)
    fits = {}
    for name, mask in (("above", keep & (b > b_c)), ("below", keep & (b < b_c))):
        if side not in ("auto", name) or mask.sum() < 2:
            continue
        d = dist[mask]
        window = d <= 10.0 * d.min()
        if window.sum() < 2:
            continue
        slope = np.polyfit(np.log(d[window]), np.log(gap[mask][window]), 1)[0]
        fits[name] = (int(window.sum()), float(slope))
    if not fits:
        return None
    return max(fits.values())[1]


def gap_scan(spec: ChainSpec, kind: Kind = "uniform", b_grid=None, side: str = "auto") -> GapScan:
    """Gap at the soft momentum (0 uniform, pi alternating) along a field grid."""
    b = np.asarray(b_grid, dtype=float)
    if b.ndim != 1 or b.size == 0:
        raise ValueError("b_grid must be a non-empty 1-d sequence")
    b_c = critical_field(spec, kind)
    k = gap_momentum(kind)
    gaps = np.empty_like(b)
    for i, bb in enumerate(b):
        try:
            gaps[i] = mode_energy(spec, kind, bb, k)
        except (BranchError, DomainError) as exc:
            raise type(exc)(f"grid point {i} (b={bb}): {exc}") from exc
    corr = np.array([correlation_length(x) for x in gaps])
    return GapScan(b, gaps, corr, b_c, fit_gap_exponent(b, gaps, b_c, side), kind)


def dicke_limit_check(spin2: int, b: float, j0: float) -> tuple[float, float, float]:
    """Two-site collective modes ``(eps_-, eps_+)`` and mean-field offset."""
    if b < 0 or j0 <= 0:
        raise ValueError("dicke_limit_check needs b >= 0 and j0 > 0")
    s = spin2 / 2
    if b >= j0:
        return 2.0 * math.sqrt(b * (b - j0)), 2.0 * math.sqrt(b * (b + j0)), -4.0 * s * b
    return 2.0 * math.sqrt(j0**2 - b**2), 2.0 * math.sqrt(j0**2 + b**2), -2.0 * s * (j0 + b**2 / j0)


def fluctuation_matrices(spec: ChainSpec, phi) -> tuple[np.ndarray, np.ndarray]:
    """Real-space quadratic form ``(A, W)`` around per-site angles ``phi``.

    ``A = diag(omega) + W`` and ``W`` are the normal and anomalous blocks of
    the bosonic Hamiltonian in the ``(a, a^dagger)`` basis.
    """
    kmat = coupling_matrix(spec)
    s, c = np.sin(phi), np.cos(phi)
    omega = 2.0 * s * (kmat @ s) + 2.0 * spec.b * c
    w = -kmat * np.outer(c, c)
    return np.diag(omega) + w, w


def paradiagonalize(a: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Mode energies of a bosonic quadratic form from the ``eta H`` eigenproblem.

    Returns the upper half of the spectrum of ``diag(1, -1) H``; complex
    eigenvalues signal a dynamical instability and raise.
    """
    n = a.shape[0]
    h = np.block([[a, w], [w, a]])
    eta = np.concatenate([np.ones(n), -np.ones(n)])
    vals = sla.eigvals(eta[:, None] * h)
    scale = max(1.0, float(np.abs(vals).max()))
    if np.abs(vals.imag).max() > 1e-9 * scale:
        raise NumericalError("quadratic form is dynamically unstable (complex mode energies)")
    return np.sort(vals.real)[n:]


def intermediate_config(spec: ChainSpec) -> dict:
    """Zero-field intermediate pattern with every other spin flipped.

    Solution 1 (``cos phi = 0``) has energy ``-J_a^p`` and an already
    diagonal fluctuation form with coefficient ``4 J_a^p``. Solution 2
    (``sin phi = 0``) has zero energy; after the staggered gauge
    transformation its normal and anomalous blocks coincide, so every
    mode has zero energy.
    """
    _require_periodic(spec, "intermediate_config")
    n = spec.require_finite("intermediate_config")
    _require_even(spec)
    if spec.b != 0:
        raise BranchError("the intermediate pattern is stationary only at zero field")
    _, j_a = effective_couplings_periodic(spec)

    phi1 = expand_angles(n, stationary_angle(spec, "intermediate_1"))
    e1, _ = mean_field_energy_periodic(spec, phi1)
    a1, w1 = fluctuation_matrices(spec, phi1)
    diag1 = np.diag(a1)
    # cos(pi/2) is only zero to rounding, so compare against the coupling scale
    tol = 1e-12 * max(1.0, float(np.abs(coupling_matrix(spec)).max()))
    already_diagonal = bool(np.abs(w1).max() <= tol and np.abs(a1 - np.diag(diag1)).max() <= tol)

    phi2 = expand_angles(n, stationary_angle(spec, "intermediate_2"))
    e2, _ = mean_field_energy_periodic(spec, phi2)
    a2, w2 = fluctuation_matrices(spec, phi2)
    stagger = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    w2t = w2 * np.outer(stagger, stagger)
    a2t = a2 * np.outer(stagger, stagger)
    # translation-invariant after the gauge: read G(k) off the first row
    row = w2t[0]
    ks = k_grid(n)
    g = 0.5 * np.real(np.exp(1j * np.outer(ks, np.arange(n))) @ row)
    f = 0.5 * np.real(np.exp(1j * np.outer(ks, np.arange(n))) @ a2t[0])
    eps = 2.0 * np.sqrt(np.clip((f - g) * (f + g), 0.0, None))
    return {
        "energy_1": e1,
        "expected_energy_1": -j_a,
        "diag_coeff_1": float(diag1.mean()),
        "diagonal_1": already_diagonal,
        "energy_2": e2,
        "k_grid": ks,
        "dispersion_2": eps,
        "flat_dispersion": bool(np.all(eps == 0.0)),
    }
