"""Two-sublattice spin waves on an even ring.

Even sites form sublattice B and odd sites sublattice C, each with its own
angle. Displacements of odd length connect different sublattices and those
of even length connect equal ones, so the two coupling sums are

    M_B = sum_{r in I0, r odd} |r|**-alpha,   M_C = sum_{r in I0, r even} |r|**-alpha.

Fluctuations form a 4x4 Bogoliubov-de Gennes block per reduced momentum
``q``; the physical momentum is ``p = q/2`` and the block is built in the
gauge where each boson carries the phase of its physical position, which
makes it real.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import DomainError, NumericalError
from .model import ChainSpec, clausen_truncated, distance_weight, index_set, lerch, riemann_zeta
from .spinwaves import DEFAULT_INF_POINTS, _require_periodic, stationary_angle

NEWTON_MAX_ITER = 100
NEWTON_TOL = 1e-10
STATIONARY_TOL = 1e-8


@dataclass(frozen=True)
class SublatticeConfig:
    phi_b: float
    phi_c: float
    m_b: float
    m_c: float
    n_sites: int | float
    residual: float = 0.0
    iterations: int = 0


@dataclass
class BdGBlock:
    k: float
    h_k: np.ndarray
    bands: np.ndarray
    stable: bool


@dataclass
class BandTable:
    q: np.ndarray
    bands: np.ndarray
    stable: np.ndarray
    config: SublatticeConfig


def _displacements(n: int) -> np.ndarray:
    return np.asarray(index_set(n, exclude_zero=True).members)


def sublattice_sums(n: int | float, alpha: float) -> tuple[float, float]:
    """``(M_B, M_C)`` over odd and even ring displacements."""
    if math.isinf(n):
        if math.isinf(alpha):
            return 2.0, 0.0
        if alpha <= 1:
            raise DomainError(f"sublattice sums diverge for alpha={alpha} <= 1")
        z = riemann_zeta(alpha)
        return 2.0 * (1.0 - 2.0**-alpha) * z, 2.0 ** (1.0 - alpha) * z
    n = int(n)
    if n < 2 or n % 2:
        raise DomainError(f"two sublattices need an even ring, got n={n}")
    r = _displacements(n)
    w = distance_weight(np.abs(r), alpha)
    odd = r % 2 != 0
    return float(w[odd].sum()), float(w[~odd].sum())


def _residuals(phi_b, phi_c, m_b, m_c, j0, b):
    sb, cb, sc, cc = math.sin(phi_b), math.cos(phi_b), math.sin(phi_c), math.cos(phi_c)
    rb = -j0 * cb * (m_b * sc + m_c * sb) + b * sb
    rc = -j0 * cc * (m_b * sb + m_c * sc) + b * sc
    return np.array([rb, rc])


def _jacobian(phi_b, phi_c, m_b, m_c, j0, b):
    sb, cb, sc, cc = math.sin(phi_b), math.cos(phi_b), math.sin(phi_c), math.cos(phi_c)
    return np.array(
        [
            [j0 * sb * (m_b * sc + m_c * sb) - j0 * m_c * cb * cb + b * cb, -j0 * m_b * cb * cc],
            [-j0 * m_b * cc * cb, j0 * sc * (m_b * sb + m_c * sc) - j0 * m_c * cc * cc + b * cc],
        ]
    )


def stationary_angles(spec: ChainSpec, initial: tuple[float, float] = (1.0, 1.0)) -> SublatticeConfig:
    """Solve the coupled sublattice stationarity equations by Newton iteration.

    Raises NumericalError if the residual is not below ``1e-10`` within 100
    iterations; the message carries the last residual.
    """
    _require_periodic(spec, "stationary_angles")
    m_b, m_c = sublattice_sums(spec.n_sites, spec.alpha)
    j0, b = spec.coupling, spec.b
    x = np.array(initial, dtype=float)
    res = _residuals(*x, m_b, m_c, j0, b)
    for it in range(NEWTON_MAX_ITER + 1):
        norm = float(np.abs(res).max())
        if norm < NEWTON_TOL:
            x, norm = _polish(x, norm, m_b, m_c, j0, b)
            return SublatticeConfig(float(x[0]), float(x[1]), m_b, m_c, spec.n_sites, norm, it)
        if it == NEWTON_MAX_ITER:
            break
        jac = _jacobian(*x, m_b, m_c, j0, b)
        try:
            step = np.linalg.solve(jac, res)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(jac, res, rcond=None)[0]
        x = x - step
        res = _residuals(*x, m_b, m_c, j0, b)
    raise NumericalError(f"sublattice Newton solve did not converge in {NEWTON_MAX_ITER} iterations; residual {norm:.3e}")


def _polish(x, norm, m_b, m_c, j0, b, steps: int = 3):
    # quadratic convergence: a few extra steps reach rounding level
    for _ in range(steps):
        try:
            trial = x - np.linalg.solve(_jacobian(*x, m_b, m_c, j0, b), _residuals(*x, m_b, m_c, j0, b))
        except np.linalg.LinAlgError:
            break
        tnorm = float(np.abs(_residuals(*trial, m_b, m_c, j0, b)).max())
        if not tnorm < norm:
            break
        x, norm = trial, tnorm
    return x, norm


def uniform_config(spec: ChainSpec) -> SublatticeConfig:
    """Both sublattices at the closed-form uniform stationary angle.

    Exact at the critical field too, where the double root makes Newton
    iteration converge only linearly.
    """
    angle = stationary_angle(spec, "uniform")
    m_b, m_c = sublattice_sums(spec.n_sites, spec.alpha)
    cfg = SublatticeConfig(angle.phi_c, angle.phi_c, m_b, m_c, spec.n_sites)
    return SublatticeConfig(angle.phi_c, angle.phi_c, m_b, m_c, spec.n_sites, config_residual(spec, cfg))


def config_residual(spec: ChainSpec, config: SublatticeConfig) -> float:
    return float(np.abs(_residuals(config.phi_b, config.phi_c, config.m_b, config.m_c, spec.coupling, spec.b)).max())


def reduced_grid(n: int | float, n_points: int = DEFAULT_INF_POINTS) -> np.ndarray:
    """Reduced-zone momenta ``4 pi m / N`` for ``m`` in ``I_{N/2}``."""
    if math.isinf(n):
        return np.linspace(-math.pi, math.pi, n_points)
    half = int(n) // 2
    if half == 1:
        return np.array([0.0])
    return 4.0 * math.pi * np.asarray(index_set(half).members, dtype=float) / n


def displacement_sums(spec: ChainSpec, q: float) -> tuple[float, float]:
    """Same- and cross-sublattice Fourier sums at reduced momentum ``q``.

    Finite rings use the exact displacement sums; the infinite chain uses
    ``2^(1-a) Re Li_a(e^{iq})`` and ``2^(1-a) Re[e^{iq/2} Phi(e^{iq}, a, 1/2)]``.
    """
    p = 0.5 * q
    alpha = spec.alpha
    if spec.infinite:
        if math.isinf(alpha):
            return 0.0, 2.0 * math.cos(p)
        pref = 2.0 ** (1.0 - alpha)
        same = pref * float(clausen_truncated(alpha, q, math.inf))
        cross = pref * (complex(math.cos(p), math.sin(p)) * lerch(q, alpha, 0.5)).real
        return same, cross
    r = _displacements(spec.n_sites)
    w = distance_weight(np.abs(r), alpha) * np.cos(p * r)
    odd = r % 2 != 0
    return float(w[~odd].sum()), float(w[odd].sum())


def bdg_block(spec: ChainSpec, config: SublatticeConfig, k: float) -> BdGBlock:
    """4x4 block ``[[Omega + W, W], [W, Omega + W]]`` and its two bands."""
    if config_residual(spec, config) > STATIONARY_TOL:
        raise DomainError("sublattice configuration is not stationary (residual above 1e-8)")
    j0, b = spec.coupling, spec.b
    sb, cb = math.sin(config.phi_b), math.cos(config.phi_b)
    sc, cc = math.sin(config.phi_c), math.cos(config.phi_c)
    omega_b = 2.0 * j0 * sb * (config.m_b * sc + config.m_c * sb) + 2.0 * b * cb
    omega_c = 2.0 * j0 * sc * (config.m_b * sb + config.m_c * sc) + 2.0 * b * cc
    same, cross = displacement_sums(spec, k)
    w = -j0 * np.array([[cb * cb * same, cb * cc * cross], [cc * cb * cross, cc * cc * same]])
    a = np.diag([omega_b, omega_c]) + w
    h = np.block([[a, w], [w, a]])
    bands, stable = _para_bands(h)
    return BdGBlock(float(k), h, bands, stable)


def _para_bands(h: np.ndarray) -> tuple[np.ndarray, bool]:
    eta = np.array([1.0, 1.0, -1.0, -1.0])
    vals = sla.eigvals(eta[:, None] * h)
    scale = max(1.0, float(np.abs(vals).max()))
    if np.abs(vals.imag).max() > 1e-9 * scale:
        return np.full(2, np.nan), False
    # eigenvalues come in +/- pairs; keep one of each
    return np.sort(np.abs(vals.real))[::2], True


def bdg_bands(spec: ChainSpec, config: SublatticeConfig, n_points: int = DEFAULT_INF_POINTS) -> BandTable:
    qs = reduced_grid(spec.n_sites, n_points)
    blocks = [bdg_block(spec, config, q) for q in qs]
    return BandTable(qs, np.array([blk.bands for blk in blocks]), np.array([blk.stable for blk in blocks]), config)
