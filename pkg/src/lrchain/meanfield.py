"""Multi-configurational mean-field spectra from one-dimensional landscapes.

Each product of spin-coherent states is labelled by per-site lengths ``l_i``
and two sign vectors: ``eps`` (``sin phi_i = eps_i sin phi``, an inverted spin)
and ``xi`` (``cos phi_i = xi_i cos phi``, a flipped spin). Its energy per
elementary spin is the landscape

    E(phi) = -J_mu sin(phi)**2 - B_mu cos(phi)

whose extremum, as a function of the field, is a semiclassical level.
"""

from __future__ import annotations

import itertools
import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Literal

import numpy as np
from scipy.special import comb

from . import exact
from .errors import DomainError, NotALevelError, ResourceError
from .model import Boundary, ChainSpec, coupling_matrix, distance_weight, zeta_eta

DEFAULT_ENUM_BUDGET = 2**26

Mode = Literal["eps_only", "eps_xi", "full_lengths"]


@dataclass(frozen=True)
class SpinConfiguration:
    lengths: tuple[float, ...]
    eps: tuple[int, ...]
    xi: tuple[int, ...]

    @property
    def n_sites(self) -> int:
        return len(self.eps)

    @property
    def r_domain_walls(self) -> int:
        return sum(1 for a, b in zip(self.eps, self.eps[1:]) if a * b == -1)

    @property
    def s_inverted(self) -> int:
        return self.eps.count(-1)

    @property
    def k_flipped(self) -> int:
        return self.xi.count(-1)

    def angles(self, phi: float) -> np.ndarray:
        """Per-site angles: phi, -phi, phi + pi or pi - phi."""
        eps = np.asarray(self.eps)
        xi = np.asarray(self.xi)
        return np.arctan2(eps * math.sin(phi), xi * math.cos(phi))

    @classmethod
    def uniform(cls, n: int, spin2: int = 1) -> "SpinConfiguration":
        return cls((spin2 / 2,) * n, (1,) * n, (1,) * n)

    @classmethod
    def alternating(cls, n: int, spin2: int = 1) -> "SpinConfiguration":
        return cls((spin2 / 2,) * n, tuple(1 if i % 2 == 0 else -1 for i in range(n)), (1,) * n)


@dataclass(frozen=True)
class EffectiveCouplings:
    """Coordinates ``(J_mu, B_mu / B)`` of a one-dimensional landscape."""

    j_mu: float
    b_mu_per_field: float
    multiplicity: int | float = 1

    @property
    def stable(self) -> bool:
        return self.j_mu > 0 and self.b_mu_per_field > 0

    @property
    def bifurcation_field(self) -> float:
        if self.b_mu_per_field == 0:
            return math.inf
        return 2.0 * abs(self.j_mu) / abs(self.b_mu_per_field)


@dataclass(frozen=True)
class SemiclassicalLevel:
    """Extremum of a landscape as a closed-form function of the field.

    ``energy`` is per elementary spin; ``total_energy`` multiplies by the
    number of elementary spins ``2SN`` passed as ``scale``.
    """

    couplings: EffectiveCouplings
    branch: Literal["min", "max"]
    b_c: float
    scale: float = 1.0

    def energy(self, b):
        j = self.couplings.j_mu
        slope = abs(self.couplings.b_mu_per_field)
        bm = slope * np.asarray(b, dtype=float)
        quad = -j - bm**2 / (4.0 * j)
        lin = -bm if self.branch == "min" else bm
        out = np.where(bm < 2.0 * abs(j), quad, lin)
        return float(out) if out.ndim == 0 else out

    def total_energy(self, b):
        return self.scale * self.energy(b)

    @property
    def second_derivative_jump(self) -> float:
        """``E''(b_c+) - E''(b_c-)`` of the per-spin energy."""
        return self.couplings.b_mu_per_field**2 / (2.0 * self.couplings.j_mu)


@dataclass
class LevelTable:
    levels: np.ndarray
    degeneracy: np.ndarray

    def as_multiset(self) -> np.ndarray:
        return np.repeat(self.levels, self.degeneracy.astype(np.int64))


@dataclass
class BifurcationHistogram:
    bins: np.ndarray
    counts: np.ndarray
    stable_only: bool
    weighting: str
    counts_configs: np.ndarray = field(repr=False, default=None)
    counts_levels: np.ndarray = field(repr=False, default=None)

    @property
    def centers(self) -> np.ndarray:
        return np.sqrt(self.bins[:-1] * self.bins[1:])

    def peak(self) -> float:
        return float(self.centers[int(np.argmax(self.counts))])


@dataclass
class DeviationTable:
    b: np.ndarray
    e_min: np.ndarray
    e0: np.ndarray

    @property
    def d(self) -> np.ndarray:
        return (self.e_min - self.e0) / np.abs(self.e0)


def landscape_energy(j_mu, b_mu, phi):
    """Energy per elementary spin ``-J sin^2(phi) - B cos(phi)``."""
    phi = np.asarray(phi, dtype=float)
    out = -np.asarray(j_mu) * np.sin(phi) ** 2 - np.asarray(b_mu) * np.cos(phi)
    return float(out) if np.ndim(out) == 0 else out


def effective_couplings(spec: ChainSpec, config: SpinConfiguration, kmat: np.ndarray | None = None) -> EffectiveCouplings:
    n = spec.require_finite("effective_couplings")
    if config.n_sites != n:
        raise ValueError(f"configuration has {config.n_sites} sites, chain has {n}")
    if kmat is None:
        kmat = coupling_matrix(spec)
    s = spec.spin
    l = np.asarray(config.lengths, dtype=float)
    v = l * np.asarray(config.eps)
    j = float(v @ kmat @ v) / (2.0 * s * s * n)
    slope = float(l @ np.asarray(config.xi)) / (s * n)
    return EffectiveCouplings(j, slope)


def semiclassical_level(couplings: EffectiveCouplings, scale: float = 1.0) -> SemiclassicalLevel:
    """Closed-form extremum of a landscape with nonzero couplings of equal sign.

    Positive couplings give a minimum, negative ones a maximum; the pair is
    mapped onto a positive effective field by ``phi -> phi + pi``.
    """
    j, slope = couplings.j_mu, couplings.b_mu_per_field
    if j == 0 or slope == 0 or (j > 0) != (slope > 0):
        raise NotALevelError(f"(J_mu={j}, B_mu/B={slope}) does not define a semiclassical level")
    return SemiclassicalLevel(couplings, "min" if j > 0 else "max", couplings.bifurcation_field, scale)


# --- enumeration ---------------------------------------------------------------


def _length_choices(spin2: int) -> tuple[float, ...]:
    lo = 0 if spin2 % 2 == 0 else 1
    return tuple(x / 2 for x in range(lo, spin2 + 1, 2))


def _enum_size(n: int, spin2: int, mode: Mode) -> int:
    if mode == "eps_only":
        return 2**n
    if mode == "eps_xi":
        return 4**n
    if mode == "full_lengths":
        return (4 * len(_length_choices(spin2))) ** n
    raise ValueError(f"unknown enumeration mode {mode!r}")


def _orbit(cfg: tuple, z2: bool, mirror: bool) -> set:
    # cfg = (lengths, eps, xi); the group is generated by the global eps flip and the mirror
    images = {cfg}
    if z2:
        images |= {(l, tuple(-e for e in eps), xi) for l, eps, xi in images}
    if mirror:
        images |= {(l[::-1], eps[::-1], xi[::-1]) for l, eps, xi in images}
    return images


def enumerate_configs(
    spec: ChainSpec,
    mode: Mode = "eps_only",
    z2: bool = False,
    mirror: bool = False,
    budget: int = DEFAULT_ENUM_BUDGET,
) -> Iterator[tuple[SpinConfiguration, EffectiveCouplings]]:
    """Stream configurations in lexicographic order with their couplings.

    ``z2`` keeps one representative per global inversion pair and ``mirror``
    one per reflection ``i -> N - i + 1`` (open chains only); the yielded
    ``multiplicity`` is the size of the discarded orbit, so weighted totals
    are unchanged.
    """
    n = spec.require_finite("enumerate_configs")
    size = _enum_size(n, spec.spin2, mode)
    if size > budget:
        raise ResourceError(f"{mode} enumeration of {size} configurations exceeds budget {budget}")
    if mirror and spec.boundary is not Boundary.OPEN:
        raise ValueError("mirror reduction is defined for open chains")
    kmat = coupling_matrix(spec)
    s = spec.spin
    signs = (1, -1)
    lengths_opts = [(s,) * n] if mode != "full_lengths" else list(itertools.product(_length_choices(spec.spin2), repeat=n))
    xi_opts = [(1,) * n] if mode == "eps_only" else list(itertools.product(signs, repeat=n))
    for lengths in lengths_opts:
        for eps in itertools.product(signs, repeat=n):
            for xi in xi_opts:
                weight = 1
                if z2 or mirror:
                    key = (lengths, eps, xi)
                    orbit = _orbit(key, z2, mirror)
                    # canonical representative: first in enumeration order
                    if min(orbit, key=_lex_key) != key:
                        continue
                    weight = len(orbit)
                cfg = SpinConfiguration(lengths, eps, xi)
                c = effective_couplings(spec, cfg, kmat)
                yield cfg, EffectiveCouplings(c.j_mu, c.b_mu_per_field, weight)


def _lex_key(cfg):
    lengths, eps, xi = cfg
    # +1 sorts before -1, lengths descend from S, matching the enumeration order
    return (tuple(-x for x in lengths), tuple(-e for e in eps), tuple(-x for x in xi))


def _eps_matrix(n: int, start: int, stop: int) -> np.ndarray:
    codes = np.arange(start, stop, dtype=np.int64)
    bits = (codes[:, None] >> np.arange(n - 1, -1, -1)) & 1
    return 1.0 - 2.0 * bits


def _j_key_factory(spec: ChainSpec, kmat: np.ndarray):
    """Exact grouping of J_mu when couplings are integer multiples of J0."""
    j0 = spec.coupling
    n = spec.n_sites
    if j0 != 0 and np.all(kmat / j0 == np.round(kmat / j0)):
        kint = np.round(kmat / j0)
        return kint, lambda q: Fraction(int(round(q)), 2 * n), lambda key: j0 * float(key)
    scale = abs(j0) if j0 != 0 else 1.0
    return kmat, lambda q: int(round(q / (2 * n) / scale / 1e-12)), None


def eps_coupling_levels(spec: ChainSpec, budget: int = DEFAULT_ENUM_BUDGET, chunk: int = 1 << 16) -> LevelTable:
    """Distinct ``J_mu`` over all ``2^N`` inversion patterns at full length.

    Grouping is exact (rational) when every pair coupling is an integer
    multiple of ``J0`` and uses a ``1e-12`` relative grid otherwise.
    """
    n = spec.require_finite("eps_coupling_levels")
    if 2**n > budget:
        raise ResourceError(f"2^{n} inversion patterns exceed enumeration budget {budget}")
    kmat = coupling_matrix(spec)
    kuse, keyfn, exact_value = _j_key_factory(spec, kmat)
    counts: dict = defaultdict(int)
    sums: dict = defaultdict(float)
    for start in range(0, 2**n, chunk):
        e = _eps_matrix(n, start, min(2**n, start + chunk))
        q = np.einsum("ij,jk,ik->i", e, kuse, e)
        vals, inv, cnt = np.unique(q, return_inverse=True, return_counts=True)
        for v, c in zip(vals, cnt):
            key = keyfn(v)
            counts[key] += int(c)
            sums[key] += float(v) * int(c)
    keys = sorted(counts)
    if exact_value is not None:
        js = np.array([exact_value(k) for k in keys])
    else:
        js = np.array([sums[k] / counts[k] / (2 * n) for k in keys])
    deg = np.array([counts[k] for k in keys], dtype=float)
    order = np.argsort(js)
    return LevelTable(js[order], deg[order])


def slope_levels(n: int) -> LevelTable:
    """Field slopes ``(N - 2k)/N`` of full-length flip patterns with ``C(N, k)``."""
    k = np.arange(n + 1)
    return LevelTable((n - 2 * k) / n, comb(n, k, exact=False))


def distinct_couplings(
    spec: ChainSpec, mode: Mode = "eps_only", budget: int = DEFAULT_ENUM_BUDGET
) -> list[EffectiveCouplings]:
    """Distinct ``(J_mu, B_mu/B)`` pairs with configuration multiplicities."""
    n = spec.require_finite("distinct_couplings")
    if mode == "full_lengths":
        acc: dict = defaultdict(float)
        for _, c in enumerate_configs(spec, mode, budget=budget):
            acc[(round(c.j_mu, 12), round(c.b_mu_per_field, 12))] += c.multiplicity
        return [EffectiveCouplings(j, b, m) for (j, b), m in sorted(acc.items())]
    jt = eps_coupling_levels(spec, budget)
    if mode == "eps_only":
        return [EffectiveCouplings(float(j), 1.0, int(d)) for j, d in zip(jt.levels, jt.degeneracy)]
    if _enum_size(n, spec.spin2, mode) > budget:
        raise ResourceError(f"eps_xi enumeration of 4^{n} configurations exceeds budget {budget}")
    bt = slope_levels(n)
    return [
        EffectiveCouplings(float(j), float(b), int(dj) * int(db))
        for j, dj in zip(jt.levels, jt.degeneracy)
        for b, db in zip(bt.levels, bt.degeneracy)
    ]


# --- exact limits ---------------------------------------------------------------


def _value_assignments(n: int, spin2: int, budget: int) -> Iterator[np.ndarray]:
    d = spin2 + 1
    total = d**n
    if total > budget:
        raise ResourceError(f"{total} value assignments exceed budget {budget}")
    s = spin2 / 2
    mvals = s - np.arange(d)
    chunk = 1 << 16
    for start in range(0, total, chunk):
        codes = np.arange(start, min(total, start + chunk), dtype=np.int64)
        digits = (codes[:, None] // d ** np.arange(n - 1, -1, -1)) % d
        yield mvals[digits]


def ferro_spectrum_b0(spec: ChainSpec, budget: int = DEFAULT_ENUM_BUDGET) -> np.ndarray:
    """Total energies ``2SN E_mu`` at zero field over all ``l_i eps_i = m_i``.

    Every value assignment ``m_i in {-S..S}`` is realised by a coherent
    configuration of length ``|m_i|`` and sign ``sgn m_i`` at ``phi = pi/2``.
    """
    n = spec.require_finite("ferro_spectrum_b0")
    kmat = coupling_matrix(spec)
    s = spec.spin
    out = []
    for m in _value_assignments(n, spec.spin2, budget):
        j_mu = np.einsum("ij,jk,ik->i", m, kmat, m) / (2.0 * s * s * n)
        out.append(-2.0 * s * n * j_mu)
    return np.sort(np.concatenate(out))


def para_spectrum_j0(spec: ChainSpec, budget: int = DEFAULT_ENUM_BUDGET) -> np.ndarray:
    """Total energies at zero coupling, ``-2B sum_i l_i xi_i`` at ``phi = 0``."""
    n = spec.require_finite("para_spectrum_j0")
    s = spec.spin
    out = []
    for m in _value_assignments(n, spec.spin2, budget):
        b_mu = spec.b * m.sum(axis=1) / (s * n)
        out.append(-2.0 * s * n * b_mu)
    return np.sort(np.concatenate(out))


def ising_levels(n: int, j0: float = 1.0) -> LevelTable:
    """Nearest-neighbour levels ``-J0 (N - 1 - 2r)`` with ``2 C(N-1, r)`` states."""
    if n < 2:
        raise ValueError("ising_levels needs n >= 2")
    r = np.arange(n)
    levels = -j0 * (n - 1 - 2 * r)
    deg = 2 * comb(n - 1, r, exact=False)
    order = np.argsort(levels, kind="stable")
    return LevelTable(levels[order].astype(float), deg[order])


def lmg_levels(n: int, j0: float = 1.0, kac_rescale: bool = False) -> LevelTable:
    """All-to-all levels ``-(J0/2)[(N - 2s)^2 - N]`` grouped by energy.

    ``kac_rescale`` divides the coupling by ``N``.
    """
    if n < 2:
        raise ValueError("lmg_levels needs n >= 2")
    j = j0 / n if kac_rescale else j0
    s = np.arange(n + 1)
    raw = -0.5 * j * ((n - 2 * s) ** 2 - n)
    deg = comb(n, s, exact=False)
    acc: dict = defaultdict(float)
    for key, e, d in zip(np.abs(n - 2 * s), raw, deg):
        acc[(int(key), float(e))] += d
    items = sorted(acc.items(), key=lambda kv: kv[0][1])
    return LevelTable(np.array([k[1] for k, _ in items]), np.array([v for _, v in items]))


def counting_function(levels, e, degeneracy=None) -> float:
    """Fraction of levels at or below ``e`` (a level exactly at ``e`` counts)."""
    if isinstance(levels, LevelTable):
        levels, degeneracy = levels.levels, levels.degeneracy
    vals = np.asarray(levels, dtype=float)
    if vals.size == 0:
        raise ValueError("counting_function needs at least one level")
    w = np.ones_like(vals) if degeneracy is None else np.asarray(degeneracy, dtype=float)
    return float(w[vals <= e].sum() / w.sum())


def effective_boundary_couplings(spec: ChainSpec) -> tuple[float, float]:
    """Open-chain ``(J_e, J_a)`` of the equal and alternating configurations.

    For an infinite chain these are ``(J0 zeta, -J0 eta)``; ``J_e`` is
    ``inf`` when ``alpha <= 1``.
    """
    if spec.boundary is not Boundary.OPEN:
        raise ValueError("effective_boundary_couplings is defined for open chains")
    j0 = spec.coupling
    if spec.infinite:
        tc = zeta_eta(spec.alpha, j0=j0)
        return tc.j_e_inf, tc.j_a_inf
    n = spec.n_sites
    k = np.arange(1, n)
    w = distance_weight(k, spec.alpha) * (n - k) / n
    return float(j0 * w.sum()), float(j0 * (w * (-1.0) ** k).sum())


# --- ground-state deviation -----------------------------------------------------


def semiclassical_ground_energy(
    spec: ChainSpec, b_grid, mode: Mode = "eps_only", budget: int = DEFAULT_ENUM_BUDGET
) -> np.ndarray:
    """Lowest semiclassical total energy ``E^min(B)`` on ``b_grid``.

    Only minimum-branch levels compete; at fields where none is below the
    polarised value the landscape minimum ``-B_mu`` at ``phi = 0`` is used.
    """
    n = spec.require_finite("semiclassical_ground_energy")
    b = np.asarray(b_grid, dtype=float)
    scale = spec.spin2 * n
    pairs = distinct_couplings(spec, mode, budget)
    best_slope = max((c.b_mu_per_field for c in pairs), default=1.0)
    e = -best_slope * b
    for c in pairs:
        if c.stable:
            e = np.minimum(e, semiclassical_level(c).energy(b))
    return scale * e


def deviation(
    spec: ChainSpec, b_grid, mode: Mode = "eps_only", threads: int = 1, budget: int = DEFAULT_ENUM_BUDGET
) -> DeviationTable:
    """Relative gap ``(E^min - E_0)/|E_0|`` between mean-field and exact ground energies."""
    b = np.asarray(b_grid, dtype=float)
    e_min = semiclassical_ground_energy(spec, b, mode, budget)

    def solve(bb):
        return exact.ground_state_energy(spec.replace(b=float(bb)))

    if threads and threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            e0 = np.array(list(pool.map(solve, b)))
    else:
        e0 = np.array([solve(bb) for bb in b])
    bad = np.flatnonzero(np.abs(e0) < 1e-12)
    if bad.size:
        raise DomainError(f"exact ground energy vanishes at b={b[bad[0]]}; d(B) undefined")
    return DeviationTable(b, e_min, e0)


# --- bifurcation statistics -----------------------------------------------------


def _log_bins(points: np.ndarray, bins_per_decade: int) -> np.ndarray:
    lo = math.floor(math.log10(points.min()) * bins_per_decade) - 1
    hi = math.ceil(math.log10(points.max()) * bins_per_decade) + 1
    if hi <= lo + 2:
        hi = lo + 3
    return 10.0 ** (np.arange(lo, hi + 1) / bins_per_decade)


def bifurcation_points(spec: ChainSpec, stable_only: bool = True, budget: int = DEFAULT_ENUM_BUDGET):
    """Bifurcation fields with (configuration, level) weights.

    Inversion patterns fix ``J_mu`` and flip patterns fix the slope, so the
    two are combined as a product. Nearest-neighbour and all-to-all open
    spin-1/2 chains use the closed-form level tables.
    """
    n = spec.require_finite("bifurcation_points")
    j0 = spec.coupling
    fast = spec.spin2 == 1 and spec.boundary is Boundary.OPEN and (spec.alpha == 0 or math.isinf(spec.alpha))
    if fast:
        table = ising_levels(n, j0) if math.isinf(spec.alpha) else lmg_levels(n, j0)
        jt = LevelTable(-table.levels / n, table.degeneracy)
    else:
        jt = eps_coupling_levels(spec, budget)
    bt = slope_levels(n)
    pos_b = bt.levels > 0
    bl, bd = bt.levels[pos_b], bt.degeneracy[pos_b]
    keep = jt.levels > 0 if stable_only else jt.levels != 0
    jl, jd = jt.levels[keep], jt.degeneracy[keep]
    points = (2.0 * np.abs(jl)[:, None] / bl[None, :]).ravel()
    w_cfg = (jd[:, None] * bd[None, :]).ravel()
    return points, w_cfg, np.ones_like(points)


def bifurcation_histogram(
    spec: ChainSpec,
    bins_per_decade: int = 10,
    stable_only: bool = True,
    weighting: Literal["levels", "configs"] = "levels",
    budget: int = DEFAULT_ENUM_BUDGET,
) -> BifurcationHistogram:
    """Log-binned histogram of bifurcation fields ``2|J_mu| / (B_mu/B)``.

    Both weightings are computed; ``weighting`` picks the one exposed as
    ``counts``. Edges sit on a fixed ``10**(m/bins_per_decade)`` grid with one
    empty guard bin on either side of the data.
    """
    points, w_cfg, w_lvl = bifurcation_points(spec, stable_only, budget)
    if points.size == 0:
        raise DomainError("no contributing configurations: all J_mu vanish or have the wrong sign")
    edges = _log_bins(points, bins_per_decade)
    c_cfg, _ = np.histogram(points, edges, weights=w_cfg)
    c_lvl, _ = np.histogram(points, edges, weights=w_lvl)
    counts = c_lvl if weighting == "levels" else c_cfg
    return BifurcationHistogram(edges, counts, stable_only, weighting, c_cfg, c_lvl)


def loglog_slope(x, y) -> float:
    """Least-squares slope of ``log y`` against ``log x`` over positive entries."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    ok = (x > 0) & (y > 0)
    if ok.sum() < 2:
        raise ValueError("need at least two positive points for a log-log fit")
    return float(np.polyfit(np.log(x[ok]), np.log(y[ok]), 1)[0])
