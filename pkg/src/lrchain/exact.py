"""Exact diagonalization of the chain Hamiltonian.

A global pi/2 rotation about x maps S_y onto S_z, so in the S_z product
basis the Hamiltonian

    H' = -(2/S) sum_{i<j} J_ij Sx_i Sx_j - 2B sum_i Sz_i

is real symmetric and has the same spectrum as the original model.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .errors import NumericalError
from .model import DEFAULT_DIM_BUDGET, ChainSpec, coupling_matrix

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DenseHamiltonian:
    dim: int
    matrix: np.ndarray
    spec: ChainSpec


@dataclass
class SpectrumSeries:
    """Full spectra along a field grid, one ascending row per grid point."""

    b_grid: np.ndarray
    levels: np.ndarray
    residuals: list[float] = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def ground_energy(self) -> np.ndarray:
        return self.levels[:, 0]


def spin_matrices(spin2: int) -> tuple[np.ndarray, np.ndarray]:
    """Real ``(Sx, Sz)`` for spin ``spin2/2`` in the basis ``m = S, S-1, ..., -S``."""
    s = spin2 / 2
    m = s - np.arange(spin2 + 1)
    # <m+1|S+|m> = sqrt(S(S+1) - m(m+1)) sits one row above the diagonal
    up = np.sqrt(s * (s + 1) - m[1:] * (m[1:] + 1))
    sx = 0.5 * (np.diag(up, 1) + np.diag(up, -1))
    return sx, np.diag(m)


def _site_operator(op: sp.spmatrix, site: int, n: int, d: int) -> sp.csr_matrix:
    left = sp.identity(d**site, format="csr")
    right = sp.identity(d ** (n - site - 1), format="csr")
    return sp.kron(sp.kron(left, op, format="csr"), right, format="csr")


def build_hamiltonian(spec: ChainSpec, budget: int = DEFAULT_DIM_BUDGET) -> DenseHamiltonian:
    dim = spec.check_budget(budget)
    n, d = spec.n_sites, spec.spin2 + 1
    sx, sz = spin_matrices(spec.spin2)
    k = coupling_matrix(spec)

    sx_sites = [_site_operator(sp.csr_matrix(sx), i, n, d) for i in range(n)]
    # field term is diagonal: accumulate m-values directly
    mz = np.diag(sz)
    diag = np.zeros(dim)
    for i in range(n):
        diag += np.tile(np.repeat(mz, d ** (n - i - 1)), d**i)
    h = sp.diags(-2.0 * spec.b * diag, format="csr")
    pref = -2.0 / spec.spin
    for i in range(n):
        for j in range(i + 1, n):
            if k[i, j] != 0.0:
                h = h + (pref * k[i, j]) * (sx_sites[i] @ sx_sites[j])
    mat = h.toarray()
    mat = 0.5 * (mat + mat.T)
    return DenseHamiltonian(dim, mat, spec)


def _eigvalsh(mat: np.ndarray) -> np.ndarray:
    try:
        return sla.eigh(mat, eigvals_only=True, check_finite=False)
    except (sla.LinAlgError, ValueError) as exc:
        raise NumericalError(f"dense eigensolver failed (dim {mat.shape[0]}): {exc}") from exc


def eigen_residual(mat: np.ndarray, index: int) -> float:
    """Relative residual ``|Hv - lv| / |H|`` of the ``index``-th eigenpair."""
    try:
        w, v = sla.eigh(mat, subset_by_index=[index, index], check_finite=False)
    except (sla.LinAlgError, ValueError) as exc:
        raise NumericalError(f"eigenpair {index} failed: {exc}") from exc
    vec = v[:, 0]
    norm = np.linalg.norm(mat, 2) if mat.shape[0] <= 512 else np.linalg.norm(mat, "fro")
    return float(np.linalg.norm(mat @ vec - w[0] * vec) / max(norm, 1e-300))


def spectrum(spec: ChainSpec, budget: int = DEFAULT_DIM_BUDGET) -> np.ndarray:
    """All eigenvalues of the chain, ascending, in energy units."""
    return _eigvalsh(build_hamiltonian(spec, budget).matrix)


def ground_state_energy(spec: ChainSpec, budget: int = DEFAULT_DIM_BUDGET) -> float:
    mat = build_hamiltonian(spec, budget).matrix
    try:
        w = sla.eigh(mat, eigvals_only=True, subset_by_index=[0, 0], check_finite=False)
    except (sla.LinAlgError, ValueError) as exc:
        raise NumericalError(f"ground state solve failed: {exc}") from exc
    return float(w[0])


def _sweep_point(spec: ChainSpec, b: float, budget: int, residuals: bool):
    mat = build_hamiltonian(spec.replace(b=float(b)), budget).matrix
    levels = _eigvalsh(mat)
    res = max(eigen_residual(mat, 0), eigen_residual(mat, mat.shape[0] - 1)) if residuals else float("nan")
    return levels, res


def spectrum_sweep(
    spec: ChainSpec,
    b_grid,
    threads: int = 1,
    budget: int = DEFAULT_DIM_BUDGET,
    residuals: bool = False,
) -> SpectrumSeries:
    """Full spectra at every field value of ``b_grid``.

    Points are independent; with ``threads > 1`` they run on a thread pool
    (LAPACK releases the GIL) and are merged back in grid order.
    """
    grid = np.asarray(b_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("b_grid must be a non-empty 1-d sequence")
    if np.any(np.diff(grid) < 0):
        raise ValueError("b_grid must be ascending")
    spec.check_budget(budget)
    start = time.perf_counter()

    def run(item):
        idx, b = item
        try:
            return _sweep_point(spec, b, budget, residuals)
        except NumericalError as exc:
            raise NumericalError(f"grid point {idx} (b={b}): {exc}") from exc

    items = list(enumerate(grid))
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, items))
    else:
        results = [run(it) for it in items]
    levels = np.vstack([r[0] for r in results])
    logger.debug("sweep of %d points took %.2fs", grid.size, time.perf_counter() - start)
    return SpectrumSeries(grid, levels, [r[1] for r in results], time.perf_counter() - start)
