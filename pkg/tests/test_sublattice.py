import math

import mpmath
import numpy as np
import pytest

from lrchain import spinwaves as sw
from lrchain import sublattice as sl
from lrchain.errors import DomainError
from lrchain.model import INF, ChainSpec

P = "periodic"


def ring(n, **kw):
    return ChainSpec(n, boundary=P, **kw)


def folded_single_lattice(spec, q):
    # the two uniform-pattern modes that fold onto reduced momentum q
    return np.sort([sw.mode_energy(spec, "uniform", spec.b, 0.5 * q), sw.mode_energy(spec, "uniform", spec.b, 0.5 * q + math.pi)])


class TestSums:
    def test_examples(self):
        assert sl.sublattice_sums(4, 1.0) == pytest.approx((2.0, 0.5))
        mb, mc = sl.sublattice_sums(INF, 2.0)
        assert mb == pytest.approx(math.pi**2 / 4, rel=1e-12)
        assert mc == pytest.approx(math.pi**2 / 12, rel=1e-12)
        assert sl.sublattice_sums(INF, INF) == (2.0, 0.0)

    @pytest.mark.parametrize("n", [2, 4, 6, 10, 30])
    @pytest.mark.parametrize("alpha", [0.0, 0.7, 2.0, INF])
    def test_partition_of_equal_coupling(self, n, alpha):
        mb, mc = sl.sublattice_sums(n, alpha)
        je, ja = sw.effective_couplings_periodic(ring(n, alpha=alpha))
        assert mb + mc == pytest.approx(2 * je, abs=1e-13)
        assert mc - mb == pytest.approx(2 * ja, abs=1e-13)

    def test_large_ring_approaches_infinite(self):
        a = np.array(sl.sublattice_sums(20000, 3.0))
        assert np.allclose(a, sl.sublattice_sums(INF, 3.0), atol=1e-7)

    def test_errors(self):
        with pytest.raises(DomainError):
            sl.sublattice_sums(5, 1.0)
        with pytest.raises(DomainError):
            sl.sublattice_sums(INF, 1.0)


class TestNewton:
    @pytest.mark.parametrize("b", [0.0, 0.5, 1.0, 2.5])
    def test_converges_to_uniform_root(self, b):
        spec = ring(8, alpha=1.5, b=b)
        cfg = sl.stationary_angles(spec, (0.9, 0.9))
        assert cfg.residual < 1e-10
        assert sl.config_residual(spec, cfg) == cfg.residual
        je, _ = sw.effective_couplings_periodic(spec)
        # any uniform stationary root: ordered or collinear with the field axis
        assert math.sin(cfg.phi_b - cfg.phi_c) == pytest.approx(0.0, abs=1e-9)
        on_axis = abs(math.sin(cfg.phi_b)) < 1e-9
        assert on_axis or math.cos(cfg.phi_b) == pytest.approx(b / (2 * je), abs=1e-9)

    def test_alternating_root(self):
        spec = ring(8, alpha=1.5, b=0.2, j0=-1.0)
        cfg = sl.stationary_angles(spec, (1.2, -1.2))
        assert cfg.residual < 1e-10
        assert cfg.phi_b == pytest.approx(-cfg.phi_c, abs=1e-9)

    def test_uniform_config_exact_at_critical(self):
        spec = ring(10, alpha=2.0)
        spec = spec.replace(b=sw.critical_field(spec))
        cfg = sl.uniform_config(spec)
        assert cfg.phi_b == 0.0 and cfg.residual < 1e-15

    def test_non_stationary_rejected(self):
        spec = ring(6, alpha=1.0, b=0.4)
        mb, mc = sl.sublattice_sums(6, 1.0)
        bad = sl.SublatticeConfig(0.3, 1.1, mb, mc, 6)
        with pytest.raises(DomainError):
            sl.bdg_block(spec, bad, 0.0)


class TestBands:
    def test_reduced_grid(self):
        assert sl.reduced_grid(2).tolist() == [0.0]
        assert np.allclose(sl.reduced_grid(8), [-math.pi, -math.pi / 2, 0.0, math.pi / 2])
        assert len(sl.reduced_grid(INF, 33)) == 33

    def test_block_structure(self):
        spec = ring(8, alpha=1.2, b=0.5)
        blk = sl.bdg_block(spec, sl.uniform_config(spec), 0.7)
        h = blk.h_k
        assert np.array_equal(h, h.T)
        assert np.array_equal(h[:2, :2], h[2:, 2:]) and np.array_equal(h[:2, 2:], h[2:, :2])
        eta = np.diag([1.0, 1.0, -1.0, -1.0])
        vals = np.sort(np.linalg.eigvals(eta @ h).real)
        # +/- pairs
        assert np.allclose(vals, -vals[::-1], atol=1e-12)
        assert np.allclose(np.sort(vals[2:]), blk.bands, atol=1e-12)

    @pytest.mark.parametrize("n", [2, 4, 8, 12])
    @pytest.mark.parametrize("alpha", [0.0, 1.0, 2.5, INF])
    def test_fold_back(self, n, alpha):
        base = ring(n, alpha=alpha)
        je, _ = sw.effective_couplings_periodic(base)
        for b in (0.0, 0.6 * je, 1.3 * je, 2.7 * je):
            spec = base.replace(b=b)
            table = sl.bdg_bands(spec, sl.uniform_config(spec))
            assert table.stable.all()
            for q, bands in zip(table.q, table.bands):
                assert np.max(np.abs(bands - folded_single_lattice(spec, q))) < 1e-10

    def test_fold_back_at_critical_field(self):
        # the k=0 mode is a zero mode here; its energy is a square root of rounding noise
        for n in (4, 8, 16):
            base = ring(n, alpha=1.0)
            spec = base.replace(b=sw.critical_field(base))
            table = sl.bdg_bands(spec, sl.uniform_config(spec))
            for q, bands in zip(table.q, table.bands):
                assert np.max(np.abs(bands - folded_single_lattice(spec, q))) < 1e-6

    def test_fold_back_infinite(self):
        spec = ring(INF, alpha=2.5, b=1.0)
        table = sl.bdg_bands(spec, sl.uniform_config(spec), n_points=41)
        for q, bands in zip(table.q, table.bands):
            assert np.max(np.abs(bands - folded_single_lattice(spec, q))) < 1e-10

    def test_alternating_pattern_is_the_folded_band(self):
        spec = ring(8, alpha=1.5, b=0.2, j0=-1.0)
        cfg = sl.stationary_angles(spec, (1.2, -1.2))
        table = sl.bdg_bands(spec, cfg)
        ring_modes = np.sort(sw.dispersion(spec, "alternating").energy)
        assert np.allclose(np.sort(table.bands.ravel()), ring_modes, atol=1e-9)


class TestInfiniteSums:
    @pytest.mark.parametrize("alpha", [1.5, 2.0, 3.0])
    @pytest.mark.parametrize("q", [0.4, 1.7, 3.0])
    def test_match_large_ring(self, alpha, q):
        n = 40000
        r = np.arange(1, n // 2)
        w = r.astype(float) ** -alpha
        same = 2 * np.sum(w[r % 2 == 0] * np.cos(0.5 * q * r[r % 2 == 0]))
        cross = 2 * np.sum(w[r % 2 == 1] * np.cos(0.5 * q * r[r % 2 == 1]))
        s, c = sl.displacement_sums(ring(INF, alpha=alpha), q)
        tol = 4 * (n / 2) ** (1 - alpha)
        assert s == pytest.approx(same, abs=tol) and c == pytest.approx(cross, abs=tol)

    @pytest.mark.parametrize("alpha", [1.5, 2.0, 3.0])
    def test_cross_is_polylog_minus_same(self, alpha):
        for q in (0.3, 1.0, 2.5):
            s, c = sl.displacement_sums(ring(INF, alpha=alpha), q)
            total = 2 * float(mpmath.polylog(alpha, mpmath.exp(0.5j * q)).real)
            assert c == pytest.approx(total - s, abs=1e-10)

    def test_nearest_neighbour(self):
        assert sl.displacement_sums(ring(INF, alpha=INF), 1.0) == (0.0, pytest.approx(2 * math.cos(0.5)))
