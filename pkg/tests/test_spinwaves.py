import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lrchain import spinwaves as sw
from lrchain.errors import BranchError, DomainError
from lrchain.model import INF, ChainSpec, dirichlet_eta, riemann_zeta

P = "periodic"


def ring(n, **kw):
    return ChainSpec(n, boundary=P, **kw)


def numeric_gradient(spec, phi, h=1e-6):
    g = np.empty_like(phi)
    for i in range(len(phi)):
        up, dn = phi.copy(), phi.copy()
        up[i] += h
        dn[i] -= h
        g[i] = (sw.mean_field_energy_periodic(spec, up)[0] - sw.mean_field_energy_periodic(spec, dn)[0]) / (2 * h)
    return g


class TestEnergy:
    def test_polarised(self):
        e, g = sw.mean_field_energy_periodic(ring(5, alpha=1.0, b=0.7), np.zeros(5))
        assert e == pytest.approx(-0.7) and np.all(g == 0)

    def test_perpendicular(self):
        spec = ring(6, alpha=1.5)
        je, _ = sw.effective_couplings_periodic(spec)
        e, g = sw.mean_field_energy_periodic(spec, np.full(6, math.pi / 2))
        assert e == pytest.approx(-je) and np.allclose(g, 0, atol=1e-15)
        _, g = sw.mean_field_energy_periodic(spec.replace(b=0.6), np.full(6, math.pi / 2))
        assert np.allclose(g, 0.6 / 6)

    @given(st.integers(2, 9), st.sampled_from([0.0, 0.5, 1.3, 2.0, INF]), st.floats(0, 3), st.floats(-2, 2), st.integers(0, 2**31))
    @settings(max_examples=100, deadline=None)
    def test_gradient_finite_difference(self, n, alpha, b, j0, seed):
        spec = ring(n, alpha=alpha, b=b, j0=j0)
        phi = np.random.default_rng(seed).uniform(-math.pi, math.pi, n)
        _, g = sw.mean_field_energy_periodic(spec, phi)
        assert np.max(np.abs(g - numeric_gradient(spec, phi))) < 1e-6

    def test_requires_ring(self):
        with pytest.raises(ValueError):
            sw.mean_field_energy_periodic(ChainSpec(3), np.zeros(3))


class TestCouplings:
    def test_examples(self):
        assert sw.effective_couplings_periodic(ring(2, alpha=3.7))[0] == pytest.approx(0.5)
        je, ja = sw.effective_couplings_periodic(ring(5, alpha=2))
        assert je == pytest.approx(1.25) and ja == pytest.approx(-0.75)
        je, ja = sw.effective_couplings_periodic(ring(INF, alpha=2))
        assert je == pytest.approx(math.pi**2 / 6) and ja == pytest.approx(-math.pi**2 / 12)

    def test_divergent(self):
        with pytest.raises(DomainError):
            sw.effective_couplings_periodic(ring(INF, alpha=1.0))

    def test_pattern_energies(self):
        spec = ring(8, alpha=1.2)
        je, ja = sw.effective_couplings_periodic(spec)
        alt = np.where(np.arange(8) % 2 == 0, 1.0, -1.0) * math.pi / 2
        assert sw.mean_field_energy_periodic(spec, alt)[0] == pytest.approx(-ja)
        assert sw.mean_field_energy_periodic(spec, np.full(8, math.pi / 2))[0] == pytest.approx(-je)


class TestStationary:
    def test_uniform(self):
        spec = ring(6, alpha=2.0)
        je, _ = sw.effective_couplings_periodic(spec)
        assert sw.stationary_angle(spec, "uniform", 2 * je).phi_c == 0.0
        assert sw.stationary_angle(spec, "uniform", je).phi_c == pytest.approx(math.pi / 3)
        a = sw.stationary_angle(spec, "uniform", 3 * je)
        assert a.regime == "polarized" and a.branch == "min"

    def test_alternating(self):
        spec = ring(6, alpha=2.0)
        _, ja = sw.effective_couplings_periodic(spec)
        a = sw.stationary_angle(spec, "alternating", -2.5 * ja)
        assert a.phi_c == math.pi and a.branch == "max"
        a = sw.stationary_angle(spec, "alternating", -ja)
        # ordered root is continuous with phi = pi at the critical field
        assert math.cos(a.phi_c) == pytest.approx(-0.5)
        assert sw.stationary_angle(spec, "alternating", -2 * ja).phi_c == pytest.approx(math.pi)

    @pytest.mark.parametrize("kind", ["uniform", "alternating"])
    @pytest.mark.parametrize("n", [2, 4, 6, 10])
    @pytest.mark.parametrize("alpha", [0.0, 1.0, 2.5, INF])
    def test_gradient_vanishes(self, kind, n, alpha):
        for j0 in (1.0, -0.7):
            spec = ring(n, alpha=alpha, j0=j0)
            jp = sw._relevant_coupling(spec, kind)
            for b in (0.0, 0.4 * abs(jp), 1.7 * abs(jp), 2 * abs(jp), 3.0 * abs(jp)):
                a = sw.stationary_angle(spec, kind, b)
                _, g = sw.mean_field_energy_periodic(spec.replace(b=b), sw.expand_angles(n, a))
                assert np.max(np.abs(g)) < 1e-10

    def test_errors(self):
        with pytest.raises(BranchError):
            sw.stationary_angle(ring(4, j0=0.0), "uniform", 1.0)
        with pytest.raises(DomainError):
            sw.stationary_angle(ring(5), "alternating", 0.1)
        with pytest.raises(ValueError):
            sw.stationary_angle(ring(4), "diagonal", 0.1)


def ring_bdg_modes(spec, kind, b):
    a = sw.stationary_angle(spec, kind, b)
    phi = sw.expand_angles(spec.n_sites, a)
    am, wm = sw.fluctuation_matrices(spec.replace(b=b), phi)
    return np.sort(np.abs(sw.paradiagonalize(am, wm)))


class TestDispersion:
    @pytest.mark.parametrize("b", [0.0, 0.3, 0.999, 1.0, 1.7, 4.0])
    def test_two_site_dicke(self, b):
        c = sw.dispersion(ring(2), "uniform", b)
        em, ep, _ = sw.dicke_limit_check(1, b, 1.0)
        assert c.k_grid.tolist() == [-math.pi, 0.0]
        assert c.energy[1] == pytest.approx(em, abs=1e-12) and c.energy[0] == pytest.approx(ep, abs=1e-12)

    def test_flat_at_zero_field(self):
        for kind in ("uniform", "alternating"):
            spec = ring(10, alpha=1.5)
            c = sw.dispersion(spec, kind, 0.0)
            jp = c.angle.j_eff_p
            assert np.all(np.abs(c.g) < 1e-15)
            assert np.allclose(c.energy, 4 * abs(jp), atol=1e-13)

    def test_gapless_at_critical(self):
        spec = ring(12, alpha=2.0)
        assert sw.dispersion(spec, "uniform", sw.critical_field(spec)).energy[6] == 0.0
        c = sw.dispersion(spec, "alternating", sw.critical_field(spec, "alternating"))
        assert c.energy[0] == 0.0 and c.k_grid[0] == -math.pi

    @pytest.mark.parametrize("kind", ["uniform", "alternating"])
    @pytest.mark.parametrize("alpha", [0.0, 0.8, 2.0, INF])
    def test_matches_real_space_bdg(self, kind, alpha):
        spec = ring(8, alpha=alpha)
        jp = sw._relevant_coupling(spec, kind)
        for b in (0.0, 0.5 * abs(jp), 1.5 * abs(jp), 3 * abs(jp)):
            c = sw.dispersion(spec, kind, b)
            assert np.max(np.abs(ring_bdg_modes(spec, kind, b) - np.sort(c.energy))) < 1e-10

    def test_parity_and_bogoliubov(self):
        spec = ring(11, alpha=1.3, b=0.8)
        c = sw.dispersion(spec, "uniform")
        k = c.k_grid
        for i in range(len(k)):
            j = np.flatnonzero(np.isclose(k, -k[i]))
            if j.size:
                assert c.energy[i] == c.energy[j[0]]
        th = c.theta
        assert np.max(np.abs(np.cosh(th) ** 2 - np.sinh(th) ** 2 - 1)) < 1e-12
        assert np.allclose(np.tanh(2 * th), -c.g / c.f, atol=1e-12)

    def test_two_by_two_paradiagonalization(self):
        spec = ring(9, alpha=0.6, b=1.1)
        c = sw.dispersion(spec, "uniform")
        for f, g, e in zip(c.f, c.g, c.energy):
            h = np.array([[2 * f, 2 * g], [2 * g, 2 * f]])
            vals = np.linalg.eigvals(np.diag([1.0, -1.0]) @ h)
            assert np.max(vals.real) == pytest.approx(e, abs=1e-10)

    def test_maximum_branch_is_consistent(self):
        # the uniform pattern of an antiferromagnet is an energy maximum with F < 0 on every mode
        spec = ring(6, alpha=1.0, j0=-1.0)
        c = sw.dispersion(spec, "uniform", 0.3)
        assert c.angle.branch == "max"
        assert np.all(c.f < 0) and np.all(c.stable) and c.status == "ok"
        assert np.all(c.f**2 >= c.g**2)

    def test_saddle_reports_imaginary_modes(self):
        # equal pattern of a ring whose couplings change sign with distance
        spec = ring(8, alpha=INF, b=0.5)
        a = sw.StationaryAngle("uniform", 0.0, "polarized", 1.0, 0.5)
        g, f, e0 = sw._coefficients(spec, a, sw.k_grid(8))
        energy, imag, stable, _ = sw._bogoliubov(f, g, e0, a.branch)
        assert np.any(~stable) and np.all(imag[~stable] > 0) and np.all(energy[~stable] == 0)

    def test_infinite_chain_convergence(self):
        b = 1.0
        ref = sw.dispersion(ring(INF, alpha=2.0), "uniform", b)
        errs = []
        for n in (8, 16, 32, 64):
            c = sw.dispersion(ring(n, alpha=2.0), "uniform", b)
            inf_vals = np.array([sw.mode_energy(ring(INF, alpha=2.0), "uniform", b, k) for k in c.k_grid])
            errs.append(np.max(np.abs(c.energy - inf_vals)))
        assert all(x > y for x, y in zip(errs, errs[1:]))
        assert len(ref.k_grid) == 1024


class TestCriticalField:
    def test_values(self):
        assert sw.critical_field(ring(INF, alpha=3)) == pytest.approx(2 * riemann_zeta(3), abs=1e-12)
        assert sw.critical_field(ring(2)) == pytest.approx(1.0)
        assert sw.critical_field(ring(INF, alpha=2), "alternating") == pytest.approx(2 * dirichlet_eta(2), abs=1e-12)
        assert sw.critical_field(ring(INF, alpha=0.5), "alternating") == pytest.approx(2 * dirichlet_eta(0.5))

    def test_gap_scan(self):
        spec = ring(INF, alpha=3.0)
        bc = sw.critical_field(spec)
        scan = sw.gap_scan(spec, "uniform", bc + np.logspace(-7, -1, 40))
        assert scan.exponent == pytest.approx(0.5, abs=0.05)
        below = sw.gap_scan(spec, "uniform", bc - np.logspace(-7, -1, 40)[::-1])
        assert below.exponent == pytest.approx(0.5, abs=0.05)
        at = sw.gap_scan(spec, "uniform", [bc])
        assert at.gap[0] == 0.0 and math.isinf(at.corr_length[0])

    def test_gap_scan_two_sites(self):
        b = np.linspace(1.0, 3.0, 25)
        scan = sw.gap_scan(ring(2), "uniform", b)
        assert np.allclose(scan.gap, 2 * np.sqrt(b * (b - 1.0)), atol=1e-12)

    def test_alternating_gap(self):
        spec = ring(10, alpha=1.5)
        bc = sw.critical_field(spec, "alternating")
        scan = sw.gap_scan(spec, "alternating", bc + np.logspace(-6, -1, 30))
        assert scan.exponent == pytest.approx(0.5, abs=0.05)

    def test_fit_ignores_floor(self):
        assert sw.fit_gap_exponent([1.0, 2.0], [0.0, 0.0], 1.0) is None


class TestDicke:
    def test_examples(self):
        em, ep, off = sw.dicke_limit_check(1, 2.0, 1.0)
        assert (em, ep) == pytest.approx((2 * math.sqrt(2), 2 * math.sqrt(6)))
        assert off == pytest.approx(-4 * 0.5 * 2.0)
        assert sw.dicke_limit_check(1, 1.0, 1.0)[0] == 0.0
        assert 2 * math.sqrt(1 - 1.0**2) == 0.0
        assert sw.dicke_limit_check(3, 0.0, 1.0)[:2] == (2.0, 2.0)

    def test_offsets_match_level(self):
        spec = ring(2, spin2=3)
        for b in (0.4, 2.5):
            _, _, off = sw.dicke_limit_check(3, b, 1.0)
            a = sw.stationary_angle(spec, "uniform", b)
            e, _ = sw.mean_field_energy_periodic(spec.replace(b=b), sw.expand_angles(2, a))
            assert off == pytest.approx(spec.spin2 * 2 * e)


class TestIntermediate:
    def test_six_site_ring(self):
        spec = ring(6, alpha=2.0)
        _, ja = sw.effective_couplings_periodic(spec)
        out = sw.intermediate_config(spec)
        assert out["energy_1"] == pytest.approx(-ja)
        assert out["diagonal_1"] and out["diag_coeff_1"] == pytest.approx(4 * ja)
        assert abs(out["energy_2"]) < 1e-15
        assert out["flat_dispersion"]

    def test_flat_via_numeric_paradiagonalization(self):
        spec = ring(8, alpha=1.0)
        n = 8
        phi = sw.expand_angles(n, sw.stationary_angle(spec, "intermediate_2"))
        a, w = sw.fluctuation_matrices(spec, phi)
        s = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
        vals = np.linalg.eigvals(np.block([[a, w], [-w, -a]]) * np.outer(np.r_[s, s], np.r_[s, s]))
        assert np.max(np.abs(vals)) < 1e-6

    def test_errors(self):
        with pytest.raises(DomainError):
            sw.intermediate_config(ring(5))
        with pytest.raises(BranchError):
            sw.intermediate_config(ring(6, b=0.2))
