import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gam.constellation import Constellation, entropy_bits
from gam.metrics import (AwgnChannel, QuadratureError, awgn_capacity, db_to_linear,
                         entropy_gradient_radii, entropy_lattice, linear_to_db,
                         mi_monte_carlo, mi_quadrature, mi_upper_bounds, mixture_logpdf,
                         mixture_pdf, q_function, ser_disc_analytic, ser_gb_analytic,
                         ser_monte_carlo)
from gam.schemes import gen_disc, gen_gb_hr, gen_pb_se, gen_qam

# MI of equiprobable antipodal points +-sqrt(S) with unit complex noise,
# from a 50-digit mpmath integral (notes/oracles.py)
ANTIPODAL_MI = {1: 0.72145159079038813, 3: 0.97150979325153831, 10: 0.99998332824040258}


def antipodal(snr):
    a = math.sqrt(snr)
    return Constellation([a, -a], [0.5, 0.5])


def random_constellation(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 24))
    pts = rng.normal(size=n) + 1j * rng.normal(size=n)
    p = rng.dirichlet(np.ones(n))
    return Constellation(pts, p)


class TestHelpers:
    def test_db(self):
        assert db_to_linear(10.0) == pytest.approx(10.0)
        assert linear_to_db(db_to_linear(-7.3)) == pytest.approx(-7.3)
        assert awgn_capacity(15.0) == pytest.approx(4.0)

    def test_q_values(self):
        assert q_function(0.0) == 0.5
        assert q_function(1.0) == pytest.approx(0.15865525393145707, rel=1e-14)
        assert q_function(np.inf) == 0.0
        assert q_function(-np.inf) == 1.0
        np.testing.assert_allclose(q_function(np.array([-1.0, 1.0])).sum(), 1.0)


class TestChannel:
    def test_snr_consistency(self):
        c = gen_disc(1, 16, 3.0)
        ch = AwgnChannel.for_constellation(c, 12.0)
        assert 3.0 / ch.noise_var == pytest.approx(12.0, rel=1e-9)

    def test_noise_statistics(self):
        ch = AwgnChannel(0.8)
        w = ch.sample(400_000, np.random.default_rng(1))
        assert np.var(w.real) == pytest.approx(0.4, rel=0.01)
        assert np.var(w.imag) == pytest.approx(0.4, rel=0.01)
        assert abs(np.corrcoef(w.real, w.imag)[0, 1]) < 0.01

    @pytest.mark.parametrize("var", [0.0, -1.0])
    def test_rejects(self, var):
        with pytest.raises(ValueError):
            AwgnChannel(var)


class TestMixture:
    def test_single_origin(self):
        c = Constellation([0j], [1.0])
        assert mixture_pdf(c, 0.7, 0j)[0] == pytest.approx(1 / (math.pi * 0.7))

    def test_far_tail_stays_in_log_domain(self):
        c = gen_disc(1, 16)
        lf = mixture_logpdf(c, 0.01, 50.0 + 0j)[0]
        assert np.isfinite(lf) and lf < math.log(1e-300)
        assert 0.0 <= mixture_pdf(c, 0.01, 50.0)[0] < 1e-300

    def test_integrates_to_one(self):
        c = gen_qam(4)
        x = np.linspace(-6, 6, 601)
        g = x[:, None] + 1j * x[None, :]
        f = mixture_pdf(c, 0.3, g.ravel())
        assert f.sum() * (x[1] - x[0]) ** 2 == pytest.approx(1.0, abs=1e-6)

    def test_point_symmetry(self):
        c = Constellation([1, -1, 1j, -1j], np.full(4, 0.25))
        y = np.array([0.3 + 0.2j, 1.1 - 0.4j])
        np.testing.assert_allclose(mixture_pdf(c, 0.5, y), mixture_pdf(c, 0.5, -y))


class TestQuadrature:
    @pytest.mark.parametrize("snr, expected", sorted(ANTIPODAL_MI.items()))
    def test_antipodal_oracle(self, snr, expected):
        est = mi_quadrature(antipodal(snr), AwgnChannel(1.0), tol=1e-7)
        assert est.bits == pytest.approx(expected, abs=1e-6)

    def test_single_point(self):
        c = Constellation([0.5 + 0.5j], [1.0])
        assert mi_quadrature(c, AwgnChannel(0.1)).bits == pytest.approx(0.0, abs=1e-4)

    def test_hr16(self):
        c = gen_gb_hr(16)
        assert mi_quadrature(c, AwgnChannel.for_constellation(c, 15.0)).bits == \
            pytest.approx(3.440, abs=0.02)

    def test_hr256_high_snr(self):
        c = gen_gb_hr(256)
        assert mi_quadrature(c, AwgnChannel.for_constellation(c, 1995.26)).bits == \
            pytest.approx(7.999, abs=0.02)

    def test_bounds(self):
        for c in (gen_disc(1, 32), gen_pb_se(32, 4.0), gen_gb_hr(32)):
            for snr in (0.5, 10.0, 1000.0):
                mi = mi_quadrature(c, AwgnChannel.for_constellation(c, snr)).bits
                h, cap = mi_upper_bounds(c, snr)
                assert mi <= h + 1e-6
                assert mi <= cap + 1e-4

    def test_sub_lattice_consistency(self):
        c = gen_disc(1, 8)
        fine, coarse = entropy_lattice(c.points, c.probs, 0.1, 0.05, coarse=True)
        assert coarse == pytest.approx(entropy_lattice(c.points, c.probs, 0.1, 0.1), rel=1e-12)
        assert fine == pytest.approx(entropy_lattice(c.points, c.probs, 0.1, 0.05), rel=1e-14)

    def test_tight_tolerance_raises(self):
        with pytest.raises(QuadratureError):
            mi_quadrature(gen_disc(1, 64), AwgnChannel(0.05), tol=1e-9,
                          max_refinements=0, spacing=2.0)

    @settings(max_examples=10)
    @given(st.floats(0, 2 * math.pi), st.integers(0, 10**6))
    def test_rotation_invariance(self, theta, seed):
        c = random_constellation(seed)
        ch = AwgnChannel(0.3)
        a = mi_quadrature(c, ch).bits
        b = mi_quadrature(c.rotated(theta), ch).bits
        assert abs(a - b) < 2e-4


class TestMonteCarlo:
    def test_hr16(self):
        c = gen_gb_hr(16)
        est = mi_monte_carlo(c, AwgnChannel.for_constellation(c, 15.0), 200_000, seed=5)
        assert abs(est.bits - 3.440) <= 3 * est.std_err_bits + 0.001

    def test_zero_snr(self):
        c = gen_disc(1, 16)
        est = mi_monte_carlo(c, AwgnChannel.for_constellation(c, 1e-4), 100_000, seed=2)
        assert est.bits < 0.01

    def test_entropy_saturation(self):
        c = gen_disc(1, 16)
        est = mi_monte_carlo(c, AwgnChannel.for_constellation(c, 1e4), 50_000, seed=3)
        assert est.bits == pytest.approx(entropy_bits(c), abs=0.01)

    def test_worker_count_does_not_matter(self):
        c = gen_pb_se(64, 5.0)
        ch = AwgnChannel.for_constellation(c, 30.0)
        a = mi_monte_carlo(c, ch, 100_000, seed=9, workers=1, block_size=4096)
        b = mi_monte_carlo(c, ch, 100_000, seed=9, workers=4, block_size=4096)
        assert a == b

    def test_seed_changes_result(self):
        c = gen_disc(1, 16)
        ch = AwgnChannel.for_constellation(c, 10.0)
        assert mi_monte_carlo(c, ch, 5000, 1).bits != mi_monte_carlo(c, ch, 5000, 2).bits

    def test_stderr_scaling(self):
        c = gen_gb_hr(64)
        ch = AwgnChannel.for_constellation(c, 100.0)
        se1 = mi_monte_carlo(c, ch, 50_000, seed=1).std_err_bits
        se4 = mi_monte_carlo(c, ch, 200_000, seed=1).std_err_bits
        assert se1 / se4 == pytest.approx(2.0, rel=0.1)

    def test_doubling_drift(self):
        c = gen_pb_se(256, 7.0)
        ch = AwgnChannel.for_constellation(c, 300.0)
        a = mi_monte_carlo(c, ch, 100_000, seed=4)
        b = mi_monte_carlo(c, ch, 200_000, seed=4)
        assert a.std_err_bits / b.std_err_bits == pytest.approx(math.sqrt(2), rel=0.1)
        assert abs(a.bits - b.bits) < 2 * math.hypot(a.std_err_bits, b.std_err_bits)

    @pytest.mark.parametrize("seed", range(20))
    def test_agrees_with_quadrature(self, seed):
        c = random_constellation(seed)
        ch = AwgnChannel(float(np.random.default_rng(seed).uniform(0.05, 2.0)))
        q = mi_quadrature(c, ch, tol=1e-5).bits
        est = mi_monte_carlo(c, ch, 40_000, seed=seed)
        assert abs(est.bits - q) <= 4 * est.std_err_bits + 1e-3

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            mi_monte_carlo(gen_disc(1, 4), AwgnChannel(1.0), 0, 1)


class TestSer:
    def test_disc_frozen(self):
        # 1 - (1 - 2 Q(sqrt(100 pi / 257)))^2
        assert ser_disc_analytic(256, 100.0) == pytest.approx(0.4656, abs=2e-4)
        x = math.sqrt(math.pi * 100 / 257)
        assert ser_disc_analytic(256, 100.0) == pytest.approx(
            1 - (1 - 2 * q_function(x)) ** 2, rel=1e-13)

    def test_high_snr_limits(self):
        assert ser_disc_analytic(256, 1e9) < 1e-12
        assert ser_gb_analytic(256, 1e9) < 1e-12

    def test_gb_decreasing(self):
        vals = [ser_gb_analytic(64, s) for s in (1, 10, 100, 1000)]
        assert np.all(np.diff(vals) < 0)

    def test_zero_noise(self):
        c = gen_disc(1, 64)
        ser, se = ser_monte_carlo(c, AwgnChannel(1e-12), 20_000, seed=1)
        assert ser == 0.0 and se == 0.0

    @pytest.mark.parametrize("snr", [0.5, 2.0])
    def test_antipodal(self, snr):
        c = antipodal(snr)
        ser, se = ser_monte_carlo(c, AwgnChannel(1.0), 200_000, seed=4)
        assert abs(ser - q_function(math.sqrt(2 * snr))) <= 3 * se

    def test_map_with_nonuniform_pmf(self):
        # a heavily weighted point wins even when slightly farther away
        c = Constellation([0j, 1 + 0j], [0.99, 0.01])
        ser, _ = ser_monte_carlo(c, AwgnChannel(1.0), 50_000, seed=2)
        assert ser == pytest.approx(0.01, abs=0.003)

    def test_worker_count_does_not_matter(self):
        c = gen_gb_hr(128)
        ch = AwgnChannel.for_constellation(c, 200.0)
        assert ser_monte_carlo(c, ch, 60_000, 3, workers=1, block_size=5000) == \
            ser_monte_carlo(c, ch, 60_000, 3, workers=3, block_size=5000)


class TestGradient:
    def test_matches_central_differences(self):
        rng = np.random.default_rng(11)
        radii = np.sort(rng.uniform(0.2, 2.0, 8))
        phases = rng.uniform(0, 2 * np.pi, 8)
        probs = rng.dirichlet(np.ones(8))
        sigma2, h = 0.2, math.sqrt(0.2) / 12
        radius = radii.max() + 10 * math.sqrt(sigma2)
        g = entropy_gradient_radii(radii, phases, probs, sigma2, h, radius)
        eps = 1e-5
        fd = np.empty(8)
        for k in range(8):
            e = np.zeros(8)
            e[k] = eps
            hp = entropy_lattice((radii + e) * np.exp(1j * phases), probs, sigma2, h, radius)
            hm = entropy_lattice((radii - e) * np.exp(1j * phases), probs, sigma2, h, radius)
            fd[k] = (hp - hm) / (2 * eps * math.log(2))
        np.testing.assert_allclose(g, fd, rtol=1e-4, atol=1e-8)
