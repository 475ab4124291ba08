import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tzitzeica import spectral_core as sc
from tzitzeica.errors import DomainError

mp.mp.dps = 40
W = mp.exp(2j * mp.pi / 3)

finite = st.floats(-2.0, 2.0, allow_nan=False)
nonzero_lam = st.complex_numbers(min_magnitude=0.05, max_magnitude=20.0, allow_nan=False,
                                 allow_infinity=False)


def test_omega_constant():
    assert sc.OMEGA ** 3 == pytest.approx(1.0, abs=1e-15)
    assert np.allclose(sc.J @ sc.J, sc.J2, atol=1e-15)


class TestEigenExponents:
    def test_identity_case(self):
        e = sc.eigen_exponents(1.0)
        assert e.l[2] == pytest.approx(1.0, abs=1e-15)
        assert e.z[2] == pytest.approx(0.0, abs=1e-15)
        assert e.l[0] == pytest.approx(-0.5, abs=1e-15)
        assert abs(e.l.sum()) < 1e-15

    def test_lambda_two_against_high_precision(self):
        e = sc.eigen_exponents(2.0)
        assert e.l[2] == pytest.approx(1.25, abs=1e-15)
        assert e.z[2] == pytest.approx(0.75, abs=1e-15)
        for j in (1, 2):
            k = W ** j * 2
            assert abs(e.l[j - 1] - complex((k + 1 / k) / 2)) < 1e-14
            assert abs(e.z[j - 1] - complex((k - 1 / k) / 2)) < 1e-14

    def test_zero_is_rejected(self):
        with pytest.raises(DomainError, match="essential singularity"):
            sc.eigen_exponents(0.0)

    @given(nonzero_lam)
    def test_trace_free(self, lam):
        e = sc.eigen_exponents(lam)
        assert abs(e.l.sum()) < 1e-12 * max(1, abs(lam), 1 / abs(lam))
        assert abs(e.z.sum()) < 1e-12 * max(1, abs(lam), 1 / abs(lam))

    @given(st.floats(0.01, 100.0))
    def test_equal_real_parts_on_positive_axis(self, lam):
        e = sc.eigen_exponents(lam)
        assert abs(e.l[0].real - e.l[1].real) < 1e-12 * (lam + 1 / lam)

    def test_trace_free_bulk(self):
        rng = np.random.default_rng(1)
        lam = rng.normal(size=1000) + 1j * rng.normal(size=1000)
        assert np.abs(sc.exponents_l(lam).sum(-1)).max() < 1e-12
        assert np.abs(sc.exponents_z(lam).sum(-1)).max() < 1e-12


class TestMatrices:
    def test_U0_zero(self):
        assert not np.any(sc.build_U0(0.0))

    def test_U0_scale(self):
        m = sc.build_U0(6 / np.sqrt(3))
        assert m[0, 1] == pytest.approx(1j, abs=1e-15)
        assert m[0, 2] == pytest.approx(-1j, abs=1e-15)

    @given(finite)
    def test_U0_cyclic_pattern(self, w):
        m = sc.build_U0(w)
        Ainv = np.linalg.inv(sc.A_MAT)
        assert np.allclose(Ainv @ m @ sc.A_MAT, m, atol=1e-15)
        assert np.allclose(m, -m.T, atol=0)

    def test_U1_at_zero(self):
        m = sc.build_U1(0.0)
        assert np.allclose(m, np.diag([sc.OMEGA2, sc.OMEGA, 1]) / 2, atol=1e-16)
        assert not np.any(sc.build_L1(0.0, 0.0, 0.37))

    def test_U1_against_high_precision(self):
        u = mp.mpf("0.1")
        a = 2 * mp.exp(u) + mp.exp(-2 * u)
        b = mp.exp(-2 * u) - mp.exp(u)
        ref = mp.matrix([[W ** 2 * a, b, W * b], [b, W * a, W ** 2 * b],
                         [W * b, W ** 2 * b, a]]) / 6
        m = sc.build_U1(0.1)
        for i in range(3):
            for j in range(3):
                assert abs(m[i, j] - complex(ref[i, j])) < 1e-15

    @given(finite, finite, nonzero_lam)
    @settings(max_examples=200)
    def test_cyclic_symmetry_of_L(self, u, w, lam):
        Ainv = np.linalg.inv(sc.A_MAT)
        L = sc.lax_L(u, w, lam)
        Lw = sc.lax_L(u, w, sc.OMEGA * lam)
        scale = max(1, abs(lam), 1 / abs(lam))
        assert np.abs(L - Ainv @ Lw @ sc.A_MAT).max() < 1e-12 * scale
        L1 = sc.build_L1(u, w, lam)
        L1w = sc.build_L1(u, w, sc.OMEGA * lam)
        assert np.abs(L1 - Ainv @ L1w @ sc.A_MAT).max() < 1e-12 * scale

    @given(finite, finite, nonzero_lam)
    @settings(max_examples=200)
    def test_reflection_symmetry_of_L(self, u, w, lam):
        Binv = np.linalg.inv(sc.B_MAT)
        scale = max(1, abs(lam), 1 / abs(lam))
        L = sc.lax_L(u, w, lam)
        Lc = np.conj(sc.lax_L(u, w, np.conj(lam)))
        assert np.abs(L - sc.B_MAT @ Lc @ Binv).max() < 1e-12 * scale
        L1 = sc.build_L1(u, w, lam)
        L1c = np.conj(sc.build_L1(u, w, np.conj(lam)))
        assert np.abs(L1 - sc.B_MAT @ L1c @ Binv).max() < 1e-12 * scale

    def test_L_splits_into_free_part_and_L1(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            u, w = rng.uniform(-1, 1, 2)
            lam = complex(*rng.normal(size=2))
            L = sc.lax_L(u, w, lam)
            free = 0.5 * lam * sc.J + 0.5 * sc.J2 / lam
            assert np.allclose(L, free + sc.build_L1(u, w, lam), atol=1e-13)
            assert np.allclose(np.diag(free), sc.exponents_l(lam), atol=1e-13)

    def test_transposition_identity(self):
        # antisymmetric U0 and symmetric U1 - J^2/2 give L1(-lam)^T = -L1(lam)
        rng = np.random.default_rng(4)
        for _ in range(20):
            u, w, lam = rng.uniform(-1, 1, 3)
            assert np.allclose(sc.build_L1(u, w, -lam).T, -sc.build_L1(u, w, lam), atol=1e-14)

    def test_L1_rejects_zero(self):
        with pytest.raises(DomainError):
            sc.build_L1(0.1, 0.1, 0.0)


class TestGauge:
    def test_identity_at_zero(self):
        assert np.allclose(sc.gauge_G(0.0), np.eye(3), atol=1e-15)

    def test_eigen_row(self):
        row = np.array([sc.OMEGA, sc.OMEGA2, 1])
        res = row @ sc.gauge_G(0.3) - np.exp(0.3) * row
        assert np.abs(res).max() < 1e-12

    @given(st.floats(-2.0, 2.0))
    def test_eigen_row_sampled(self, u):
        row = np.array([sc.OMEGA, sc.OMEGA2, 1])
        assert np.abs(row @ sc.gauge_G(u) - np.exp(u) * row).max() < 1e-12

    def test_symmetries(self):
        G = sc.gauge_G(-0.2)
        Ainv = np.linalg.inv(sc.A_MAT)
        assert np.allclose(Ainv @ G @ sc.A_MAT, G, atol=1e-14)
        assert np.allclose(sc.B_MAT @ np.conj(G) @ sc.B_MAT, G, atol=1e-14)

    def test_reflection_needs_conjugation(self):
        # G_13 and G_23 are complex conjugates, so B G B = G only holds with the conjugate
        G = sc.gauge_G(-0.2)
        assert np.isclose(G[0, 2], np.conj(G[1, 2]))
        assert not np.allclose(sc.B_MAT @ G @ sc.B_MAT, G, atol=1e-3)

    def test_unimodular(self):
        us = np.linspace(-2, 2, 41)
        assert np.abs(np.linalg.det(sc.gauge_G(us)) - 1).max() < 1e-10


class TestPhase:
    @given(st.floats(0.05, 20), st.floats(-50, 50), st.floats(0.1, 50))
    def test_imaginary_on_real_axis(self, lam, x, t):
        th = sc.phase_theta21(lam, x, t)
        assert abs(th.real) < 1e-13 * max(1.0, abs(th))

    def test_matches_exponent_differences(self):
        lam, x, t = 0.7 + 0.2j, 3.0, 5.0
        e = sc.eigen_exponents(lam)
        ref = (e.l[1] - e.l[0]) * x + (e.z[1] - e.z[0]) * t
        assert abs(sc.phase_theta21(lam, x, t) - ref) < 1e-13

    @pytest.mark.parametrize("x,t", [(0.0, 20.0), (12.0, 20.0), (-30.0, 50.0), (0.5, 1.0)])
    def test_stationary_at_lambda0(self, x, t):
        l0 = sc.critical_lambda0(x, t)
        h = 1e-5
        d = (sc.phase_theta21(l0 + h, x, t) - sc.phase_theta21(l0 - h, x, t)) / (2 * h)
        assert abs(d) < 1e-8 * t

    def test_high_precision_value(self):
        lam = mp.mpc(0, 1)
        ref = (W ** 2 - W) / 2 * ((lam - 1 / lam) * 0 + (lam + 1 / lam) * 1)
        assert abs(sc.phase_theta21(1j, 0.0, 1.0) - complex(ref)) < 1e-15


class TestLambda0:
    def test_values(self):
        assert sc.critical_lambda0(0.0, 20.0) == pytest.approx(1.0)
        assert sc.critical_lambda0(12.0, 20.0) == pytest.approx(0.5, abs=1e-15)

    def test_monotone_towards_cone(self):
        x = np.linspace(0, 19.999, 500)
        l0 = sc.critical_lambda0(x, 20.0)
        assert np.all(np.diff(l0) < 0)
        assert l0[-1] < 0.01

    def test_cone_is_error(self):
        with pytest.raises(DomainError, match="light-cone"):
            sc.critical_lambda0(5.0, 5.0)
        with pytest.raises(DomainError):
            sc.critical_lambda0(1.0, 0.0)


class TestSectors:
    def test_examples(self):
        assert sc.classify_sector(0, 10) is sc.Sector.IV
        assert sc.classify_sector(10, 10, outer=3) is sc.Sector.II
        assert sc.classify_sector(100, 10, outer=3) is sc.Sector.I
        assert sc.classify_sector(9.0, 10) is sc.Sector.III
        assert sc.classify_sector(8.5, 10) is sc.Sector.IV

    def test_bad_thresholds(self):
        with pytest.raises(DomainError):
            sc.classify_sector(0, 1, inner=1.2)

    def test_vectorised_agrees(self):
        rng = np.random.default_rng(5)
        x = rng.uniform(-200, 200, 10_000)
        t = 37.0
        vec = sc.classify_sectors(x, t)
        assert all(v == sc.classify_sector(xi, t).value for v, xi in zip(vec, x))
