import math
import warnings

import numpy as np
from django.test import SimpleTestCase
from scipy.special import eval_legendre

from rbmlab.errors import AccuracyWarning, DomainError, InvalidArgumentError
from rbmlab.saddle import SaddleData
from rbmlab.sphere_operator import (
    MAX_ORDER, LegendreBasis, asymptotic_eigenvalues, build_generator, crossover_scan,
    default_quad_order, expm_apply, finite_transfer_power, funk_hecke_eigs, kstar_kernel,
    kstar_spectrum, limit_formula, nu_of_unitary, truncated_limit, unitary_from_angles,
    zonal_eigenvalues_exact, zonal_kernel, zonal_nystrom,
)


def sinc_pi(xi):
    return math.sin(math.pi * xi) / (math.pi * xi)


def rk4_oracle(g, v, steps):
    """Fixed-step RK4 on w' = -G w over unit time."""
    h = 1.0 / steps
    w = v.astype(complex)
    for _ in range(steps):
        k1 = -g @ w
        k2 = -g @ (w + h / 2 * k1)
        k3 = -g @ (w + h / 2 * k2)
        k4 = -g @ (w + h * k3)
        w = w + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return w


class SaddleDataTest(SimpleTestCase):

    def test_band_center(self):
        saddle = SaddleData.from_energy(0.0, c_star=1.0)
        self.assertEqual(saddle.a_plus, 1.0)
        self.assertEqual(saddle.a_minus, -1.0)
        self.assertAlmostEqual(saddle.t_star, 4.0, places=12)
        self.assertAlmostEqual(saddle.c_star_eff, 0.25, places=12)

    def test_t_star_matches_density(self):
        for e in (0.0, 0.5, 1.0, 1.9):
            saddle = SaddleData.from_energy(e, c_star=3.0)
            self.assertLess(abs(saddle.t_star - 4 * math.pi ** 2 * saddle.rho ** 2), 1e-12)
            self.assertLess(abs(saddle.c_star_eff - 3.0 / saddle.t_star), 1e-12)

    def test_curvatures_share_real_part(self):
        saddle = SaddleData.from_energy(1.0)
        self.assertLess(abs(saddle.c_plus.real - saddle.c_minus.real), 1e-14)
        self.assertGreater(saddle.c_plus.real, 0.0)

    def test_outside_bulk(self):
        with self.assertRaises(DomainError):
            SaddleData.from_energy(2.0)


class LegendreBasisTest(SimpleTestCase):

    def test_offdiagonal_coefficients(self):
        basis = LegendreBasis(200)
        self.assertAlmostEqual(basis.offdiag[0], 1 / math.sqrt(3), places=15)
        self.assertTrue(np.all(basis.offdiag > 0))
        self.assertTrue(np.all(basis.offdiag < 0.5 + 0.1))
        self.assertLess(abs(basis.offdiag[-1] - 0.5), 1e-5)

    def test_jacobi_matrix_is_multiplication_by_c(self):
        """Test that c·φ_j expands with the Jacobi coefficients at sample points."""
        basis = LegendreBasis(12)
        c = np.linspace(-0.9, 0.9, 7)
        values = basis.evaluate(c)
        jacobi = basis.jacobi_matrix()
        # rows j < L are exact: c φ_j only reaches φ_{j±1}
        np.testing.assert_allclose((values @ jacobi)[:, :-1], (c[:, None] * values)[:, :-1], atol=1e-12)

    def test_order_must_be_positive(self):
        with self.assertRaises(InvalidArgumentError):
            LegendreBasis(0)


class BuildGeneratorTest(SimpleTestCase):

    def test_xi_zero_is_diagonal(self):
        g = build_generator(2.0, 0.0, 0.0, 16).matrix()
        self.assertEqual(np.count_nonzero(g - np.diag(np.diag(g))), 0)
        self.assertEqual(g[0, 0], 0.0)

    def test_cstar_zero_is_scaled_jacobi(self):
        g = build_generator(0.0, 0.0, 1.3, 16).matrix()
        expected = 1j * math.pi * 1.3 * LegendreBasis(16).jacobi_matrix()
        np.testing.assert_allclose(g, expected, atol=1e-15)

    def test_band_center_scaling(self):
        generator = build_generator(1.0, 0.0, 0.5, 16)
        self.assertAlmostEqual(generator.c_star_eff, 0.25, places=12)
        self.assertAlmostEqual(generator.diagonal[2], 0.25 * 6, places=12)
        np.testing.assert_array_equal(generator.matrix(), generator.matrix().T)

    def test_preconditions(self):
        with self.assertRaises(DomainError):
            build_generator(1.0, 2.0, 1.0, 16)
        with self.assertRaises(InvalidArgumentError):
            build_generator(1.0, 0.0, 1.0, 4)
        with self.assertRaises(InvalidArgumentError):
            build_generator(-1.0, 0.0, 1.0, 16)


class ExpmApplyTest(SimpleTestCase):
    """Test e^{-G} v against trivial cases and an RK4 oracle."""

    def test_zero_generator(self):
        v = np.arange(5, dtype=complex)
        np.testing.assert_allclose(expm_apply(np.zeros((5, 5)), v), v, rtol=0, atol=1e-15)

    def test_diagonal_generator(self):
        d = np.array([0.0, 0.5, 2.0, 7.5])
        v = np.array([1.0, -2.0, 0.5, 3.0])
        np.testing.assert_allclose(expm_apply(np.diag(d), v), v * np.exp(-d), rtol=0, atol=1e-14)

    def test_matches_rk4_oracle(self):
        """Test 20 random generators shaped like C*Δ + iπξc (L=32, entries bounded by 10) to 1e-8."""
        rng = np.random.default_rng(32)
        size = 33
        for trial in range(20):
            diag = rng.uniform(0.0, 10.0, size)
            off = 1j * rng.uniform(-10.0, 10.0, size - 1)
            g = np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)
            v = rng.normal(size=size) + 1j * rng.normal(size=size)
            with self.subTest(trial=trial):
                oracle = rk4_oracle(g, v, steps=8000)
                self.assertLess(np.max(np.abs(expm_apply(g, v) - oracle)), 1e-8)

    def test_dimension_mismatch(self):
        with self.assertRaises(InvalidArgumentError):
            expm_apply(build_generator(1.0, 0.0, 1.0, 8), np.ones(4))


class LimitFormulaTest(SimpleTestCase):

    def test_xi_zero_is_one(self):
        for c_star, e in ((0.5, 0.0), (10.0, 1.2), (1e-6, -0.4)):
            limit = limit_formula(c_star, e, 0.0)
            self.assertLess(abs(limit.value - 1.0), 1e-12)
            self.assertTrue(limit.converged)

    def test_small_cstar_is_sinc(self):
        for xi in (0.5, 1.0, 1.5, 2.0):
            with self.subTest(xi=xi):
                limit = limit_formula(1e-6, 0.0, xi)
                self.assertLess(abs(limit.value.real - sinc_pi(xi)), 1e-3)

    def test_large_cstar_approaches_one(self):
        """Test C_*=100 against the second-order estimate exp(-π^2/(6 C*)) with C* = 25."""
        value = limit_formula(100.0, 0.0, 1.0).value.real
        self.assertLess(abs(value - math.exp(-math.pi ** 2 / 150.0)), 5e-3)
        self.assertLess(abs(value - 1.0), 0.07)
        self.assertLess(abs(limit_formula(1000.0, 0.0, 1.0).value.real - 1.0), 0.01)

    def test_real_contractive_and_even(self):
        for c_star in (1e-3, 0.3, 1.0, 7.0):
            for e in (0.0, 0.8, -1.5):
                for xi in (0.25, 1.0, 2.5):
                    plus = limit_formula(c_star, e, xi)
                    minus = limit_formula(c_star, e, -xi)
                    self.assertLessEqual(plus.imag_residual, 1e-10)
                    self.assertLessEqual(abs(plus.value), 1 + 1e-12)
                    self.assertLess(abs(plus.value - minus.value), 1e-12)

    def test_truncation_converged(self):
        limit = limit_formula(0.7, 0.3, 1.7)
        doubled = truncated_limit(0.7, 0.3, 1.7, 2 * limit.order)
        self.assertLess(abs(doubled - limit.value), 1e-10)

    def test_interpolates_between_endpoints(self):
        low = limit_formula(1e-6, 0.0, 1.0).value.real
        mid = limit_formula(1.0, 0.0, 1.0).value.real
        high = limit_formula(100.0, 0.0, 1.0).value.real
        self.assertLess(low, mid)
        self.assertLess(mid, high)

    def test_crossover_scan_is_log_spaced(self):
        scan = crossover_scan(1.0, 0.0, 1e-3, 10.0, 5)
        grid = [c_star for c_star, _ in scan]
        np.testing.assert_allclose(grid, [1e-3, 1e-2, 1e-1, 1.0, 10.0], rtol=1e-12)
        self.assertLess(scan[0][1].value.real, scan[-1][1].value.real)


class FunkHeckeTest(SimpleTestCase):
    """Test the zonal K* spectrum three ways: quadrature, Bessel closed form, asymptotics."""

    def test_lambda_zero(self):
        for w2t in (10.0, 100.0):
            eigs = funk_hecke_eigs(w2t, 1.0, 0, 200)
            self.assertLess(abs(eigs[0] - (1 - math.exp(-w2t))), 1e-10)

    def test_lambda_one_closed_form(self):
        for s in (0.5, 2.0, 5.0, 50.0):
            with self.subTest(s=s):
                eigs = funk_hecke_eigs(2 * s, 1.0, 1, 200)
                closed = 1 - 1 / s + math.exp(-2 * s) * (1 + 1 / s)
                self.assertLess(abs(eigs[1] - closed), 1e-10)

    def test_asymptotic_form(self):
        w2t = 100.0
        eigs = funk_hecke_eigs(4.0, 5.0, 5, 200)
        asymptotic = asymptotic_eigenvalues(4.0, 5.0, 5)
        for j in range(1, 6):
            self.assertLess(abs(eigs[j] - asymptotic[j]) / asymptotic[j], 5 * j * j / w2t)

    def test_matches_bessel_closed_form(self):
        for w2t in (2.0, 50.0, 400.0):
            quadrature = funk_hecke_eigs(w2t, 1.0, 10)
            exact = zonal_eigenvalues_exact(w2t, 1.0, 10)
            np.testing.assert_allclose(quadrature, exact, rtol=0, atol=1e-10)

    def test_positive_and_decreasing(self):
        for w2t in (2.0, 10.0, 100.0):
            eigs = funk_hecke_eigs(w2t, 1.0, 10, 200)
            self.assertTrue(np.all(eigs > 0))
            self.assertTrue(np.all(np.diff(eigs) < 0))

    def test_default_order_at_large_w2t(self):
        """Test the default order at W^2 t = 16384 against the Bessel closed form."""
        self.assertEqual(default_quad_order(4.0, 64.0, 10), 832)
        quadrature = funk_hecke_eigs(4.0, 64.0, 10)
        exact = zonal_eigenvalues_exact(4.0, 64.0, 10)
        np.testing.assert_allclose(quadrature, exact, rtol=0, atol=1e-9)

    def test_low_quadrature_order_warns(self):
        with self.assertWarns(AccuracyWarning):
            funk_hecke_eigs(1.0, 2.0, 10, 20)

    def test_kstar_spectrum_rows(self):
        rows = kstar_spectrum(4.0, 5.0, 0)
        self.assertEqual(len(rows), 1)
        j, quadrature, asymptotic, rel_dev = rows[0]
        self.assertEqual(j, 0)
        self.assertAlmostEqual(quadrature, 1 - math.exp(-100.0), places=12)
        self.assertLess(rel_dev, 1e-12)


class ZonalNystromTest(SimpleTestCase):

    def test_constants(self):
        matrix, c = zonal_nystrom(10.0, 1.0, 64)
        lambda0 = 1 - math.exp(-10.0)
        self.assertLess(np.max(np.abs(matrix @ np.ones(64) - lambda0)), 1e-6)

    def test_legendre_eigenrelation(self):
        """Test M P_j = λ_j P_j for j <= 10 at W^2 t = 50."""
        matrix, c = zonal_nystrom(50.0, 1.0, 64)
        eigs = funk_hecke_eigs(50.0, 1.0, 10, 200)
        for j in range(11):
            p = eval_legendre(j, c)
            self.assertLess(np.max(np.abs(matrix @ p - eigs[j] * p)), 1e-6)

    def test_nonnegative_with_bounded_rows(self):
        matrix, _ = zonal_nystrom(10.0, 1.0, 64)
        self.assertTrue(np.all(matrix >= 0))
        self.assertTrue(np.all(matrix.sum(axis=1) <= (1 - math.exp(-10.0)) * (1 + 1e-6)))

    def test_node_minimum(self):
        with self.assertRaises(InvalidArgumentError):
            zonal_nystrom(10.0, 1.0, 32)


class UnitaryKernelTest(SimpleTestCase):

    def test_nu_and_trace_identity(self):
        u = unitary_from_angles(0.4, 1.1)
        np.testing.assert_allclose(u @ u.conj().T, np.eye(2), atol=1e-15)
        l_matrix = np.diag([1.0, -1.0])
        trace = np.trace(u.conj().T @ l_matrix @ u @ l_matrix).real
        self.assertAlmostEqual(trace, 2 * nu_of_unitary(u), places=14)
        self.assertAlmostEqual(nu_of_unitary(u), math.cos(0.8), places=14)

    def test_matrix_kernel_is_zonal(self):
        t, w = 0.5, 3.0
        for phi1, theta1, phi2, theta2 in ((0.3, 0.2, 1.1, 2.9), (1.2, -0.7, 0.1, 0.4), (0.0, 0.0, 0.7, 1.0)):
            c1, s1 = math.cos(2 * phi1), math.sin(2 * phi1)
            c2, s2 = math.cos(2 * phi2), math.sin(2 * phi2)
            c_rel = c1 * c2 + s1 * s2 * math.cos(theta1 - theta2)
            value = kstar_kernel(t, w, unitary_from_angles(phi1, theta1), unitary_from_angles(phi2, theta2))
            self.assertAlmostEqual(value, float(zonal_kernel(t, w, c_rel)), places=10)


class FiniteTransferPowerTest(SimpleTestCase):

    def test_xi_zero_is_power_of_lambda_zero(self):
        n, c_star = 64, 1.0
        saddle = SaddleData.from_energy(0.0)
        lambda0 = zonal_eigenvalues_exact(saddle.t_star, math.sqrt(n / c_star), 0)[0]
        self.assertAlmostEqual(finite_transfer_power(c_star, 0.0, 0.0, n).real, lambda0 ** (n - 1), places=12)

    def test_converges_to_limit(self):
        limit = limit_formula(1.0, 0.0, 1.0).value.real
        self.assertLess(abs(finite_transfer_power(1.0, 0.0, 1.0, 4096).real - limit), 0.01)

    def test_preconditions(self):
        with self.assertRaises(InvalidArgumentError):
            finite_transfer_power(1.0, 0.0, 1.0, 1)
        with self.assertRaises(InvalidArgumentError):
            finite_transfer_power(0.0, 0.0, 1.0, 16)


class AccuracyWarningTest(SimpleTestCase):

    def test_no_warning_when_converged(self):
        with warnings.catch_warnings():
            warnings.simplefilter('error', AccuracyWarning)
            self.assertTrue(limit_formula(1.0, 0.0, 1.0).converged)

    def test_unconverged_at_order_cap(self):
        """Test that a tiny C_* with large ξ still disagrees at L=256 and warns."""
        with self.assertWarns(AccuracyWarning):
            result = limit_formula(1e-6, 0.0, 150.0)
        self.assertFalse(result.converged)
        self.assertEqual(result.order, MAX_ORDER)

    def test_requested_order_is_capped(self):
        result = limit_formula(1.0, 0.0, 1.0, L=300)
        self.assertEqual(result.order, MAX_ORDER)
        self.assertTrue(result.converged)
        self.assertAlmostEqual(result.value.real, limit_formula(1.0, 0.0, 1.0).value.real, places=9)
