import numpy as np
from django.test import SimpleTestCase
from scipy.linalg import cholesky

from rbmlab.covariance import (
    LatticeSpec, build_covariance, build_neumann_laplacian,
    decay_profile, laplacian_residual,
)
from rbmlab.errors import InvalidArgumentError


class NeumannLaplacianTest(SimpleTestCase):
    """Test cases for the discrete Neumann Laplacian."""

    def test_single_site_is_zero(self):
        """Test that n=1 gives the 1x1 zero matrix."""
        laplacian = build_neumann_laplacian(1).toarray()
        self.assertEqual(laplacian.shape, (1, 1))
        self.assertEqual(laplacian[0, 0], 0.0)

    def test_three_sites(self):
        """Test the explicit n=3 rows."""
        expected = np.array([[-1, 1, 0], [1, -2, 1], [0, 1, -1]], dtype=float)
        np.testing.assert_array_equal(build_neumann_laplacian(3).toarray(), expected)

    def test_constants_are_in_the_kernel(self):
        for n in (2, 5, 64, 257):
            laplacian = build_neumann_laplacian(n)
            self.assertEqual(np.max(np.abs(laplacian @ np.ones(n))), 0.0)

    def test_zero_sites_rejected(self):
        with self.assertRaises(InvalidArgumentError):
            build_neumann_laplacian(0)


class LatticeSpecTest(SimpleTestCase):

    def test_invalid_specs_rejected(self):
        """Test n >= 1, W >= 1 and the c_star consistency rule."""
        with self.assertRaises(InvalidArgumentError):
            LatticeSpec(n=0, w=2.0)
        with self.assertRaises(InvalidArgumentError):
            LatticeSpec(n=4, w=0.5)
        with self.assertRaises(InvalidArgumentError):
            LatticeSpec(n=100, w=12.0, c_star=1.0)

    def test_critical_line(self):
        spec = LatticeSpec.critical(1.0, 12)
        self.assertEqual(spec.n, 144)
        self.assertEqual(spec.c_star, 1.0)

        self.assertEqual(LatticeSpec.critical(0.04, 64).n, 164)


class BuildCovarianceTest(SimpleTestCase):
    """Test the covariance identities J(-W^2 Δ + 1) = I and J·1 = 1."""

    def test_single_site(self):
        profile = build_covariance(LatticeSpec(n=1, w=7.0))
        np.testing.assert_array_equal(profile.entries, np.array([[1.0]]))

    def test_identities(self):
        """Test the residual and row sums at the reference sizes."""
        for n, w in ((64, 8.0), (256, 4.0), (400, 20.0)):
            with self.subTest(n=n, w=w):
                profile = build_covariance(LatticeSpec(n=n, w=w))
                self.assertLess(laplacian_residual(profile), 1e-10)
                self.assertLess(profile.row_sum_error(), 1e-10)

    def test_symmetric_positive_definite(self):
        profile = build_covariance(LatticeSpec(n=128, w=6.0))
        entries = profile.entries
        self.assertLess(np.max(np.abs(entries - entries.T)), 1e-12)
        self.assertTrue(np.all(entries > 0))
        cholesky((entries + entries.T) / 2.0)

    def test_entries_are_read_only(self):
        profile = build_covariance(LatticeSpec(n=8, w=2.0))
        with self.assertRaises(ValueError):
            profile.entries[0, 0] = 0.0

    def test_first_row_decay(self):
        """Test that J_{1,1+k}/J_{1,1} decreases and drops below 0.05 for k >= 4W at n=64, W=8."""
        profile = build_covariance(LatticeSpec(n=64, w=8.0))
        ratios = profile.entries[0] / profile.entries[0, 0]
        self.assertTrue(np.all(np.diff(ratios) < 0))
        self.assertTrue(np.all(ratios[32:] < 0.05))


class DecayProfileTest(SimpleTestCase):

    def test_single_site(self):
        profile = build_covariance(LatticeSpec(n=1, w=1.0))
        self.assertEqual(decay_profile(profile), [(0, 1.0)])

    def test_monotone_from_one(self):
        profile = build_covariance(LatticeSpec(n=64, w=4.0))
        decay = decay_profile(profile)
        self.assertEqual(decay[0], (0, 1.0))
        values = [value for _, value in decay]
        self.assertTrue(all(a >= b for a, b in zip(values, values[1:])))
        self.assertLess(decay[16][1], decay[8][1])

