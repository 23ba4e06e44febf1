import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from rbmlab.covariance import LatticeSpec, build_covariance
from rbmlab.ensemble import (
    RbmSample, RngStreamPolicy, SeedRecord, empirical_covariance, read_samples,
    sample_rbm, sample_stream, write_samples,
)
from rbmlab.errors import InvalidArgumentError


class RngStreamPolicyTest(SimpleTestCase):

    def test_split_covers_total(self):
        policy = RngStreamPolicy(master_seed=7, stream_count=4)
        self.assertEqual(policy.split(10), [3, 3, 2, 2])
        self.assertEqual(sum(policy.split(100001)), 100001)

    def test_invalid_policy_rejected(self):
        with self.assertRaises(InvalidArgumentError):
            RngStreamPolicy(master_seed=-1)
        with self.assertRaises(InvalidArgumentError):
            RngStreamPolicy(master_seed=2 ** 64)
        with self.assertRaises(InvalidArgumentError):
            RngStreamPolicy(master_seed=1, stream_count=0)

    def test_streams_are_distinct(self):
        policy = RngStreamPolicy(master_seed=2024, stream_count=2)
        a = policy.generator(0).standard_normal(8)
        b = policy.generator(1).standard_normal(8)
        self.assertFalse(np.array_equal(a, b))


class SampleRbmTest(SimpleTestCase):
    """Test cases for single draws."""

    def setUp(self):
        self.profile = build_covariance(LatticeSpec(n=12, w=3.0))

    def test_single_site_is_real_normal(self):
        """Test that n=1 draws a single real number."""
        profile = build_covariance(LatticeSpec(n=1, w=1.0))
        sample = sample_rbm(profile, SeedRecord(seed=5, stream=0))
        self.assertEqual(sample.h.shape, (1, 1))
        self.assertEqual(sample.h[0, 0].imag, 0.0)

    def test_exactly_hermitian(self):
        sample = sample_rbm(self.profile, SeedRecord(seed=11, stream=3))
        np.testing.assert_array_equal(sample.h, sample.h.conj().T)
        self.assertEqual(np.max(np.abs(np.diag(sample.h).imag)), 0.0)

    def test_reproducible(self):
        """Test that the same (seed, stream) gives the same matrix bit-for-bit."""
        record = SeedRecord(seed=99, stream=1)
        first = sample_rbm(self.profile, record)
        second = sample_rbm(self.profile, record)
        np.testing.assert_array_equal(first.h, second.h)
        self.assertEqual(first.seed_record, record)

    def test_stream_starts_with_sample_rbm(self):
        record = SeedRecord(seed=3, stream=0)
        stream = list(sample_stream(self.profile, record, 3))
        self.assertEqual(len(stream), 3)
        np.testing.assert_array_equal(stream[0].h, sample_rbm(self.profile, record).h)
        self.assertFalse(np.array_equal(stream[0].h, stream[1].h))


class EmpiricalCovarianceTest(SimpleTestCase):

    def test_identical_samples_have_zero_stderr(self):
        h = np.array([[1.0, 2 + 1j], [2 - 1j, -1.0]])
        record = SeedRecord(seed=0, stream=0)
        stats = empirical_covariance([RbmSample(h=h, seed_record=record)] * 2)
        self.assertEqual(np.max(stats.abs_square_stderr), 0.0)
        self.assertEqual(np.max(stats.square_stderr), 0.0)
        self.assertEqual(stats.count, 2)

    def test_zero_matrices(self):
        record = SeedRecord(seed=0, stream=0)
        samples = [RbmSample(h=np.zeros((3, 3), dtype=complex), seed_record=record) for _ in range(4)]
        stats = empirical_covariance(samples)
        self.assertEqual(np.max(np.abs(stats.mean_abs_square)), 0.0)
        self.assertEqual(np.max(np.abs(stats.mean_square)), 0.0)

    def test_needs_two_samples(self):
        record = SeedRecord(seed=0, stream=0)
        with self.assertRaises(InvalidArgumentError):
            empirical_covariance([RbmSample(h=np.eye(2), seed_record=record)])

    def test_sampler_matches_covariance(self):
        """Test E|H_ij|^2 = J_ij and E H_ij^2 = 0 within 5 standard errors (n=8, W=2, 2e4 draws)."""
        profile = build_covariance(LatticeSpec(n=8, w=2.0))
        stats = empirical_covariance(sample_stream(profile, SeedRecord(seed=20240, stream=0), 20000))

        self.assertTrue(np.all(
            np.abs(stats.mean_abs_square - profile.entries) <= 5 * stats.abs_square_stderr
        ))
        off_diagonal = ~np.eye(8, dtype=bool)
        self.assertTrue(np.all(
            np.abs(stats.mean_square[off_diagonal]) <= 5 * stats.square_stderr[off_diagonal]
        ))


class SampleFileTest(SimpleTestCase):

    def test_rbm1_layout(self):
        """Test the header bytes and that the payload reads back unchanged."""
        profile = build_covariance(LatticeSpec(n=4, w=2.0))
        samples = list(sample_stream(profile, SeedRecord(seed=1, stream=0), 3))
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'draws.rbm'
            manifest = write_samples(samples, path)
            raw = path.read_bytes()

            self.assertEqual(raw[:4], b'RBM1')
            self.assertEqual(int.from_bytes(raw[4:8], 'little'), 4)
            self.assertEqual(int.from_bytes(raw[8:12], 'little'), 3)
            self.assertEqual(len(raw), 12 + 3 * 16 * 16)
            self.assertEqual(manifest['count'], 3)

            data = read_samples(path)
            np.testing.assert_array_equal(data[2], samples[2].h)

    def test_rejects_foreign_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'bad.rbm'
            path.write_bytes(b'XXXX' + bytes(8))
            with self.assertRaises(InvalidArgumentError):
                read_samples(path)
