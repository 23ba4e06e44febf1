from datetime import timedelta

from django.contrib.auth.models import User
from django.test import TestCase
from django.urls import reverse
from django.utils import timezone

from rbmlab.models import RunRecord


class RunRecordModelTest(TestCase):
    """Test the RunRecord ledger model."""

    def setUp(self):
        self.record = RunRecord.objects.create(
            mode='limit',
            config={'mode': 'limit', 'cstar': 1.0, 'xi_list': [1.0], 'seed': 0},
            tool_version='v0.3.0',
            started_at=timezone.now(),
            duration_seconds=0.25,
            checksums={'limit.csv': 'ab' * 32},
            warnings=['AccuracyWarning: not converged'],
        )

    def test_defaults(self):
        self.assertEqual(self.record.status, 'success')
        self.assertEqual(self.record.exit_code, 0)
        self.assertTrue(self.record.succeeded)
        self.assertIsNone(self.record.error)

    def test_str(self):
        self.assertIn('limit @', str(self.record))
        self.assertIn('(success)', str(self.record))

    def test_to_dict(self):
        data = self.record.to_dict()
        self.assertEqual(data['config']['cstar'], 1.0)
        self.assertEqual(data['checksums'], {'limit.csv': 'ab' * 32})
        self.assertEqual(data['started_at'], self.record.started_at.isoformat())

    def test_ordering_newest_first(self):
        later = RunRecord.objects.create(
            mode='diagnostics',
            config={},
            tool_version='v0.3.0',
            started_at=self.record.started_at + timedelta(minutes=5),
            status='numerical_error',
            exit_code=3,
            error={'error': 'NumericalError', 'message': 'did not converge'},
        )
        self.assertEqual(RunRecord.objects.first(), later)
        self.assertFalse(later.succeeded)


class RunRecordAdminTest(TestCase):

    def setUp(self):
        self.admin_user = User.objects.create_superuser('admin', 'admin@example.com', 'testpass123')
        RunRecord.objects.create(
            mode='covariance',
            config={'n': 8, 'w': 2.0},
            tool_version='v0.3.0',
            started_at=timezone.now(),
            warnings=['a', 'b'],
        )

    def test_changelist_loads(self):
        self.client.force_login(self.admin_user)
        response = self.client.get(reverse('admin:rbmlab_runrecord_changelist'))
        self.assertEqual(response.status_code, 200)
        self.assertContains(response, 'Covariance profile')

    def test_changelist_requires_login(self):
        response = self.client.get(reverse('admin:rbmlab_runrecord_changelist'))
        self.assertEqual(response.status_code, 302)
