from datetime import timedelta

from django.test import TestCase
from django.utils import timezone

from ..models import AuditRun
from .factory import AuditRunFactory, UserFactory


class AuditRunModelTest(TestCase):
    def setUp(self):
        self.user = UserFactory()
        self.run = AuditRunFactory(
            kind=AuditRun.Kind.Privacy, scheme='vu', params={'n': 2, 'k': 2, 'r': 1}, mode='exact', seed=7,
            trials=10, requested_by=self.user,
        )

    def test_defaults(self):
        self.assertEqual(self.run.status, AuditRun.Status.Pending)
        self.assertIsNone(self.run.report)
        self.assertIsNone(self.run.passed)
        self.assertIn(self.run, self.user.audit_runs.all())

    def test_run_config(self):
        self.assertEqual(self.run.run_config(), {
            'n': 2, 'k': 2, 'r': 1, 'scheme': 'vu', 'kind': 'privacy', 'mode': 'exact', 'seed': 7, 'trials': 10,
        })

    def test_lifecycle(self):
        self.run.mark_running("statistical")
        stored = AuditRun.objects.get(id=self.run.id)
        self.assertEqual((stored.status, stored.mode), (AuditRun.Status.Running, "statistical"))
        self.run.mark_completed({'pass': False, 'checks': [{'name': 'privacy_user_0', 'pass': False}]})
        self.run.refresh_from_db()
        self.assertEqual(self.run.status, AuditRun.Status.Completed)
        self.assertFalse(self.run.passed)
        self.run.mark_failed("boom")
        self.run.refresh_from_db()
        self.assertEqual((self.run.status, self.run.error), (AuditRun.Status.Failed, "boom"))

    def test_is_stale(self):
        self.run.mark_running()
        AuditRun.objects.filter(id=self.run.id).update(updated_at=timezone.now() - timedelta(minutes=90))
        self.run.refresh_from_db()
        self.assertTrue(self.run.is_stale(60))
        self.assertFalse(self.run.is_stale(120))

    def test_requester_deletion_keeps_the_run(self):
        self.user.delete()
        self.run.refresh_from_db()
        self.assertIsNone(self.run.requested_by)

    def test_str(self):
        self.assertIn("privacy audit of vu", str(self.run))
