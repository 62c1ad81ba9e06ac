from datetime import timedelta

from django.conf import settings
from django.db import models
from django.utils import timezone
from django.utils.translation import gettext_lazy as _


class AuditRun(models.Model):
    """
    Model to store an audit request and, once the worker is done, its report.
    params holds the scheme parameters of the RunConfig (n, k, r, alpha, ...).
    """
    class Kind(models.TextChoices):
        Correctness = 'correctness', _('Correctness')
        Privacy = 'privacy', _('Privacy')
        Colluding = 'colluding', _('Colluding')

    class Status(models.TextChoices):
        Pending = 'Pending', _('Pending')
        Running = 'Running', _('Running')
        Completed = 'Completed', _('Completed')
        Failed = 'Failed', _('Failed')

    kind = models.CharField(max_length=20, choices=Kind.choices)
    scheme = models.CharField(max_length=20)  # vu, mds-a, mds-b, trivial, share
    params = models.JSONField(default=dict)
    mode = models.CharField(max_length=20, blank=True, default="")  # exact, rank, aux, statistical
    seed = models.BigIntegerField()
    trials = models.PositiveIntegerField(default=100)
    status = models.CharField(max_length=20, choices=Status.choices, default=Status.Pending)
    report = models.JSONField(null=True, blank=True)
    passed = models.BooleanField(null=True, blank=True)
    error = models.TextField(blank=True, default="")
    requested_by = models.ForeignKey(settings.AUTH_USER_MODEL, on_delete=models.SET_NULL, null=True, blank=True,
                                     related_name='audit_runs')
    created_at = models.DateTimeField(auto_now_add=True)
    updated_at = models.DateTimeField(auto_now=True)

    class Meta:
        ordering = ['-created_at']

    def __str__(self):
        return f"{self.kind} audit of {self.scheme} {self.params} ({self.status})"

    def run_config(self):
        """The RunConfig dict this run was requested with."""
        return {
            **self.params,
            'scheme': self.scheme,
            'kind': self.kind,
            'mode': self.mode or None,
            'seed': self.seed,
            'trials': self.trials,
        }

    def mark_running(self, mode=None):
        self.status = self.Status.Running
        if mode:
            self.mode = mode
        self.save(update_fields=['status', 'mode', 'updated_at'])

    def mark_completed(self, report):
        self.report = report
        self.passed = bool(report.get('pass'))
        self.status = self.Status.Completed
        self.error = ""
        self.save(update_fields=['report', 'passed', 'status', 'error', 'updated_at'])

    def mark_failed(self, message):
        self.status = self.Status.Failed
        self.error = message
        self.save(update_fields=['status', 'error', 'updated_at'])

    def is_stale(self, minutes):
        return self.status == self.Status.Running and self.updated_at < timezone.now() - timedelta(minutes=minutes)
