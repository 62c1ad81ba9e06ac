import logging
from celery import shared_task
from django.conf import settings
from django.utils import timezone
from datetime import timedelta

from .caching.audit import demand_set, run_trial
from .caching.config import build_scheme
from .caching.errors import PrivCacheError

# Configure the logger
logger = logging.getLogger(__name__)


@shared_task
def test_task():
    """
    A test task to check if Celery is working.
    Alternatively, use "env | grep CELERY" inside the celery container to check if the environment variables are set.
    """
    logger.info("Test task is being processed.")
    return "Task Completed"


@shared_task
def run_audit(audit_run_id):
    """
    Execute a stored audit run and save its report.
    """
    from .models import AuditRun
    from .utils import execute_audit, resolve_mode

    try:
        run = AuditRun.objects.get(id=audit_run_id)
    except AuditRun.DoesNotExist:
        logger.error("[Audit] AuditRun %s does not exist", audit_run_id)
        return f"[Audit] run {audit_run_id} not found"

    try:
        run.mark_running(resolve_mode(run.kind, build_scheme(run.run_config()), run.mode or None))
        report = execute_audit(run.kind, run.run_config())
    except PrivCacheError as exc:
        logger.error("[Audit] run %s failed: %s", run.id, exc)
        run.mark_failed(f"{type(exc).__name__}: {exc}")
        return f"[Audit] run {run.id} {run.scheme} {run.kind}: error"

    run.mark_completed(report.to_dict())
    verdict = "pass" if report.passed else "fail"
    logger.info("[Audit] run %s %s %s: %s", run.id, run.scheme, run.kind, verdict)
    return f"[Audit] run {run.id} {run.scheme} {run.kind}: {verdict}"


@shared_task
def expire_stale_audits():
    """
    Mark audits that have been running for too long as Failed.
    """
    from .models import AuditRun
    minutes = settings.PRIVCACHE_AUDIT_TIMEOUT_MINUTES
    cutoff = timezone.now() - timedelta(minutes=minutes)
    stale_runs = AuditRun.objects.filter(status=AuditRun.Status.Running, updated_at__lt=cutoff)
    stale_ids = [run.id for run in stale_runs]
    if not stale_ids:
        return "[Stale Audit Check] No stale audits found that need to be updated"

    for run in stale_runs:
        run.mark_failed(f"Timed out after {minutes} minutes")
    return f"[Stale Audit Check] {len(stale_ids)} stale audits: {stale_ids}"


@shared_task
def correctness_trial(config, seed, trial):
    """
    One correctness trial. Its randomness depends only on (seed, trial), so
    the outcomes of a fan-out can be merged with summarize_trials.
    """
    scheme = build_scheme(config)
    demands = demand_set(scheme, seed, settings.PRIVCACHE_DEMAND_CAP)
    outcome = run_trial(scheme, seed, trial, demands, config.get('subfile_bytes') or 1,
                        bool(config.get('zero_library')))
    logger.info("[Audit] %s trial %s: %s mismatches", scheme, trial, outcome['mismatches'])
    return outcome
