from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from ...caching.errors import PrivCacheError
from ...caching.report import validate_report
from ...serializers import MODES
from ...utils import EXIT_FAIL, execute_audit
from ._runconfig import add_scheme_arguments, fail, resolve_config


class Command(BaseCommand):
    help = 'Run a correctness, privacy or colluding audit and print its JSON report'

    def add_arguments(self, parser):
        parser.add_argument('kind', choices=['correctness', 'privacy', 'colluding'])
        add_scheme_arguments(parser)
        parser.add_argument('--mode', choices=MODES)
        parser.add_argument('--trials', type=int, help='Trials, randomness draws or samples per demand')
        parser.add_argument('--colluders', help='Colluding users, e.g. 0,1')
        parser.add_argument('--output', help='Also write the report to this file')

    def handle(self, *args, **options):
        serializer = resolve_config(options)
        try:
            report = execute_audit(options['kind'], dict(serializer.validated_data))
        except PrivCacheError as exc:
            fail(exc)
        data = report.to_dict()
        validate_report(data)
        body = report.to_json()
        self.stdout.write(body)
        if options['output']:
            Path(options['output']).write_text(body + "\n")
        if not report.passed:
            failure = report.first_failure()
            raise CommandError(f"[Audit] {failure.name} failed: {failure.to_dict()['detail']}", returncode=EXIT_FAIL)
