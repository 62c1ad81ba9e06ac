import json

from django.core.management.base import BaseCommand, CommandError

from ...caching.errors import PrivCacheError
from ...utils import EXIT_FAIL, simulate_summary
from ._runconfig import add_scheme_arguments, fail, resolve_config


class Command(BaseCommand):
    help = 'Run place, deliver and decode for one demand and print a JSON summary'

    def add_arguments(self, parser):
        add_scheme_arguments(parser)
        parser.add_argument('--table', action='store_true', help='Include the packet structure table')

    def handle(self, *args, **options):
        serializer = resolve_config(options)
        try:
            summary = simulate_summary(serializer.build(), {**serializer.validated_data, 'table': options['table']})
        except PrivCacheError as exc:
            fail(exc)
        self.stdout.write(json.dumps(summary, indent=2, default=str))
        if summary['first_failure'] is not None:
            raise CommandError(f"Decode failure at {summary['first_failure']}", returncode=EXIT_FAIL)
