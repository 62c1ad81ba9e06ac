import json

from django.core.management.base import BaseCommand

from ...caching.errors import PrivCacheError
from ...utils import point_summary
from ._runconfig import add_scheme_arguments, fail, resolve_config


class Command(BaseCommand):
    help = 'Print the closed-form (M, R) pair of a scheme, exact and decimal'

    def add_arguments(self, parser):
        add_scheme_arguments(parser)
        parser.add_argument('--measure', action='store_true', help='Also run one round and report measured sizes')

    def handle(self, *args, **options):
        serializer = resolve_config(options)
        try:
            summary = point_summary(serializer.build(), {**serializer.validated_data, 'measure': options['measure']})
        except PrivCacheError as exc:
            fail(exc)
        self.stdout.write(f"M={summary['M']} R={summary['R']}")
        self.stdout.write(f"M={summary['M_decimal']:.12g} R={summary['R_decimal']:.12g}")
        if 'measured' in summary:
            self.stdout.write(json.dumps(summary['measured'], indent=2))
