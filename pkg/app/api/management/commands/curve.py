from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand

from ...caching.curves import curve_csv
from ...caching.errors import PrivCacheError
from ._runconfig import fail


class Command(BaseCommand):
    help = 'Emit the sampled memory-rate curves of (N, K) as CSV'

    def add_arguments(self, parser):
        parser.add_argument('--n', type=int, required=True)
        parser.add_argument('--k', type=int, required=True)
        parser.add_argument('--samples', type=int, default=None, help='Uniform M samples, default 512')
        parser.add_argument('--output', help='Write the CSV here instead of stdout')

    def handle(self, *args, **options):
        samples = options['samples'] or settings.PRIVCACHE_CURVE_SAMPLES
        try:
            body = curve_csv(options['n'], options['k'], samples)
        except PrivCacheError as exc:
            fail(exc)
        if options['output']:
            Path(options['output']).write_text(body)
            self.stdout.write(f"[Curve] wrote {options['output']}")
        else:
            self.stdout.write(body, ending='')
