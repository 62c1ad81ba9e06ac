"""
Shared RunConfig flags for the caching commands. Not a command itself.
"""
import json

from django.core.management.base import CommandError

from ...caching.config import COMPONENTS, SCHEMES, load_config_file, merge_config
from ...caching.errors import PrivCacheError
from ...serializers import RunConfigSerializer
from ...utils import EXIT_PARAMETER, exit_code_for, parse_int_list


def add_scheme_arguments(parser):
    parser.add_argument('--config', help='Flat JSON RunConfig; flags override its values')
    parser.add_argument('--scheme', choices=SCHEMES)
    parser.add_argument('--n', type=int, help='Number of files N')
    parser.add_argument('--k', type=int, help='Number of users K')
    parser.add_argument('--r', type=int, help='Virtual-user scheme parameter r')
    parser.add_argument('--alpha', help='Memory-sharing fraction, e.g. 1/2')
    parser.add_argument('--first', choices=COMPONENTS)
    parser.add_argument('--second', choices=COMPONENTS)
    parser.add_argument('--first-r', dest='first_r', type=int)
    parser.add_argument('--second-r', dest='second_r', type=int)
    parser.add_argument('--seed', type=int, help='Master seed, defaults to PRIVCACHE_SEED')
    parser.add_argument('--subfile-bytes', dest='subfile_bytes', type=int, help='Symbols per subfile')
    parser.add_argument('--demand', help='Demand vector, e.g. 0,1,0')
    parser.add_argument('--zero-library', dest='zero_library', action='store_true', default=None)


CONFIG_KEYS = ('scheme', 'n', 'k', 'r', 'alpha', 'first', 'second', 'first_r', 'second_r', 'seed',
               'subfile_bytes', 'demand', 'zero_library', 'trials', 'mode', 'colluders')


def resolve_config(options):
    """File values, overridden by flags, validated by RunConfigSerializer."""
    try:
        base = load_config_file(options['config']) if options.get('config') else {}
        flags = {key: options.get(key) for key in CONFIG_KEYS}
        flags['demand'] = parse_int_list(flags['demand'])
        flags['colluders'] = parse_int_list(flags['colluders'])
        config = merge_config(base, flags)
        config['demand'] = parse_int_list(config.get('demand'))
        config['colluders'] = parse_int_list(config.get('colluders'))
    except PrivCacheError as exc:
        raise CommandError(str(exc), returncode=exit_code_for(exc))
    serializer = RunConfigSerializer(data=config)
    if not serializer.is_valid():
        raise CommandError(json.dumps(serializer.errors), returncode=EXIT_PARAMETER)
    return serializer


def fail(exc):
    raise CommandError(f"{type(exc).__name__}: {exc}", returncode=exit_code_for(exc))
