"""
RunConfig handling: a flat JSON document naming a scheme and its parameters.
Defaults come from Django settings so commands, views and workers agree.
"""
import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional

from django.conf import settings

from .errors import ParameterError
from .scheme_common import CachingScheme, SharedScheme, TrivialScheme, parse_alpha
from .scheme_mds_a import MdsSchemeA
from .scheme_mds_b import MdsSchemeB
from .scheme_vu import VirtualUserScheme

logger = logging.getLogger(__name__)

SCHEMES = ("vu", "mds-a", "mds-b", "trivial", "share")
COMPONENTS = ("vu", "mds-a", "mds-b", "trivial")


def setting(name: str, default=None):
    return getattr(settings, name, default)


def default_seed() -> int:
    return int(setting('PRIVCACHE_DEFAULT_SEED', 20240901))


def load_config_file(path) -> Dict[str, Any]:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ParameterError(f"Cannot read config {path}: {exc}")
    if not isinstance(data, dict):
        raise ParameterError(f"Config {path} must be a flat JSON object")
    return data


def merge_config(base: Optional[Dict[str, Any]], overrides: Dict[str, Any]) -> Dict[str, Any]:
    """Flags override file values; flags left unset (None) do not."""
    merged = dict(base or {})
    merged.update({key: value for key, value in overrides.items() if value is not None})
    return merged


def _component(name: str, n: int, k: int, r: Optional[int]) -> CachingScheme:
    if name == "vu":
        if r is None:
            raise ParameterError("Scheme vu needs r")
        return VirtualUserScheme(n, k, int(r))
    if name == "mds-a":
        return MdsSchemeA(n, k)
    if name == "mds-b":
        return MdsSchemeB(n, k)
    if name == "trivial":
        return TrivialScheme(n, k)
    raise ParameterError(f"Unknown scheme {name!r}, expected one of {', '.join(COMPONENTS)}")


def build_scheme(config: Dict[str, Any]) -> CachingScheme:
    """Instantiate the scheme a RunConfig names. Scheme constraints are checked here."""
    name = config.get('scheme')
    try:
        n, k = int(config['n']), int(config['k'])
    except (KeyError, TypeError, ValueError):
        raise ParameterError("RunConfig needs integer n and k")
    if name == "share":
        for key in ('alpha', 'first', 'second'):
            if config.get(key) is None:
                raise ParameterError(f"Scheme share needs {key}")
        first = _component(config['first'], n, k, config.get('first_r', config.get('r')))
        second = _component(config['second'], n, k, config.get('second_r', config.get('r')))
        return SharedScheme(first, second, parse_alpha(config['alpha']))
    return _component(name, n, k, config.get('r'))
