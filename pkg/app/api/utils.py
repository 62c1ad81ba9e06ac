"""
Glue between RunConfigs and the caching library, shared by management
commands, views and Celery tasks.
"""
import logging

from .caching.audit import (
    audit_colluding, audit_correctness, audit_privacy_aux, audit_privacy_exact, audit_privacy_rank, check_feasible,
)
from .caching.config import build_scheme, default_seed, setting
from .caching.errors import InfeasibleAuditError, ParameterError, PrivCacheError
from .caching.scheme_common import RoundTranscript, measure, trial_rng

logger = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_PARAMETER = 2
EXIT_INFEASIBLE = 3


def parse_int_list(text):
    """'0,1,0' -> [0, 1, 0]; None and lists pass through."""
    if text is None or isinstance(text, (list, tuple)):
        return text
    try:
        return [int(x) for x in str(text).split(',') if x.strip() != ""]
    except ValueError:
        raise ParameterError(f"Expected a comma separated list of integers, got {text!r}")


def exit_code_for(exc):
    if isinstance(exc, InfeasibleAuditError):
        return EXIT_INFEASIBLE
    if isinstance(exc, (ValueError, ArithmeticError)):
        return EXIT_PARAMETER
    return EXIT_FAIL


def default_demand(n_files, n_users):
    return [k % n_files for k in range(n_users)]


def point_summary(scheme, config=None):
    """Closed-form (M, R), exact and decimal; with config['measure'] also one measured round."""
    point = scheme.formula_point()
    summary = {
        'scheme': scheme.name,
        'params': scheme.params,
        'M': str(point.M),
        'R': str(point.R),
        'M_decimal': float(point.M),
        'R_decimal': float(point.R),
        'source': point.source,
        'note': point.note,
    }
    if config and config.get('measure'):
        seed = config.get('seed') or default_seed()
        rng = trial_rng(seed)
        library = scheme.new_library(rng, config.get('subfile_bytes') or 1)
        transcript = scheme.run_round(library, default_demand(scheme.n_files, scheme.n_users), rng)
        summary['measured'] = measure(transcript).to_dict()
    return summary


def packet_table(packet):
    rows = [{'segment': str(label), 'provenance': packet.provenance.get(label, "")} for label in packet.segments]
    aux = {name: value for name, value in sorted(packet.aux.items())}
    return {'payload': rows, 'aux': aux}


def simulate_summary(scheme, config):
    """
    One place/deliver/decode round. Decoding errors become per-user verdicts,
    the summary names the first mismatch.
    """
    seed = config.get('seed')
    if seed is None:
        seed = default_seed()
    demand = scheme.check_demand(config.get('demand') or default_demand(scheme.n_files, scheme.n_users))
    rng = trial_rng(seed)
    library = scheme.new_library(rng, config.get('subfile_bytes') or 1, zero=bool(config.get('zero_library')))
    placement = scheme.place(library, rng)
    packet = scheme.deliver(placement.state, demand, rng)
    verdicts, first_failure, decoded = [], None, []
    for k in range(scheme.n_users):
        try:
            payload = scheme.decode(placement.caches[k], packet, demand[k], k)
            library.verify_decoded(demand[k], payload.reshape(library.files.shape[1:]), user=k)
            ok, location = True, None
            decoded.append(payload)
        except PrivCacheError as exc:
            ok, location = False, getattr(exc, 'location', None) or {'user': k, 'error': str(exc)}
        verdicts.append({'user': k, 'file': demand[k], 'ok': ok})
        if not ok and first_failure is None:
            first_failure = location
    summary = {
        'scheme': scheme.name,
        'params': scheme.params,
        'seed': seed,
        'demand': list(demand),
        'payload_segments': len(packet.segments),
        'aux_bits': packet.aux_bits,
        'aux_variables': sorted(packet.aux),
        'decoded': verdicts,
        'first_failure': first_failure,
    }
    if first_failure is None:
        summary['measured'] = measure(RoundTranscript(scheme, library, placement, demand, packet, decoded)).to_dict()
    if config.get('table'):
        summary['table'] = packet_table(packet)
    logger.info("[Delivery] simulate %s demand=%s ok=%s", scheme, list(demand), first_failure is None)
    return summary


def resolve_mode(kind, scheme, mode=None):
    """
    The audit mode a request runs in. MDS schemes carry a rank certificate and
    are audited by rank/aux/statistical; the others by exact enumeration.
    """
    certified = scheme.rank_target(0) is not None
    if kind == 'correctness':
        return 'correctness'
    if kind == 'colluding':
        if certified:
            raise ParameterError(f"Colluding privacy is not claimed for {scheme}")
        return 'exact'
    if kind != 'privacy':
        raise ParameterError(f"Unknown audit kind {kind!r}")
    mode = mode or ('rank' if certified else 'exact')
    if mode == 'exact' and certified:
        raise ParameterError(f"{scheme} is audited with --mode rank, aux or statistical")
    if mode != 'exact' and not certified:
        raise ParameterError(f"Mode {mode} applies to the MDS schemes only, use --mode exact for {scheme}")
    return mode


def preflight(kind, config):
    """Reject a request before it is queued: bad parameters or an infeasible exact mode."""
    scheme = build_scheme(config)
    mode = resolve_mode(kind, scheme, config.get('mode'))
    if kind == 'colluding':
        colluders = parse_int_list(config.get('colluders')) or []
        if len(set(colluders)) >= scheme.n_users:
            return mode
    check_feasible(scheme, mode, setting('PRIVCACHE_ENUMERATION_CEILING', 10 ** 7))
    return mode


def execute_audit(kind, config):
    """Run the auditor a RunConfig selects and return its AuditReport."""
    scheme = build_scheme(config)
    seed = config.get('seed')
    if seed is None:
        seed = default_seed()
    trials = config.get('trials') or 100
    ceiling = setting('PRIVCACHE_ENUMERATION_CEILING', 10 ** 7)
    mode = resolve_mode(kind, scheme, config.get('mode'))
    if mode == 'correctness':
        return audit_correctness(scheme, trials, seed, demand_cap=setting('PRIVCACHE_DEMAND_CAP', 10 ** 4),
                                 subfile_length=config.get('subfile_bytes') or 1,
                                 zero_library=bool(config.get('zero_library')))
    if kind == 'colluding':
        return audit_colluding(scheme, parse_int_list(config.get('colluders')) or [], ceiling, seed)
    if mode == 'exact':
        return audit_privacy_exact(scheme, ceiling, seed)
    if mode == 'rank':
        return audit_privacy_rank(scheme, trials, seed)
    if mode == 'aux':
        return audit_privacy_aux(scheme, "exact", seed=seed, ceiling=ceiling)
    return audit_privacy_aux(scheme, "statistical", trials=trials, seed=seed,
                             significance=setting('PRIVCACHE_SIGNIFICANCE', 0.01),
                             bins=setting('PRIVCACHE_CHI2_BINS', 32))
