"""
Machine checks of decodability, demand privacy and colluding privacy.

Failures are report checks, never exceptions. Exact modes compare rational
probabilities built from state counts. Every source of randomness is derived
from (seed, trial), so splitting trials over workers gives the same report.
"""
import hashlib
import logging
from collections import defaultdict
from fractions import Fraction
from itertools import combinations
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import chi2_contingency

from .errors import InfeasibleAuditError, ParameterError, PrivCacheError
from .gf_rs import get_field
from .report import AuditReport
from .scheme_common import CachingScheme, FileLibrary, all_demands, measure, trial_rng

logger = logging.getLogger(__name__)

DEFAULT_CEILING = 10 ** 7
DEFAULT_DEMAND_CAP = 10 ** 4
DEFAULT_SIGNIFICANCE = 0.01
DEFAULT_BINS = 32

# Extra randomness streams next to the per-trial ones.
DEMAND_STREAM = 1
AUX_STREAM = 2


def total_variation(p: Dict[Any, Fraction], q: Dict[Any, Fraction]) -> Fraction:
    keys = set(p) | set(q)
    return sum((abs(p.get(x, Fraction(0)) - q.get(x, Fraction(0))) for x in keys), Fraction(0)) / 2


def _max_tv(groups: Dict[Any, Dict[tuple, Dict[Any, Fraction]]]) -> Tuple[Fraction, Optional[dict]]:
    """
    groups: group key -> demand -> distribution. Every distribution of a group
    is compared with the first. Returns the largest distance and where it was.
    """
    worst, where = Fraction(0), None
    for key, members in groups.items():
        demands = sorted(members)
        base = members[demands[0]]
        for other in demands[1:]:
            tv = total_variation(base, members[other])
            if tv > worst:
                worst, where = tv, {'group': key, 'demands': [demands[0], other], 'tv': tv}
    return worst, where


def demand_set(scheme: CachingScheme, seed: int, cap: int = DEFAULT_DEMAND_CAP) -> List[Tuple[int, ...]]:
    """Every demand vector, or a uniform sample of `cap` of them when there are more."""
    N, K = scheme.n_files, scheme.n_users
    if N ** K <= cap:
        return list(all_demands(N, K))
    rng = trial_rng(seed, 0, stream=DEMAND_STREAM)
    return [tuple(int(d) for d in rng.integers(0, N, size=K)) for _ in range(cap)]


def run_trial(scheme: CachingScheme, seed: int, trial: int, demands: Sequence[Sequence[int]],
              subfile_length: int = 1, zero_library: bool = False) -> Dict[str, Any]:
    """
    One correctness trial: a fresh library, then one round per demand.
    The outcome is a plain dict so it can cross a Celery boundary.
    """
    rng = trial_rng(seed, trial)
    library = scheme.new_library(rng, subfile_length, zero=zero_library)
    outcome = {'trial': trial, 'decodes': 0, 'mismatches': 0, 'first_failure': None, 'rates': None}
    for demand in demands:
        demand = tuple(demand)
        try:
            transcript = scheme.run_round(library, demand, rng)
        except PrivCacheError as exc:
            outcome['decodes'] += scheme.n_users
            outcome['mismatches'] += scheme.n_users
            if outcome['first_failure'] is None:
                outcome['first_failure'] = {'demand': list(demand), 'error': str(exc),
                                            'location': getattr(exc, 'location', None)}
            continue
        if outcome['rates'] is None:
            outcome['rates'] = measure(transcript).to_dict()
        failures = transcript.failures()
        outcome['decodes'] += scheme.n_users
        outcome['mismatches'] += len(failures)
        if failures and outcome['first_failure'] is None:
            outcome['first_failure'] = {'demand': list(demand), 'error': str(failures[0]),
                                        'location': failures[0].location}
    return outcome


def summarize_trials(scheme: CachingScheme, outcomes: Iterable[Dict[str, Any]], seed: int,
                     params: Optional[Dict[str, Any]] = None) -> AuditReport:
    outcomes = sorted(outcomes, key=lambda o: o['trial'])
    report = AuditReport(scheme.name, params or scheme.params, seed, "correctness")
    decodes = sum(o['decodes'] for o in outcomes)
    mismatches = sum(o['mismatches'] for o in outcomes)
    first = next((dict(o['first_failure'], trial=o['trial']) for o in outcomes if o['first_failure']), None)
    report.add("decode", mismatches == 0, metric=mismatches,
               detail=first or f"{decodes} decodes over {len(outcomes)} trials")
    rates = next((o['rates'] for o in outcomes if o['rates']), None)
    if rates is not None:
        expected = scheme.formula_point()
        ok = Fraction(rates['payload_M']) == expected.M and Fraction(rates['payload_R']) == expected.R
        report.add("payload_rates", ok, metric=f"M={rates['payload_M']} R={rates['payload_R']}",
                   detail={'expected': str(expected), 'measured': rates})
    return report


def audit_correctness(scheme: CachingScheme, trials: int, seed: int, demand_cap: int = DEFAULT_DEMAND_CAP,
                      subfile_length: int = 1, zero_library: bool = False) -> AuditReport:
    if trials < 1:
        raise ParameterError(f"Need at least one trial, got {trials}")
    demands = demand_set(scheme, seed, demand_cap)
    outcomes = [run_trial(scheme, seed, t, demands, subfile_length, zero_library) for t in range(trials)]
    params = {**scheme.params, 'trials': trials, 'demands': len(demands)}
    report = summarize_trials(scheme, outcomes, seed, params)
    logger.info("[Audit] correctness %s passed=%s", scheme, report.passed)
    return report


# Exact enumeration

def exact_state_count(scheme: CachingScheme, subfile_length: int = 1) -> int:
    """Libraries x randomness x demands an exact audit walks through."""
    library_bits = scheme.n_files * scheme.subfile_count * subfile_length
    return 2 ** library_bits * scheme.randomness_count() * scheme.n_files ** scheme.n_users


def one_bit_libraries(scheme: CachingScheme, subfile_length: int = 1) -> Iterable[FileLibrary]:
    shape = (scheme.n_files, scheme.subfile_count, subfile_length)
    width = int(np.prod(shape))
    positions = np.arange(width)
    for code in range(2 ** width):
        yield FileLibrary(((code >> positions) & 1).reshape(shape), symbol_bits=1)


def _require_enumeration(scheme: CachingScheme, ceiling: int, subfile_length: int = 1) -> int:
    if not scheme.supports_enumeration:
        raise ParameterError(f"{scheme} cannot be audited by enumeration, use the rank or aux modes")
    states = exact_state_count(scheme, subfile_length)
    if states > ceiling:
        raise InfeasibleAuditError(
            f"Exact audit of {scheme} needs {states} states, ceiling is {ceiling}",
            states=states, ceiling=ceiling,
            hint=f"shrink the state count {-(-states // ceiling)}-fold with smaller parameters, "
                 f"or raise PRIVCACHE_ENUMERATION_CEILING",
        )
    return states


def audit_privacy_exact(scheme: CachingScheme, ceiling: int = DEFAULT_CEILING, seed: int = 0) -> AuditReport:
    """
    For every user k and value of D_k, the exact distribution of what user k
    sees (packet, own cache) must not depend on the other demands.
    """
    states = _require_enumeration(scheme, ceiling)
    N, K = scheme.n_files, scheme.n_users
    libraries = list(one_bit_libraries(scheme))
    lib_weight = Fraction(1, len(libraries))
    # dists[k][D_k][D] -> view -> probability
    dists = [defaultdict(lambda: defaultdict(lambda: defaultdict(Fraction))) for _ in range(K)]
    for demand in all_demands(N, K):
        for library in libraries:
            for weight, placement, packet in scheme.enumerate_rounds(library, demand):
                packet_view = packet.view()
                for k in range(K):
                    view = (packet_view, placement.caches[k].view())
                    dists[k][demand[k]][demand][view] += lib_weight * weight
    report = AuditReport(scheme.name, {**scheme.params, 'states': states}, seed, "exact")
    for k in range(K):
        worst, where = _max_tv(dists[k])
        groups = sum(len(v) for v in dists[k].values())
        report.add(f"privacy_user_{k}", worst == 0, metric=worst,
                   detail=where or f"{groups} conditional distributions equal in {len(dists[k])} groups")
    logger.info("[Audit] exact privacy %s passed=%s", scheme, report.passed)
    return report


def _check_colluders(scheme: CachingScheme, colluders: Sequence[int]) -> Tuple[int, ...]:
    S = tuple(sorted(set(int(k) for k in colluders)))
    if not S or any(not 0 <= k < scheme.n_users for k in S):
        raise ParameterError(f"Colluder set {list(colluders)} must be a non-empty subset of [{scheme.n_users}]")
    return S


def audit_colluding(scheme: CachingScheme, colluders: Sequence[int], ceiling: int = DEFAULT_CEILING,
                    seed: int = 0) -> AuditReport:
    """
    Given the files, the pooled view of the colluders (packet, their caches)
    must not depend on the demands of the remaining users.
    """
    S = _check_colluders(scheme, colluders)
    report = AuditReport(scheme.name, {**scheme.params, 'colluders': list(S)}, seed, "exact")
    if len(S) == scheme.n_users:
        report.add("colluding", True, metric=0, detail="no hidden demands")
        return report
    states = _require_enumeration(scheme, ceiling)
    report.params['states'] = states
    worst, where = Fraction(0), None
    for index, library in enumerate(one_bit_libraries(scheme)):
        groups = defaultdict(lambda: defaultdict(lambda: defaultdict(Fraction)))
        for demand in all_demands(scheme.n_files, scheme.n_users):
            key = tuple(demand[k] for k in S)
            for weight, placement, packet in scheme.enumerate_rounds(library, demand):
                view = (packet.view(), tuple(placement.caches[k].view() for k in S))
                groups[key][demand][view] += weight
        tv, place = _max_tv(groups)
        if tv > worst:
            worst, where = tv, dict(place, library=index)
    report.add("colluding", worst == 0, metric=worst,
               detail=where or f"pooled view of users {list(S)} independent of the other demands")
    logger.info("[Audit] colluding %s S=%s passed=%s", scheme, S, report.passed)
    return report


# Certificates for the MDS schemes

def audit_privacy_rank(scheme: CachingScheme, draws: int, seed: int,
                       demands: Optional[Sequence[Sequence[int]]] = None) -> AuditReport:
    """
    Feeds the unit library through the scheme so every segment is its own
    coefficient row, then checks that user k's cache plus the payload has
    the target rank over the field.
    """
    if scheme.rank_target(0) is None:
        raise ParameterError(f"{scheme} has no rank certificate")
    field = get_field(scheme.field)
    identity = FileLibrary.identity(scheme.n_files, scheme.subfile_count, scheme.field.m)
    demands = [scheme.check_demand(d) for d in (demands or all_demands(scheme.n_files, scheme.n_users))]
    report = AuditReport(scheme.name, {**scheme.params, 'draws': draws, 'demands': len(demands)}, seed, "rank")
    targets = [scheme.rank_target(k) for k in range(scheme.n_users)]
    lowest, where = list(targets), [None] * scheme.n_users
    for index, demand in enumerate(demands):
        for draw in range(draws):
            rng = trial_rng(seed, draw, stream=index)
            placement = scheme.place(identity, rng)
            packet = scheme.deliver(placement.state, demand, rng)
            payload = list(packet.segments.values())
            for k in range(scheme.n_users):
                rank = field.rank(np.stack(list(placement.caches[k].segments.values()) + payload))
                if rank < lowest[k]:
                    lowest[k], where[k] = rank, {'demand': list(demand), 'draw': draw, 'rank': rank}
    for k, target in enumerate(targets):
        logger.debug("[Rank] user %s lowest rank %s of %s", k, lowest[k], target)
        report.add(f"rank_user_{k}", lowest[k] == target, metric=f"{lowest[k]}/{target}",
                   detail=where[k] or f"rank {target} for {len(demands)} demands x {draws} draws")
    logger.info("[Audit] rank certificate %s passed=%s", scheme, report.passed)
    return report


def _aux_bin(view, bins: int) -> int:
    digest = hashlib.blake2b(repr(view).encode(), digest_size=8).digest()
    return int.from_bytes(digest, 'big') % bins


def audit_privacy_aux(scheme: CachingScheme, mode: str = "exact", trials: int = 1000, seed: int = 0,
                      ceiling: int = DEFAULT_CEILING, significance: float = DEFAULT_SIGNIFICANCE,
                      bins: int = DEFAULT_BINS) -> AuditReport:
    """
    The auxiliary variables user k reads must be distributed the same for
    every demand sharing D_k. mode is "exact" or "statistical".
    """
    if mode == "exact":
        return _aux_exact(scheme, ceiling, seed)
    if mode == "statistical":
        return _aux_statistical(scheme, trials, seed, significance, bins)
    raise ParameterError(f"Unknown auxiliary audit mode {mode!r}")


def _require_aux_enumeration(scheme: CachingScheme, ceiling: int) -> int:
    if not hasattr(scheme, 'enumerate_aux'):
        raise InfeasibleAuditError(f"{scheme} auxiliary randomness is too large to enumerate",
                                   hint="use --mode statistical")
    states = scheme.aux_state_count() * scheme.n_files ** scheme.n_users
    if states > ceiling:
        raise InfeasibleAuditError(f"Exact auxiliary audit of {scheme} needs {states} states, ceiling is {ceiling}",
                                   states=states, ceiling=ceiling, hint="use --mode statistical")
    return states


def check_feasible(scheme: CachingScheme, mode: str, ceiling: int = DEFAULT_CEILING) -> Optional[int]:
    """State count of an exact mode; raises InfeasibleAuditError above the ceiling."""
    if mode == "aux":
        return _require_aux_enumeration(scheme, ceiling)
    if mode == "exact":
        return _require_enumeration(scheme, ceiling)
    return None


def _aux_exact(scheme: CachingScheme, ceiling: int, seed: int) -> AuditReport:
    states = _require_aux_enumeration(scheme, ceiling)
    report = AuditReport(scheme.name, {**scheme.params, 'states': states}, seed, "aux")
    for k in range(scheme.n_users):
        groups = defaultdict(dict)
        for demand in all_demands(scheme.n_files, scheme.n_users):
            dist = defaultdict(Fraction)
            for weight, view in scheme.enumerate_aux(demand, k):
                dist[view] += weight
            groups[demand[k]][demand] = dist
        worst, where = _max_tv(groups)
        report.add(f"aux_user_{k}", worst == 0, metric=worst,
                   detail=where or "auxiliary distribution independent of the other demands")
    logger.info("[Audit] exact aux %s passed=%s", scheme, report.passed)
    return report


def _aux_statistical(scheme: CachingScheme, trials: int, seed: int, significance: float,
                     bins: int) -> AuditReport:
    if not hasattr(scheme, 'sample_aux'):
        raise ParameterError(f"{scheme} has no auxiliary variables to sample")
    if trials < 1 or bins < 2:
        raise ParameterError(f"Need trials >= 1 and bins >= 2, got {trials} and {bins}")
    N, K = scheme.n_files, scheme.n_users
    demands = list(all_demands(N, K))
    counts = {}
    for index, demand in enumerate(demands):
        rng = trial_rng(seed, index, stream=AUX_STREAM)
        table = np.zeros((K, bins), dtype=np.int64)
        for _ in range(trials):
            for k, view in enumerate(scheme.sample_aux(demand, rng)):
                table[k, _aux_bin(view, bins)] += 1
        counts[demand] = table
    pairs = [(k, a, b) for k in range(K) for a, b in combinations(demands, 2) if a[k] == b[k]]
    threshold = significance / max(len(pairs), 1)
    report = AuditReport(scheme.name, {**scheme.params, 'trials': trials, 'bins': bins,
                                       'significance': significance}, seed, "statistical")
    for k in range(K):
        lowest, where = 1.0, None
        for _, a, b in (p for p in pairs if p[0] == k):
            table = np.stack([counts[a][k], counts[b][k]])
            table = table[:, table.sum(axis=0) > 0]
            if table.shape[1] < 2:
                continue
            _, p_value, _, _ = chi2_contingency(table)
            if p_value < lowest:
                lowest, where = float(p_value), {'demands': [a, b], 'p': float(p_value)}
        report.add(f"aux_user_{k}", lowest >= threshold, metric=lowest,
                   detail=dict(where or {}, threshold=threshold, pairs=len(pairs)))
    logger.info("[Audit] statistical aux %s passed=%s", scheme, report.passed)
    return report
