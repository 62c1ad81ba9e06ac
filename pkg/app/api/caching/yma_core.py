"""
The YMA coded caching scheme for N files and K̄ users with parameter r.

Files are (N, C(K̄, r), L) symbol arrays whose subfile axis follows the
lexicographic order of r-subsets of [K̄]. Only the configuration with every
file requested and one leader per file is supported.
"""
import logging
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from math import comb
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .errors import ConsistencyError, ParameterError, ShapeError

logger = logging.getLogger(__name__)

SubsetIndex = Tuple[int, ...]


def binom(a: int, b: int) -> int:
    """Binomial coefficient with C(a, b) = 0 when b > a, b < 0 or a < 0."""
    if a < 0 or b < 0 or b > a:
        return 0
    return comb(a, b)


@lru_cache(maxsize=None)
def subsets(universe: int, size: int) -> Tuple[SubsetIndex, ...]:
    if size < 0 or size > universe:
        return ()
    return tuple(combinations(range(universe), size))


@lru_cache(maxsize=None)
def subset_positions(universe: int, size: int) -> Dict[SubsetIndex, int]:
    return {members: pos for pos, members in enumerate(subsets(universe, size))}


def make_subset(members, universe: int) -> SubsetIndex:
    """Sorted, distinct, in-range tuple of user indices."""
    members = tuple(sorted(int(m) for m in members))
    if len(set(members)) != len(members):
        raise ParameterError(f"Subset {members} has repeated members")
    if members and (members[0] < 0 or members[-1] >= universe):
        raise ParameterError(f"Subset {members} not inside [{universe}]")
    return members


@dataclass
class YmaCache:
    owner: int
    subfiles: Dict[Tuple[int, SubsetIndex], np.ndarray] = field(default_factory=dict)

    def __len__(self):
        return len(self.subfiles)


@dataclass
class YmaSignal:
    """Delivered segments Y_{R+} for every (r+1)-subset R+ that meets the leader set."""
    demand: Tuple[int, ...]
    leaders: Tuple[int, ...]
    r: int
    n_files: int
    segments: Dict[SubsetIndex, np.ndarray] = field(default_factory=dict)

    @property
    def n_users(self) -> int:
        return len(self.demand)

    def __len__(self):
        return len(self.segments)


def _check_split(files: np.ndarray, n_users: int, r: int):
    expected = binom(n_users, r)
    if files.ndim != 3 or files.shape[1] != expected:
        raise ShapeError(
            f"Library must be split into C({n_users},{r})={expected} subfiles per file, got shape {files.shape}"
        )


def yma_place(n_files: int, n_users: int, r: int, files: np.ndarray) -> List[YmaCache]:
    """User k stores every W_{n,R} with k in R."""
    files = np.asarray(files)
    _check_split(files, n_users, r)
    if files.shape[0] != n_files:
        raise ShapeError(f"Expected {n_files} files, got {files.shape[0]}")
    caches = [YmaCache(owner=k) for k in range(n_users)]
    for pos, members in enumerate(subsets(n_users, r)):
        for k in members:
            for n in range(n_files):
                caches[k].subfiles[(n, members)] = files[n, pos]
    return caches


def _validate_leaders(demand: Sequence[int], leaders: Sequence[int], n_files: int):
    if any(not 0 <= u < len(demand) for u in leaders):
        raise ParameterError(f"Leaders {tuple(leaders)} not inside [{len(demand)}]")
    leader_files = [demand[u] for u in leaders]
    if len(set(leader_files)) != len(leader_files):
        raise ParameterError(f"Leaders {tuple(leaders)} request duplicate files {tuple(leader_files)}")
    missing = set(demand) - set(leader_files)
    if missing:
        raise ParameterError(f"Files {sorted(missing)} are requested but have no leader")
    if any(not 0 <= d < n_files for d in demand):
        raise ParameterError(f"Demand {tuple(demand)} outside [{n_files}]")


def signal_terms(demand: Sequence[int], r_plus: SubsetIndex) -> List[Tuple[int, SubsetIndex]]:
    """The (file, subfile label) pairs XOR-ed into Y_{R+}."""
    return [(demand[t], tuple(m for m in r_plus if m != t)) for t in r_plus]


def yma_deliver(demand: Sequence[int], leaders: Sequence[int], r: int, files: np.ndarray) -> YmaSignal:
    """Y_{R+} = XOR_{t in R+} W_{g_t, R+ minus t}, for every R+ meeting the leaders."""
    files = np.asarray(files)
    demand = tuple(int(d) for d in demand)
    leaders = tuple(sorted(int(u) for u in leaders))
    n_users = len(demand)
    _check_split(files, n_users, r)
    _validate_leaders(demand, leaders, files.shape[0])
    positions = subset_positions(n_users, r)
    leader_set = set(leaders)
    signal = YmaSignal(demand=demand, leaders=leaders, r=r, n_files=files.shape[0])
    for r_plus in subsets(n_users, r + 1):
        if leader_set.isdisjoint(r_plus):
            continue
        segment = np.zeros(files.shape[2], dtype=files.dtype)
        for n, label in signal_terms(demand, r_plus):
            segment = segment ^ files[n, positions[label]]
        signal.segments[r_plus] = segment
    return signal


def coefficient_vector(demand: Sequence[int], r: int, n_files: int, r_plus: SubsetIndex) -> np.ndarray:
    """0/1 vector over the N * C(K̄, r) subfiles, file-major."""
    n_users = len(demand)
    positions = subset_positions(n_users, r)
    width = binom(n_users, r)
    vec = np.zeros(n_files * width, dtype=np.uint8)
    for n, label in signal_terms(demand, r_plus):
        vec[n * width + positions[label]] ^= 1
    return vec


@lru_cache(maxsize=1024)
def expansion_plan(demand: Tuple[int, ...], leaders: Tuple[int, ...], r: int,
                   n_files: int) -> Dict[SubsetIndex, Tuple[SubsetIndex, ...]]:
    """
    For every non-leader R+, the delivered R+ whose segments XOR to Y_{R+}.
    Solved once per demand pattern over GF(2) and shared across payloads.
    """
    n_users = len(demand)
    leader_set = set(leaders)
    delivered = [s for s in subsets(n_users, r + 1) if not leader_set.isdisjoint(s)]
    missing = [s for s in subsets(n_users, r + 1) if leader_set.isdisjoint(s)]
    if not missing:
        return {}

    rows = np.array([coefficient_vector(demand, r, n_files, s) for s in delivered], dtype=np.uint8)
    track = np.eye(len(delivered), dtype=np.uint8)
    pivot_cols = []
    rank = 0
    for c in range(rows.shape[1]):
        if rank >= rows.shape[0]:
            break
        hits = np.nonzero(rows[rank:, c])[0]
        if hits.size == 0:
            continue
        p = rank + int(hits[0])
        if p != rank:
            rows[[rank, p]] = rows[[p, rank]]
            track[[rank, p]] = track[[p, rank]]
        ones = np.nonzero(rows[:, c])[0]
        ones = ones[ones != rank]
        if ones.size:
            rows[ones] ^= rows[rank]
            track[ones] ^= track[rank]
        pivot_cols.append(c)
        rank += 1

    plan = {}
    for target in missing:
        residual = coefficient_vector(demand, r, n_files, target)
        combo = np.zeros(len(delivered), dtype=np.uint8)
        for row, c in enumerate(pivot_cols):
            if residual[c]:
                residual ^= rows[row]
                combo ^= track[row]
        if residual.any():
            raise ConsistencyError(f"Y_{target} is not in the span of the delivered segments for demand {demand}")
        plan[target] = tuple(delivered[i] for i in np.nonzero(combo)[0])
    logger.debug("[Expand] Solved %s non-leader sets for demand %s", len(plan), demand)
    return plan


def yma_expand(signal: YmaSignal) -> Dict[SubsetIndex, np.ndarray]:
    """All Y_{R+}, |R+| = r + 1, including the non-leader ones."""
    n_requested = len(set(signal.demand))
    if n_requested != signal.n_files:
        raise ParameterError(f"Expansion needs every file requested; demand {signal.demand} requests {n_requested}")
    expanded = dict(signal.segments)
    plan = expansion_plan(signal.demand, signal.leaders, signal.r, signal.n_files)
    length = next(iter(signal.segments.values())).shape[0] if signal.segments else 0
    for target, sources in plan.items():
        segment = np.zeros(length, dtype=np.int64)
        for s in sources:
            segment = segment ^ signal.segments[s]
        expanded[target] = segment
    return expanded


def yma_decode(cache: YmaCache, signal: YmaSignal) -> np.ndarray:
    """
    User k recovers W_{g_k}: cached subfiles directly, the rest from
    Y_{R + k} and cached subfiles.
    """
    k = cache.owner
    want = signal.demand[k]
    expanded = yma_expand(signal)
    labels = subsets(signal.n_users, signal.r)
    out = []
    for members in labels:
        if k in members:
            out.append(cache.subfiles[(want, members)])
            continue
        r_plus = tuple(sorted(members + (k,)))
        value = expanded[r_plus]
        for t in members:
            value = value ^ cache.subfiles[(signal.demand[t], tuple(m for m in r_plus if m != t))]
        out.append(value)
    return np.stack(out) if out else np.zeros((0, 0), dtype=np.int64)
