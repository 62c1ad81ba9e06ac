"""
Demand-private scheme built from virtual users.

The server runs a non-private scheme for NK virtual users whose demands form
a restricted demand vector: block k is a cyclic shift of (0, ..., N-1).
Real user k secretly owns virtual user kN + p_k for a uniform offset p_k, so
every file is requested by exactly one of its virtual identities and the
broadcast carries no information about the real demands.

Labels t range over T = [NK - K + 1]. Virtual user (k, n) caches the YMA
signal, over T, for the demand t -> g_k(t) + n (mod N) with leaders [N].
"""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np

from .errors import DomainError, ParameterError
from .scheme_common import (
    CacheBundle, CachingScheme, DeliveryPacket, FileLibrary, Placement, RatePoint, index_bits,
)
from .yma_core import (
    SubsetIndex, YmaSignal, binom, subset_positions, subsets, yma_deliver, yma_expand,
)

logger = logging.getLogger(__name__)


def label_count(n_files: int, n_users: int) -> int:
    return n_files * n_users - n_users + 1


def _check_files(n_files: int):
    if n_files < 2:
        raise ParameterError(f"The virtual-user scheme needs N >= 2, got N={n_files}")


@dataclass(frozen=True)
class RestrictedDemand:
    d: Tuple[int, ...]
    expanded: Tuple[int, ...]

    @classmethod
    def of(cls, d: Sequence[int], n_files: int) -> "RestrictedDemand":
        d = tuple(int(x) for x in d)
        return cls(d=d, expanded=expand_restricted(d, n_files))


@dataclass(frozen=True)
class DemandMask:
    d: Tuple[int, ...]
    V: FrozenSet[int]
    t_d: int


@dataclass
class VuServerState:
    files: np.ndarray
    offsets: Tuple[int, ...]
    r: int


def expand_restricted(d: Sequence[int], n_files: int) -> Tuple[int, ...]:
    """Block k is (d_k, d_k+1, ..., d_k+N-1) mod N."""
    out = []
    for dk in d:
        if not 0 <= dk < n_files:
            raise ParameterError(f"Demand entry {dk} outside [{n_files}]")
        out.extend((dk + j) % n_files for j in range(n_files))
    return tuple(out)


def label_of(d: Sequence[int], n_files: int) -> int:
    """f(d) for d in D0; D0 holds the constant vectors and the one-step staircases."""
    d = tuple(int(x) for x in d)
    n_users = len(d)
    a = d[0]
    if all(x == a for x in d):
        return a
    k = sum(1 for x in d if x != a)
    if a > n_files - 2 or d != (a,) * (n_users - k) + (a + 1,) * k:
        raise DomainError(f"{d} is not in the labelled demand set")
    return (n_files - 1) * k + a + 1


@lru_cache(maxsize=None)
def demand_of(t: int, n_files: int, n_users: int) -> Tuple[int, ...]:
    """g(t), the inverse of label_of."""
    m = label_count(n_files, n_users)
    if not 0 <= t < m:
        raise DomainError(f"Label {t} outside [{m}]")
    if t < n_files:
        return (t,) * n_users
    k, a = divmod(t - 1, n_files - 1)
    return (a,) * (n_users - k) + (a + 1,) * k


def g_comp(k: int, t: int, n_files: int, n_users: int) -> int:
    """Entry k of g(t) without building the vector."""
    if t < n_files:
        return t
    if t <= (n_users - k) * (n_files - 1):
        return (t - 1) % (n_files - 1)
    return (t - 1) % (n_files - 1) + 1


def _unit(k: int, a: int, n_files: int, n_users: int) -> set:
    """Mask contribution of d_k = a, as a set of labels (XOR = symmetric difference)."""
    N, K = n_files, n_users
    out = {0}
    for b in range(1, a + 1):
        if k == 0:
            pair = (b, (N - 1) * (K - 1) + b)
        elif k == K - 1:
            pair = (N - 1 + b, b - 1)
        else:
            pair = ((N - 1) * (K - k) + b, (N - 1) * (K - k - 1) + b)
        out ^= set(pair)
    return out


@lru_cache(maxsize=4096)
def mask_set(d: Tuple[int, ...], n_files: int) -> FrozenSet[int]:
    n_users = len(d)
    if n_users == 1:
        return frozenset({d[0]})
    V = {0}
    for k, a in enumerate(d):
        if a:
            V ^= _unit(k, a, n_files, n_users) ^ {0}
    return frozenset(V)


def vd_mask(d: Sequence[int], n_files: int, rng: Optional[np.random.Generator] = None,
            t_d: Optional[int] = None) -> DemandMask:
    d = tuple(int(x) for x in d)
    V = mask_set(d, n_files)
    try:
        forced = label_of(d, n_files)
    except DomainError:
        forced = None
    if forced is not None:
        t_d = forced
    elif t_d is None:
        choices = sorted(V)
        t_d = choices[int(rng.integers(len(choices)))] if rng is not None else choices[0]
    if t_d not in V:
        raise ParameterError(f"t_d={t_d} not in V={sorted(V)} for d={d}")
    return DemandMask(d=d, V=V, t_d=t_d)


def virtual_demand(k: int, n: int, n_files: int, n_users: int) -> Tuple[int, ...]:
    m = label_count(n_files, n_users)
    return tuple((g_comp(k, t, n_files, n_users) + n) % n_files for t in range(m))


def _xor_subfiles(files: np.ndarray, n: int, labels, r: int, m: int) -> np.ndarray:
    positions = subset_positions(m, r)
    segment = np.zeros(files.shape[2], dtype=np.int64)
    for label in labels:
        segment = segment ^ files[n, positions[label]]
    return segment


def payload_labels(S: SubsetIndex, V: FrozenSet[int]) -> List[SubsetIndex]:
    """Subfile labels {v} + S, v in V minus S, XOR-ed into X_{d,S}."""
    return [tuple(sorted(S + (v,))) for v in sorted(V) if v not in S]


def vu_packet_structure(n_files: int, n_users: int, r: int, d: Sequence[int],
                        t_d: Optional[int] = None) -> Dict[SubsetIndex, Optional[List[SubsetIndex]]]:
    """
    For every (r-1)-subset S of T, the subfile labels XOR-ed into X_{d,S},
    or None when S contains t_d and the segment is not sent.
    """
    _check_files(n_files)
    m = label_count(n_files, n_users)
    mask = vd_mask(d, n_files, t_d=t_d)
    table = {}
    for S in subsets(m, r - 1):
        table[S] = None if mask.t_d in S else payload_labels(S, mask.V)
    return table


def _format_label(label: SubsetIndex) -> str:
    return "{" + ",".join(str(x) for x in label) + "}"


def recover_xsub(packet: DeliveryPacket, mask: DemandMask, S: SubsetIndex, n: int, length: int) -> np.ndarray:
    """X^(n)_{d,S} for any S; when t_d is in S it is rebuilt from delivered segments."""
    if mask.t_d not in S:
        return np.asarray(packet.segments[(n, S)], dtype=np.int64)
    base = tuple(x for x in S if x != mask.t_d)
    out = np.zeros(length, dtype=np.int64)
    for t in sorted(mask.V):
        if t in S:
            continue
        out = out ^ np.asarray(packet.segments[(n, tuple(sorted(base + (t,))))], dtype=np.int64)
    return out


class VirtualUserScheme(CachingScheme):
    name = "vu"
    supports_enumeration = True

    def __init__(self, n_files: int, n_users: int, r: int, symbol_bits: int = 8):
        super().__init__(n_files, n_users, symbol_bits)
        _check_files(n_files)
        self.m = label_count(n_files, n_users)
        if not 0 <= r <= self.m:
            raise ParameterError(f"r={r} outside [0, {self.m}] for N={n_files}, K={n_users}")
        self.r = r

    def __str__(self):
        return f"vu(N={self.n_files}, K={self.n_users}, r={self.r})"

    @property
    def params(self):
        return {**super().params, 'r': self.r}

    @property
    def subfile_count(self) -> int:
        return binom(self.m, self.r)

    def formula_point(self) -> RatePoint:
        N, m, r = self.n_files, self.m, self.r
        M = Fraction(binom(m, r + 1) - binom(m - N, r + 1), binom(m, r))
        return RatePoint(M, Fraction(N * r, m), "thm1", note=f"r={r}")

    def virtual_cache(self, files: np.ndarray, k: int, n: int) -> YmaSignal:
        demand = virtual_demand(k, n, self.n_files, self.n_users)
        return yma_deliver(demand, tuple(range(self.n_files)), self.r, files)

    def _bundle(self, files: np.ndarray, k: int, offset: int) -> CacheBundle:
        signal = self.virtual_cache(files, k, offset)
        return CacheBundle(user=k, segments=dict(signal.segments),
                           private={'p': offset}, private_alphabets={'p': self.n_files})

    def place_with(self, library: FileLibrary, offsets: Sequence[int]) -> Placement:
        self.check_library(library)
        offsets = tuple(int(p) for p in offsets)
        state = VuServerState(files=library.files, offsets=offsets, r=self.r)
        caches = [self._bundle(library.files, k, offsets[k]) for k in range(self.n_users)]
        logger.debug("[Placement] %s offsets=%s", self, offsets)
        return Placement(state=state, caches=caches)

    def place(self, library, rng) -> Placement:
        offsets = tuple(int(p) for p in rng.integers(0, self.n_files, size=self.n_users))
        return self.place_with(library, offsets)

    def virtual_demand_for(self, state: VuServerState, demand: Sequence[int]) -> Tuple[int, ...]:
        return tuple((D - p) % self.n_files for D, p in zip(demand, state.offsets))

    def deliver_restricted(self, files: np.ndarray, mask: DemandMask) -> DeliveryPacket:
        """Payload X^(n)_{d,S} for every file n and (r-1)-subset S of T avoiding t_d."""
        packet = DeliveryPacket()
        for n in range(self.n_files):
            for S in subsets(self.m, self.r - 1):
                if mask.t_d in S:
                    continue
                labels = payload_labels(S, mask.V)
                packet.segments[(n, S)] = _xor_subfiles(files, n, labels, self.r, self.m)
                packet.provenance[(n, S)] = "+".join(f"W_{n},{_format_label(x)}" for x in labels) or "0"
        packet.aux = {'d': mask.d, 't_d': mask.t_d}
        packet.aux_bits = self.n_users * index_bits(self.n_files) + index_bits(self.m)
        return packet

    def deliver_with(self, state: VuServerState, demand, t_d: Optional[int] = None) -> DeliveryPacket:
        demand = self.check_demand(demand)
        mask = vd_mask(self.virtual_demand_for(state, demand), self.n_files, t_d=t_d)
        return self.deliver_restricted(state.files, mask)

    def deliver(self, state, demand, rng) -> DeliveryPacket:
        demand = self.check_demand(demand)
        mask = vd_mask(self.virtual_demand_for(state, demand), self.n_files, rng=rng)
        logger.debug("[Delivery] %s d=%s V=%s t_d=%s", self, mask.d, sorted(mask.V), mask.t_d)
        return self.deliver_restricted(state.files, mask)

    def decode_virtual(self, signal: YmaSignal, packet: DeliveryPacket, k: int, n: int) -> np.ndarray:
        """Virtual user (k, n) recovers W_{d_k + n}, one subfile per r-subset R of T."""
        mask = vd_mask(packet.aux['d'], self.n_files, t_d=packet.aux['t_d'])
        expanded = yma_expand(signal)
        length = _segment_length(signal.segments, packet.segments)
        rows = []
        for R in subsets(self.m, self.r):
            value = np.zeros(length, dtype=np.int64)
            for t in sorted(mask.V):
                if t not in R:
                    value = value ^ expanded[tuple(sorted(R + (t,)))]
            for t in R:
                file_index = (g_comp(k, t, self.n_files, self.n_users) + n) % self.n_files
                S = tuple(x for x in R if x != t)
                value = value ^ recover_xsub(packet, mask, S, file_index, length)
            rows.append(value)
        return np.stack(rows)

    def decode(self, cache, packet, demand_k, k) -> np.ndarray:
        n = cache.private['p']
        demand = virtual_demand(k, n, self.n_files, self.n_users)
        signal = YmaSignal(demand=demand, leaders=tuple(range(self.n_files)), r=self.r,
                           n_files=self.n_files, segments=dict(cache.segments))
        return self.decode_virtual(signal, packet, k, n)

    def randomness_count(self) -> int:
        return self.n_files ** self.n_users * self.m

    def enumerate_rounds(self, library, demand):
        demand = self.check_demand(demand)
        offset_weight = Fraction(1, self.n_files ** self.n_users)
        for offsets in product(range(self.n_files), repeat=self.n_users):
            placement = self.place_with(library, offsets)
            d = self.virtual_demand_for(placement.state, demand)
            try:
                choices = [label_of(d, self.n_files)]
            except DomainError:
                choices = sorted(mask_set(d, self.n_files))
            for t_d in choices:
                yield offset_weight / len(choices), placement, self.deliver_with(placement.state, demand, t_d)


def _segment_length(*segment_maps) -> int:
    for segments in segment_maps:
        for seg in segments.values():
            return np.asarray(seg).shape[0]
    return 0


def vu_place(n_files: int, n_users: int, r: int, library: FileLibrary, rng) -> Placement:
    return VirtualUserScheme(n_files, n_users, r, library.symbol_bits).place(library, rng)


def vu_deliver(scheme: VirtualUserScheme, state: VuServerState, demand, rng) -> DeliveryPacket:
    return scheme.deliver(state, demand, rng)


def vu_decode(scheme: VirtualUserScheme, cache: CacheBundle, packet: DeliveryPacket, demand_k: int, k: int):
    return scheme.decode(cache, packet, demand_k, k)


def vu_nonprivate_round(n_files: int, n_users: int, r: int, library: FileLibrary, d: Sequence[int],
                        rng: Optional[np.random.Generator] = None) -> List[dict]:
    """
    Run the restricted-demand scheme for all NK virtual users at once and
    report, per virtual user, whether it decoded its file.
    """
    scheme = VirtualUserScheme(n_files, n_users, r, library.symbol_bits)
    scheme.check_library(library)
    d = scheme.check_demand(d)
    restricted = RestrictedDemand.of(d, n_files)
    packet = scheme.deliver_restricted(library.files, vd_mask(restricted.d, n_files, rng=rng))
    outcomes = []
    for k in range(n_users):
        for n in range(n_files):
            want = restricted.expanded[k * n_files + n]
            decoded = scheme.decode_virtual(scheme.virtual_cache(library.files, k, n), packet, k, n)
            outcomes.append({
                'virtual_user': k * n_files + n,
                'file': want,
                'ok': bool(np.array_equal(decoded, library.files[want])),
            })
    return outcomes
