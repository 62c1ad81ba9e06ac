"""
Demand-private scheme with one XOR segment per cache (M = 1/(K+1)).

Each file is a (2K, K+1) Reed-Solomon codeword whose 2K segments are
shuffled by a private permutation p_n. Segment w^(k)_{n,m} = W_{n, p_n[2k+m]}.
User k caches the XOR over files of w^(k)_{n,0} and a pad P_k in [2K].
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations, product
from math import factorial
from typing import Dict, Iterator, List, Sequence, Tuple

import numpy as np

from .errors import DecodeIntegrityError, ParameterError
from .gf_rs import Codeword, FieldSpec, rs_encode, rs_reconstruct
from .scheme_common import CacheBundle, CachingScheme, DeliveryPacket, Placement, RatePoint, index_bits

logger = logging.getLogger(__name__)


@dataclass
class MdsAState:
    """
    coded: (N, 2K, L) RS-coded segments per file
    perms: (N, 2K) permutation p_n per file
    pads: (K,) pad P_k per user
    """
    coded: np.ndarray
    perms: np.ndarray
    pads: np.ndarray

    def index(self, k: int, n: int, m: int) -> int:
        return int(self.perms[n][2 * k + m])

    def segment(self, k: int, n: int, m: int) -> np.ndarray:
        return self.coded[n, self.index(k, n, m)]


def masked_indices(perms, pads, demand: Sequence[int]) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
    """
    J0: true index of every payload segment, in (n, k) order.
    J1: p^(k)_{D_k,0} + P_k mod 2K.
    """
    n_users = len(demand)
    code_length = 2 * n_users
    n_files = len(perms)
    J0 = tuple(
        int(perms[n][2 * k + (1 if demand[k] == n else 0)])
        for n in range(n_files) for k in range(n_users)
    )
    J1 = tuple(int((perms[demand[k]][2 * k] + pads[k]) % code_length) for k in range(n_users))
    return J0, J1


class MdsSchemeA(CachingScheme):
    name = "mds-a"
    flexible_symbols = False

    def __init__(self, n_files: int, n_users: int, field: FieldSpec = None):
        if n_users < 1:
            raise ParameterError(f"Need K >= 1, got K={n_users}")
        self.code_length = 2 * n_users
        self.field = field or FieldSpec.for_code_length(self.code_length)
        if self.field.max_code_length < self.code_length:
            raise ParameterError(f"{self.field} cannot carry a code of length {self.code_length}")
        super().__init__(n_files, n_users, self.field.m)

    @property
    def subfile_count(self) -> int:
        return self.n_users + 1

    def formula_point(self) -> RatePoint:
        K = self.n_users
        return RatePoint(Fraction(1, K + 1), Fraction(K * self.n_files, K + 1), "thm2", note="q=N")

    def encode(self, files: np.ndarray) -> np.ndarray:
        """(N, K+1, L) message symbols to (N, 2K, L) coded segments."""
        return np.stack([rs_encode(files[n], self.code_length, self.field).segments for n in range(self.n_files)])

    def place_with(self, library, perms, pads) -> Placement:
        self.check_library(library)
        state = MdsAState(coded=self.encode(library.files), perms=np.asarray(perms, dtype=np.int64),
                          pads=np.asarray(pads, dtype=np.int64))
        caches = []
        for k in range(self.n_users):
            z = np.zeros(library.subfile_length, dtype=np.int64)
            for n in range(self.n_files):
                z = z ^ state.segment(k, n, 0)
            caches.append(CacheBundle(user=k, segments={'Z': z}, private={'P': int(state.pads[k])},
                                      private_alphabets={'P': self.code_length}))
        return Placement(state=state, caches=caches)

    def draw(self, rng) -> Tuple[np.ndarray, np.ndarray]:
        perms = np.stack([rng.permutation(self.code_length) for _ in range(self.n_files)])
        pads = rng.integers(0, self.code_length, size=self.n_users)
        return perms, pads

    def place(self, library, rng) -> Placement:
        perms, pads = self.draw(rng)
        return self.place_with(library, perms, pads)

    def deliver(self, state: MdsAState, demand, rng=None) -> DeliveryPacket:
        demand = self.check_demand(demand)
        packet = DeliveryPacket()
        for n in range(self.n_files):
            for k in range(self.n_users):
                m = 1 if demand[k] == n else 0
                packet.segments[(n, k)] = state.segment(k, n, m)
                packet.provenance[(n, k)] = f"w^({k})_{n},{m}"
        J0, J1 = self.indices(state.perms, state.pads, demand)
        packet.aux = {'J0': J0, 'J1': J1}
        packet.aux_bits = (len(J0) + len(J1)) * index_bits(self.code_length)
        return packet

    def decode(self, cache, packet, demand_k, k) -> np.ndarray:
        f = demand_k
        J0 = packet.aux['J0']
        segments, indices = [], []
        for i in range(self.n_users):
            segments.append(packet.segments[(f, i)])
            indices.append(J0[f * self.n_users + i])
        own = np.asarray(cache.segments['Z'], dtype=np.int64)
        for n in range(self.n_files):
            if n != f:
                own = own ^ packet.segments[(n, k)]
        segments.append(own)
        indices.append((packet.aux['J1'][k] - cache.private['P']) % self.code_length)
        if len(set(indices)) != len(indices):
            raise DecodeIntegrityError(f"User {k} collected duplicate code indices {indices}",
                                       location={'user': k, 'indices': indices})
        codeword = Codeword(np.stack(segments), tuple(indices), self.code_length, self.n_users + 1, self.field)
        return rs_reconstruct(codeword)

    def indices(self, perms, pads, demand) -> Tuple[tuple, tuple]:
        return masked_indices(perms, pads, demand)

    def rank_target(self, k: int) -> int:
        return self.n_users * self.n_files + 1

    def aux_view(self, state: MdsAState, packet: DeliveryPacket, k: int) -> tuple:
        return packet.aux['J0'], packet.aux['J1'], int(state.pads[k])

    def aux_state_count(self) -> int:
        return factorial(self.code_length) ** self.n_files * self.code_length ** self.n_users

    def enumerate_aux(self, demand: Sequence[int], k: int) -> Iterator[Tuple[Fraction, tuple]]:
        """Every auxiliary view of user k, each with its probability."""
        demand = self.check_demand(demand)
        weight = Fraction(1, self.aux_state_count())
        all_perms = list(permutations(range(self.code_length)))
        for perms in product(all_perms, repeat=self.n_files):
            for pads in product(range(self.code_length), repeat=self.n_users):
                J0, J1 = self.indices(perms, pads, demand)
                yield weight, (J0, J1, pads[k])

    def sample_aux(self, demand: Sequence[int], rng) -> List[tuple]:
        """One fresh draw of the randomness; the auxiliary view of every user."""
        perms, pads = self.draw(rng)
        J0, J1 = self.indices(perms, pads, self.check_demand(demand))
        return [(J0, J1, int(pads[k])) for k in range(self.n_users)]


def a_place(n_files: int, n_users: int, library, rng) -> Placement:
    return MdsSchemeA(n_files, n_users).place(library, rng)


def a_deliver(scheme: MdsSchemeA, state: MdsAState, demand) -> DeliveryPacket:
    return scheme.deliver(state, demand)


def a_decode(scheme: MdsSchemeA, cache: CacheBundle, packet: DeliveryPacket, demand_k: int, k: int) -> np.ndarray:
    return scheme.decode(cache, packet, demand_k, k)


def a_packet_structure(n_files: int, n_users: int, demand: Sequence[int]) -> Dict[str, List[str]]:
    """Symbolic payload and auxiliary layout of one delivery."""
    payload, J0 = [], []
    for n in range(n_files):
        for k in range(n_users):
            m = 1 if demand[k] == n else 0
            payload.append(f"w^({k})_{n},{m}")
            J0.append(f"p^({k})_{n},{m}")
    J1 = [f"p^({k})_{demand[k]},0 + P_{k}" for k in range(n_users)]
    return {'payload': payload, 'J0': J0, 'J1': J1}
