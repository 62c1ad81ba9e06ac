"""
Demand-private scheme for K >= N >= 3 with M = N / ((K+1)(N-1)).

Each file is a (2K(N-1), (K+1)(N-1)) Reed-Solomon codeword shuffled by a
private permutation p_n; w^(k)_{n,m} = W_{n, p_n[k(2N-2) + m]}. User k caches
Z_{k,n} = XOR_{m != n} w^(k)_{m,n} for every n, plus one-time pads. Every
file, requested or not, gets a leader u_n whose segment anchors delivery.
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .errors import DecodeIntegrityError, DomainError, ParameterError
from .gf_rs import Codeword, FieldSpec, rs_encode, rs_reconstruct
from .scheme_common import CacheBundle, CachingScheme, DeliveryPacket, Placement, RatePoint, index_bits

logger = logging.getLogger(__name__)


def h_map(n_files: int, n: int, m: int) -> int:
    """
    Fixed-point-free bijection on [N] minus n: relabel in order, shift down
    by one cyclically, relabel back.
    """
    if n_files < 3:
        raise DomainError(f"h_n needs N >= 3, got N={n_files}")
    if m == n or not 0 <= m < n_files or not 0 <= n < n_files:
        raise ParameterError(f"h_{n}({m}) undefined for N={n_files}")
    others = [x for x in range(n_files) if x != n]
    return others[(others.index(m) - 1) % (n_files - 1)]


def leaders(demand: Sequence[int], n_files: int) -> Tuple[int, ...]:
    """u_n: the smallest user requesting n, or user 1 when nobody does."""
    out = []
    for n in range(n_files):
        requesters = [k for k, d in enumerate(demand) if d == n]
        out.append(requesters[0] if requesters else 1)
    return tuple(out)


@dataclass
class MdsBState:
    """
    coded: (N, 2K(N-1), L) coded segments
    perms: (N, 2K(N-1)) index permutations p_n
    pis: (N, K) position permutations pi_n
    P: (K, N) index pads; S: (K+1, N) position pads, row K is held by user 0
    """
    coded: np.ndarray
    perms: np.ndarray
    pis: np.ndarray
    P: np.ndarray
    S: np.ndarray


class MdsSchemeB(CachingScheme):
    name = "mds-b"
    flexible_symbols = False

    def __init__(self, n_files: int, n_users: int, field: FieldSpec = None):
        if n_files < 3 or n_users < n_files:
            raise ParameterError(f"mds-b requires K >= N >= 3, got N={n_files}, K={n_users}")
        self.block = 2 * n_files - 2
        self.code_length = 2 * n_users * (n_files - 1)
        self.k_dim = (n_users + 1) * (n_files - 1)
        self.field = field or FieldSpec.for_code_length(self.code_length)
        if self.field.max_code_length < self.code_length:
            raise ParameterError(f"{self.field} cannot carry a code of length {self.code_length}")
        super().__init__(n_files, n_users, self.field.m)

    @property
    def subfile_count(self) -> int:
        return self.k_dim

    def formula_point(self) -> RatePoint:
        N, K = self.n_files, self.n_users
        return RatePoint(Fraction(N, (K + 1) * (N - 1)), Fraction(K * N - 1, K + 1), "thm2", note="q=N-1")

    def idx(self, perms, k: int, n: int, m: int) -> int:
        return int(perms[n][k * self.block + m])

    # Which slots go where. Shared by delivery, decoding and the structure table.

    def direct_slots(self, n: int, k: int, d_k: int) -> List[int]:
        """m-slots of w^(k)_{n,m} sent in the clear inside X_{D,n}; depends on D only through D_k."""
        N = self.n_files
        if k == 0:
            if n != d_k:
                skip = {n, d_k, h_map(N, n, d_k)}
                return [m for m in range(N) if m not in skip]
            return list(range(N + 1, 2 * N - 2))
        if n != d_k:
            return [m for m in range(N) if m not in (n, d_k)]
        return list(range(N, 2 * N - 2))

    def block_size(self, k: int) -> int:
        return self.n_files - 3 if k == 0 else self.n_files - 2

    def v_terms(self, demand: Sequence[int], u: Sequence[int], n: int, k: int) -> Tuple[bool, int, int]:
        """
        (carries Y_n, user block, m-slot) describing V^(k)_{D,n}.
        """
        if k == u[n]:
            if n != demand[0]:
                return False, 0, h_map(self.n_files, n, demand[0])
            return False, 0, self.n_files
        return True, k, demand[k]

    def y_terms(self, demand: Sequence[int], u: Sequence[int], n: int) -> List[Tuple[int, int]]:
        """(user block, m-slot) pairs XOR-ed into Y_{D,n}."""
        if n in demand:
            return [(u[n], n)]
        return [(1, demand[1]), (0, h_map(self.n_files, n, demand[0]))]

    def auxiliaries(self, perms, pis, P, S, demand: Sequence[int]) -> Dict[str, tuple]:
        N, K, L = self.n_files, self.n_users, self.code_length
        u = leaders(demand, N)
        J0 = []
        for n in range(N):
            direct = tuple(self.idx(perms, k, n, m) for k in range(K) for m in self.direct_slots(n, k, demand[k]))
            positional = [0] * K
            for k in range(K):
                _, block, m = self.v_terms(demand, u, n, k)
                positional[int(pis[n][k])] = self.idx(perms, block, n, m)
            J0.append((direct, tuple(positional)))
        J1, J2 = [], []
        for k in range(K):
            row1, row2 = [], []
            for n in range(N):
                if n != demand[k]:
                    t1, t2 = self.idx(perms, k, demand[k], n), int(pis[n][k])
                else:
                    t1, t2 = self.idx(perms, u[n], demand[k], n), int(pis[n][u[n]])
                row1.append(int((P[k][n] + t1) % L))
                row2.append(int((S[k][n] + t2) % K))
            J1.append(tuple(row1))
            J2.append(tuple(row2))
        J3 = tuple(int((S[K][n] + pis[n][u[n]]) % K) for n in range(N) if n != demand[0])
        return {'J0': tuple(J0), 'J1': tuple(J1), 'J2': tuple(J2), 'J3': J3}

    def draw(self, rng):
        N, K = self.n_files, self.n_users
        perms = np.stack([rng.permutation(self.code_length) for _ in range(N)])
        pis = np.stack([rng.permutation(K) for _ in range(N)])
        P = rng.integers(0, self.code_length, size=(K, N))
        S = rng.integers(0, K, size=(K + 1, N))
        return perms, pis, P, S

    def place_with(self, library, perms, pis, P, S) -> Placement:
        self.check_library(library)
        coded = np.stack([rs_encode(library.files[n], self.code_length, self.field).segments
                          for n in range(self.n_files)])
        state = MdsBState(coded=coded, perms=np.asarray(perms), pis=np.asarray(pis),
                          P=np.asarray(P), S=np.asarray(S))
        caches = []
        for k in range(self.n_users):
            bundle = CacheBundle(user=k)
            for n in range(self.n_files):
                z = np.zeros(library.subfile_length, dtype=np.int64)
                for other in range(self.n_files):
                    if other != n:
                        z = z ^ self.segment(state, k, other, n)
                bundle.segments[('Z', n)] = z
                bundle.private[f'P{n}'] = int(state.P[k][n])
                bundle.private_alphabets[f'P{n}'] = self.code_length
                bundle.private[f'S{n}'] = int(state.S[k][n])
                bundle.private_alphabets[f'S{n}'] = self.n_users
                if k == 0:
                    bundle.private[f'SK{n}'] = int(state.S[self.n_users][n])
                    bundle.private_alphabets[f'SK{n}'] = self.n_users
            caches.append(bundle)
        return Placement(state=state, caches=caches)

    def place(self, library, rng) -> Placement:
        return self.place_with(library, *self.draw(rng))

    def segment(self, state: MdsBState, k: int, n: int, m: int) -> np.ndarray:
        return state.coded[n, self.idx(state.perms, k, n, m)]

    def deliver(self, state: MdsBState, demand, rng=None) -> DeliveryPacket:
        demand = self.check_demand(demand)
        N, K = self.n_files, self.n_users
        u = leaders(demand, N)
        packet = DeliveryPacket()
        Y = []
        for n in range(N):
            y = 0
            for block, m in self.y_terms(demand, u, n):
                y = y ^ self.segment(state, block, n, m)
            Y.append(y)
        for n in range(N):
            for k in range(K):
                for j, m in enumerate(self.direct_slots(n, k, demand[k])):
                    packet.segments[('X', n, k, j)] = self.segment(state, k, n, m)
                    packet.provenance[('X', n, k, j)] = f"w^({k})_{n},{m}"
            shuffled = [None] * K
            notes = [None] * K
            for k in range(K):
                with_y, block, m = self.v_terms(demand, u, n, k)
                value = self.segment(state, block, n, m)
                shuffled[int(state.pis[n][k])] = Y[n] ^ value if with_y else value
                notes[int(state.pis[n][k])] = (f"Y_{n}+" if with_y else "") + f"w^({block})_{n},{m}"
            for pos in range(K):
                packet.segments[('V', n, pos)] = shuffled[pos]
                packet.provenance[('V', n, pos)] = notes[pos]
        total = np.zeros_like(Y[0])
        for y in Y:
            total = total ^ y
        packet.segments[('XN',)] = total
        packet.provenance[('XN',)] = "+".join(f"Y_{n}" for n in range(N))
        packet.aux = self.auxiliaries(state.perms, state.pis, state.P, state.S, demand)
        n_indices = sum(len(a) + len(b) for a, b in packet.aux['J0']) + N * K
        packet.aux_bits = n_indices * index_bits(self.code_length) + (N * K + N - 1) * index_bits(K)
        return packet

    def decode(self, cache, packet, demand_k, k) -> np.ndarray:
        N, K, L = self.n_files, self.n_users, self.code_length
        f = demand_k
        aux = packet.aux
        T1 = [(aux['J1'][k][n] - cache.private[f'P{n}']) % L for n in range(N)]
        T2 = [(aux['J2'][k][n] - cache.private[f'S{n}']) % K for n in range(N)]
        segments, indices = [], []

        # w^(k)_{f,m} for m != f from the cache XOR
        for m in range(N):
            if m == f:
                continue
            value = np.asarray(cache.segments[('Z', m)], dtype=np.int64)
            for n in range(N):
                if n in (m, f):
                    continue
                if k == 0 and m == h_map(N, n, f):
                    value = value ^ packet.segments[('V', n, self._hidden_position(n, f, aux, cache))]
                else:
                    slot = self.direct_slots(n, k, f).index(m)
                    value = value ^ packet.segments[('X', n, k, slot)]
            segments.append(value)
            indices.append(T1[m])

        # the leader segment w^(u_f)_{f,f}, which also equals Y_f
        leader = np.asarray(cache.segments[('Z', f)], dtype=np.int64) ^ packet.segments[('XN',)]
        for n in range(N):
            if n != f:
                leader = leader ^ packet.segments[('V', n, T2[n])]
        segments.append(leader)
        indices.append(T1[f])

        # everything else comes from X_{D,f}
        segments.extend(packet.segments[('X', f, i, j)] for i in range(K) for j in range(self.block_size(i)))
        indices.extend(aux['J0'][f][0])
        for pos in range(K):
            value = packet.segments[('V', f, pos)]
            segments.append(value if pos == T2[f] else value ^ leader)
            indices.append(aux['J0'][f][1][pos])

        if len(set(indices)) != len(indices):
            raise DecodeIntegrityError(f"User {k} collected duplicate code indices {indices}",
                                       location={'user': k, 'indices': indices})
        codeword = Codeword(np.stack(segments), tuple(indices), L, self.k_dim, self.field)
        return rs_reconstruct(codeword)

    def _hidden_position(self, n: int, d0: int, aux, cache) -> int:
        """Position of w^(0)_{n,h_n(D_0)} in the V-part of X_{D,n}, readable by user 0 only."""
        others = [x for x in range(self.n_files) if x != d0]
        return (aux['J3'][others.index(n)] - cache.private[f'SK{n}']) % self.n_users

    def rank_target(self, k: int) -> int:
        N, K = self.n_files, self.n_users
        return K * N * (N - 1) + 1

    def aux_view(self, state: MdsBState, packet: DeliveryPacket, k: int) -> tuple:
        return self._view(packet.aux, state.P, state.S, k)

    def _view(self, aux, P, S, k) -> tuple:
        own = (tuple(int(x) for x in P[k]), tuple(int(x) for x in S[k]))
        if k == 0:
            own += (tuple(int(x) for x in S[self.n_users]),)
        return aux['J0'], aux['J1'], aux['J2'], aux['J3'], own

    def sample_aux(self, demand, rng) -> List[tuple]:
        perms, pis, P, S = self.draw(rng)
        aux = self.auxiliaries(perms, pis, P, S, self.check_demand(demand))
        return [self._view(aux, P, S, k) for k in range(self.n_users)]


def b_place(n_files: int, n_users: int, library, rng) -> Placement:
    return MdsSchemeB(n_files, n_users).place(library, rng)


def b_deliver(scheme: MdsSchemeB, state: MdsBState, demand) -> DeliveryPacket:
    return scheme.deliver(state, demand)


def b_decode(scheme: MdsSchemeB, cache: CacheBundle, packet: DeliveryPacket, demand_k: int, k: int) -> np.ndarray:
    return scheme.decode(cache, packet, demand_k, k)


def b_packet_structure(n_files: int, n_users: int, demand: Sequence[int]) -> Dict[str, object]:
    """
    Symbolic layout of X_{D,n} before the V-part is shuffled, the Y terms
    and the auxiliary index layout.
    """
    scheme = MdsSchemeB(n_files, n_users)
    demand = scheme.check_demand(demand)
    u = leaders(demand, n_files)
    blocks = {}
    for n in range(n_files):
        clear = [f"w^({k})_{n},{m}" for k in range(n_users) for m in scheme.direct_slots(n, k, demand[k])]
        v_part = []
        for k in range(n_users):
            with_y, block, m = scheme.v_terms(demand, u, n, k)
            v_part.append((f"Y_{n}+" if with_y else "") + f"w^({block})_{n},{m}")
        blocks[n] = {'clear': clear, 'V': v_part}
    Y = {n: "+".join(f"w^({b})_{n},{m}" for b, m in scheme.y_terms(demand, u, n)) for n in range(n_files)}
    return {'leaders': u, 'Y': Y, 'X': blocks, 'XN': "+".join(f"Y_{n}" for n in range(n_files))}
