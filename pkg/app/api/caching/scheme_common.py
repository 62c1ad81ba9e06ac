"""
Shared vocabulary for every caching scheme: the file library, cache and
packet containers, the scheme base class, the trivial broadcast scheme,
memory sharing and the (M, R) meter.
"""
import hashlib
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .errors import DecodeIntegrityError, GranularityError, ParameterError, ShapeError

logger = logging.getLogger(__name__)


def trial_rng(seed: int, trial: int = 0, stream: Optional[int] = None) -> np.random.Generator:
    """Independent stream for one trial, stable under any scheduling order."""
    entropy = [int(seed), int(trial)] + ([int(stream)] if stream is not None else [])
    return np.random.default_rng(np.random.SeedSequence(entropy))


def index_bits(alphabet: int) -> int:
    """Bits needed to send one index from an alphabet of the given size."""
    return max(int(alphabet) - 1, 0).bit_length()


def all_demands(n_files: int, n_users: int) -> Iterator[Tuple[int, ...]]:
    for code in range(n_files ** n_users):
        demand = []
        for _ in range(n_users):
            code, digit = divmod(code, n_files)
            demand.append(digit)
        yield tuple(reversed(demand))


class FileLibrary:
    """
    N files, each split into subfile_count subfiles of subfile_length symbols.
    files: int64 array of shape (N, subfile_count, subfile_length)
    symbol_bits: width of one symbol, 1 for exact audits, 8 for byte symbols
    """

    def __init__(self, files, symbol_bits: int = 8):
        files = np.asarray(files, dtype=np.int64)
        if files.ndim != 3:
            raise ShapeError(f"Library must be (files, subfiles, symbols), got shape {files.shape}")
        if files.size and (files.min() < 0 or files.max() >= (1 << symbol_bits)):
            raise ParameterError(f"Library symbols do not fit in {symbol_bits} bits")
        self.files = files
        self.symbol_bits = symbol_bits

    @classmethod
    def random(cls, n_files: int, subfile_count: int, subfile_length: int, symbol_bits: int,
               rng: np.random.Generator) -> "FileLibrary":
        files = rng.integers(0, 1 << symbol_bits, size=(n_files, subfile_count, subfile_length), dtype=np.int64)
        return cls(files, symbol_bits)

    @classmethod
    def zeros(cls, n_files: int, subfile_count: int, subfile_length: int = 1, symbol_bits: int = 8) -> "FileLibrary":
        return cls(np.zeros((n_files, subfile_count, subfile_length), dtype=np.int64), symbol_bits)

    @classmethod
    def identity(cls, n_files: int, subfile_count: int, symbol_bits: int = 8) -> "FileLibrary":
        """
        Unit library: symbol position n * subfile_count + j is 1 only in
        subfile j of file n, so each output segment reads as its own
        coefficient row over the library.
        """
        width = n_files * subfile_count
        files = np.zeros((n_files, subfile_count, width), dtype=np.int64)
        for n in range(n_files):
            for j in range(subfile_count):
                files[n, j, n * subfile_count + j] = 1
        return cls(files, symbol_bits)

    @property
    def n_files(self) -> int:
        return self.files.shape[0]

    @property
    def subfile_count(self) -> int:
        return self.files.shape[1]

    @property
    def subfile_length(self) -> int:
        return self.files.shape[2]

    @property
    def file_bits(self) -> int:
        return self.subfile_count * self.subfile_length * self.symbol_bits

    def checksum(self, n: int) -> str:
        return hashlib.blake2b(self.files[n].tobytes(), digest_size=16).hexdigest()

    def verify_decoded(self, n: int, decoded, user: Optional[int] = None):
        """Raise DecodeIntegrityError at the first mismatching (subfile, symbol)."""
        decoded = np.asarray(decoded, dtype=np.int64)
        expected = self.files[n]
        if decoded.shape != expected.shape:
            raise DecodeIntegrityError(
                f"User {user} decoded shape {decoded.shape} for file {n}, expected {expected.shape}",
                location={'user': user, 'file': n, 'subfile': None, 'symbol': None},
            )
        if hashlib.blake2b(decoded.tobytes(), digest_size=16).hexdigest() == self.checksum(n):
            return
        subfile, symbol = (int(i) for i in np.argwhere(decoded != expected)[0])
        raise DecodeIntegrityError(
            f"User {user} decoded file {n} wrong at subfile {subfile}, symbol {symbol}",
            location={'user': user, 'file': n, 'subfile': subfile, 'symbol': symbol},
        )

    def split(self, start: int, stop: int, parts: int) -> "FileLibrary":
        """Rows [start, stop) regrouped into `parts` longer subfiles."""
        block = self.files[:, start:stop, :]
        rows = stop - start
        if rows % parts:
            raise GranularityError(f"{rows} subfiles cannot be grouped into {parts}", required_multiple=parts)
        return FileLibrary(block.reshape(self.n_files, parts, (rows // parts) * self.subfile_length), self.symbol_bits)


def _segment_key(segments: Dict[Any, np.ndarray]) -> tuple:
    return tuple((label, np.asarray(seg, dtype=np.int64).tobytes()) for label, seg in segments.items())


@dataclass
class CacheBundle:
    """
    What user k holds after placement.
    segments: payload segments, label -> symbol array
    private: private randomness (offsets, pads), name -> value
    private_alphabets: name -> alphabet size, for metadata accounting
    """
    user: int
    segments: Dict[Any, np.ndarray] = field(default_factory=dict)
    private: Dict[str, int] = field(default_factory=dict)
    private_alphabets: Dict[str, int] = field(default_factory=dict)

    def view(self) -> tuple:
        return _segment_key(self.segments), tuple(sorted(self.private.items()))

    def payload_symbols(self) -> int:
        return int(sum(np.asarray(s).size for s in self.segments.values()))

    def metadata_bits(self) -> int:
        return sum(index_bits(a) for a in self.private_alphabets.values())


@dataclass
class DeliveryPacket:
    """
    The broadcast.
    segments: payload, label -> symbol array
    aux: auxiliary variables (indices, masked indices, public mask data)
    aux_bits: metadata size of aux
    provenance: label -> symbolic description, never part of what users see
    """
    segments: Dict[Any, np.ndarray] = field(default_factory=dict)
    aux: Dict[str, Any] = field(default_factory=dict)
    aux_bits: int = 0
    provenance: Dict[Any, str] = field(default_factory=dict)

    def view(self) -> tuple:
        return _segment_key(self.segments), tuple(sorted(self.aux.items()))

    def payload_symbols(self) -> int:
        return int(sum(np.asarray(s).size for s in self.segments.values()))


@dataclass
class Placement:
    state: Any
    caches: List[CacheBundle]


@dataclass(frozen=True)
class RatePoint:
    """
    A (memory, rate) pair in files. `implemented` is False for pairs that
    only come from a formula of earlier schemes. `prior_work` marks an
    implemented pair that an earlier scheme reaches too.
    """
    M: Fraction
    R: Fraction
    source: str
    note: str = ""
    implemented: bool = True
    prior_work: bool = False

    @property
    def provenance(self) -> str:
        if not self.implemented:
            return "prior-work"
        return "implemented/prior-work" if self.prior_work else "implemented"

    def __post_init__(self):
        object.__setattr__(self, 'M', Fraction(self.M))
        object.__setattr__(self, 'R', Fraction(self.R))
        if self.M < 0 or self.R < 0:
            raise ParameterError(f"Negative rate point ({self.M}, {self.R})")

    def __str__(self):
        return f"M={self.M} R={self.R}"


@dataclass(frozen=True)
class MeasuredRates:
    payload_M: Fraction
    payload_R: Fraction
    total_M_bits: int
    total_R_bits: int
    file_bits: int

    def to_dict(self):
        return {
            'payload_M': str(self.payload_M),
            'payload_R': str(self.payload_R),
            'total_M_bits': self.total_M_bits,
            'total_R_bits': self.total_R_bits,
            'file_bits': self.file_bits,
        }


@dataclass
class RoundTranscript:
    scheme: "CachingScheme"
    library: FileLibrary
    placement: Placement
    demand: Tuple[int, ...]
    packet: DeliveryPacket
    decoded: List[np.ndarray] = field(default_factory=list)

    def failures(self) -> List[DecodeIntegrityError]:
        errors = []
        for k, payload in enumerate(self.decoded):
            try:
                self.library.verify_decoded(self.demand[k], payload, user=k)
            except DecodeIntegrityError as exc:
                errors.append(exc)
        return errors


def measure(transcript: RoundTranscript) -> MeasuredRates:
    """Exact sizes of one round. Payload figures exclude auxiliary metadata."""
    library = transcript.library
    bits = library.symbol_bits
    cache_symbols = max((c.payload_symbols() for c in transcript.placement.caches), default=0)
    cache_meta = max((c.metadata_bits() for c in transcript.placement.caches), default=0)
    packet_symbols = transcript.packet.payload_symbols()
    F = library.file_bits
    return MeasuredRates(
        payload_M=Fraction(cache_symbols * bits, F),
        payload_R=Fraction(packet_symbols * bits, F),
        total_M_bits=cache_symbols * bits + cache_meta,
        total_R_bits=packet_symbols * bits + transcript.packet.aux_bits,
        file_bits=F,
    )


class CachingScheme(ABC):
    """
    Base class for all schemes. Subclasses provide the subfile split, the
    three phases and the closed-form (M, R) point.
    """
    name = "base"
    flexible_symbols = True

    def __init__(self, n_files: int, n_users: int, symbol_bits: int = 8):
        if n_files < 1 or n_users < 1:
            raise ParameterError(f"Need N >= 1 and K >= 1, got N={n_files}, K={n_users}")
        self.n_files = n_files
        self.n_users = n_users
        self.symbol_bits = symbol_bits

    def __str__(self):
        return f"{self.name}(N={self.n_files}, K={self.n_users})"

    @property
    def params(self) -> Dict[str, Any]:
        return {'n': self.n_files, 'k': self.n_users}

    @property
    @abstractmethod
    def subfile_count(self) -> int:
        """Subfiles per file the library must be split into."""

    @abstractmethod
    def place(self, library: FileLibrary, rng: np.random.Generator) -> Placement:
        pass

    @abstractmethod
    def deliver(self, state, demand: Sequence[int], rng: np.random.Generator) -> DeliveryPacket:
        pass

    @abstractmethod
    def decode(self, cache: CacheBundle, packet: DeliveryPacket, demand_k: int, k: int) -> np.ndarray:
        pass

    @abstractmethod
    def formula_point(self) -> RatePoint:
        pass

    def new_library(self, rng: Optional[np.random.Generator] = None, subfile_length: int = 1,
                    zero: bool = False) -> FileLibrary:
        if zero or rng is None:
            return FileLibrary.zeros(self.n_files, self.subfile_count, subfile_length, self.symbol_bits)
        return FileLibrary.random(self.n_files, self.subfile_count, subfile_length, self.symbol_bits, rng)

    def check_library(self, library: FileLibrary):
        if library.n_files != self.n_files or library.subfile_count != self.subfile_count:
            raise ShapeError(
                f"{self} needs {self.n_files} files of {self.subfile_count} subfiles, "
                f"got {library.n_files} of {library.subfile_count}"
            )

    def check_demand(self, demand: Sequence[int]) -> Tuple[int, ...]:
        demand = tuple(int(d) for d in demand)
        if len(demand) != self.n_users:
            raise ParameterError(f"Demand {demand} has length {len(demand)}, expected K={self.n_users}")
        if any(not 0 <= d < self.n_files for d in demand):
            raise ParameterError(f"Demand {demand} has entries outside [{self.n_files}]")
        return demand

    def run_round(self, library: FileLibrary, demand: Sequence[int], rng: np.random.Generator) -> RoundTranscript:
        demand = self.check_demand(demand)
        placement = self.place(library, rng)
        packet = self.deliver(placement.state, demand, rng)
        decoded = [self.decode(placement.caches[k], packet, demand[k], k) for k in range(self.n_users)]
        return RoundTranscript(self, library, placement, demand, packet, decoded)

    # Exhaustive randomness, for exact audits

    supports_enumeration = False

    def randomness_count(self) -> int:
        """Number of equally weighted randomness outcomes per round."""
        raise NotImplementedError(f"{self.name} does not enumerate its randomness")

    def enumerate_rounds(self, library: FileLibrary,
                         demand: Sequence[int]) -> Iterator[Tuple[Fraction, Placement, DeliveryPacket]]:
        """Every (probability, placement, packet) outcome for one library and demand."""
        raise NotImplementedError(f"{self.name} does not enumerate its randomness")

    # Privacy certificates, for the MDS schemes

    def rank_target(self, k: int) -> Optional[int]:
        return None

    def aux_view(self, state, packet: DeliveryPacket, k: int) -> tuple:
        """Auxiliary variables as user k can read them."""
        return tuple(sorted(packet.aux.items()))


class TrivialScheme(CachingScheme):
    """Empty caches, the server broadcasts every file."""
    name = "trivial"
    supports_enumeration = True

    @property
    def subfile_count(self) -> int:
        return 1

    def place(self, library, rng=None) -> Placement:
        self.check_library(library)
        return Placement(state=library, caches=[CacheBundle(user=k) for k in range(self.n_users)])

    def deliver(self, state, demand, rng=None) -> DeliveryPacket:
        self.check_demand(demand)
        packet = DeliveryPacket()
        for n in range(self.n_files):
            packet.segments[n] = state.files[n, 0]
            packet.provenance[n] = f"W_{n}"
        return packet

    def decode(self, cache, packet, demand_k, k) -> np.ndarray:
        return np.asarray(packet.segments[demand_k])[None, :]

    def formula_point(self) -> RatePoint:
        return RatePoint(0, self.n_files, "trivial")

    def randomness_count(self) -> int:
        return 1

    def enumerate_rounds(self, library, demand):
        placement = self.place(library)
        yield Fraction(1), placement, self.deliver(placement.state, demand)


def trivial_round(n_files: int, n_users: int, library: FileLibrary, demand: Sequence[int]) -> RoundTranscript:
    return TrivialScheme(n_files, n_users, library.symbol_bits).run_round(library, demand, trial_rng(0))


def parse_alpha(alpha) -> Fraction:
    try:
        value = Fraction(str(alpha)) if not isinstance(alpha, Fraction) else alpha
    except (ValueError, ZeroDivisionError):
        raise ParameterError(f"Memory-sharing fraction {alpha!r} is not a rational number")
    if not 0 <= value <= 1:
        raise ParameterError(f"Memory-sharing fraction {value} outside [0, 1]")
    return value


class SharedScheme(CachingScheme):
    """
    Memory sharing: the first alpha of every file runs through `first`, the
    rest through `second`. Both components see the same (N, K).
    """
    name = "share"

    def __init__(self, first: CachingScheme, second: CachingScheme, alpha):
        if (first.n_files, first.n_users) != (second.n_files, second.n_users):
            raise ParameterError(f"Cannot share {first} with {second}: different (N, K)")
        fixed = {part.symbol_bits for part in (first, second) if not part.flexible_symbols}
        if len(fixed) > 1:
            raise ParameterError(f"{first} and {second} work on different symbol widths {sorted(fixed)}")
        width = fixed.pop() if fixed else max(first.symbol_bits, second.symbol_bits)
        for part in (first, second):
            part.symbol_bits = width
        super().__init__(first.n_files, first.n_users, width)
        self.first = first
        self.second = second
        self.alpha = parse_alpha(alpha)
        self.flexible_symbols = first.flexible_symbols and second.flexible_symbols
        self.supports_enumeration = first.supports_enumeration and second.supports_enumeration

    def __str__(self):
        return f"share({self.first}, {self.second}, alpha={self.alpha})"

    @property
    def params(self):
        return {**super().params, 'alpha': str(self.alpha), 'first': str(self.first), 'second': str(self.second)}

    @property
    def unit(self) -> int:
        return lcm(self.first.subfile_count, self.second.subfile_count)

    @property
    def subfile_count(self) -> int:
        return self.alpha.denominator * self.unit

    def _active(self):
        if self.alpha == 1:
            return [(1, self.first)]
        if self.alpha == 0:
            return [(2, self.second)]
        return [(1, self.first), (2, self.second)]

    def split_library(self, library: FileLibrary) -> Dict[int, FileLibrary]:
        rows = library.subfile_count
        if library.n_files != self.n_files or rows % self.subfile_count:
            raise GranularityError(
                f"alpha={self.alpha} needs the subfile count to be a multiple of {self.subfile_count}, got {rows}",
                required_multiple=self.subfile_count,
            )
        cut = rows * self.alpha.numerator // self.alpha.denominator
        parts = {}
        for tag, scheme in self._active():
            start, stop = (0, cut) if tag == 1 else (cut, rows)
            parts[tag] = library.split(start, stop, scheme.subfile_count)
        return parts

    @staticmethod
    def _merge_caches(pieces: Dict[int, List[CacheBundle]], n_users: int) -> List[CacheBundle]:
        merged = []
        for k in range(n_users):
            bundle = CacheBundle(user=k)
            for tag, caches in pieces.items():
                for label, seg in caches[k].segments.items():
                    bundle.segments[(tag, label)] = seg
                for name, value in caches[k].private.items():
                    bundle.private[f"{tag}:{name}"] = value
                for name, size in caches[k].private_alphabets.items():
                    bundle.private_alphabets[f"{tag}:{name}"] = size
            merged.append(bundle)
        return merged

    @staticmethod
    def _merge_packets(pieces: Dict[int, DeliveryPacket]) -> DeliveryPacket:
        merged = DeliveryPacket()
        for tag, packet in pieces.items():
            for label, seg in packet.segments.items():
                merged.segments[(tag, label)] = seg
                merged.provenance[(tag, label)] = packet.provenance.get(label, "")
            for name, value in packet.aux.items():
                merged.aux[f"{tag}:{name}"] = value
            merged.aux_bits += packet.aux_bits
        return merged

    @staticmethod
    def _component_cache(cache: CacheBundle, tag: int) -> CacheBundle:
        prefix = f"{tag}:"
        return CacheBundle(
            user=cache.user,
            segments={label[1]: seg for label, seg in cache.segments.items() if label[0] == tag},
            private={n[len(prefix):]: v for n, v in cache.private.items() if n.startswith(prefix)},
            private_alphabets={n[len(prefix):]: v for n, v in cache.private_alphabets.items() if n.startswith(prefix)},
        )

    @staticmethod
    def _component_packet(packet: DeliveryPacket, tag: int) -> DeliveryPacket:
        prefix = f"{tag}:"
        return DeliveryPacket(
            segments={label[1]: seg for label, seg in packet.segments.items() if label[0] == tag},
            aux={n[len(prefix):]: v for n, v in packet.aux.items() if n.startswith(prefix)},
        )

    def _component(self, tag: int) -> CachingScheme:
        return self.first if tag == 1 else self.second

    def place(self, library, rng) -> Placement:
        parts = self.split_library(library)
        states, pieces = {}, {}
        for tag, part in parts.items():
            placement = self._component(tag).place(part, rng)
            states[tag] = placement.state
            pieces[tag] = placement.caches
        return Placement(state=(library.subfile_length, states), caches=self._merge_caches(pieces, self.n_users))

    def deliver(self, state, demand, rng) -> DeliveryPacket:
        demand = self.check_demand(demand)
        _, states = state
        return self._merge_packets({tag: self._component(tag).deliver(s, demand, rng) for tag, s in states.items()})

    def decode(self, cache, packet, demand_k, k) -> np.ndarray:
        """
        The decoded file as a single row. Component rows are regrouped
        subfiles, so flattening in order restores the original symbol order.
        """
        pieces = [
            scheme.decode(self._component_cache(cache, tag), self._component_packet(packet, tag), demand_k, k)
            for tag, scheme in self._active()
        ]
        return np.concatenate([np.asarray(p).reshape(-1) for p in pieces])[None, :]

    def run_round(self, library, demand, rng) -> RoundTranscript:
        transcript = super().run_round(library, demand, rng)
        shape = library.files.shape[1:]
        transcript.decoded = [d.reshape(shape) for d in transcript.decoded]
        return transcript

    def formula_point(self) -> RatePoint:
        p1, p2 = self.first.formula_point(), self.second.formula_point()
        a = self.alpha
        return RatePoint(a * p1.M + (1 - a) * p2.M, a * p1.R + (1 - a) * p2.R, "share",
                         note=f"{p1.source}/{p2.source}")

    def randomness_count(self) -> int:
        count = 1
        for _, scheme in self._active():
            count *= scheme.randomness_count()
        return count

    def enumerate_rounds(self, library, demand):
        parts = self.split_library(library)
        active = self._active()
        if len(active) == 1:
            tag, scheme = active[0]
            for weight, placement, packet in scheme.enumerate_rounds(parts[tag], demand):
                yield (weight,
                       Placement((library.subfile_length, {tag: placement.state}),
                                 self._merge_caches({tag: placement.caches}, self.n_users)),
                       self._merge_packets({tag: packet}))
            return
        second_outcomes = list(self.second.enumerate_rounds(parts[2], demand))
        for w1, pl1, pk1 in self.first.enumerate_rounds(parts[1], demand):
            for w2, pl2, pk2 in second_outcomes:
                yield (w1 * w2,
                       Placement((library.subfile_length, {1: pl1.state, 2: pl2.state}),
                                 self._merge_caches({1: pl1.caches, 2: pl2.caches}, self.n_users)),
                       self._merge_packets({1: pk1, 2: pk2}))

    def rank_target(self, k):
        return None


def memory_share(first: CachingScheme, second: CachingScheme, alpha) -> SharedScheme:
    return SharedScheme(first, second, alpha)
