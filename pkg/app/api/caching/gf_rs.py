"""
GF(2^m) arithmetic and a non-systematic Reed-Solomon codec.

Field elements are plain integers in [0, 2^m). Arrays of symbols are numpy
int64 arrays so the same buffers can carry XOR-only payloads and field
symbols. Multiplication goes through log/antilog tables built once per
FieldSpec.
"""
import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import FieldArithmeticError, InsufficientDataError, ParameterError

logger = logging.getLogger(__name__)

SUPPORTED_WIDTHS = (3, 4, 8, 16)

# Primitive polynomials, generator 2 in every case.
DEFAULT_POLYNOMIALS = {
    3: 0b1011,  # x^3 + x + 1
    4: 0b10011,  # x^4 + x + 1
    8: 0x11D,  # x^8 + x^4 + x^3 + x^2 + 1
    16: 0x1100B,  # x^16 + x^12 + x^3 + x + 1
}


def _degree(poly: int) -> int:
    return poly.bit_length() - 1


def _poly_mod(a: int, b: int) -> int:
    """Remainder of carry-less division a mod b over GF(2)."""
    db = _degree(b)
    while a and _degree(a) >= db:
        a ^= b << (_degree(a) - db)
    return a


@lru_cache(maxsize=None)
def is_irreducible(poly: int, m: int) -> bool:
    """
    Brute-force irreducibility check over GF(2).
    A degree-m polynomial is reducible iff it has a factor of degree <= m // 2.
    """
    if _degree(poly) != m or m < 1:
        return False
    for divisor in range(2, 1 << (m // 2 + 1)):
        if _poly_mod(poly, divisor) == 0:
            return False
    return True


def _clmul_mod(a: int, b: int, poly: int, m: int) -> int:
    """Shift-and-add multiply with reduction, used only to build tables."""
    result = 0
    while b:
        if b & 1:
            result ^= a
        b >>= 1
        a <<= 1
        if a >> m:
            a ^= poly
    return result


@dataclass(frozen=True)
class FieldSpec:
    """
    GF(2^m) with an explicit reduction polynomial.
    m: bit width, one of 3, 4, 8, 16
    reduction_poly: integer encoding, bit i is the coefficient of x^i
    """
    m: int
    reduction_poly: int = None

    def __post_init__(self):
        if self.m not in SUPPORTED_WIDTHS:
            raise ParameterError(f"Unsupported field width m={self.m}; expected one of {SUPPORTED_WIDTHS}")
        if self.reduction_poly is None:
            object.__setattr__(self, 'reduction_poly', DEFAULT_POLYNOMIALS[self.m])
        if not is_irreducible(self.reduction_poly, self.m):
            raise ParameterError(f"Polynomial {self.reduction_poly:#x} is not irreducible of degree {self.m}")

    @property
    def size(self) -> int:
        return 1 << self.m

    @property
    def max_code_length(self) -> int:
        return self.size - 1

    @classmethod
    def for_code_length(cls, n_code: int) -> "FieldSpec":
        """Smallest supported field with 2^m - 1 >= n_code."""
        for m in SUPPORTED_WIDTHS:
            if (1 << m) - 1 >= n_code:
                return cls(m)
        raise ParameterError(f"Code length {n_code} exceeds GF(2^16)")

    def __str__(self):
        return f"GF(2^{self.m}) mod {self.reduction_poly:#x}"


class GaloisField:
    """
    Table-driven arithmetic for one FieldSpec.
    exp has length 2 * (q - 1) so log sums never need a modulo.
    """

    def __init__(self, spec: FieldSpec):
        self.spec = spec
        self.order = spec.size
        q1 = self.order - 1
        self.generator = self._find_generator()
        self.exp = np.zeros(2 * q1, dtype=np.int64)
        self.log = np.zeros(self.order, dtype=np.int64)
        x = 1
        for i in range(q1):
            self.exp[i] = x
            self.log[x] = i
            x = _clmul_mod(x, self.generator, spec.reduction_poly, spec.m)
        self.exp[q1:] = self.exp[:q1]

    def _find_generator(self) -> int:
        q1 = self.order - 1
        for candidate in range(2, self.order):
            x, steps = candidate, 1
            while x != 1:
                x = _clmul_mod(x, candidate, self.spec.reduction_poly, self.spec.m)
                steps += 1
            if steps == q1:
                return candidate
        return 1  # GF(2) is never requested; kept total for completeness

    def _check(self, *values):
        for v in values:
            if not 0 <= int(v) < self.order:
                raise ParameterError(f"Symbol {v} outside {self.spec}")

    def add(self, a: int, b: int) -> int:
        self._check(a, b)
        return int(a) ^ int(b)

    def mul(self, a: int, b: int) -> int:
        self._check(a, b)
        if a == 0 or b == 0:
            return 0
        return int(self.exp[self.log[a] + self.log[b]])

    def inverse(self, a: int) -> int:
        self._check(a)
        if a == 0:
            raise FieldArithmeticError(f"Zero has no inverse in {self.spec}")
        return int(self.exp[(self.order - 1) - self.log[a]])

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inverse(b))

    def power(self, a: int, e: int) -> int:
        self._check(a)
        if e == 0:
            return 1
        if a == 0:
            return 0
        return int(self.exp[(self.log[a] * e) % (self.order - 1)])

    def mul_arrays(self, a, b) -> np.ndarray:
        """Elementwise product with numpy broadcasting."""
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        product = self.exp[self.log[a] + self.log[b]]
        return np.where((a == 0) | (b == 0), 0, product)

    def matmul(self, matrix, rows) -> np.ndarray:
        """
        (r x c) coefficient matrix times (c x L) symbol rows.
        Addition is XOR so the accumulation is a running xor.
        """
        matrix = np.asarray(matrix, dtype=np.int64)
        rows = np.asarray(rows, dtype=np.int64)
        out = np.zeros((matrix.shape[0], rows.shape[1]), dtype=np.int64)
        for j in range(matrix.shape[1]):
            out ^= self.mul_arrays(matrix[:, j][:, None], rows[j][None, :])
        return out

    def rank(self, matrix) -> int:
        """Rank by Gauss-Jordan elimination over GF(2^m)."""
        work = np.array(matrix, dtype=np.int64, copy=True)
        if work.size == 0:
            return 0
        n_rows, n_cols = work.shape
        rank = 0
        for col in range(n_cols):
            pivots = np.nonzero(work[rank:, col])[0]
            if pivots.size == 0:
                continue
            pivot = rank + pivots[0]
            if pivot != rank:
                work[[rank, pivot]] = work[[pivot, rank]]
            work[rank] = self.mul_arrays(work[rank], self.inverse(int(work[rank, col])))
            for r in range(n_rows):
                if r != rank and work[r, col]:
                    work[r] ^= self.mul_arrays(work[rank], int(work[r, col]))
            rank += 1
            if rank == n_rows:
                break
        return rank

    def poly_mul(self, p: Sequence[int], q: Sequence[int]) -> list:
        out = [0] * (len(p) + len(q) - 1)
        for i, a in enumerate(p):
            if a == 0:
                continue
            for j, b in enumerate(q):
                out[i + j] ^= self.mul(a, b)
        return out

    def poly_eval(self, coeffs: Sequence[int], x: int) -> int:
        """Horner evaluation, coefficients low order first."""
        y = 0
        for c in reversed(coeffs):
            y = self.mul(y, x) ^ c
        return y


@lru_cache(maxsize=None)
def get_field(spec: FieldSpec) -> GaloisField:
    logger.debug("[Field] Building tables for %s", spec)
    return GaloisField(spec)


def gf_add(a: int, b: int, spec: FieldSpec) -> int:
    return get_field(spec).add(a, b)


def gf_mul(a: int, b: int, spec: FieldSpec) -> int:
    return get_field(spec).mul(a, b)


def gf_inverse(a: int, spec: FieldSpec) -> int:
    return get_field(spec).inverse(a)


def gf_div(a: int, b: int, spec: FieldSpec) -> int:
    return get_field(spec).div(a, b)


def evaluation_points(n_code: int) -> Tuple[int, ...]:
    """The first n_code nonzero field elements in integer order."""
    return tuple(range(1, n_code + 1))


@dataclass
class Codeword:
    """
    A set of coded segments with their code indices.
    segments: (count, L) symbol array, row i carries code index indices[i]
    """
    segments: np.ndarray
    indices: Tuple[int, ...]
    n_code: int
    k_dim: int
    spec: FieldSpec = field(default=None)

    def __post_init__(self):
        self.segments = np.asarray(self.segments, dtype=np.int64)
        if self.segments.ndim == 1:
            self.segments = self.segments[:, None]
        self.indices = tuple(int(i) for i in self.indices)
        if self.spec is None:
            self.spec = FieldSpec.for_code_length(self.n_code)
        if not 1 <= self.k_dim <= self.n_code <= self.spec.max_code_length:
            raise ParameterError(
                f"Need 1 <= k_dim <= n_code <= {self.spec.max_code_length}, got ({self.n_code},{self.k_dim})"
            )
        if len(self.indices) != len(self.segments):
            raise ParameterError(f"{len(self.segments)} segments but {len(self.indices)} indices")
        if len(set(self.indices)) != len(self.indices):
            raise ParameterError(f"Duplicate code indices {self.indices}")
        for i in self.indices:
            if not 0 <= i < self.n_code:
                raise ParameterError(f"Code index {i} outside [0, {self.n_code})")

    def subset(self, positions: Sequence[int]) -> "Codeword":
        """Keep the segments with the given code indices."""
        lookup = {idx: row for row, idx in enumerate(self.indices)}
        rows = [lookup[p] for p in positions]
        return Codeword(self.segments[rows], tuple(positions), self.n_code, self.k_dim, self.spec)


@lru_cache(maxsize=None)
def vandermonde(n_code: int, k_dim: int, spec: FieldSpec) -> np.ndarray:
    gf = get_field(spec)
    points = evaluation_points(n_code)
    return np.array([[gf.power(x, j) for j in range(k_dim)] for x in points], dtype=np.int64)


def rs_encode(message, n_code: int, spec: Optional[FieldSpec] = None) -> Codeword:
    """
    Evaluate the message polynomial at every evaluation point.
    message: (k_dim, L) array; message[j] is the coefficient of x^j per symbol position
    """
    message = np.asarray(message, dtype=np.int64)
    if message.ndim == 1:
        message = message[:, None]
    k_dim = message.shape[0]
    spec = spec or FieldSpec.for_code_length(n_code)
    if not 1 <= k_dim <= n_code <= spec.max_code_length:
        raise ParameterError(f"({n_code},{k_dim}) code does not fit {spec}")
    if message.size and (message.min() < 0 or message.max() >= spec.size):
        raise ParameterError(f"Message symbols outside {spec}")
    segments = get_field(spec).matmul(vandermonde(n_code, k_dim, spec), message)
    return Codeword(segments, tuple(range(n_code)), n_code, k_dim, spec)


@lru_cache(maxsize=4096)
def lagrange_basis(indices: Tuple[int, ...], spec: FieldSpec) -> np.ndarray:
    """
    Row i holds the coefficients (low order first) of the Lagrange basis
    polynomial that is 1 at the point of indices[i] and 0 at the others.
    """
    gf = get_field(spec)
    points = evaluation_points(max(indices) + 1)
    xs = [points[i] for i in indices]
    full = [1]
    for x in xs:
        full = gf.poly_mul(full, [x, 1])
    basis = np.zeros((len(xs), len(xs)), dtype=np.int64)
    for i, xi in enumerate(xs):
        # synthetic division of full by (x + xi)
        quotient = [0] * (len(full) - 1)
        carry = 0
        for d in range(len(full) - 1, 0, -1):
            carry = full[d] ^ gf.mul(carry, xi)
            quotient[d - 1] = carry
        scale = gf.inverse(gf.poly_eval(quotient, xi))
        basis[i] = [gf.mul(c, scale) for c in quotient]
    return basis


def rs_reconstruct(partial: Codeword) -> np.ndarray:
    """Recover the (k_dim, L) message from exactly k_dim coded segments."""
    if len(partial.indices) < partial.k_dim:
        raise InsufficientDataError(
            f"Need {partial.k_dim} segments to reconstruct, got {len(partial.indices)}"
        )
    if len(partial.indices) > partial.k_dim:
        raise ParameterError(f"Expected exactly {partial.k_dim} segments, got {len(partial.indices)}")
    basis = lagrange_basis(partial.indices, partial.spec)
    return get_field(partial.spec).matmul(basis.T, partial.segments)
