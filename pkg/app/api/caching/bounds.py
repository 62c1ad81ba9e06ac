"""
Closed-form achievable points, converse bounds, known optimal tradeoffs and
lower convex envelopes. All arithmetic is exact (Fraction).
"""
import logging
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Tuple

from .errors import DomainError, ParameterError
from .scheme_common import RatePoint
from .yma_core import binom

logger = logging.getLogger(__name__)

UNCHARACTERIZED = "uncharacterized"


def _check_memory(N: int, M) -> Fraction:
    M = Fraction(M)
    if not 0 <= M <= N:
        raise ParameterError(f"M={M} outside [0, {N}]")
    return M


def _clamp(value: Fraction) -> Fraction:
    return max(value, Fraction(0))


def thm1_points(N: int, K: int) -> List[RatePoint]:
    """Virtual-user pairs for r = 0..NK-K+1."""
    m = N * K - K + 1
    points = []
    for r in range(m + 1):
        M = Fraction(binom(m, r + 1) - binom(m - N, r + 1), binom(m, r))
        points.append(RatePoint(M, Fraction(N * r, m), "thm1", note=f"r={r}", implemented=N >= 2))
    return points


def thm2_points(N: int, K: int) -> List[RatePoint]:
    """MDS pairs for q = N and q = N - 1, plus (0, N)."""
    if N > K:
        raise DomainError(f"thm2 needs N <= K, got N={N}, K={K}")
    points = [RatePoint(Fraction(1, K + 1), Fraction(N * K, K + 1), "thm2", note="q=N")]
    if N >= 3:
        points.append(RatePoint(Fraction(N, (N - 1) * (K + 1)), Fraction(N * K - 1, K + 1), "thm2", note="q=N-1"))
    elif N == 2:
        points.append(RatePoint(Fraction(2, K + 1), Fraction(2 * K - 1, K + 1), "thm2", note="q=1",
                                implemented=False))
    points.append(RatePoint(0, N, "thm2", note="q=0"))
    return points


def grk_points(N: int, K: int) -> List[RatePoint]:
    """Earlier virtual-user scheme: the thm1 pairs with M and R swapped."""
    return [RatePoint(p.R, p.M, "grk", note=p.note, implemented=False) for p in thm1_points(N, K)]


def trivial_points(N: int, K: int) -> List[RatePoint]:
    return [RatePoint(0, N, "trivial")]


def achievable_points(N: int, K: int) -> List[RatePoint]:
    points = thm1_points(N, K) + grk_points(N, K) + trivial_points(N, K)
    if N <= K:
        points += thm2_points(N, K)
    return points


def converse_thm3(N: int, K: int, M) -> Fraction:
    if N > K:
        raise DomainError(f"The converse needs N <= K, got N={N}, K={K}")
    M = _check_memory(N, M)
    if K <= 2 * N - 2:
        return _clamp(Fraction((K + 1) * N - 1, K + 1) - (N - 1) * M)
    head = Fraction(K * (K + 3), 2) - Fraction(K * (K + 1), 2) * M
    return _clamp(head * Fraction(2 * N, (K + 1) * (K + 2)))


def converse_lemma3(K: int, M) -> Fraction:
    """Two-file bound."""
    if K < 2:
        raise ParameterError(f"Two-file bound needs K >= 2, got K={K}")
    M = _check_memory(2, M)
    return _clamp(Fraction(K + 3, K + 1) - Fraction(K + 2, 2 * K) * M)


def cutset(N: int, K: int, M, s: int) -> Fraction:
    if not 1 <= s <= min(N, K):
        raise ParameterError(f"s={s} outside [1, {min(N, K)}]")
    M = _check_memory(N, M)
    return _clamp(s - Fraction(s, N // s) * M)


def max_converse(N: int, K: int, M) -> Fraction:
    """
    Best lower bound on the private rate. Any K' users of a private system
    form a private system, so the K'-user bounds apply for every K' <= K.
    """
    M = _check_memory(N, M)
    best = Fraction(0)
    for s in range(1, min(N, K) + 1):
        best = max(best, cutset(N, K, M, s))
    for k_sub in range(N, K + 1):
        best = max(best, converse_thm3(N, k_sub, M))
    if N == 2:
        for k_sub in range(2, K + 1):
            best = max(best, converse_lemma3(k_sub, M))
    return best


def characterized_regions(N: int, K: int) -> List[Tuple[Fraction, Fraction, str]]:
    """M-intervals on which the optimal private rate is known, with their tags."""
    if (N, K) == (2, 3):
        return [(Fraction(0), Fraction(2), "cor2")]
    regions = []
    if N <= K:
        regions.append((Fraction(0), Fraction(1, K + 1), "op1"))
        if N >= 2 and K <= 2 * N - 2:
            regions.append((Fraction(1, K + 1), Fraction(N, (K + 1) * (N - 1)), "op2"))
    if N == 2 and K >= 2:
        regions.append((Fraction(0), Fraction(2, K), "cor1"))
        regions.append((Fraction(2 * (K - 1), K + 1), Fraction(2), "cor1"))
    return regions


def _cor1(K: int, M: Fraction) -> Fraction:
    return max(
        2 - 2 * M,
        Fraction(2 * K * (K + 3), (K + 1) * (K + 2)) - Fraction(2 * K, K + 2) * M,
        1 - M / 2,
        Fraction(K + 3, K + 1) - Fraction(K + 2, 2 * K) * M,
    )


def _cor2(M: Fraction) -> Fraction:
    return max(2 - 2 * M, (9 - 6 * M) / 5, (5 - 3 * M) / 3, (9 - 5 * M) / 6, (2 - M) / 2)


def optimal_curve(N: int, K: int, M) -> Tuple[Optional[Fraction], str]:
    """(optimal rate, region tag), or (None, "uncharacterized")."""
    M = _check_memory(N, M)
    if (N, K) == (2, 3):
        return _clamp(_cor2(M)), "cor2"
    if N <= K and M <= Fraction(1, K + 1):
        return N * (1 - M), "op1"
    if N >= 2 and N <= K <= 2 * N - 2 and Fraction(1, K + 1) <= M <= Fraction(N, (K + 1) * (N - 1)):
        return N - Fraction(1, K + 1) - (N - 1) * M, "op2"
    if N == 2 and K >= 2 and (M <= Fraction(2, K) or M >= Fraction(2 * (K - 1), K + 1)):
        return _clamp(_cor1(K, M)), "cor1"
    return None, UNCHARACTERIZED


def _cross(a: RatePoint, b: RatePoint, c: RatePoint) -> Fraction:
    return (b.M - a.M) * (c.R - a.R) - (b.R - a.R) * (c.M - a.M)


@dataclass(frozen=True)
class TradeoffCurve:
    """Piecewise-linear M -> R through `breakpoints`, strictly increasing in M."""
    breakpoints: Tuple[RatePoint, ...]

    def __post_init__(self):
        for a, b in zip(self.breakpoints, self.breakpoints[1:]):
            if not a.M < b.M:
                raise ParameterError(f"Breakpoints not strictly increasing in M at {a} -> {b}")

    def __len__(self):
        return len(self.breakpoints)

    @property
    def domain(self) -> Tuple[Fraction, Fraction]:
        return self.breakpoints[0].M, self.breakpoints[-1].M

    def slopes(self) -> List[Fraction]:
        return [(b.R - a.R) / (b.M - a.M) for a, b in zip(self.breakpoints, self.breakpoints[1:])]

    def is_convex(self) -> bool:
        slopes = self.slopes()
        return all(x <= y for x, y in zip(slopes, slopes[1:]))

    def evaluate(self, M) -> Fraction:
        M = Fraction(M)
        lo, hi = self.domain
        if not lo <= M <= hi:
            raise ParameterError(f"M={M} outside curve domain [{lo}, {hi}]")
        for a, b in zip(self.breakpoints, self.breakpoints[1:]):
            if a.M <= M <= b.M:
                return a.R + (b.R - a.R) * (M - a.M) / (b.M - a.M)
        return self.breakpoints[0].R

    def breakpoint_at(self, M) -> Optional[RatePoint]:
        M = Fraction(M)
        for p in self.breakpoints:
            if p.M == M:
                return p
        return None


def lower_envelope(points: Iterable[RatePoint]) -> TradeoffCurve:
    """Lower convex hull over M; collinear interior points are dropped."""
    points = list(points)
    if not points:
        raise ParameterError("Lower envelope of an empty point set")
    best = {}
    for p in points:
        current = best.get(p.M)
        if current is None or p.R < current.R or (p.R == current.R and p.implemented and not current.implemented):
            best[p.M] = p
    shared = {(p.M, p.R) for p in points if not p.implemented}
    for M, p in best.items():
        if p.implemented and (p.M, p.R) in shared:
            best[M] = replace(p, prior_work=True)
    ordered = [best[M] for M in sorted(best)]
    hull: List[RatePoint] = []
    for p in ordered:
        while len(hull) >= 2 and _cross(hull[-2], hull[-1], p) <= 0:
            hull.pop()
        hull.append(p)
    logger.debug("[Curve] Envelope of %s points has %s breakpoints", len(points), len(hull))
    return TradeoffCurve(tuple(hull))


def envelope_for(N: int, K: int) -> TradeoffCurve:
    return lower_envelope(achievable_points(N, K))


def breakpoints_of(N: int, K: int) -> Sequence[Fraction]:
    """Exact M values a sampled curve must contain."""
    values = {p.M for p in envelope_for(N, K).breakpoints}
    for lo, hi, _ in characterized_regions(N, K):
        values.update((lo, hi))
    return sorted(v for v in values if 0 <= v <= N)
