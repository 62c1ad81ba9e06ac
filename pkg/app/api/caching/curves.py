"""
Sampled memory-rate curves as a pandas frame with columns M, R, series, valid.
"""
import logging
from fractions import Fraction
from typing import Iterable, List

import pandas as pd

from .bounds import (
    UNCHARACTERIZED, achievable_points, breakpoints_of, envelope_for, grk_points, max_converse, optimal_curve,
    thm1_points, thm2_points, trivial_points,
)
from .errors import ParameterError
from .scheme_common import RatePoint

logger = logging.getLogger(__name__)

COLUMNS = ["M", "R", "series", "valid"]
FLOAT_FORMAT = "%.12g"


def m_grid(N: int, K: int, samples: int) -> List[Fraction]:
    """`samples` uniform points on [0, N] plus every exact breakpoint."""
    if samples < 2:
        raise ParameterError(f"A curve needs at least 2 samples, got {samples}")
    values = {Fraction(N * i, samples - 1) for i in range(samples)}
    values.update(breakpoints_of(N, K))
    return sorted(values)


def _point_rows(points: Iterable[RatePoint], series: str) -> List[dict]:
    best = {}
    for p in points:
        if p.M not in best or p.R < best[p.M].R:
            best[p.M] = p
    return [{'M': M, 'R': best[M].R, 'series': series, 'valid': best[M].provenance} for M in sorted(best)]


def curve_rows(N: int, K: int, samples: int = 512) -> List[dict]:
    if N < 1 or K < 1:
        raise ParameterError(f"Need N >= 1 and K >= 1, got N={N}, K={K}")
    rows = []
    if N >= 2:
        rows += _point_rows(thm1_points(N, K), "thm1")
    if N <= K:
        rows += _point_rows(thm2_points(N, K), "thm2")
    if N >= 2:
        rows += _point_rows(grk_points(N, K), "grk")
    rows += _point_rows(trivial_points(N, K), "trivial")

    envelope = envelope_for(N, K)
    lo, hi = envelope.domain
    grid = m_grid(N, K, samples)
    for M in grid:
        if lo <= M <= hi:
            corner = envelope.breakpoint_at(M)
            rows.append({'M': M, 'R': envelope.evaluate(M), 'series': "ach_lce",
                         'valid': corner.provenance if corner else "interpolated"})
    for M in grid:
        rows.append({'M': M, 'R': max_converse(N, K, M), 'series': "conv_max", 'valid': "converse"})
    for M in grid:
        value, tag = optimal_curve(N, K, M)
        if tag != UNCHARACTERIZED:
            rows.append({'M': M, 'R': value, 'series': "optimal", 'valid': tag})
    logger.info("[Curve] N=%s K=%s: %s rows over %s grid points", N, K, len(rows), len(grid))
    return rows


def curve_frame(N: int, K: int, samples: int = 512) -> pd.DataFrame:
    frame = pd.DataFrame(curve_rows(N, K, samples), columns=COLUMNS)
    frame['M'] = frame['M'].map(float)
    frame['R'] = frame['R'].map(float)
    return frame


def curve_csv(N: int, K: int, samples: int = 512) -> str:
    return curve_frame(N, K, samples).to_csv(index=False, float_format=FLOAT_FORMAT)


def point_rows(N: int, K: int) -> List[dict]:
    """Every closed-form pair with exact values, for listings."""
    return [{'M': str(p.M), 'R': str(p.R), 'source': p.source, 'note': p.note, 'valid': p.provenance}
            for p in achievable_points(N, K)]
