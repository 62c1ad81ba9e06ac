from fractions import Fraction

from django.test import SimpleTestCase

from api.caching.bounds import (
    UNCHARACTERIZED, achievable_points, characterized_regions, converse_lemma3, converse_thm3, cutset,
    envelope_for, grk_points, lower_envelope, max_converse, optimal_curve, thm1_points, thm2_points,
)
from api.caching.curves import curve_rows
from api.caching.errors import DomainError, ParameterError
from api.caching.scheme_common import RatePoint


def grid(N, samples=512):
    return [Fraction(N * i, samples - 1) for i in range(samples)]


class ClosedFormPointsTest(SimpleTestCase):
    def test_thm1_endpoints(self):
        points = thm1_points(2, 3)
        self.assertEqual((points[0].M, points[0].R), (Fraction(2), Fraction(0)))
        self.assertEqual((points[-1].M, points[-1].R), (Fraction(0), Fraction(2)))
        self.assertIn((Fraction(2, 3), Fraction(1)), [(p.M, p.R) for p in points])

    def test_thm2_needs_n_at_most_k(self):
        with self.assertRaises(DomainError):
            thm2_points(3, 2)
        points = thm2_points(3, 3)
        self.assertEqual([(p.M, p.R) for p in points[:2]], [(Fraction(1, 4), Fraction(9, 4)), (Fraction(3, 8), 2)])

    def test_grk_is_formula_only(self):
        self.assertTrue(all(p.provenance == "prior-work" for p in grk_points(2, 3)))

    def test_negative_points_are_rejected(self):
        with self.assertRaises(ParameterError):
            RatePoint(-1, 1, "test")


class TangencyTest(SimpleTestCase):
    def test_thm2_points_meet_the_converse(self):
        for N, K in ((2, 2), (3, 3), (3, 4), (4, 5)):
            first, second = thm2_points(N, K)[:2]
            self.assertEqual(first.M, Fraction(1, K + 1))
            self.assertEqual(second.M, Fraction(N, (K + 1) * (N - 1)))
            self.assertEqual(converse_thm3(N, K, first.M), first.R, msg=f"N={N} K={K} q=N")
            self.assertEqual(converse_thm3(N, K, second.M), second.R, msg=f"N={N} K={K} q=N-1")

    def test_max_converse_on_the_first_segment(self):
        for N, K in ((2, 2), (2, 3), (3, 3), (3, 4), (4, 5)):
            for i in range(9):
                M = Fraction(i, 8 * (K + 1))
                self.assertEqual(max_converse(N, K, M), N * (1 - M), msg=f"N={N} K={K} M={M}")

    def test_converse_parameter_checks(self):
        with self.assertRaises(DomainError):
            converse_thm3(3, 2, 0)
        with self.assertRaises(ParameterError):
            converse_lemma3(1, 0)
        with self.assertRaises(ParameterError):
            cutset(2, 2, 0, 3)
        with self.assertRaises(ParameterError):
            max_converse(2, 2, 3)


class TwoFilesThreeUsersTest(SimpleTestCase):
    CORNERS = [(0, 2), (Fraction(1, 4), Fraction(3, 2)), (Fraction(2, 3), 1), (1, Fraction(2, 3)),
               (Fraction(3, 2), Fraction(1, 4)), (2, 0)]

    def test_optimal_curve(self):
        for M in grid(2):
            expected = max(2 - 2 * M, (9 - 6 * M) / 5, (5 - 3 * M) / 3, (9 - 5 * M) / 6, (2 - M) / 2)
            self.assertEqual(optimal_curve(2, 3, M), (expected, "cor2"))
        self.assertEqual(characterized_regions(2, 3), [(Fraction(0), Fraction(2), "cor2")])

    def test_envelope_corners(self):
        envelope = envelope_for(2, 3)
        corners = [(p.M, p.R) for p in envelope.breakpoints]
        self.assertEqual(corners, [(Fraction(M), Fraction(R)) for M, R in self.CORNERS])
        self.assertTrue(envelope.is_convex())

    def test_envelope_matches_the_optimal_curve(self):
        envelope = envelope_for(2, 3)
        for M in grid(2, 65):
            self.assertEqual(envelope.evaluate(M), optimal_curve(2, 3, M)[0])

    def test_corner_provenance(self):
        envelope = envelope_for(2, 3)
        provenance = {p.M: p.provenance for p in envelope.breakpoints}
        self.assertEqual(provenance[Fraction(1)], "prior-work")
        self.assertEqual(provenance[Fraction(3, 2)], "prior-work")
        self.assertEqual(provenance[Fraction(1, 4)], "implemented")
        self.assertEqual(provenance[Fraction(2, 3)], "implemented")
        # thm1 with r = 0 and the earlier scheme both reach (2, 0)
        self.assertEqual(provenance[Fraction(2)], "implemented/prior-work")
        self.assertEqual(provenance[Fraction(0)], "implemented/prior-work")

    def test_csv_marks_the_formula_only_corners(self):
        envelope_rows = {row['M']: row['valid'] for row in curve_rows(2, 3, 5) if row['series'] == "ach_lce"}
        for M in (Fraction(1), Fraction(3, 2), Fraction(2)):
            self.assertIn("prior-work", envelope_rows[M], msg=f"M={M}")
        self.assertEqual(envelope_rows[Fraction(1, 4)], "implemented")


class ConverseDominanceTest(SimpleTestCase):
    def test_converse_never_exceeds_the_envelope(self):
        for N, K in ((2, 3), (3, 3), (5, 10)):
            envelope = envelope_for(N, K)
            for M in grid(N):
                self.assertLessEqual(max_converse(N, K, M), envelope.evaluate(M), msg=f"N={N} K={K} M={M}")

    def test_optimal_curve_outside_known_regions(self):
        self.assertEqual(optimal_curve(2, 5, 1), (None, UNCHARACTERIZED))
        value, tag = optimal_curve(3, 3, Fraction(1, 8))
        self.assertEqual((value, tag), (Fraction(21, 8), "op1"))


class LowerEnvelopeTest(SimpleTestCase):
    def test_collinear_and_dominated_points_are_dropped(self):
        points = [RatePoint(0, 2, "a"), RatePoint(1, 1, "a"), RatePoint(2, 0, "a"), RatePoint(1, 3, "b")]
        envelope = lower_envelope(points)
        self.assertEqual([(p.M, p.R) for p in envelope.breakpoints], [(0, 2), (2, 0)])
        self.assertEqual(envelope.evaluate(Fraction(1, 2)), Fraction(3, 2))
        with self.assertRaises(ParameterError):
            envelope.evaluate(3)

    def test_empty(self):
        with self.assertRaises(ParameterError):
            lower_envelope([])

    def test_achievable_points_cover_every_family(self):
        sources = {p.source for p in achievable_points(3, 3)}
        self.assertEqual(sources, {"thm1", "thm2", "grk", "trivial"})
