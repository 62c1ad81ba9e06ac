from fractions import Fraction
from itertools import product

from django.test import SimpleTestCase

from api.caching.audit import audit_colluding, audit_correctness, audit_privacy_exact, exact_state_count
from api.caching.errors import DomainError, ParameterError
from api.caching.scheme_common import FileLibrary, measure, trial_rng
from api.caching.scheme_vu import (
    RestrictedDemand, VirtualUserScheme, demand_of, expand_restricted, label_count, label_of, mask_set, vd_mask,
    vu_nonprivate_round, vu_packet_structure,
)

from .mutants import LeakyVirtualUserScheme

SEED = 20240901

# (N, K, r) = (2, 3, 2): mask set, anchor label and the subfile labels of
# every transmitted X_{d,S}, per restricted demand d. Missing S are not sent.
DELIVERY_TABLE = {
    (0, 0, 0): ({0}, 0, {(1,): [(0, 1)], (2,): [(0, 2)], (3,): [(0, 3)]}),
    (1, 1, 1): ({1}, 1, {(0,): [(0, 1)], (2,): [(1, 2)], (3,): [(1, 3)]}),
    (0, 0, 1): ({2}, 2, {(0,): [(0, 2)], (1,): [(1, 2)], (3,): [(2, 3)]}),
    (1, 1, 0): ({0, 1, 2}, 0, {(1,): [(0, 1), (1, 2)], (2,): [(0, 2), (1, 2)], (3,): [(0, 3), (1, 3), (2, 3)]}),
    (0, 1, 1): ({3}, 3, {(0,): [(0, 3)], (1,): [(1, 3)], (2,): [(2, 3)]}),
    (1, 0, 0): ({0, 1, 3}, 0, {(1,): [(0, 1), (1, 3)], (2,): [(0, 2), (1, 2), (2, 3)], (3,): [(0, 3), (1, 3)]}),
    (0, 1, 0): ({0, 2, 3}, 0, {(1,): [(0, 1), (1, 2), (1, 3)], (2,): [(0, 2), (2, 3)], (3,): [(0, 3), (2, 3)]}),
    (1, 0, 1): ({1, 2, 3}, 1, {(0,): [(0, 1), (0, 2), (0, 3)], (2,): [(1, 2), (2, 3)], (3,): [(1, 3), (2, 3)]}),
}


class DemandLabelTest(SimpleTestCase):
    def test_labels_round_trip(self):
        for n_files, n_users in ((2, 3), (3, 3), (4, 2)):
            for t in range(label_count(n_files, n_users)):
                self.assertEqual(label_of(demand_of(t, n_files, n_users), n_files), t)

    def test_unlabelled_demand(self):
        with self.assertRaises(DomainError):
            label_of((1, 0, 0), 2)
        with self.assertRaises(DomainError):
            demand_of(4, 2, 3)

    def test_restricted_expansion(self):
        self.assertEqual(expand_restricted((1, 0), 3), (1, 2, 0, 0, 1, 2))
        self.assertEqual(RestrictedDemand.of([0, 1], 2), RestrictedDemand(d=(0, 1), expanded=(0, 1, 1, 0)))
        with self.assertRaises(ParameterError):
            expand_restricted((2,), 2)

    def test_anchor_label_is_in_the_mask_set(self):
        for d in product(range(3), repeat=3):
            mask = vd_mask(d, 3, rng=trial_rng(SEED))
            self.assertIn(mask.t_d, mask_set(d, 3))


class VirtualUserDeliveryTableTest(SimpleTestCase):
    def test_table_rows(self):
        for d, (V, t_d, cells) in DELIVERY_TABLE.items():
            self.assertEqual(set(mask_set(d, 2)), V, msg=f"V for d={d}")
            self.assertEqual(vd_mask(d, 2).t_d, t_d, msg=f"t_d for d={d}")
            table = vu_packet_structure(2, 3, 2, d)
            self.assertEqual(set(table), {(0,), (1,), (2,), (3,)})
            for S, labels in table.items():
                if S == (t_d,):
                    self.assertIsNone(labels, msg=f"d={d} S={S}")
                else:
                    self.assertEqual(labels, cells[S], msg=f"d={d} S={S}")

    def test_all_restricted_demands_decode_for_every_virtual_user(self):
        scheme = VirtualUserScheme(2, 3, 2)
        rng = trial_rng(SEED)
        library = scheme.new_library(rng, subfile_length=4)
        for d in product(range(2), repeat=3):
            outcomes = vu_nonprivate_round(2, 3, 2, library, d, rng)
            self.assertEqual(len(outcomes), 6)
            self.assertTrue(all(o['ok'] for o in outcomes), msg=f"d={d}: {outcomes}")
            self.assertEqual([o['file'] for o in outcomes], list(expand_restricted(d, 2)))


class VirtualUserSchemeTest(SimpleTestCase):
    def test_rates_for_two_files_three_users(self):
        scheme = VirtualUserScheme(2, 3, 2)
        self.assertEqual(scheme.subfile_count, 6)
        point = scheme.formula_point()
        self.assertEqual((point.M, point.R), (Fraction(2, 3), Fraction(1)))
        rng = trial_rng(SEED)
        transcript = scheme.run_round(scheme.new_library(rng, 2), (0, 1, 1), rng)
        measured = measure(transcript)
        self.assertEqual((measured.payload_M, measured.payload_R), (Fraction(2, 3), Fraction(1)))
        self.assertEqual(len(transcript.packet.segments), 6)
        self.assertEqual(transcript.failures(), [])

    def test_all_real_demands_decode(self):
        report = audit_correctness(VirtualUserScheme(2, 3, 2), trials=5, seed=SEED, subfile_length=2)
        self.assertTrue(report.passed, report.to_json())
        self.assertEqual(report.checks[0].metric, 0)
        self.assertEqual(report.checks[0].detail, "120 decodes over 5 trials")

    def test_zero_library_decodes_to_zero_files(self):
        report = audit_correctness(VirtualUserScheme(2, 2, 1), trials=1, seed=SEED, zero_library=True)
        self.assertTrue(report.passed)

    def test_two_users_r_one(self):
        scheme = VirtualUserScheme(2, 2, 1)
        self.assertEqual(scheme.m, 3)
        self.assertEqual(scheme.subfile_count, 3)
        self.assertEqual((scheme.formula_point().M, scheme.formula_point().R), (Fraction(1), Fraction(2, 3)))
        self.assertEqual(scheme.randomness_count(), 12)
        self.assertEqual(exact_state_count(scheme), 3072)

    def test_enumerated_rounds_are_a_distribution(self):
        scheme = VirtualUserScheme(2, 2, 1, symbol_bits=1)
        library = FileLibrary.zeros(2, 3, 1, symbol_bits=1)
        weights = [w for w, _, _ in scheme.enumerate_rounds(library, (0, 1))]
        self.assertEqual(sum(weights), 1)

    def test_parameter_errors(self):
        with self.assertRaises(ParameterError):
            VirtualUserScheme(1, 2, 1)
        with self.assertRaises(ParameterError):
            VirtualUserScheme(2, 2, 4)
        with self.assertRaises(ParameterError):
            VirtualUserScheme(2, 2, 1).check_demand((0, 2))


class VirtualUserPrivacyTest(SimpleTestCase):
    def test_exact_privacy_passes(self):
        for r in (1, 2):
            report = audit_privacy_exact(VirtualUserScheme(2, 2, r, symbol_bits=1), seed=SEED)
            self.assertTrue(report.passed, report.to_json())
            self.assertEqual([c.name for c in report.checks], ["privacy_user_0", "privacy_user_1"])
            self.assertTrue(all(c.metric == 0 for c in report.checks))

    def test_leak_is_caught_with_total_variation_one(self):
        report = audit_privacy_exact(LeakyVirtualUserScheme(2, 2, 1, symbol_bits=1), seed=SEED)
        self.assertFalse(report.passed)
        self.assertEqual(max(c.metric for c in report.checks), 1)

    def test_colluding_privacy(self):
        report = audit_colluding(VirtualUserScheme(2, 2, 1, symbol_bits=1), [0], seed=SEED)
        self.assertTrue(report.passed, report.to_json())
        leaky = audit_colluding(LeakyVirtualUserScheme(2, 2, 1, symbol_bits=1), [1], seed=SEED)
        self.assertFalse(leaky.passed)
