from fractions import Fraction

from django.test import SimpleTestCase

from api.caching.audit import audit_correctness, audit_privacy_aux, audit_privacy_rank
from api.caching.errors import DomainError, InfeasibleAuditError, ParameterError
from api.caching.scheme_common import measure, trial_rng
from api.caching.scheme_mds_b import MdsSchemeB, b_packet_structure, h_map, leaders

SEED = 20240901


class MdsSchemeBHelpersTest(SimpleTestCase):
    def test_h_map_is_a_fixed_point_free_bijection(self):
        for n_files in (3, 4, 5):
            for n in range(n_files):
                others = [m for m in range(n_files) if m != n]
                images = [h_map(n_files, n, m) for m in others]
                self.assertEqual(sorted(images), others)
                self.assertTrue(all(h != m for h, m in zip(images, others)))

    def test_h_map_domain(self):
        with self.assertRaises(DomainError):
            h_map(2, 0, 1)
        with self.assertRaises(ParameterError):
            h_map(3, 1, 1)

    def test_leaders_default_to_user_one(self):
        self.assertEqual(leaders((0, 1, 2), 3), (0, 1, 2))
        self.assertEqual(leaders((0, 1, 1), 3), (0, 1, 1))
        self.assertEqual(leaders((2, 2, 0, 2), 3), (2, 1, 0))


class MdsSchemeBTest(SimpleTestCase):
    def setUp(self):
        self.scheme = MdsSchemeB(3, 3)

    def test_code_parameters(self):
        self.assertEqual(self.scheme.field.m, 4)
        self.assertEqual((self.scheme.code_length, self.scheme.k_dim), (12, 8))
        self.assertEqual(self.scheme.rank_target(0), 19)

    def test_measured_rates(self):
        rng = trial_rng(SEED)
        transcript = self.scheme.run_round(self.scheme.new_library(rng, 3), (0, 1, 2), rng)
        measured = measure(transcript)
        self.assertEqual((measured.payload_M, measured.payload_R), (Fraction(3, 8), Fraction(2)))
        self.assertEqual(len(transcript.packet.segments), 16)
        self.assertEqual(transcript.failures(), [])

    def test_correctness_over_fifty_trials(self):
        report = audit_correctness(self.scheme, trials=50, seed=SEED)
        self.assertTrue(report.passed, report.to_json())
        self.assertEqual(report.checks[0].detail, f"{50 * 27 * 3} decodes over 50 trials")

    def test_packet_structure_for_distinct_demands(self):
        structure = b_packet_structure(3, 3, (0, 1, 2))
        self.assertEqual(structure['leaders'], (0, 1, 2))
        self.assertEqual(structure['Y'], {0: "w^(0)_0,0", 1: "w^(1)_1,1", 2: "w^(2)_2,2"})
        self.assertEqual(structure['X'][0], {
            'clear': ["w^(1)_0,2", "w^(2)_0,1"],
            'V': ["w^(0)_0,3", "Y_0+w^(1)_0,1", "Y_0+w^(2)_0,2"],
        })
        self.assertEqual(structure['X'][1], {
            'clear': ["w^(1)_1,3", "w^(2)_1,0"],
            'V': ["Y_1+w^(0)_1,0", "w^(0)_1,2", "Y_1+w^(2)_1,2"],
        })
        self.assertEqual(structure['X'][2], {
            'clear': ["w^(1)_2,0", "w^(2)_2,3"],
            'V': ["Y_2+w^(0)_2,0", "Y_2+w^(1)_2,1", "w^(0)_2,1"],
        })
        self.assertEqual(structure['XN'], "Y_0+Y_1+Y_2")

    def test_packet_structure_with_an_unrequested_file(self):
        structure = b_packet_structure(3, 3, (0, 1, 1))
        self.assertEqual(structure['Y'][2], "w^(1)_2,1+w^(0)_2,1")
        self.assertEqual(structure['X'][0]['clear'], ["w^(1)_0,2", "w^(2)_0,2"])
        self.assertEqual(structure['X'][1]['V'], ["Y_1+w^(0)_1,0", "w^(0)_1,2", "Y_1+w^(2)_1,1"])

    def test_constraints(self):
        with self.assertRaises(ParameterError):
            MdsSchemeB(2, 3)
        with self.assertRaises(ParameterError):
            MdsSchemeB(4, 3)


class MdsSchemeBPrivacyTest(SimpleTestCase):
    def test_rank_certificate(self):
        report = audit_privacy_rank(MdsSchemeB(3, 3), draws=2, seed=SEED)
        self.assertTrue(report.passed, report.to_json())
        self.assertEqual([c.metric for c in report.checks], ["19/19"] * 3)

    def test_exact_aux_is_refused(self):
        with self.assertRaises(InfeasibleAuditError) as ctx:
            audit_privacy_aux(MdsSchemeB(3, 3), "exact", seed=SEED)
        self.assertIn("statistical", ctx.exception.hint)

    def test_statistical_aux(self):
        report = audit_privacy_aux(MdsSchemeB(3, 3), "statistical", trials=60, seed=SEED, bins=16)
        self.assertTrue(report.passed, report.to_json())
        self.assertEqual(len(report.checks), 3)
