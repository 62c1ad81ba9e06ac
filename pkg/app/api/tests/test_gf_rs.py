from itertools import combinations

import numpy as np
from django.test import SimpleTestCase

from api.caching.errors import FieldArithmeticError, InsufficientDataError, ParameterError
from api.caching.gf_rs import (
    Codeword, FieldSpec, get_field, gf_add, gf_div, gf_inverse, gf_mul, is_irreducible, rs_encode, rs_reconstruct,
)


class FieldArithmeticTest(SimpleTestCase):
    def setUp(self):
        self.spec = FieldSpec(8)
        self.field = get_field(self.spec)

    def test_default_polynomial_reduces_overflow(self):
        self.assertEqual(self.spec.reduction_poly, 0x11D)
        self.assertEqual(gf_mul(2, 0x80, self.spec), 0x1D)

    def test_addition_is_xor(self):
        self.assertEqual(gf_add(0x53, 0xCA, self.spec), 0x53 ^ 0xCA)

    def test_every_nonzero_element_has_an_inverse(self):
        for a in range(1, 256):
            self.assertEqual(gf_mul(a, gf_inverse(a, self.spec), self.spec), 1)

    def test_division_undoes_multiplication(self):
        rng = np.random.default_rng(7)
        for a, b in rng.integers(1, 256, size=(200, 2)):
            self.assertEqual(gf_div(gf_mul(int(a), int(b), self.spec), int(b), self.spec), a)

    def test_zero_has_no_inverse(self):
        with self.assertRaises(FieldArithmeticError):
            gf_inverse(0, self.spec)
        with self.assertRaises(ArithmeticError):
            gf_div(5, 0, self.spec)

    def test_symbols_outside_the_field_are_rejected(self):
        with self.assertRaises(ParameterError):
            gf_mul(256, 1, self.spec)

    def test_small_fields(self):
        for m in (3, 4):
            field = get_field(FieldSpec(m))
            self.assertEqual(len({field.power(field.generator, e) for e in range(field.order - 1)}), field.order - 1)

    def test_unsupported_width_and_reducible_polynomial(self):
        with self.assertRaises(ParameterError):
            FieldSpec(5)
        self.assertFalse(is_irreducible(0b1111, 3))  # (x + 1)^3
        with self.assertRaises(ParameterError):
            FieldSpec(3, 0b1111)

    def test_smallest_field_for_code_length(self):
        self.assertEqual(FieldSpec.for_code_length(4).m, 3)
        self.assertEqual(FieldSpec.for_code_length(12).m, 4)
        self.assertEqual(FieldSpec.for_code_length(16).m, 8)

    def test_rank_of_dependent_rows(self):
        rows = np.array([[1, 2, 3], [2, 4, 6], [0, 1, 7]])
        # row 1 is 2 * row 0, no reduction needed
        self.assertEqual(self.field.rank(rows), 2)
        self.assertEqual(self.field.rank(np.eye(4, dtype=np.int64)), 4)


class ReedSolomonTest(SimpleTestCase):
    def test_every_five_subset_reconstructs(self):
        spec = FieldSpec(8)
        rng = np.random.default_rng(20240901)
        message = rng.integers(0, 256, size=(5, 100))
        codeword = rs_encode(message, 8, spec)
        failures = 0
        for positions in combinations(range(8), 5):
            recovered = rs_reconstruct(codeword.subset(positions))
            failures += int(not np.array_equal(recovered, message))
        self.assertEqual(failures, 0)

    def test_order_of_segments_does_not_matter(self):
        message = np.arange(12).reshape(3, 4) % 8
        codeword = rs_encode(message, 6, FieldSpec(3))
        self.assertTrue(np.array_equal(rs_reconstruct(codeword.subset((5, 0, 3))), message))

    def test_too_few_segments(self):
        codeword = rs_encode(np.ones((5, 2), dtype=np.int64), 8)
        with self.assertRaises(InsufficientDataError):
            rs_reconstruct(codeword.subset((0, 1, 2, 3)))

    def test_code_must_fit_the_field(self):
        with self.assertRaises(ParameterError):
            rs_encode(np.zeros((3, 1), dtype=np.int64), 8, FieldSpec(3))
        with self.assertRaises(ParameterError):
            Codeword(np.zeros((2, 1)), (0, 0), 4, 2, FieldSpec(3))
