"""
# Identity Forge: test_exactfield.py

Unit tests for `exactfield.py`.

**Copyright 2024–2026 Conway**
Licensed under the GNU General Public License v3.0 (GPL-3.0-only).
This is free software with NO WARRANTY etc. etc., see LICENSE.
"""

import itertools
import math
import unittest
from fractions import Fraction

import numpy as np

from idforge.exactfield import (
    ONE, Q_SQRT2, SQRT2, ZERO,
    BadFieldSpecException, EchelonForm, ExactFieldException, ExactMatrix, PrimeField, PrimeFieldElement,
    QuadExtRational, ReconstructionException, SplitArray,
    field_from_spec, free_variable_basis, is_prime, legendre_symbol, matrix_from_json, matrix_to_json, mod_inverse, modular_matmul,
    nullspace_basis, scalar_from_json, scalar_to_json,
    rational_reconstruct, reconstruction_bound, reduce_mod_p, rref, sqrt2_residue, tonelli_shanks,
)


LOW_RANK_FACTOR = [
    [1, 0, 0],
    [0, 1, 0],
    [0, 0, 1],
    [1, 1, 0],
    [2, 0, 5],
    [0, 3, 1],
]
ROW_SPACE = [
    [1, 0, 0, 1, 2, 0],
    [0, 1, 0, 1, 0, 3],
    [0, 0, 1, 0, 5, 1],
]


class TestNumberTheory(unittest.TestCase):
    def test_is_prime(self):
        self.assertEqual([n for n in range(30) if is_prime(n)], [2, 3, 5, 7, 11, 13, 17, 19, 23, 29])
        self.assertTrue(is_prime(103))
        self.assertTrue(is_prime(100049))
        self.assertFalse(is_prime(100047))

    def test_legendre_symbol(self):
        # 2 is a square exactly for p = ±1 mod 8
        self.assertEqual(legendre_symbol(2, 7), 1)
        self.assertEqual(legendre_symbol(2, 17), 1)
        self.assertEqual(legendre_symbol(2, 103), 1)
        self.assertEqual(legendre_symbol(2, 5), -1)
        self.assertEqual(legendre_symbol(2, 11), -1)
        self.assertEqual(legendre_symbol(0, 11), 0)

    def test_tonelli_shanks(self):
        self.assertEqual(tonelli_shanks(2, 103), (38, 65))
        self.assertEqual(tonelli_shanks(2, 7), (3, 4))
        self.assertEqual(tonelli_shanks(2, 17), (6, 11))
        self.assertEqual(tonelli_shanks(2, 41), (17, 24))
        self.assertEqual(tonelli_shanks(0, 13), (0, 0))

        # p = 1 mod 8 needs the full loop
        for p in [17, 41, 73, 97, 113, 193, 257]:
            for root in tonelli_shanks(2, p):
                self.assertEqual(root * root % p, 2)

        self.assertRaises(PrimeField.NoSquareRootException, tonelli_shanks, 2, 5)

    def test_sqrt2_residue(self):
        self.assertEqual(sqrt2_residue(103), 38)
        self.assertEqual(sqrt2_residue(103, 65), 65)
        self.assertEqual(sqrt2_residue(100049, 10948), 10948)
        self.assertRaises(PrimeField.BadRootException, sqrt2_residue, 103, 37)
        self.assertRaises(PrimeField.NoSquareRootException, sqrt2_residue, 11)
        self.assertRaises(PrimeField.NoSquareRootException, sqrt2_residue, 2)

    def test_mod_inverse(self):
        self.assertEqual(mod_inverse(2, 103), 52)
        self.assertEqual(mod_inverse(-1, 103), 102)
        for value in range(1, 103):
            self.assertEqual(value * mod_inverse(value, 103) % 103, 1)
        self.assertRaises(PrimeField.ZeroInverseException, mod_inverse, 0, 103)
        self.assertRaises(PrimeField.ZeroInverseException, mod_inverse, 206, 103)

    def test_rational_reconstruct(self):
        self.assertEqual(reconstruction_bound(103), 7)
        self.assertEqual(reconstruction_bound(100049), 223)

        self.assertEqual(rational_reconstruct(102, 103), -1)
        self.assertEqual(rational_reconstruct(52, 103), Fraction(1, 2))
        self.assertEqual(rational_reconstruct(0, 103), 0)
        self.assertEqual(rational_reconstruct(30, 103), Fraction(4, 7))

        # Every small fraction comes back
        for numerator in range(-7, 8):
            for denominator in range(1, 8):
                value = Fraction(numerator, denominator)
                residue = numerator * mod_inverse(denominator, 103) % 103
                self.assertEqual(rational_reconstruct(residue, 103), value)
        for value in range(-12, 13):
            self.assertEqual(rational_reconstruct(value % 100049, 100049), value)

        # 11 = a/b mod 103 hath no solution with |a|, |b| <= 7
        self.assertRaises(ReconstructionException, rational_reconstruct, 11, 103)


class TestQuadExtRational(unittest.TestCase):
    def test_arithmetic(self):
        x = QuadExtRational(1, 2)
        y = QuadExtRational(Fraction(1, 2), -1)

        self.assertEqual(x + y, QuadExtRational(Fraction(3, 2), 1))
        self.assertEqual(x - y, QuadExtRational(Fraction(1, 2), 3))
        self.assertEqual(x * y, QuadExtRational(Fraction(1, 2) - 4, Fraction(-1) + 1))
        self.assertEqual(SQRT2 * SQRT2, 2)
        self.assertEqual(x * x.inverse(), ONE)
        self.assertEqual((x / y) * y, x)
        self.assertEqual(1 - x, QuadExtRational(0, -2))
        self.assertEqual(3 * x, QuadExtRational(3, 6))
        self.assertEqual(-x, QuadExtRational(-1, -2))

        # Norm is multiplicative
        self.assertEqual((x * y).norm(), x.norm() * y.norm())
        self.assertEqual(x.conjugate(), QuadExtRational(1, -2))

        self.assertFalse(ZERO)
        self.assertTrue(SQRT2)
        self.assertTrue(QuadExtRational(5).is_rational())
        self.assertRaises(ZeroDivisionError, ZERO.inverse)

    def test_agrees_with_floats(self):
        rng = np.random.default_rng(5)

        def approximate(value):
            return float(value.a) + float(value.b) * math.sqrt(2)

        for _ in range(50):
            x, y = (
                QuadExtRational(
                    Fraction(int(rng.integers(-20, 21)), int(rng.integers(1, 9))),
                    Fraction(int(rng.integers(-20, 21)), int(rng.integers(1, 9))),
                )
                for _ in range(2)
            )
            self.assertTrue(math.isclose(approximate(x + y), approximate(x) + approximate(y), abs_tol=1e-9))
            self.assertTrue(math.isclose(approximate(x - y), approximate(x) - approximate(y), abs_tol=1e-9))
            self.assertTrue(math.isclose(approximate(x * y), approximate(x) * approximate(y), abs_tol=1e-9))
            if y:
                self.assertTrue(math.isclose(approximate(x / y), approximate(x) / approximate(y), rel_tol=1e-9))

    def test_str(self):
        self.assertEqual(str(QuadExtRational(1, 2)), '1+2*sqrt2')
        self.assertEqual(str(QuadExtRational(1, -2)), '1-2*sqrt2')
        self.assertEqual(str(QuadExtRational(0, -1)), '-1*sqrt2')
        self.assertEqual(str(QuadExtRational(Fraction(-3, 4))), '-3/4')
        self.assertEqual(str(ZERO), '0')


class TestPrimeField(unittest.TestCase):
    def test_construction(self):
        field = PrimeField(103)
        self.assertEqual(field.sqrt2, 38)
        self.assertEqual(field.spec, 'gfp:103:sqrt2=38')
        self.assertEqual(PrimeField(103, 65).spec, 'gfp:103:sqrt2=65')
        self.assertEqual(PrimeField(11).spec, 'gfp:11')

        self.assertRaises(PrimeField.NotPrimeException, PrimeField, 100)
        self.assertRaises(PrimeField.BadRootException, PrimeField, 103, 5)
        self.assertRaises(PrimeField.NoSquareRootException, PrimeField(11).sqrt2_residue)

        # Residue products must stay within 64 bits
        self.assertRaises(PrimeField.ModulusTooLargeException, PrimeField, 4294967311)
        self.assertRaises(PrimeField.ModulusTooLargeException, field_from_spec, 'gfp:4294967311')
        self.assertEqual(PrimeField(2 ** 31 - 1).modulus, 2147483647)

    def test_field_from_spec(self):
        self.assertIs(field_from_spec('q-sqrt2'), Q_SQRT2)
        self.assertEqual(field_from_spec('gfp:103'), PrimeField(103))
        self.assertEqual(field_from_spec('gfp:103:sqrt2=65'), PrimeField(103, 65))
        self.assertEqual(field_from_spec(' gfp:100049:sqrt2=10948 ').sqrt2, 10948)
        self.assertNotEqual(field_from_spec('gfp:103:sqrt2=65'), PrimeField(103))

        self.assertRaises(BadFieldSpecException, field_from_spec, 'gf103')
        self.assertRaises(BadFieldSpecException, field_from_spec, 'gfp:103:sqrt2=')
        self.assertRaises(PrimeField.NotPrimeException, field_from_spec, 'gfp:104')

    def test_from_exact(self):
        field = PrimeField(103)
        self.assertEqual(field.from_exact(-1), 102)
        self.assertEqual(field.from_exact(Fraction(1, 2)), 52)
        self.assertEqual(field.from_exact(SQRT2), 38)
        self.assertEqual(field.from_exact(QuadExtRational(Fraction(1, 2), 1)), 90)
        self.assertEqual(reduce_mod_p(QuadExtRational(Fraction(1, 2), 1), field), 90)
        self.assertEqual(reduce_mod_p(SQRT2, PrimeField(103, 65)), 65)

        # √2 needs a chosen root
        self.assertRaises(PrimeField.NoSquareRootException, PrimeField(11).from_exact, SQRT2)

    def test_prime_field_element(self):
        two = PrimeFieldElement(2, 103)
        self.assertEqual(int(two * two.inverse()), 1)
        self.assertEqual(int(two - 5), 100)
        self.assertEqual(int(two / 4), 52)
        self.assertFalse(PrimeFieldElement(103, 103))

    def test_modular_matmul(self):
        rng = np.random.default_rng(0)
        for p in [103, 100049, 2 ** 31 - 1]:
            a = rng.integers(0, p, size=(4, 7), dtype=np.int64)
            b = rng.integers(0, p, size=(7, 5), dtype=np.int64)
            expected = (a.astype(object) @ b.astype(object)) % p
            self.assertTrue(np.array_equal(modular_matmul(a, b, p), expected.astype(np.int64)))

        # Inner dimension longer than one float64 chunk
        p = 2 ** 31 - 1
        a = np.full((1, 5000), p - 1, dtype=np.int64)
        b = np.full((5000, 1), p - 1, dtype=np.int64)
        self.assertEqual(int(modular_matmul(a, b, p)[0, 0]), 5000 % p)


class TestSplitArray(unittest.TestCase):
    def test_tensordot(self):
        a = Q_SQRT2.array([[QuadExtRational(1, 1), Fraction(1, 2)], [SQRT2, 3]])
        b = Q_SQRT2.array([[QuadExtRational(0, Fraction(1, 3)), 1], [2, QuadExtRational(-1, 1)]])
        product = SplitArray.from_entries(a).tensordot(SplitArray.from_entries(b), 1)
        self.assertTrue(np.all(product.to_entries() == np.dot(a, b)))

    def test_arithmetic(self):
        a = SplitArray.from_entries(Q_SQRT2.array([[Fraction(1, 2), SQRT2]]))
        b = SplitArray.from_integers([[1, 2]], [[0, -1]])
        self.assertTrue(np.all((a + b).to_entries() == Q_SQRT2.array([[Fraction(3, 2), 2]])))
        self.assertTrue(np.all((a - a).to_entries() == Q_SQRT2.zeros((1, 2))))
        self.assertTrue(np.all(a.scaled(SQRT2).to_entries() == Q_SQRT2.array([[QuadExtRational(0, Fraction(1, 2)), 2]])))
        self.assertEqual(a.transpose((1, 0)).shape, (2, 1))
        self.assertEqual(list(b.nonzero_mask().flat), [True, True])

    def test_reduce_mod(self):
        field = PrimeField(103)
        entries = Q_SQRT2.array([[QuadExtRational(Fraction(1, 2), 1), -1], [SQRT2, Fraction(2, 3)]])
        residues = SplitArray.from_entries(entries).reduce_mod(field)
        self.assertTrue(np.array_equal(residues, field.array(entries)))
        self.assertEqual(int(residues[0, 0]), 90)


def determinant(rows):
    if len(rows) == 0:
        return 1
    return sum(
        (-1) ** col * rows[0][col] * determinant([row[:col] + row[col + 1:] for row in rows[1:]])
        for col in range(len(rows))
        if rows[0][col]
    )


def minor_rank(integers, p):
    """
    Largest k with a k by k minor nonzero modulo p.
    """
    row_count, col_count = len(integers), len(integers[0])
    for size in range(min(row_count, col_count), 0, -1):
        for rows in itertools.combinations(range(row_count), size):
            for cols in itertools.combinations(range(col_count), size):
                if determinant([[integers[row][col] for col in cols] for row in rows]) % p:
                    return size
    return 0


def random_low_rank(field, rng, row_count, col_count, rank):
    left = field.random_entries(rng, (row_count, rank))
    right = field.random_entries(rng, (rank, col_count))
    return ExactMatrix(field, field.matmul(left, right))


class TestLinearAlgebra(unittest.TestCase):
    def low_rank_matrix(self, field):
        return ExactMatrix(field, field.matmul(field.array(LOW_RANK_FACTOR), field.array(ROW_SPACE)))

    def assertReducedEchelon(self, entries, rank):
        pivots = []
        for row in entries[:rank]:
            nonzero = np.flatnonzero(row)
            self.assertTrue(nonzero.size)
            self.assertEqual(int(row[nonzero[0]]), 1)
            pivots.append(int(nonzero[0]))
        self.assertEqual(pivots, sorted(set(pivots)))
        for index, col in enumerate(pivots):
            self.assertEqual(np.count_nonzero(entries[:, col]), 1, f'pivot column {col} of row {index}')
        self.assertFalse(np.any(entries[rank:]))

    def test_rref(self):
        field = PrimeField(103)
        rank, reduced = rref(self.low_rank_matrix(field))
        self.assertEqual(rank, 3)
        self.assertTrue(np.array_equal(reduced.entries[:3], field.array(ROW_SPACE)))
        self.assertFalse(np.any(reduced.entries[3:]))

        # Idempotent
        self.assertEqual(rref(reduced), (3, reduced))

        rank, reduced = rref(ExactMatrix.from_values(Q_SQRT2, [[1, SQRT2], [SQRT2, 2]]))
        self.assertEqual(rank, 1)
        self.assertEqual(list(reduced.entries[0]), [ONE, SQRT2])

    def test_rank_against_minors(self):
        field = PrimeField(103)
        matrix = self.low_rank_matrix(field)
        integers = [[int(entry) for entry in row] for row in matrix.entries]
        self.assertEqual(minor_rank(integers, 103), 3)
        self.assertEqual(rref(matrix)[0], 3)

    def test_random_rref(self):
        field = PrimeField(103)
        rng = np.random.default_rng(2024)
        for trial in range(12):
            matrix = random_low_rank(field, rng, 6, 6, trial % 7)
            rank, reduced = rref(matrix)
            integers = [[int(entry) for entry in row] for row in matrix.entries]
            self.assertEqual(rank, minor_rank(integers, 103))
            self.assertReducedEchelon(reduced.entries, rank)

            # Same row space
            stacked = ExactMatrix(field, np.concatenate([matrix.entries, reduced.entries]))
            self.assertEqual(rref(stacked)[0], rank)
            self.assertEqual(rref(reduced), (rank, reduced))

    def test_nullspace_basis(self):
        field = PrimeField(103)
        basis = nullspace_basis(self.low_rank_matrix(field))
        expected = field.array([
            [1, 0, 0, Fraction(-15, 17), Fraction(-1, 17), Fraction(5, 17)],
            [0, 1, 0, Fraction(-2, 17), Fraction(1, 17), Fraction(-5, 17)],
            [0, 0, 1, Fraction(6, 17), Fraction(-3, 17), Fraction(-2, 17)],
        ])
        self.assertEqual(len(basis), 3)
        for vector, expected_vector in zip(basis, expected):
            self.assertTrue(np.array_equal(vector, expected_vector))
            self.assertFalse(np.any(field.matmul(self.low_rank_matrix(field).entries, vector[:, None])))

        # One vector per free column, before row reduction
        free = free_variable_basis(self.low_rank_matrix(field))
        self.assertTrue(np.array_equal(free[0], field.array([-1, -1, 0, 1, 0, 0])))
        self.assertEqual(rref(ExactMatrix(field, np.array(free)))[1], ExactMatrix(field, expected))

        self.assertEqual(nullspace_basis(ExactMatrix(field, field.identity(4))), [])

        basis = nullspace_basis(ExactMatrix.from_values(field, [[1, 1, 0]]))
        self.assertTrue(np.array_equal(np.array(basis), field.array([[1, -1, 0], [0, 0, 1]])))

    def test_random_nullspace(self):
        field = PrimeField(103)
        rng = np.random.default_rng(7)
        for rank in (0, 3, 5, 8):
            matrix = random_low_rank(field, rng, 8, 12, rank)
            computed_rank = rref(matrix)[0]
            basis = nullspace_basis(matrix)
            self.assertEqual(len(basis), 12 - computed_rank)
            for vector in basis:
                self.assertFalse(np.any(field.matmul(matrix.entries, vector[:, None])))

            # The basis is independent and already in reduced row echelon form
            stacked = ExactMatrix(field, np.array(basis).reshape(len(basis), 12))
            self.assertEqual(rref(stacked), (len(basis), stacked))
            self.assertReducedEchelon(stacked.entries, len(basis))

    def test_nullspace_near_modulus_bound(self):
        field = PrimeField(2 ** 31 - 1)
        rng = np.random.default_rng(11)
        for _ in range(20):
            matrix = ExactMatrix(field, field.random_entries(rng, (3, 5)))
            for vector in nullspace_basis(matrix):
                self.assertFalse(np.any(field.matmul(matrix.entries, vector[:, None])))

    def test_exact_nullspace(self):
        matrix = ExactMatrix.from_values(Q_SQRT2, [[1, SQRT2, 0], [0, 1, SQRT2]])
        basis = nullspace_basis(matrix)
        self.assertEqual(len(basis), 1)
        self.assertEqual(list(basis[0]), [ONE, QuadExtRational(0, Fraction(-1, 2)), QuadExtRational(Fraction(1, 2))])

    def test_echelon_form(self):
        field = PrimeField(103)
        matrix = self.low_rank_matrix(field)
        echelon_form = EchelonForm(field, 6)
        gains = [echelon_form.absorb(row) for row in matrix.entries[::-1]]
        self.assertEqual(gains, [1, 1, 1, 0, 0, 0])
        self.assertEqual(echelon_form.rank, 3)
        self.assertEqual(echelon_form.matrix(), ExactMatrix(field, field.array(ROW_SPACE)))

        self.assertTrue(echelon_form.contains(field.array(ROW_SPACE[1])))
        self.assertFalse(echelon_form.contains(field.array([0, 0, 0, 1, 0, 0])))

        for vector, expected in zip(echelon_form.nullspace_basis(), nullspace_basis(matrix)):
            self.assertTrue(np.array_equal(vector, expected))

        # Absorbing a block at once
        block_form = EchelonForm(field, 6)
        self.assertEqual(block_form.absorb(matrix.entries), 3)
        self.assertEqual(block_form.matrix(), echelon_form.matrix())

    def test_exact_matrix_json(self):
        matrix = ExactMatrix.from_values(Q_SQRT2, [[Fraction(1, 2), QuadExtRational(1, -3)]])
        document = matrix.to_json()
        self.assertEqual(ExactMatrix.from_json(document), matrix)
        self.assertEqual((document['rows'], document['cols']), (1, 2))
        self.assertEqual(document['entries'], [[{'a': '1/2', 'b': '0'}, {'a': '1', 'b': '-3'}]])
        self.assertEqual(str(matrix), '1/2 1-3*sqrt2')
        self.assertEqual(matrix_from_json(matrix_to_json(matrix)), matrix)

        field = PrimeField(103)
        matrix = self.low_rank_matrix(field)
        self.assertEqual(matrix.to_json()['entries'][3], [1, 1, 0, 2, 2, 3])
        self.assertEqual(ExactMatrix.from_json(matrix.to_json()), matrix)

        # Flat entries with a shape are read too
        flat = {'field': 'gfp:103', 'shape': [2, 2], 'entries': [1, 2, 3, 104]}
        self.assertEqual(ExactMatrix.from_json(flat), ExactMatrix.from_values(PrimeField(103), [[1, 2], [3, 1]]))
        self.assertRaises(
            ExactFieldException, ExactMatrix.from_json, {'field': 'gfp:103', 'rows': 2, 'cols': 2, 'entries': [[1]]},
        )

        # Scalars serialise as {a, b} strings over Q(√2) and as integers over GF(p)
        self.assertEqual(
            scalar_to_json(Q_SQRT2, QuadExtRational(Fraction(-2, 3), 1)), {'a': '-2/3', 'b': '1'},
        )
        self.assertEqual(scalar_from_json(Q_SQRT2, {'a': '-2/3', 'b': '1'}), QuadExtRational(Fraction(-2, 3), 1))
        self.assertEqual(scalar_from_json(Q_SQRT2, ['-2/3', '1']), QuadExtRational(Fraction(-2, 3), 1))
        self.assertEqual(scalar_from_json(Q_SQRT2, '5'), QuadExtRational(5))
        self.assertEqual(scalar_from_json(PrimeField(103), 105), 2)


if __name__ == '__main__':
    unittest.main()
