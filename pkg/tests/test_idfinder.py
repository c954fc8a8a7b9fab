"""
# Identity Forge: test_idfinder.py

Unit tests for `idfinder.py`.

**Copyright 2024–2026 Conway**
Licensed under the GNU General Public License v3.0 (GPL-3.0-only).
This is free software with NO WARRANTY etc. etc., see LICENSE.
"""

import os
import unittest
from fractions import Fraction
from unittest import mock

import numpy as np

from idforge.algebras import build_LJY, build_LY, evaluate
from idforge.exactfield import PrimeField, ReconstructionException
from idforge.freeops import OperationSet, catalog_identity, parse_polynomial
from idforge.idfinder import (
    FillAndReduce, IdentityReport, ModuleSpan, SearchConfig, SearchException,
    default_known, default_threads, fill_and_reduce, lifted_module, module_generators, module_membership,
    new_identities, reconstruct_identity, search_chain, verify_char0,
)


F103 = PrimeField(103)
LARGE_PRIME = 100049


class TestSearchConfig(unittest.TestCase):
    def test_defaults(self):
        config = SearchConfig(threads=1)
        self.assertEqual(config.prime, 103)
        self.assertEqual(config.sqrt2, 38)
        self.assertEqual(config.field, F103)
        self.assertEqual(SearchConfig(LARGE_PRIME, threads=1).sqrt2, 10948)
        self.assertEqual(config.with_degree(4, 'ternary').to_json()['opset'], 'ternary')

    def test_bad_parameters(self):
        self.assertRaises(SearchConfig.BadStabilisationException, SearchConfig, stabilisation=0)
        self.assertRaises(SearchConfig.BadIterationCapException, SearchConfig, max_iterations=0)
        self.assertRaises(SearchConfig.EvenPrimeException, SearchConfig, 2)
        self.assertRaises(PrimeField.NoSquareRootException, SearchConfig, 5)
        self.assertRaises(PrimeField.NotPrimeException, SearchConfig, 9)
        self.assertRaises(OperationSet.UnknownOpsetException, SearchConfig, opset='quaternary')

    def test_threads_from_environment(self):
        with mock.patch.dict(os.environ, {'IDFORGE_THREADS': '3'}):
            self.assertEqual(default_threads(), 3)
            self.assertEqual(SearchConfig().threads, 3)
        with mock.patch.dict(os.environ, {'IDFORGE_THREADS': 'many'}):
            self.assertRaises(SearchException, default_threads)
        with mock.patch.dict(os.environ, {'IDFORGE_THREADS': '0'}):
            self.assertRaises(SearchException, default_threads)


class TestFillAndReduce(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.ly4 = build_LY(4, F103)

    def test_ly4_degree_3(self):
        rank, nullspace = fill_and_reduce(self.ly4, SearchConfig(degree=3, threads=1))
        self.assertEqual(rank, 5)
        self.assertEqual(len(nullspace), 1)

        # The single identity is LY3
        self.assertEqual(nullspace[0].coefficients(), [1, 102, 1, 1, 102, 1])
        self.assertEqual(nullspace[0], catalog_identity('LY3').reduced(103))

    def test_ly4_degree_4_binary(self):
        rank, nullspace = fill_and_reduce(self.ly4, SearchConfig(degree=4, opset='binary', threads=1))
        self.assertEqual(rank, 15)
        self.assertEqual(nullspace, [])

    def test_determinism(self):
        config = SearchConfig(seed=7, degree=4, threads=1)
        first = FillAndReduce(self.ly4, config).run()
        second = FillAndReduce(self.ly4, config).run()
        self.assertEqual(first.rank_history, second.rank_history)
        self.assertEqual(first.nullspace, second.nullspace)

        # Thread count does not change the result
        threaded = FillAndReduce(self.ly4, SearchConfig(seed=7, degree=4, threads=3)).run()
        self.assertEqual(threaded.rank_history, first.rank_history)
        self.assertEqual(threaded.nullspace, first.nullspace)

    def test_seed_independence(self):
        results = [fill_and_reduce(self.ly4, SearchConfig(seed=seed, degree=4, threads=1)) for seed in (0, 1, 2)]
        for rank, nullspace in results[1:]:
            self.assertEqual(rank, results[0][0])
            self.assertEqual(nullspace, results[0][1])

    def test_nullspace_holds_on_fresh_samples(self):
        _, nullspace = fill_and_reduce(self.ly4, SearchConfig(seed=4, degree=4, threads=1))
        self.assertEqual(len(nullspace), 19)
        rng = np.random.default_rng(2718)
        for poly in nullspace:
            for _ in range(3):
                vectors = [F103.random_working(rng, self.ly4.dim) for _ in range(4)]
                self.assertFalse(np.any(evaluate(self.ly4, poly, vectors)), poly)

    def test_exact_algebra_is_reduced(self):
        rank, nullspace = fill_and_reduce(build_LY(3), SearchConfig(degree=3, threads=1))
        self.assertEqual(rank + len(nullspace), 6)
        self.assertTrue(module_membership(catalog_identity('LY3'), nullspace, F103))

    def test_errors(self):
        self.assertRaises(
            FillAndReduce.NoStabilisationException,
            fill_and_reduce, self.ly4, SearchConfig(degree=3, max_iterations=1, threads=1),
        )
        self.assertRaises(
            FillAndReduce.FieldMismatchException,
            fill_and_reduce, build_LY(3, PrimeField(113)), SearchConfig(degree=3, threads=1),
        )
        self.assertRaises(SearchException, FillAndReduce, self.ly4, SearchConfig(threads=1))


class TestLJY4(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.ljy4 = build_LJY(4, F103)

    def assertFullRank(self, degree):
        result = FillAndReduce(self.ljy4, SearchConfig(degree=degree, threads=1)).run()
        self.assertEqual(result.nullspace, [])
        self.assertEqual(result.rank, result.monomial_count)

    def test_low_degrees(self):
        for degree in (3, 4):
            self.assertFullRank(degree)

    @unittest.skipUnless(os.environ.get('IDFORGE_EXTENDED') == '1', 'set IDFORGE_EXTENDED=1 for degree 5')
    def test_degree_5(self):
        self.assertFullRank(5)


class TestModules(unittest.TestCase):
    def setUp(self):
        self.ly3_identity = catalog_identity('LY3')
        self.operations = self.ly3_identity.operations

    def test_lifted_module(self):
        generators, dimension, span = lifted_module({3: [self.ly3_identity]}, 4, self.operations, F103)
        self.assertEqual(dimension, 10)
        self.assertEqual(len(generators), 2)
        self.assertEqual(span.rank, 10)

        _, dimension, _ = lifted_module({}, 4, self.operations, F103)
        self.assertEqual(dimension, 0)

    def test_module_generators(self):
        # Permuted copies add nothing
        candidates = [self.ly3_identity, self.ly3_identity.relabelled([2, 3, 1]), -self.ly3_identity]
        generators, rank, _ = module_generators(candidates, 3, self.operations, F103)
        self.assertEqual(generators, [self.ly3_identity])
        self.assertEqual(rank, 1)

    def test_module_span(self):
        span = ModuleSpan(self.operations, 3, F103)
        self.assertEqual(span.absorb(self.ly3_identity), 1)
        self.assertEqual(span.absorb(self.ly3_identity.relabelled([2, 1, 3])), 0)
        self.assertTrue(span.contains(self.ly3_identity.scaled(5)))
        self.assertRaises(SearchException, span.absorb, catalog_identity('LY4'))

    def test_module_membership(self):
        jacobi = catalog_identity('Jacobi')
        self.assertTrue(module_membership(self.ly3_identity.relabelled([3, 1, 2]), [self.ly3_identity], F103))
        self.assertFalse(module_membership(jacobi, [self.ly3_identity], F103))

        # The degree 4 consequences of Malcev include its own permutations
        malcev = catalog_identity('Malcev')
        self.assertTrue(module_membership(malcev.relabelled([4, 3, 2, 1]), [malcev], F103))


class TestReconstruction(unittest.TestCase):
    def test_reconstruct(self):
        ly3_identity = catalog_identity('LY3')
        self.assertEqual(reconstruct_identity(ly3_identity.reduced(103)), ly3_identity)
        self.assertEqual(reconstruct_identity((-ly3_identity).reduced(103)), -ly3_identity)

        # Denominators are cleared
        filippov = catalog_identity('FilippovH')
        halved = filippov.scaled(Fraction(1, 2)).reduced(LARGE_PRIME)
        self.assertEqual(reconstruct_identity(halved), filippov)

        # Content is divided out
        self.assertEqual(reconstruct_identity(ly3_identity.scaled(3).reduced(103)), ly3_identity)

    def test_large_coefficients(self):
        figure = catalog_identity('LJY3-deg6-3')
        self.assertEqual(reconstruct_identity(figure.reduced(LARGE_PRIME)), figure)
        self.assertEqual(max(abs(c) for c in figure.coefficients()), 12)

    def test_errors(self):
        operations = catalog_identity('LY3').operations
        self.assertRaises(SearchException, reconstruct_identity, catalog_identity('LY3'))
        self.assertRaises(
            ReconstructionException,
            reconstruct_identity, parse_polynomial('11 [[a,b],c]', operations).reduced(103),
        )
        zero = parse_polynomial('0', operations)
        self.assertTrue(reconstruct_identity(zero.reduced(103)).is_zero())

    def test_verify_char0(self):
        ly3 = build_LY(3)
        self.assertTrue(verify_char0(catalog_identity('LY3'), ly3, trials=3).passed)
        jacobi = verify_char0(catalog_identity('Jacobi'), ly3, trials=3, name='Jacobi')
        self.assertFalse(jacobi.passed)
        self.assertEqual(jacobi.name, 'Jacobi')
        self.assertRaises(SearchException, verify_char0, catalog_identity('LY3'), build_LY(3, F103))


class TestNewIdentities(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.ly4 = build_LY(4, F103)
        cls.config = SearchConfig(threads=1)

    def test_degree_4_mixed(self):
        known = {3: [catalog_identity('LY3')]}
        report = new_identities(self.ly4, 4, 'mixed', self.config, known)
        self.assertEqual(report.monomial_count, 45)
        self.assertEqual(report.rank, 26)
        self.assertEqual(report.nullspace_dimension, 19)
        self.assertEqual(report.lifted_dimension, 10)
        self.assertEqual(report.new_generator_count, 2)
        self.assertEqual(report.module_dimension, 19)
        self.assertEqual(report.reconstruction_failures, 0)

        # Both generators follow from LY4 and LY5
        _, dimension, span = lifted_module(
            {**known, 4: [catalog_identity('LY4'), catalog_identity('LY5')]}, 4, self.ly4.operations, F103,
        )
        self.assertEqual(dimension, 19)
        self.assertTrue(all(span.contains(generator) for generator in report.generators))

    def test_degree_3_with_exact_check(self):
        report = new_identities(self.ly4, 3, 'mixed', self.config, {}, build_LY(4))
        self.assertEqual(report.new_generator_count, 1)
        self.assertEqual(report.reconstructed[0].sign_normalised(), catalog_identity('LY3'))
        self.assertEqual(report.verification_failures, 0)
        self.assertEqual(len(report.verification), 1)

        self.assertIn('6 normal monomials; rank reaches 5', report.render())
        self.assertIn('1 new generator;', report.render())
        self.assertIn('char-0 check of generator 1: holds', report.render())

    def test_known_identities_leave_nothing(self):
        known = {3: [catalog_identity('LY3')]}
        report = new_identities(self.ly4, 3, 'mixed', self.config, known)
        self.assertEqual(report.lifted_dimension, 1)
        self.assertEqual(report.generators, [])
        self.assertEqual(report.module_dimension, 1)

    def test_degree_5(self):
        report = new_identities(self.ly4, 5, 'ternary', self.config)
        self.assertEqual(report.monomial_count, 90)
        self.assertEqual(report.rank, 60)
        self.assertEqual(report.nullspace_dimension, 30)

        report = new_identities(self.ly4, 5, 'mixed', self.config, default_known('ly', 6))
        self.assertEqual(report.monomial_count, 510)
        self.assertEqual(report.rank, 214)
        self.assertEqual(report.nullspace_dimension, 296)
        self.assertEqual(report.lifted_dimension, 296)
        self.assertEqual(report.new_generator_count, 0)

    def test_json(self):
        report = new_identities(self.ly4, 3, 'mixed', self.config)
        document = report.to_json()
        self.assertEqual(document['config']['prime'], 103)
        self.assertEqual(document['nullspace_dimension'], 1)
        self.assertEqual(set(document['timings']), {'fill', 'lifted', 'generators', 'verification'})

        restored = IdentityReport.from_json(document)
        self.assertEqual(restored.generators, report.generators)
        self.assertEqual(restored.reconstructed, report.reconstructed)
        self.assertEqual(restored.render(), report.render())

    def test_search_chain(self):
        reports = search_chain(self.ly4, [3, 4], ['mixed'], self.config)
        self.assertEqual([report.degree for report in reports], [3, 4])
        self.assertEqual([report.new_generator_count for report in reports], [1, 2])
        self.assertEqual(reports[1].lifted_dimension, 10)

    def test_ljy3_degree_5(self):
        ljy3 = build_LJY(3, F103)
        known = {4: [catalog_identity('Malcev')], 5: [catalog_identity('FilippovH')]}
        report = new_identities(ljy3, 5, 'mixed', self.config, known)
        self.assertEqual(report.new_generator_count, 3)
        self.assertEqual(report.module_dimension, report.nullspace_dimension)

        printed = [catalog_identity(f'LJY3-deg5-{index}') for index in (1, 2, 3)]
        _, dimension, _ = lifted_module(
            {4: [catalog_identity('Malcev')], 5: [catalog_identity('FilippovH'), *printed]},
            5, ljy3.operations, F103,
        )
        self.assertEqual(dimension, report.nullspace_dimension)


class TestDefaultKnown(unittest.TestCase):
    def test_default_known(self):
        self.assertEqual(default_known('ly', 3), {})
        self.assertEqual(sorted(default_known('ly', 5)), [3, 4])
        self.assertEqual(len(default_known('ly', 5)[4]), 2)
        self.assertEqual(sorted(default_known('ly', 6)), [3, 4, 5])
        self.assertEqual(default_known('ljy', 6), {})


if __name__ == '__main__':
    unittest.main()
