"""
# Identity Forge: reproduce.py

Scripted reproduction runs: every golden number of the LY and LJY searches, computed afresh
and tabulated against its expected value.

**Copyright 2024–2026 Conway**
Licensed under the GNU General Public License v3.0 (GPL-3.0-only).
This is free software with NO WARRANTY etc. etc., see LICENSE.
"""

import itertools
import json
import logging
import os

from idforge.algebras import (
    build_LJY, build_LY, build_LY3_transvection, build_LY4_tensor, build_matrix_model,
    verify_axioms,
)
from idforge.freeops import axiom_from_name, catalog_identity, suite_names
from idforge.idfinder import (
    SearchConfig, lifted_module, module_membership, new_identities,
)
from idforge.utilities import Table


logger = logging.getLogger(__name__)

SECTIONS = ('5', '6')
LARGE_PRIME = 100049
LARGE_PRIME_SQRT2 = 10948
LJY3_DEGREE_6_MODULE_DIMENSIONS = (2632, 2647, 2701, 2732, 2733)


def expected_dim_m(n):
    return (n - 2) * (n - 1) * (n + 1) * (n + 4) // 8


class Comparison:
    """
    Rows of (check, expected, computed, status), status being `ok`, `MISMATCH` or `info`.
    """
    FIELD_NAMES = ['section', 'check', 'expected', 'computed', 'status']

    def __init__(self, section):
        self.section = section
        self.rows = []

    def check(self, name, expected, computed):
        status = 'ok' if expected == computed else 'MISMATCH'
        if status != 'ok':
            logger.warning('%s: expected %s, computed %s', name, expected, computed)
        self.rows.append([self.section, name, str(expected), str(computed), status])

    def check_sequence(self, name, expected, computed):
        """
        Compare two sequences as a whole, logging the first step that differs.
        """
        expected, computed = tuple(expected), tuple(computed)
        for step, (wanted, found) in enumerate(itertools.zip_longest(expected, computed), start=1):
            if wanted != found:
                logger.warning('%s: step %d expected %s, computed %s', name, step, wanted, found)
                break
        self.check(name, ', '.join(map(str, expected)), ', '.join(map(str, computed)))

    def inform(self, name, expected, computed):
        self.rows.append([self.section, name, str(expected), str(computed), 'info'])

    @property
    def mismatch_count(self):
        return sum(row[4] == 'MISMATCH' for row in self.rows)


def _suite_holds(algebra, names, exhaustive_degree, trials, seed):
    """
    Whether every named identity holds, exhaustively up to a degree and at random beyond it.
    """
    for name in names:
        axiom = axiom_from_name(name)
        degree = getattr(axiom, 'degree', 0)
        mode = 'exhaustive' if degree <= exhaustive_degree else 'random'
        result, = verify_axioms(algebra, [name], mode=mode, trials=trials, seed=seed)
        if not result.passed:
            logger.warning('%s fails on %s: %s', name, algebra.name, result)
            return False
    return True


class Reproduction:
    def __init__(self, out_dir, config, extended=False):
        self.out_dir = out_dir
        self.config = config
        self.extended = extended

    def _write_report(self, label, report):
        file_name = os.path.join(self.out_dir, f'{label}.json')
        with open(file_name, 'w', encoding='utf-8') as file:
            json.dump(report.to_json(), file, ensure_ascii=False, indent=2)
        logger.info('%s', report.render())

    def _search(self, label, algebra, degree, opset, known, exact_algebra=None, config=None):
        report = new_identities(algebra, degree, opset, config or self.config, known, exact_algebra)
        self._write_report(label, report)
        return report

    def section_5(self):
        comparison = Comparison('5')
        seed = self.config.seed
        field = self.config.field

        for n in range(3, 10):
            comparison.check(f'dim M, n = {n}', expected_dim_m(n), build_matrix_model(n).dim_m)

        ly_names = suite_names('LY')
        ly3 = build_LY(3)
        ly4 = build_LY(4)
        comparison.check('LY3 (matrix model) satisfies LY1-LY6', True, _suite_holds(ly3, ly_names, 5, 50, seed))
        comparison.check(
            'LY3 (transvection model) satisfies LY1-LY6', True,
            _suite_holds(build_LY3_transvection(), ly_names, 5, 50, seed),
        )
        comparison.check('LY4 (matrix model) satisfies LY1-LY6', True, _suite_holds(ly4, ly_names, 3, 50, seed))
        comparison.check(
            'LY4 (tensor model) satisfies LY1-LY6', True,
            _suite_holds(build_LY4_tensor(), ly_names, 3, 50, seed),
        )
        comparison.check(
            'LY3 binary product satisfies Malcev', True,
            _suite_holds(build_LJY(3), ['Malcev'], 4, 50, seed),
        )

        ly3_identity = catalog_identity('LY3')
        ly4_identity = catalog_identity('LY4')
        ly5_identity = catalog_identity('LY5')
        ly6_identity = catalog_identity('LY6')

        report = self._search('ly4-degree3-mixed', ly4, 3, 'mixed', {}, ly4)
        comparison.check('LY4 degree 3 mixed: rank', 5, report.rank)
        comparison.check('LY4 degree 3 mixed: nullspace dimension', 1, report.nullspace_dimension)
        comparison.check('LY4 degree 3 mixed: new generators', 1, report.new_generator_count)
        if report.generators:
            generator = report.generators[0]
            comparison.check(
                'LY4 degree 3: the identity is LY3', True,
                module_membership(generator, [ly3_identity], field)
                and module_membership(ly3_identity, [generator], field),
            )
            if report.reconstructed[0] is not None:
                comparison.inform(
                    'LY4 degree 3: reconstructed coefficients', '±[1, -1, 1, 1, -1, 1]',
                    report.reconstructed[0].coefficients(),
                )

        report = self._search('ly4-degree4-binary', ly4, 4, 'binary', {3: [ly3_identity]})
        comparison.check('LY4 degree 4 binary: rank', 15, report.rank)
        comparison.check('LY4 degree 4 binary: nullspace dimension', 0, report.nullspace_dimension)

        report = self._search('ly4-degree4-mixed', ly4, 4, 'mixed', {3: [ly3_identity]}, ly4)
        comparison.check('LY4 degree 4 mixed: rank', 26, report.rank)
        comparison.check('LY4 degree 4 mixed: nullspace dimension', 19, report.nullspace_dimension)
        comparison.check('LY4 degree 4 mixed: lifted module dimension', 10, report.lifted_dimension)
        comparison.check('LY4 degree 4 mixed: new generators', 2, report.new_generator_count)
        comparison.check('LY4 degree 4 mixed: module dimension', 19, report.module_dimension)
        operations = ly4.operations
        _, dimension, span = lifted_module({3: [ly3_identity], 4: [ly4_identity, ly5_identity]}, 4, operations, field)
        comparison.check('LY4 degree 4: lifted module with LY4 and LY5', 19, dimension)
        comparison.check(
            'LY4 degree 4: new generators follow from LY4 and LY5', True,
            all(span.contains(generator) for generator in report.generators),
        )

        report = self._search('ly4-degree5-binary', ly4, 5, 'binary', {3: [ly3_identity]})
        comparison.check('LY4 degree 5 binary: rank', 105, report.rank)

        known_4 = {3: [ly3_identity], 4: [ly4_identity, ly5_identity]}
        generators, dimension, _ = lifted_module(known_4, 5, operations, field)
        comparison.check('LY4 degree 5: lifted module dimension', 280, dimension)
        comparison.inform('LY4 degree 5: lifted module generators', 11, len(generators))

        report = self._search('ly4-degree5-ternary', ly4, 5, 'ternary', known_4, ly4)
        comparison.check('LY4 degree 5 ternary: rank', 60, report.rank)
        comparison.check('LY4 degree 5 ternary: nullspace dimension', 30, report.nullspace_dimension)
        comparison.check('LY4 degree 5 ternary: new generators', 1, report.new_generator_count)
        comparison.check('LY4 degree 5 ternary: module dimension', 296, report.module_dimension)

        known_5 = {**known_4, 5: [ly6_identity]}
        report = self._search('ly4-degree5-mixed', ly4, 5, 'mixed', known_5)
        comparison.check('LY4 degree 5 mixed: monomials', 510, report.monomial_count)
        comparison.check('LY4 degree 5 mixed: rank', 214, report.rank)
        comparison.check('LY4 degree 5 mixed: nullspace dimension', 296, report.nullspace_dimension)
        comparison.check('LY4 degree 5 mixed: lifted module dimension', 296, report.lifted_dimension)
        comparison.check('LY4 degree 5 mixed: new generators', 0, report.new_generator_count)

        if self.extended:
            report = self._search('ly4-degree6-mixed', ly4, 6, 'mixed', known_5)
            comparison.check('LY4 degree 6 mixed: monomials', 7245, report.monomial_count)
            comparison.check('LY4 degree 6 mixed: lifted module dimension', 5151, report.lifted_dimension)
            comparison.check('LY4 degree 6 mixed: rank', 2094, report.rank)
            comparison.check('LY4 degree 6 mixed: new generators', 0, report.new_generator_count)

        return comparison

    def section_6(self):
        comparison = Comparison('6')
        seed = self.config.seed
        field = self.config.field

        ljy3 = build_LJY(3)
        comparison.check('LJY3 bilinear binary table equals LY3', True, _same_binary(ljy3, build_LY(3)))
        comparison.check(
            'LJY3 satisfies its catalog identities', True,
            _suite_holds(ljy3, suite_names('LJY3'), 4, 10, seed),
        )
        comparison.check(
            'LJY3 satisfies LieJordan-linking', False,
            _suite_holds(ljy3, ['LieJordan-linking'], 3, 10, seed),
        )
        for name in ('LJY3-deg6-1', 'LJY3-deg6-2', 'LJY3-deg6-3'):
            comparison.inform(f'{name}: terms', '', catalog_identity(name).term_count)
            comparison.inform(f'{name}: squared length', '', catalog_identity(name).squared_length())

        malcev = catalog_identity('Malcev')
        filippov = catalog_identity('FilippovH')

        report = self._search('ljy3-degree3-mixed', ljy3, 3, 'mixed', {})
        comparison.check('LJY3 degree 3 mixed: nullspace dimension', 0, report.nullspace_dimension)

        report = self._search('ljy3-degree4-mixed', ljy3, 4, 'mixed', {})
        _, malcev_dimension, _ = lifted_module({4: [malcev]}, 4, ljy3.operations, field)
        comparison.check(
            'LJY3 degree 4: every identity follows from Malcev', malcev_dimension, report.nullspace_dimension,
        )

        known_5 = {4: [malcev], 5: [filippov]}
        report = self._search('ljy3-degree5-mixed', ljy3, 5, 'mixed', known_5, ljy3)
        comparison.check('LJY3 degree 5 mixed: new generators', 3, report.new_generator_count)
        comparison.check(
            'LJY3 degree 5 mixed: generators vanish in characteristic 0', 0, report.verification_failures,
        )
        printed = [catalog_identity(f'LJY3-deg5-{index}') for index in (1, 2, 3)]
        comparison.check(
            'LJY3 degree 5: printed identities complete the module', report.nullspace_dimension,
            lifted_module({4: [malcev], 5: [filippov, *printed]}, 5, ljy3.operations, field)[1],
        )

        if self.extended:
            config = SearchConfig(LARGE_PRIME, LARGE_PRIME_SQRT2, seed, self.config.stabilisation,
                                  threads=self.config.threads)
            known_6 = {4: [malcev], 5: [filippov, *printed]}
            report = self._search('ljy3-degree6-mixed', ljy3, 6, 'mixed', known_6, ljy3, config)
            comparison.check('LJY3 degree 6 mixed: module dimension', 2733, report.module_dimension)
            comparison.check('LJY3 degree 6 mixed: nullspace dimension', 2733, report.nullspace_dimension)
            comparison.inform('LJY3 degree 6 mixed: new generators', 5, report.new_generator_count)
            comparison.check_sequence(
                'LJY3 degree 6 mixed: module dimensions', LJY3_DEGREE_6_MODULE_DIMENSIONS, report.module_dimensions,
            )
            comparison.check(
                f'LJY3 degree 6: reconstruction failures at p = {LARGE_PRIME}', 0, report.reconstruction_failures,
            )
            _, dimension, span = lifted_module(known_6, 6, ljy3.operations, config.field)
            comparison.inform('LJY3 degree 6: lifted module dimension', '', dimension)
            for name, expected in zip(
                ('LJY3-deg6-1', 'LJY3-deg6-2', 'LJY3-deg6-3'), LJY3_DEGREE_6_MODULE_DIMENSIONS,
            ):
                span.absorb(catalog_identity(name))
                comparison.check(f'LJY3 degree 6: module dimension with {name}', expected, span.rank)

            # The remaining generators of the search complete the module
            completion = [span.rank for generator in report.generators if span.absorb(generator)]
            comparison.check_sequence(
                'LJY3 degree 6: module dimensions completing the printed identities',
                LJY3_DEGREE_6_MODULE_DIMENSIONS[3:], completion,
            )

        ljy4 = build_LJY(4)
        for degree in (3, 4, 5):
            report = self._search(f'ljy4-degree{degree}-mixed', ljy4, degree, 'mixed', {})
            comparison.check(f'LJY4 degree {degree} mixed: nullspace dimension', 0, report.nullspace_dimension)
        if self.extended:
            report = self._search('ljy4-degree6-mixed', ljy4, 6, 'mixed', {})
            comparison.check('LJY4 degree 6 mixed: nullspace dimension', 0, report.nullspace_dimension)

        return comparison

    def run(self, sections):
        os.makedirs(self.out_dir, exist_ok=True)
        rows = []
        mismatches = 0
        for section in sections:
            comparison = self.section_5() if section == '5' else self.section_6()
            rows.extend(comparison.rows)
            mismatches += comparison.mismatch_count
        table = Table(Comparison.FIELD_NAMES, rows)
        table.write_tsv(os.path.join(self.out_dir, 'comparison.tsv'))
        return table, mismatches


def _same_binary(first, second):
    difference = first.field.subtract(first.table('['), second.table('['))
    return not difference.nonzero_mask().any()
